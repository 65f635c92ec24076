#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace quadboost {

/// A two-dimensional key.
struct Point {
  double x = 0.0;
  double y = 0.0;

  friend constexpr bool operator==(const Point&, const Point&) = default;
};

/// Axis-aligned routing region; (x, y) is the upper-left corner.
struct Region {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend constexpr bool operator==(const Region&, const Region&) = default;
};

enum class Quadrant : std::uint8_t { nw = 0, ne = 1, sw = 2, se = 3 };

inline constexpr std::array<Quadrant, 4> kQuadrants{Quadrant::nw, Quadrant::ne,
                                                    Quadrant::sw, Quadrant::se};

constexpr std::size_t index_of(Quadrant q) noexcept { return static_cast<std::size_t>(q); }

constexpr const char* to_string(Quadrant q) noexcept {
  switch (q) {
    case Quadrant::nw: return "nw";
    case Quadrant::ne: return "ne";
    case Quadrant::sw: return "sw";
    case Quadrant::se: return "se";
  }
  return "?";
}

/// Half-open containment on both axes.
constexpr bool inside(const Region& r, Point p) noexcept {
  return r.x <= p.x && p.x < r.x + r.w && r.y <= p.y && p.y < r.y + r.h;
}

// Unchecked routing for the traversal hot path. Midpoints use strict <.
constexpr Quadrant route(const Region& r, Point p) noexcept {
  if (p.x < r.x + r.w / 2) {
    return p.y < r.y + r.h / 2 ? Quadrant::nw : Quadrant::sw;
  }
  return p.y < r.y + r.h / 2 ? Quadrant::ne : Quadrant::se;
}

/// Quadrant of `r` that `p` routes to. Throws std::domain_error if `p` is
/// not inside `r`.
inline Quadrant quadrant_of(const Region& r, Point p) {
  if (!inside(r, p)) {
    throw std::domain_error("quadrant_of: point (" + std::to_string(p.x) + ", " +
                            std::to_string(p.y) + ") is outside the region");
  }
  return route(r, p);
}

/// Throws std::out_of_range unless p lies inside the tree's root region.
inline void require_inside(const Region& root, Point p) {
  if (!inside(root, p)) {
    throw std::out_of_range("key (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                            ") is outside the tree range");
  }
}

constexpr Region subregion(const Region& r, Quadrant q) noexcept {
  const double hw = r.w / 2;
  const double hh = r.h / 2;
  switch (q) {
    case Quadrant::nw: return {r.x, r.y, hw, hh};
    case Quadrant::ne: return {r.x + hw, r.y, hw, hh};
    case Quadrant::sw: return {r.x, r.y + hh, hw, hh};
    case Quadrant::se: return {r.x + hw, r.y + hh, hw, hh};
  }
  return r;
}

enum class SpatialOrder : std::int8_t { precedes = -1, equal = 0, follows = 1 };

/// Lexicographic order on (x, y, w). Regions are square, so h is redundant.
constexpr SpatialOrder spatial_order(const Region& a, const Region& b) noexcept {
  if (a.x != b.x) return a.x < b.x ? SpatialOrder::precedes : SpatialOrder::follows;
  if (a.y != b.y) return a.y < b.y ? SpatialOrder::precedes : SpatialOrder::follows;
  if (a.w != b.w) return a.w < b.w ? SpatialOrder::precedes : SpatialOrder::follows;
  return SpatialOrder::equal;
}

/// 2D -> 1D key mapping used when generating key sets comparable with
/// one-dimensional structures: x * range + y.
constexpr double flatten_key(Point p, double range) noexcept { return p.x * range + p.y; }

}  // namespace quadboost
