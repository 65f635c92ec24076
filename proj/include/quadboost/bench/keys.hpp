#pragma once

// Seeded key-set generation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "quadboost/geometry.hpp"

namespace quadboost::bench {

enum class KeyType : std::uint8_t { integer, floating };

constexpr std::string_view to_string(KeyType t) noexcept {
  return t == KeyType::integer ? "int" : "float";
}

constexpr std::optional<KeyType> parse_key_type(std::string_view s) noexcept {
  if (s == "int") return KeyType::integer;
  if (s == "float") return KeyType::floating;
  return std::nullopt;
}

/// Float keys are multiples of this, so they survive text round trips and
/// exact-equality lookups.
inline constexpr double kFloatGranularity = 1.0 / 65536.0;

/// Number of distinct lattice coordinates per axis inside [0, range).
inline std::uint64_t lattice_side(double range, KeyType type) {
  if (!(range > 0) || !std::isfinite(range)) throw std::invalid_argument("range must be positive");
  const double step = type == KeyType::integer ? 1.0 : kFloatGranularity;
  const double side = std::ceil(range / step);
  if (side > 9.0e15) throw std::invalid_argument("range too large for the key lattice");
  return static_cast<std::uint64_t>(side);
}

/// `count` distinct points of the lattice inside (0, 0, range, range), in a
/// seed-determined order. Integer keys are lattice points with coordinates
/// 0..ceil(range)-1; asking for every point returns the full grid. Throws
/// std::invalid_argument when count exceeds the lattice size.
inline std::vector<Point> generate_keys(double range, std::size_t count, KeyType type,
                                        std::uint64_t seed) {
  const std::uint64_t side = lattice_side(range, type);
  const double step = type == KeyType::integer ? 1.0 : kFloatGranularity;
  const long double cells = static_cast<long double>(side) * static_cast<long double>(side);
  if (static_cast<long double>(count) > cells) {
    throw std::invalid_argument("more keys requested than distinct points in range");
  }
  auto to_point = [&](std::uint64_t ix, std::uint64_t iy) {
    return Point{static_cast<double>(ix) * step, static_cast<double>(iy) * step};
  };

  std::mt19937_64 rng(seed);
  std::vector<Point> out;
  out.reserve(count);
  if (static_cast<long double>(count) * 2 >= cells) {
    // Dense request: shuffle the whole lattice and take a prefix.
    std::vector<std::uint64_t> idx(side * side);
    for (std::uint64_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::uint64_t> pick(i, idx.size() - 1);
      std::swap(idx[i], idx[pick(rng)]);
      out.push_back(to_point(idx[i] / side, idx[i] % side));
    }
    return out;
  }
  struct PairHash {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& p) const noexcept {
      return std::hash<std::uint64_t>{}(p.first * 0x9e3779b97f4a7c15ULL ^ p.second);
    }
  };
  std::unordered_set<std::pair<std::uint64_t, std::uint64_t>, PairHash> seen;
  seen.reserve(count * 2);
  std::uniform_int_distribution<std::uint64_t> coord(0, side - 1);
  while (out.size() < count) {
    const std::uint64_t ix = coord(rng);
    const std::uint64_t iy = coord(rng);
    if (seen.emplace(ix, iy).second) out.push_back(to_point(ix, iy));
  }
  return out;
}

}  // namespace quadboost::bench
