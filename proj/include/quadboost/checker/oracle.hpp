#pragma once

// Sequential reference dictionary over two-dimensional keys.

#include <cstdint>
#include <map>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "quadboost/geometry.hpp"

namespace quadboost::checker {

enum class OpType : std::uint8_t { insert, remove, contain, move };

constexpr std::string_view to_string(OpType op) noexcept {
  switch (op) {
    case OpType::insert: return "insert";
    case OpType::remove: return "remove";
    case OpType::contain: return "contain";
    case OpType::move: return "move";
  }
  return "?";
}

constexpr std::optional<OpType> parse_op(std::string_view s) noexcept {
  if (s == "insert") return OpType::insert;
  if (s == "remove") return OpType::remove;
  if (s == "contain") return OpType::contain;
  if (s == "move") return OpType::move;
  return std::nullopt;
}

struct PointLess {
  bool operator()(const Point& a, const Point& b) const noexcept {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  }
};

template <typename V>
class OracleState {
 public:
  OracleState() = default;

  bool insert(Point k, V v) { return map_.emplace(k, std::move(v)).second; }
  bool remove(Point k) { return map_.erase(k) > 0; }
  bool contains(Point k) const { return map_.count(k) > 0; }

  std::optional<V> lookup(Point k) const {
    auto it = map_.find(k);
    if (it == map_.end()) return std::nullopt;
    return it->second;
  }

  /// True iff old_key is present and new_key is absent (so never for equal
  /// keys); the value travels with the key.
  bool move(Point old_key, Point new_key) {
    if (old_key == new_key) return false;
    auto it = map_.find(old_key);
    if (it == map_.end() || map_.count(new_key) > 0) return false;
    V v = std::move(it->second);
    map_.erase(it);
    map_.emplace(new_key, std::move(v));
    return true;
  }

  /// Applies one operation; new_key is only read for moves.
  bool apply(OpType op, Point key, Point new_key = {}, V value = V{}) {
    switch (op) {
      case OpType::insert: return insert(key, std::move(value));
      case OpType::remove: return remove(key);
      case OpType::contain: return contains(key);
      case OpType::move: return move(key, new_key);
    }
    return false;
  }

  std::vector<Point> keys() const {
    std::vector<Point> out;
    out.reserve(map_.size());
    for (const auto& [k, v] : map_) out.push_back(k);
    return out;
  }

  std::size_t size() const { return map_.size(); }
  const std::map<Point, V, PointLess>& entries() const { return map_; }

 private:
  std::map<Point, V, PointLess> map_;
};

}  // namespace quadboost::checker
