#pragma once

// Quiescent structural validation and node accounting.

#include <cstddef>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "quadboost/checker/oracle.hpp"
#include "quadboost/nodes.hpp"

namespace quadboost::checker {

struct NodeCounts {
  std::size_t internal = 0;
  std::size_t leaf = 0;
  std::size_t empty = 0;

  std::size_t total() const { return internal + leaf + empty; }
  friend bool operator==(const NodeCounts&, const NodeCounts&) = default;
};

struct StructureReport {
  bool ok = true;
  std::vector<std::string> errors;
  NodeCounts counts;
  std::vector<Point> keys;

  explicit operator bool() const { return ok; }

  std::string summary() const {
    if (ok) return "ok";
    std::string s = std::to_string(errors.size()) + " violation(s): " + errors.front();
    return s;
  }
};

namespace detail {

inline std::string format_region(const Region& r) {
  std::ostringstream os;
  os << '(' << r.x << ',' << r.y << ',' << r.w << ',' << r.h << ')';
  return os.str();
}

}  // namespace detail

/// Walks every reachable node and checks: the two dummy layers are present
/// and flagged as dummies, every Internal child covers exactly its quadrant
/// of the parent, every Leaf key lies inside the quadrant it hangs from, no
/// node is reachable twice, no key appears twice, and (since the tree is
/// quiescent) every op slot is Clean and no Leaf carries a move descriptor.
inline StructureReport validate_structure(const Internal* root) {
  StructureReport report;
  auto fail = [&report](const std::string& path, const std::string& what) {
    report.ok = false;
    if (report.errors.size() < 32) report.errors.push_back(path + ": " + what);
  };

  struct Item {
    const Node* node;
    Region expected;  // region the node must cover (Internal) or contain (Leaf)
    int depth;
    std::string path;
  };

  std::unordered_set<const Node*> seen;
  std::set<Point, PointLess> keys;
  std::vector<Item> stack{{root, root->region, 0, "root"}};
  while (!stack.empty()) {
    Item item = std::move(stack.back());
    stack.pop_back();
    const Node* n = item.node;
    if (n == nullptr) {
      fail(item.path, "null child link");
      continue;
    }
    if (!seen.insert(n).second) {
      fail(item.path, "node reachable along two paths");
      continue;
    }
    switch (n->kind) {
      case NodeKind::internal: {
        ++report.counts.internal;
        const Internal* in = as_internal(n);
        if (!(in->region == item.expected)) {
          fail(item.path, "region " + detail::format_region(in->region) + " expected " +
                              detail::format_region(item.expected));
        }
        const bool want_dummy = item.depth <= 1;
        if (in->dummy != want_dummy) {
          fail(item.path, want_dummy ? "skeleton node lost its dummy mark"
                                     : "dummy mark below the skeleton");
        }
        const Operation* op = in->op.load(std::memory_order_acquire);
        if (op == nullptr || op->kind != OpKind::clean) fail(item.path, "op slot is not Clean");
        for (Quadrant q : kQuadrants) {
          const Node* c = in->slot(q).load(std::memory_order_acquire);
          if (item.depth == 0 && c != nullptr && c->kind != NodeKind::internal) {
            fail(item.path + "/" + to_string(q), "skeleton child is not an Internal");
          }
          stack.push_back(
              {c, subregion(in->region, q), item.depth + 1, item.path + "/" + to_string(q)});
        }
        break;
      }
      case NodeKind::leaf: {
        ++report.counts.leaf;
        const LeafBase* leaf = as_leaf(n);
        if (!inside(item.expected, leaf->key)) {
          std::ostringstream os;
          os << "key (" << leaf->key.x << ',' << leaf->key.y << ") outside "
             << detail::format_region(item.expected);
          fail(item.path, os.str());
        }
        if (!keys.insert(leaf->key).second) fail(item.path, "duplicate key");
        if (leaf->move_op.load(std::memory_order_acquire) != nullptr) {
          fail(item.path, "reachable leaf carries a move descriptor");
        }
        if (item.depth < 2) fail(item.path, "leaf inside the skeleton layers");
        break;
      }
      case NodeKind::empty:
        ++report.counts.empty;
        if (item.depth < 2) fail(item.path, "empty inside the skeleton layers");
        break;
    }
  }
  report.keys.assign(keys.begin(), keys.end());
  return report;
}

inline NodeCounts count_nodes(const Internal* root) {
  NodeCounts counts;
  std::vector<const Node*> stack{root};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    switch (n->kind) {
      case NodeKind::internal:
        ++counts.internal;
        for (const auto& c : as_internal(n)->child) stack.push_back(c.load(std::memory_order_acquire));
        break;
      case NodeKind::leaf:
        ++counts.leaf;
        break;
      case NodeKind::empty:
        ++counts.empty;
        break;
    }
  }
  return counts;
}

/// Preorder serialization in quadrant order; equal strings mean equal shapes
/// and equal key placement.
inline std::string canonical_shape(const Internal* root) {
  std::ostringstream os;
  std::vector<const Node*> stack{root};
  while (!stack.empty()) {
    const Node* n = stack.back();
    stack.pop_back();
    switch (n->kind) {
      case NodeKind::internal: {
        const Internal* in = as_internal(n);
        os << "I" << detail::format_region(in->region);
        for (auto it = in->child.rbegin(); it != in->child.rend(); ++it) {
          stack.push_back(it->load(std::memory_order_acquire));
        }
        break;
      }
      case NodeKind::leaf:
        os << "L(" << as_leaf(n)->key.x << ',' << as_leaf(n)->key.y << ')';
        break;
      case NodeKind::empty:
        os << 'E';
        break;
    }
  }
  return os.str();
}

}  // namespace quadboost::checker
