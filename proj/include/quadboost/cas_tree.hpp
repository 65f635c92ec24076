#pragma once

// qc: the baseline concurrent quadtree. Every update is a single CAS on a
// child link; there are no descriptors, no helping and no compression, so
// removed keys leave chains of Empty-only Internals behind.

#include <optional>
#include <utility>

#include "quadboost/geometry.hpp"
#include "quadboost/instrumentation.hpp"
#include "quadboost/nodes.hpp"
#include "quadboost/reclamation.hpp"
#include "quadboost/variants.hpp"

namespace quadboost {

template <typename V>
class CasTree {
 public:
  using value_type = V;
  static constexpr Variant kVariant = Variant::qc;

  explicit CasTree(double range) : root_(new_skeleton(range)), range_(range) {}
  ~CasTree() { destroy_tree<V>(root_); }

  CasTree(const CasTree&) = delete;
  CasTree& operator=(const CasTree&) = delete;

  bool contains(Point p) const {
    require_inside(root_->region, p);
    auto guard = reclaim::pin();
    return in_tree(locate(p).node, p);
  }

  std::optional<V> lookup(Point p) const {
    require_inside(root_->region, p);
    auto guard = reclaim::pin();
    Node* l = locate(p).node;
    if (!in_tree(l, p)) return std::nullopt;
    return static_cast<const Leaf<V>*>(l)->value;
  }

  bool insert(Point p, V value) {
    require_inside(root_->region, p);
    auto guard = reclaim::pin();
    while (true) {
      Terminal t = locate(p);
      if (in_tree(t.node, p)) return false;
      Node* fresh = create_subtree<V>(t.node, t.parent->region, t.quadrant, p, value);
      if (replace(t, fresh)) {
        if (t.node->kind == NodeKind::empty) retire_node<V>(t.node);
        return true;
      }
      discard_subtree<V>(fresh, t.node);
    }
  }

  bool remove(Point p) {
    require_inside(root_->region, p);
    auto guard = reclaim::pin();
    auto* fresh = new Empty;
    while (true) {
      Terminal t = locate(p);
      if (!in_tree(t.node, p)) {
        delete fresh;
        return false;
      }
      if (replace(t, fresh)) {
        retire_node<V>(t.node);
        return true;
      }
    }
  }

  Internal* root() const noexcept { return root_; }
  double range() const noexcept { return range_; }
  Variant variant() const noexcept { return kVariant; }
  StatsSnapshot stats() const { return stats_.snapshot(); }

  /// Terminal reached by routing p. Quiescent inspection only.
  const Node* terminal(Point p) const { return locate(p).node; }

 private:
  struct Terminal {
    Internal* parent;
    Quadrant quadrant;
    Node* node;
  };

  Terminal locate(Point p) const {
    Internal* parent = root_;
    Quadrant q = route(parent->region, p);
    Node* l = parent->slot(q).load(std::memory_order_acquire);
    while (l->kind == NodeKind::internal) {
      fire_hook(HookPoint::traversal_step, this);
      parent = as_internal(l);
      q = route(parent->region, p);
      l = parent->slot(q).load(std::memory_order_acquire);
    }
    return {parent, q, l};
  }

  bool replace(const Terminal& t, Node* fresh) {
    fire_hook(HookPoint::before_replace, this);
    Node* expected = t.node;
    if (t.parent->slot(t.quadrant).compare_exchange_strong(expected, fresh,
                                                           std::memory_order_acq_rel)) {
      return true;
    }
    stats_.bump(Stats::replace_failures);
    return false;
  }

  Internal* const root_;
  const double range_;
  mutable Stats stats_;
};

}  // namespace quadboost
