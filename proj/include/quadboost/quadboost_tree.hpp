#pragma once

// Non-blocking quadtree with descriptor flagging and helping.
//
// One class template covers the four descriptor-based variants; the variant
// parameter selects how much of the search path is recorded, where a failed
// attempt resumes, and how empty Internals are compressed:
//
//   qb-s  full path, resume below the deepest live ancestor, recursive compress
//   qb-o  parent only, resume at the parent (root if it is being compressed),
//         one-layer compress
//   qb-d  parent only, resume at the root, one-layer compress
//   qb-f  parent only, resume at the root, removal flags parent and
//         grandparent and prunes the parent in the same operation
//
// Move is implemented in move.hpp and the qb-f removal in ablation.hpp.

#include <cstddef>
#include <optional>
#include <type_traits>
#include <utility>

#include "quadboost/geometry.hpp"
#include "quadboost/instrumentation.hpp"
#include "quadboost/nodes.hpp"
#include "quadboost/reclamation.hpp"
#include "quadboost/traversal_path.hpp"
#include "quadboost/variants.hpp"

namespace quadboost {

template <typename V, Variant Var>
class QuadboostTree {
  static_assert(Var != Variant::qc, "qc is implemented by CasTree");

 public:
  using value_type = V;
  static constexpr Variant kVariant = Var;
  static constexpr VariantConfig kConfig = config_of(Var);
  using Path = std::conditional_t<Var == Variant::qb_s, StackPath, ShallowPath>;

  explicit QuadboostTree(double range) : root_(new_skeleton(range)), range_(range) {}
  ~QuadboostTree() { destroy_tree<V>(root_); }

  QuadboostTree(const QuadboostTree&) = delete;
  QuadboostTree& operator=(const QuadboostTree&) = delete;

  bool contains(Point key) const {
    require_inside(root_->region, key);
    auto guard = reclaim::pin();
    const Node* l = descend(key);
    return in_tree(l, key) && !moved(l);
  }

  std::optional<V> lookup(Point key) const {
    require_inside(root_->region, key);
    auto guard = reclaim::pin();
    const Node* l = descend(key);
    if (!in_tree(l, key) || moved(l)) return std::nullopt;
    return static_cast<const Leaf<V>*>(l)->value;
  }

  bool insert(Point key, V value) {
    require_inside(root_->region, key);
    auto guard = reclaim::pin();
    Path path;
    Operation* p_op = nullptr;
    Node* l = root_;
    find(l, p_op, path, key);
    while (true) {
      if (in_tree(l, key) && !moved(l)) return false;
      Internal* p = path.pop();
      if (p_op->kind == OpKind::clean) {
        bool reuse = false;
        Node* fresh = replacement_for(l, p, key, value, reuse);
        auto* op = new SubstituteOp(p, l, fresh, l->kind == NodeKind::empty);
        if (help_flag(p, p_op, op)) {
          fire_hook(HookPoint::substitute_flagged, this);
          help_substitute(op);
          return true;
        }
        discard_subtree<V>(fresh, reuse ? l : nullptr);
        delete_op(op);
        p_op = p->op.load(std::memory_order_acquire);
      }
      help(p_op);
      continue_find(p_op, path, l, p, key);
    }
  }

  bool remove(Point key) {
    require_inside(root_->region, key);
    auto guard = reclaim::pin();
    Path path;
    Operation* p_op = nullptr;
    Node* l = root_;
    auto* fresh = new Empty;
    find(l, p_op, path, key);
    while (true) {
      if (!in_tree(l, key) || moved(l)) {
        delete fresh;
        return false;
      }
      Internal* p = path.pop();
      if (p_op->kind == OpKind::clean) {
        Internal* gp = path.top();
        if (Var == Variant::qb_f && gp != nullptr && gp != root_) {
          if (remove_coupled(gp, p, as_leaf(l), static_cast<CleanOp*>(p_op))) {
            delete fresh;
            return true;
          }
        } else {
          auto* op = new SubstituteOp(p, l, fresh, true);
          if (help_flag(p, p_op, op)) {
            fire_hook(HookPoint::substitute_flagged, this);
            help_substitute(op);
            after_remove(path, p);
            return true;
          }
          delete_op(op);
        }
        p_op = p->op.load(std::memory_order_acquire);
      }
      help(p_op);
      continue_find(p_op, path, l, p, key);
    }
  }

  /// Atomically replaces old_key by new_key, keeping the value. Fails if
  /// old_key is absent or new_key is present; move(k, k) is always false.
  bool move(Point old_key, Point new_key);

  Internal* root() const noexcept { return root_; }
  double range() const noexcept { return range_; }
  Variant variant() const noexcept { return kVariant; }
  StatsSnapshot stats() const { return stats_.snapshot(); }

  /// Terminal reached by routing key. Quiescent inspection only.
  const Node* terminal(Point key) const { return descend(key); }

 private:
  struct MoveState;

  const Node* descend(Point key) const {
    const Node* l = root_;
    while (l->kind == NodeKind::internal) {
      const Internal* in = as_internal(l);
      l = in->slot(route(in->region, key)).load(std::memory_order_acquire);
    }
    return l;
  }

  // Pushes every Internal on the way down and reads its op before its child.
  void find(Node*& l, Operation*& p_op, Path& path, Point key) {
    while (l->kind == NodeKind::internal) {
      Internal* in = as_internal(l);
      path.push(in);
      p_op = in->op.load(std::memory_order_acquire);
      l = in->slot(route(in->region, key)).load(std::memory_order_acquire);
      fire_hook(HookPoint::traversal_step, this);
    }
  }

  void continue_find(Operation*& p_op, Path& path, Node*& l, Internal* p, Point key) {
    stats_.bump(Stats::restarts);
    if constexpr (Var == Variant::qb_s) {
      const std::size_t terminal_depth = path.size();
      l = p;
      if (p_op->kind == OpKind::compress) {
        while (!path.empty()) {
          Internal* n = path.pop();
          l = n;
          p_op = n->op.load(std::memory_order_acquire);
          if (p_op->kind != OpKind::compress) break;
          help_compress(static_cast<CompressOp*>(p_op));
        }
      }
      if (path.size() > terminal_depth) stats_.bump(Stats::continuous_find);
      if (l == root_) stats_.bump(Stats::root_restarts);
    } else if constexpr (Var == Variant::qb_o) {
      if (p_op->kind != OpKind::compress) {
        l = p;
      } else {
        restart_at_root(path, l);
      }
    } else {
      restart_at_root(path, l);
    }
    find(l, p_op, path, key);
  }

  void restart_at_root(Path& path, Node*& l) {
    stats_.bump(Stats::root_restarts);
    path.clear();
    l = root_;
  }

  Node* replacement_for(Node* l, Internal* p, Point key, const V& value, bool& reuse) {
    // A terminal Leaf that already holds key can only be a moved leaf whose
    // parent is still flagged by its move, so the flag below is bound to
    // fail; build a plain Leaf rather than splitting on equal keys.
    if (l->kind == NodeKind::empty || in_tree(l, key)) return new Leaf<V>(key, value);
    reuse = true;
    return create_subtree<V>(l, p->region, route(p->region, key), key, value);
  }

  bool help_flag(Internal* n, Operation* old_op, Operation* new_op) {
    fire_hook(HookPoint::before_flag, this);
    stats_.bump(Stats::flag_attempts);
    Operation* expected = old_op;
    if (n->op.compare_exchange_strong(expected, new_op, std::memory_order_acq_rel,
                                      std::memory_order_acquire)) {
      if constexpr (kStatsEnabled) check_transition(old_op, new_op);
      if (old_op->kind == OpKind::clean) release(static_cast<CleanOp*>(old_op));
      return true;
    }
    stats_.bump(Stats::flag_failures);
    return false;
  }

  // Returns true only for the thread whose CAS restored Clean.
  bool unflag(Internal* n, Operation* op) {
    auto* clean = new CleanOp;
    if (help_flag(n, op, clean)) return true;
    delete clean;
    return false;
  }

  void check_transition(const Operation* from, const Operation* to) {
    const bool from_clean = from->kind == OpKind::clean;
    const bool to_clean = to->kind == OpKind::clean;
    const bool ok = from_clean ? !to_clean : (to_clean && from->kind != OpKind::compress);
    if (!ok) stats_.bump(Stats::bad_transitions);
  }

  bool help_replace(Internal* parent, Node* old_child, Node* new_child) {
    fire_hook(HookPoint::before_replace, this);
    for (auto& slot : parent->child) {
      if (slot.load(std::memory_order_acquire) == old_child) {
        Node* expected = old_child;
        if (slot.compare_exchange_strong(expected, new_child, std::memory_order_acq_rel)) {
          return true;
        }
        break;
      }
    }
    stats_.bump(Stats::replace_failures);
    return false;
  }

  void help(Operation* op) {
    switch (op->kind) {
      case OpKind::clean:
        return;
      case OpKind::substitute:
        stats_.bump(Stats::helps);
        help_substitute(static_cast<SubstituteOp*>(op));
        return;
      case OpKind::compress:
        stats_.bump(Stats::helps);
        help_compress(static_cast<CompressOp*>(op));
        return;
      case OpKind::move:
        stats_.bump(Stats::helps);
        help_move(static_cast<MoveOp*>(op));
        return;
      case OpKind::coupled_remove:
        stats_.bump(Stats::helps);
        help_coupled_remove(static_cast<CoupledRemoveOp*>(op));
        return;
    }
  }

  void help_substitute(SubstituteOp* op) {
    help_replace(op->parent, op->old_child, op->new_node);
    if (unflag(op->parent, op)) {
      if (op->retire_old) retire_node<V>(op->old_child);
      retire_op(op);
    }
  }

  bool help_compress(CompressOp* op) {
    auto* fresh = new Empty;
    if (!help_replace(op->grandparent, op->parent, fresh)) {
      delete fresh;
      return false;
    }
    retire_detached(op->parent);
    retire_op(op);
    return true;
  }

  // p has been unlinked with four Empty children and a terminal descriptor.
  void retire_detached(Internal* p) {
    for (auto& slot : p->child) retire_node<V>(slot.load(std::memory_order_acquire));
    retire_pruned(p);
  }

  void after_remove(Path& path, Internal* p) {
    if constexpr (Var == Variant::qb_s) {
      compress(path, p);
    } else if constexpr (Var == Variant::qb_o || Var == Variant::qb_d) {
      compress_one_layer(path.top(), p);
    }
  }

  // Recursive compression. Returns silently on any contention; the caller's
  // removal has already taken effect.
  void compress(Path& path, Internal* p) {
    while (true) {
      Operation* p_op = p->op.load(std::memory_order_acquire);
      if (p_op->kind != OpKind::clean || path.empty()) return;
      Internal* gp = path.pop();
      if (!try_compress(gp, p, p_op)) return;
      p = gp;
    }
  }

  void compress_one_layer(Internal* gp, Internal* p) {
    Operation* p_op = p->op.load(std::memory_order_acquire);
    if (p_op->kind != OpKind::clean) return;
    try_compress(gp, p, p_op);
  }

  bool try_compress(Internal* gp, Internal* p, Operation* p_op) {
    if (gp == nullptr || gp == root_ || p->dummy) return false;
    if (!all_children_empty(p)) return false;
    auto* op = new CompressOp(gp, p);
    if (!help_flag(p, p_op, op)) {
      delete_op(op);
      return false;
    }
    stats_.bump(Stats::compressions);
    fire_hook(HookPoint::compress_flagged, this);
    help_compress(op);
    return true;
  }

  // move.hpp
  bool find_common(MoveState& s, Internal* start, Point old_key, Point new_key);
  bool continue_find_common(MoveState& s, bool i_fail, bool r_fail, bool c_fail, Point old_key,
                            Point new_key);
  bool help_move(MoveOp* op);
  void finish_move(MoveOp* op, bool all_flag);
  void after_move(MoveState& s);

  // ablation.hpp
  bool remove_coupled(Internal* gp, Internal* p, LeafBase* leaf, CleanOp* p_clean);
  bool help_coupled_remove(CoupledRemoveOp* op);

  Internal* const root_;
  const double range_;
  mutable Stats stats_;
};

}  // namespace quadboost

#include "quadboost/ablation.hpp"
#include "quadboost/move.hpp"
