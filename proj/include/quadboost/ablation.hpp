#pragma once

// qb-f removal for QuadboostTree. Included from quadboost_tree.hpp.
//
// The leaf's parent and grandparent are both flagged with one descriptor,
// in spatial order like the two parents of a move. Once both are held, the
// leaf is replaced by an Empty; if that leaves the parent with four Empty
// children, the parent is pruned from the grandparent and keeps the
// descriptor forever, otherwise both nodes are unflagged. Helpers agree on
// prune versus keep through a single CAS on the descriptor.

#include "quadboost/quadboost_tree.hpp"

namespace quadboost {

template <typename V, Variant Var>
bool QuadboostTree<V, Var>::remove_coupled(Internal* gp, Internal* p, LeafBase* leaf,
                                           CleanOp* p_clean) {
  Operation* gp_op = gp->op.load(std::memory_order_acquire);
  if (gp_op->kind != OpKind::clean) {
    help(gp_op);
    return false;
  }
  auto* gp_clean = static_cast<CleanOp*>(gp_op);
  if (!try_acquire(gp_clean)) return false;
  if (!try_acquire(p_clean)) {
    release(gp_clean);
    return false;
  }
  const bool parent_first = spatial_order(p->region, gp->region) == SpatialOrder::precedes;
  auto* op = new CoupledRemoveOp(gp, p, leaf, gp_clean, p_clean, parent_first);
  Internal* first = parent_first ? p : gp;
  if (!help_flag(first, parent_first ? static_cast<Operation*>(p_clean) : gp_clean, op)) {
    delete_op(op);
    return false;
  }
  fire_hook(HookPoint::coupled_first_flagged, this);
  return help_coupled_remove(op);
}

template <typename V, Variant Var>
bool QuadboostTree<V, Var>::help_coupled_remove(CoupledRemoveOp* op) {
  Internal* first = op->parent_first ? op->parent : op->grandparent;
  Internal* second = op->parent_first ? op->grandparent : op->parent;
  CleanOp* second_old = op->parent_first ? op->old_gp_op : op->old_p_op;
  help_flag(second, second_old, op);
  if (second->op.load(std::memory_order_acquire) == op) {
    op->all_flag.store(true, std::memory_order_seq_cst);
    auto* fresh = new Empty;
    if (!help_replace(op->parent, op->leaf, fresh)) delete fresh;
    // Both nodes are held, so the parent's children cannot change now.
    std::uint8_t d = op->decision.load(std::memory_order_acquire);
    if (d == CoupledRemoveOp::undecided) {
      const std::uint8_t want =
          all_children_empty(op->parent) ? CoupledRemoveOp::prune : CoupledRemoveOp::keep;
      if (op->decision.compare_exchange_strong(d, want, std::memory_order_acq_rel)) d = want;
    }
    if (d == CoupledRemoveOp::prune) {
      auto* empty = new Empty;
      if (help_replace(op->grandparent, op->parent, empty)) {
        stats_.bump(Stats::prunes);
        retire_detached(op->parent);
      } else {
        delete empty;
      }
    }
  }
  const bool all = op->all_flag.load(std::memory_order_seq_cst);
  bool finisher = false;
  if (!all) {
    finisher = unflag(first, op);
  } else if (op->decision.load(std::memory_order_acquire) == CoupledRemoveOp::prune) {
    finisher = unflag(op->grandparent, op);
  } else {
    unflag(second, op);
    finisher = unflag(first, op);
  }
  if (finisher) {
    if (all) retire_node<V>(op->leaf);
    retire_op(op);
  }
  return all;
}

}  // namespace quadboost
