#pragma once

// LCA-based move for QuadboostTree. Included from quadboost_tree.hpp.

#include "quadboost/quadboost_tree.hpp"

namespace quadboost {

template <typename V, Variant Var>
struct QuadboostTree<V, Var>::MoveState {
  Path r_path;  // shared prefix, then the old key's path
  Path i_path;  // the new key's path, starting at the lca
  Internal* lca = nullptr;
  std::size_t lca_depth = 0;  // index of lca in r_path (qb-s)
  Node* rl = nullptr;
  Node* il = nullptr;
  Operation* r_op = nullptr;
  Operation* i_op = nullptr;
  Internal* rp = nullptr;
  Internal* ip = nullptr;
};

template <typename V, Variant Var>
bool QuadboostTree<V, Var>::move(Point old_key, Point new_key) {
  require_inside(root_->region, old_key);
  require_inside(root_->region, new_key);
  if (old_key == new_key) return false;
  auto guard = reclaim::pin();

  MoveState s;
  if (!find_common(s, root_, old_key, new_key)) return false;
  s.ip = s.i_path.pop();
  s.rp = s.r_path.pop();
  bool r_fail = false;
  bool i_fail = false;
  bool c_fail = false;
  while (true) {
    if (s.r_op->kind != OpKind::clean) r_fail = true;
    if (s.i_op->kind != OpKind::clean) i_fail = true;
    if (s.i_op != s.r_op && s.ip == s.rp) c_fail = true;
    // The same leaf seen under two parents: a concurrent split re-linked it
    // between the two searches.
    if (s.il == s.rl && s.ip != s.rp) r_fail = true;

    if (!c_fail && !i_fail && !r_fail) {
      auto* i_clean = static_cast<CleanOp*>(s.i_op);
      auto* r_clean = static_cast<CleanOp*>(s.r_op);
      if (!try_acquire(i_clean)) {
        s.i_op = s.ip->op.load(std::memory_order_acquire);
        i_fail = true;
      } else if (!try_acquire(r_clean)) {
        release(i_clean);
        s.r_op = s.rp->op.load(std::memory_order_acquire);
        r_fail = true;
      } else {
        const V& value = static_cast<Leaf<V>*>(s.rl)->value;
        bool reuse = false;
        Node* fresh;
        if (s.il->kind == NodeKind::empty || s.il == s.rl || in_tree(s.il, new_key)) {
          fresh = new Leaf<V>(new_key, value);
        } else {
          fresh = create_subtree<V>(s.il, s.ip->region, route(s.ip->region, new_key), new_key,
                                    value);
          reuse = true;
        }
        const bool i_first =
            s.ip != s.rp && spatial_order(s.ip->region, s.rp->region) == SpatialOrder::precedes;
        auto* op = new MoveOp(s.ip, s.rp, s.il, as_leaf(s.rl), fresh, i_clean, r_clean, i_first,
                              reuse);
        if (s.rp != s.ip) {
          const bool has_flag = i_first ? help_flag(s.ip, i_clean, op) : help_flag(s.rp, r_clean, op);
          if (has_flag) {
            fire_hook(HookPoint::move_first_flagged, this);
            if (help_move(op)) {
              after_move(s);
              return true;
            }
            // Published but the second flag lost; the finisher frees op.
            r_fail = i_fail = true;
          } else {
            discard_subtree<V>(fresh, reuse ? s.il : nullptr);
            delete_op(op);
            if (i_first) {
              s.i_op = s.ip->op.load(std::memory_order_acquire);
              i_fail = true;
            } else {
              s.r_op = s.rp->op.load(std::memory_order_acquire);
              r_fail = true;
            }
          }
        } else {
          if (help_move(op)) return true;
          // The only flag failed, so op was never visible to other threads.
          discard_subtree<V>(fresh, reuse ? s.il : nullptr);
          delete_op(op);
          s.r_op = s.i_op = s.rp->op.load(std::memory_order_acquire);
          c_fail = true;
        }
      }
    }
    if (!continue_find_common(s, i_fail, r_fail, c_fail, old_key, new_key)) return false;
    c_fail = i_fail = r_fail = false;
  }
}

// Descends from start while both keys share a direction, records the lca,
// then finishes the old key's search and runs the new key's search from the
// lca. Fails if old_key is absent or new_key is present.
template <typename V, Variant Var>
bool QuadboostTree<V, Var>::find_common(MoveState& s, Internal* start, Point old_key,
                                        Point new_key) {
  Node* rl = start;
  while (rl->kind == NodeKind::internal) {
    Internal* in = as_internal(rl);
    s.r_path.push(in);
    s.r_op = in->op.load(std::memory_order_acquire);
    const Quadrant q_old = route(in->region, old_key);
    rl = in->slot(q_old).load(std::memory_order_acquire);
    fire_hook(HookPoint::traversal_step, this);
    if (q_old != route(in->region, new_key)) break;
  }
  s.lca = s.r_path.top();
  s.lca_depth = s.r_path.size() - 1;
  find(rl, s.r_op, s.r_path, old_key);
  if (!in_tree(rl, old_key) || moved(rl)) return false;
  s.rl = rl;

  Node* il = s.lca;
  s.i_path.clear();
  find(il, s.i_op, s.i_path, new_key);
  if (in_tree(il, new_key) && !moved(il)) return false;
  s.il = il;
  return true;
}

// Resumes whichever searches failed. Both the remove-side and insert-side
// branches run when both failed; returning after the first would leave a
// stale iOp in place and the caller would retry forever.
template <typename V, Variant Var>
bool QuadboostTree<V, Var>::continue_find_common(MoveState& s, bool i_fail, bool r_fail,
                                                 bool c_fail, Point old_key, Point new_key) {
  stats_.bump(Stats::restarts);
  if constexpr (Var == Variant::qb_s) {
    if (r_fail && !c_fail) {
      help(s.r_op);
      Node* rl = s.rp;
      if (s.r_op->kind == OpKind::compress) {
        while (true) {
          if (s.r_path.size() <= s.lca_depth) {
            c_fail = true;
            break;
          }
          Internal* n = s.r_path.pop();
          rl = n;
          s.r_op = n->op.load(std::memory_order_acquire);
          if (s.r_op->kind != OpKind::compress) break;
          help_compress(static_cast<CompressOp*>(s.r_op));
        }
      }
      if (!c_fail) {
        find(rl, s.r_op, s.r_path, old_key);
        if (!in_tree(rl, old_key) || moved(rl)) return false;
        s.rl = rl;
        s.rp = s.r_path.pop();
      }
    }
    if (i_fail && !c_fail) {
      help(s.i_op);
      Node* il = s.ip;
      if (s.i_op->kind == OpKind::compress) {
        while (!s.i_path.empty()) {
          Internal* n = s.i_path.pop();
          il = n;
          s.i_op = n->op.load(std::memory_order_acquire);
          if (s.i_op->kind != OpKind::compress) break;
          help_compress(static_cast<CompressOp*>(s.i_op));
        }
      }
      if (s.i_op->kind == OpKind::compress) c_fail = true;
      if (!c_fail) {
        find(il, s.i_op, s.i_path, new_key);
        if (in_tree(il, new_key) && !moved(il)) return false;
        s.il = il;
        s.ip = s.i_path.pop();
      }
    }
    if (c_fail) {
      help(s.i_op);
      help(s.r_op);
      s.r_path.truncate(s.lca_depth + 1);
      s.i_path.clear();
      Internal* start = root_;
      while (!s.r_path.empty()) {
        Internal* n = s.r_path.pop();
        Operation* op = n->op.load(std::memory_order_acquire);
        if (op->kind != OpKind::compress) {
          start = n;
          break;
        }
        help_compress(static_cast<CompressOp*>(op));
      }
      if (start == root_) stats_.bump(Stats::root_restarts);
      if (!find_common(s, start, old_key, new_key)) return false;
      s.rp = s.r_path.pop();
      s.ip = s.i_path.pop();
    }
    return true;
  } else if constexpr (Var == Variant::qb_o) {
    if (r_fail && !c_fail) {
      help(s.r_op);
      if (s.r_op->kind == OpKind::compress) {
        c_fail = true;
      } else {
        Node* rl = s.rp;
        find(rl, s.r_op, s.r_path, old_key);
        if (!in_tree(rl, old_key) || moved(rl)) return false;
        s.rl = rl;
        s.rp = s.r_path.pop();
      }
    }
    if (i_fail && !c_fail) {
      help(s.i_op);
      if (s.i_op->kind == OpKind::compress) {
        c_fail = true;
      } else {
        Node* il = s.ip;
        find(il, s.i_op, s.i_path, new_key);
        if (in_tree(il, new_key) && !moved(il)) return false;
        s.il = il;
        s.ip = s.i_path.pop();
      }
    }
    if (c_fail) {
      help(s.i_op);
      help(s.r_op);
      Internal* start = s.lca;
      Operation* lca_op = start->op.load(std::memory_order_acquire);
      if (lca_op->kind == OpKind::compress) {
        help_compress(static_cast<CompressOp*>(lca_op));
        start = root_;
        stats_.bump(Stats::root_restarts);
      }
      s.r_path.clear();
      s.i_path.clear();
      if (!find_common(s, start, old_key, new_key)) return false;
      s.rp = s.r_path.pop();
      s.ip = s.i_path.pop();
    }
    return true;
  } else {
    help(s.i_op);
    help(s.r_op);
    stats_.bump(Stats::root_restarts);
    s.r_path.clear();
    s.i_path.clear();
    if (!find_common(s, root_, old_key, new_key)) return false;
    s.rp = s.r_path.pop();
    s.ip = s.i_path.pop();
    return true;
  }
}

template <typename V, Variant Var>
bool QuadboostTree<V, Var>::help_move(MoveOp* op) {
  Internal* first = op->i_first ? op->i_parent : op->r_parent;
  Internal* second = op->i_first ? op->r_parent : op->i_parent;
  CleanOp* second_old = op->i_first ? op->old_r_op : op->old_i_op;
  help_flag(second, second_old, op);
  const bool do_cas = second->op.load(std::memory_order_acquire) == op;
  if (do_cas) {
    op->all_flag.store(true, std::memory_order_seq_cst);
    fire_hook(HookPoint::move_all_flagged, this);
    // A leaf is claimed by at most one Move.
    MoveOp* prior = nullptr;
    if (!op->old_r_child->move_op.compare_exchange_strong(prior, op, std::memory_order_acq_rel) &&
        prior != op) {
      stats_.bump(Stats::move_discipline);
    }
    if (op->old_i_child == op->old_r_child) {
      if (help_replace(op->r_parent, op->old_r_child, op->new_i_child)) {
        stats_.bump(Stats::moves_linearized);
      }
    } else {
      if (help_replace(op->i_parent, op->old_i_child, op->new_i_child)) {
        stats_.bump(Stats::moves_linearized);
        if (op->old_r_child->move_op.load(std::memory_order_acquire) != op) {
          stats_.bump(Stats::move_order);
        }
      }
      fire_hook(HookPoint::move_insert_replaced, this);
      auto* fresh = new Empty;
      if (help_replace(op->r_parent, op->old_r_child, fresh)) {
        if (has_child(op->i_parent, op->old_i_child)) stats_.bump(Stats::move_order);
      } else {
        delete fresh;
      }
    }
  }
  // Without all_flag the leaf may already be retired by an unrelated
  // removal, so it is not dereferenced here.
  const bool all = op->all_flag.load(std::memory_order_seq_cst);
  bool finisher = false;
  if (op->i_parent == op->r_parent) {
    finisher = all && unflag(op->i_parent, op);
  } else {
    if (all) unflag(second, op);
    finisher = unflag(first, op);
  }
  if (finisher) finish_move(op, all);
  return all;
}

// Runs once per published Move, in the thread that restored the last Clean.
template <typename V, Variant Var>
void QuadboostTree<V, Var>::finish_move(MoveOp* op, bool all_flag) {
  if (all_flag) {
    retire_node<V>(op->old_r_child);
    if (op->old_i_child != op->old_r_child && op->old_i_child->kind == NodeKind::empty) {
      retire_node<V>(op->old_i_child);
    }
  } else {
    retire_subtree<V>(op->new_i_child, op->reuse_i_child ? op->old_i_child : nullptr);
  }
  retire_op(op);
}

template <typename V, Variant Var>
void QuadboostTree<V, Var>::after_move(MoveState& s) {
  if constexpr (Var == Variant::qb_s) {
    compress(s.r_path, s.rp);
  } else if constexpr (Var == Variant::qb_o || Var == Variant::qb_d) {
    compress_one_layer(s.r_path.top(), s.rp);
  }
}

}  // namespace quadboost
