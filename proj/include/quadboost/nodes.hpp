#pragma once

// Node and descriptor types shared by every tree variant, the skeleton
// constructor, routing predicates, and allocation/retirement helpers.

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "quadboost/config.hpp"
#include "quadboost/geometry.hpp"
#include "quadboost/reclamation.hpp"

namespace quadboost {

enum class NodeKind : std::uint8_t { internal, leaf, empty };
enum class OpKind : std::uint8_t { clean, substitute, compress, move, coupled_remove };

namespace detail {
inline std::atomic<std::int64_t> g_live_nodes{0};
inline std::atomic<std::int64_t> g_live_ops{0};
}  // namespace detail

/// Allocated and not yet freed nodes, process-wide (stats builds only).
inline std::int64_t live_nodes() { return detail::g_live_nodes.load(std::memory_order_relaxed); }
/// Allocated and not yet freed descriptors, process-wide (stats builds only).
inline std::int64_t live_operations() { return detail::g_live_ops.load(std::memory_order_relaxed); }

struct Node {
  const NodeKind kind;

  explicit Node(NodeKind k) noexcept : kind(k) {
    if constexpr (kStatsEnabled) detail::g_live_nodes.fetch_add(1, std::memory_order_relaxed);
  }
  ~Node() {
    if constexpr (kStatsEnabled) detail::g_live_nodes.fetch_sub(1, std::memory_order_relaxed);
  }
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;
};

struct Operation {
  const OpKind kind;

  explicit Operation(OpKind k) noexcept : kind(k) {
    if constexpr (kStatsEnabled) detail::g_live_ops.fetch_add(1, std::memory_order_relaxed);
  }
  ~Operation() {
    if constexpr (kStatsEnabled) detail::g_live_ops.fetch_sub(1, std::memory_order_relaxed);
  }
  Operation(const Operation&) = delete;
  Operation& operator=(const Operation&) = delete;
};

// A Clean descriptor is referenced by the op slot it is installed in and by
// every Move or coupled-remove descriptor that recorded it as an expected
// value. It is retired only when all of those references are gone, so a
// helper's flag CAS can never succeed against a recycled address.
struct CleanOp final : Operation {
  std::atomic<int> refs{1};
  CleanOp() noexcept : Operation(OpKind::clean) {}
};

struct MoveOp;

struct Internal final : Node {
  const Region region;
  std::array<std::atomic<Node*>, 4> child;
  std::atomic<Operation*> op;
  const bool dummy;

  explicit Internal(Region r, bool is_dummy = false)
      : Node(NodeKind::internal), region(r), op(new CleanOp), dummy(is_dummy) {
    for (auto& c : child) c.store(nullptr, std::memory_order_relaxed);
  }

  std::atomic<Node*>& slot(Quadrant q) noexcept { return child[index_of(q)]; }
  const std::atomic<Node*>& slot(Quadrant q) const noexcept { return child[index_of(q)]; }
};

struct LeafBase : Node {
  const Point key;
  std::atomic<MoveOp*> move_op{nullptr};

  explicit LeafBase(Point k) noexcept : Node(NodeKind::leaf), key(k) {}
};

template <typename V>
struct Leaf final : LeafBase {
  const V value;

  Leaf(Point k, V v) : LeafBase(k), value(std::move(v)) {}
};

struct Empty final : Node {
  Empty() noexcept : Node(NodeKind::empty) {}
};

struct SubstituteOp final : Operation {
  Internal* const parent;
  Node* const old_child;
  Node* const new_node;
  // False when old_child was re-linked inside new_node (leaf reuse).
  const bool retire_old;

  SubstituteOp(Internal* p, Node* old_c, Node* new_n, bool retire) noexcept
      : Operation(OpKind::substitute), parent(p), old_child(old_c), new_node(new_n),
        retire_old(retire) {}
};

struct CompressOp final : Operation {
  Internal* const grandparent;
  Internal* const parent;

  CompressOp(Internal* gp, Internal* p) noexcept
      : Operation(OpKind::compress), grandparent(gp), parent(p) {}
};

struct MoveOp final : Operation {
  Internal* const i_parent;
  Internal* const r_parent;
  Node* const old_i_child;
  LeafBase* const old_r_child;
  Node* const new_i_child;
  CleanOp* const old_i_op;
  CleanOp* const old_r_op;
  std::atomic<bool> all_flag{false};
  const bool i_first;
  // old_i_child is a Leaf re-linked inside new_i_child.
  const bool reuse_i_child;

  MoveOp(Internal* ip, Internal* rp, Node* il, LeafBase* rl, Node* new_il, CleanOp* i_op,
         CleanOp* r_op, bool first, bool reuse) noexcept
      : Operation(OpKind::move), i_parent(ip), r_parent(rp), old_i_child(il), old_r_child(rl),
        new_i_child(new_il), old_i_op(i_op), old_r_op(r_op), i_first(first),
        reuse_i_child(reuse) {}
};

// qb-f removal: flags both the parent and the grandparent of the leaf, then
// replaces the leaf and, if the parent is left with four Empty children,
// prunes the parent from the grandparent.
struct CoupledRemoveOp final : Operation {
  enum Decision : std::uint8_t { undecided = 0, keep = 1, prune = 2 };

  Internal* const grandparent;
  Internal* const parent;
  LeafBase* const leaf;
  CleanOp* const old_gp_op;
  CleanOp* const old_p_op;
  const bool parent_first;
  std::atomic<bool> all_flag{false};
  std::atomic<std::uint8_t> decision{undecided};

  CoupledRemoveOp(Internal* gp, Internal* p, LeafBase* l, CleanOp* gp_op, CleanOp* p_op,
                  bool p_first) noexcept
      : Operation(OpKind::coupled_remove), grandparent(gp), parent(p), leaf(l), old_gp_op(gp_op),
        old_p_op(p_op), parent_first(p_first) {}
};

inline Internal* as_internal(Node* n) noexcept { return static_cast<Internal*>(n); }
inline const Internal* as_internal(const Node* n) noexcept { return static_cast<const Internal*>(n); }
inline LeafBase* as_leaf(Node* n) noexcept { return static_cast<LeafBase*>(n); }
inline const LeafBase* as_leaf(const Node* n) noexcept { return static_cast<const LeafBase*>(n); }

// ---- Clean reference counting ----------------------------------------------

namespace detail {

inline void op_deleter(void* p);

inline void release_clean(CleanOp* c) {
  if (c->refs.fetch_sub(1, std::memory_order_acq_rel) == 1) reclaim::retire(c, &op_deleter);
}

// Quiescent teardown: nobody else can be reading c.
inline void release_clean_now(CleanOp* c) {
  if (c->refs.fetch_sub(1, std::memory_order_acq_rel) == 1) delete c;
}

inline void op_deleter(void* p) {
  auto* op = static_cast<Operation*>(p);
  switch (op->kind) {
    case OpKind::clean:
      delete static_cast<CleanOp*>(op);
      break;
    case OpKind::substitute:
      delete static_cast<SubstituteOp*>(op);
      break;
    case OpKind::compress:
      delete static_cast<CompressOp*>(op);
      break;
    case OpKind::move: {
      auto* m = static_cast<MoveOp*>(op);
      release_clean(m->old_i_op);
      release_clean(m->old_r_op);
      delete m;
      break;
    }
    case OpKind::coupled_remove: {
      auto* c = static_cast<CoupledRemoveOp*>(op);
      release_clean(c->old_gp_op);
      release_clean(c->old_p_op);
      delete c;
      break;
    }
  }
}

}  // namespace detail

/// Takes an extra reference on a Clean descriptor unless it has already
/// dropped to zero (meaning it left its slot and will never be current again).
inline bool try_acquire(CleanOp* c) noexcept {
  int r = c->refs.load(std::memory_order_relaxed);
  while (r > 0) {
    if (c->refs.compare_exchange_weak(r, r + 1, std::memory_order_acq_rel)) return true;
  }
  return false;
}

inline void release(CleanOp* c) { detail::release_clean(c); }

/// Deferred free of a descriptor that is no longer installed anywhere.
inline void retire_op(Operation* op) { reclaim::retire(op, &detail::op_deleter); }

/// Immediate free of a descriptor that was never published.
inline void delete_op(Operation* op) { detail::op_deleter(op); }

// ---- node deletion ----------------------------------------------------------

template <typename V>
void delete_node(Node* n) {
  switch (n->kind) {
    case NodeKind::internal: {
      auto* in = as_internal(n);
      Operation* op = in->op.load(std::memory_order_relaxed);
      if (op != nullptr && op->kind == OpKind::clean) detail::release_clean(static_cast<CleanOp*>(op));
      delete in;
      break;
    }
    case NodeKind::leaf:
      delete static_cast<Leaf<V>*>(n);
      break;
    case NodeKind::empty:
      delete static_cast<Empty*>(n);
      break;
  }
}

template <typename V>
void node_deleter(void* p) {
  delete_node<V>(static_cast<Node*>(p));
}

template <typename V>
void retire_node(Node* n) {
  reclaim::retire(n, &node_deleter<V>);
}

/// Retires an unlinked Internal that keeps a terminal descriptor. The
/// descriptor is retired separately and may be freed first, so the deleter
/// must not look at the op slot.
inline void retire_pruned(Internal* n) {
  reclaim::retire(n, [](void* p) { delete static_cast<Internal*>(p); });
}

/// Immediately frees a subtree that was never linked, except `keep`.
template <typename V>
void discard_subtree(Node* n, const Node* keep) {
  std::vector<Node*> stack{n};
  while (!stack.empty()) {
    Node* cur = stack.back();
    stack.pop_back();
    if (cur == nullptr || cur == keep) continue;
    if (cur->kind == NodeKind::internal) {
      auto* in = as_internal(cur);
      for (auto& c : in->child) stack.push_back(c.load(std::memory_order_relaxed));
      Operation* op = in->op.exchange(nullptr, std::memory_order_relaxed);
      if (op != nullptr && op->kind == OpKind::clean) detail::release_clean_now(static_cast<CleanOp*>(op));
    }
    delete_node<V>(cur);
  }
}

/// Retires every node of a subtree that concurrent helpers may still be
/// comparing against, except `keep`.
template <typename V>
void retire_subtree(Node* n, const Node* keep) {
  std::vector<Node*> stack{n};
  while (!stack.empty()) {
    Node* cur = stack.back();
    stack.pop_back();
    if (cur == nullptr || cur == keep) continue;
    if (cur->kind == NodeKind::internal) {
      for (auto& c : as_internal(cur)->child) stack.push_back(c.load(std::memory_order_relaxed));
    }
    retire_node<V>(cur);
  }
}

/// Frees every node reachable from root. Quiescent states only.
template <typename V>
void destroy_tree(Internal* root) {
  std::vector<Node*> stack{root};
  while (!stack.empty()) {
    Node* cur = stack.back();
    stack.pop_back();
    if (cur == nullptr) continue;
    if (cur->kind == NodeKind::internal) {
      auto* in = as_internal(cur);
      for (auto& c : in->child) stack.push_back(c.load(std::memory_order_relaxed));
      Operation* op = in->op.exchange(nullptr, std::memory_order_relaxed);
      if (op != nullptr && op->kind == OpKind::clean) detail::release_clean_now(static_cast<CleanOp*>(op));
    }
    delete_node<V>(cur);
  }
}

// ---- skeleton and predicates -----------------------------------------------

/// Root over (0, 0, range, range), four dummy Internal children, sixteen
/// Empty terminals.
inline Internal* new_skeleton(double range) {
  if (!(range > 0.0) || !std::isfinite(range)) {
    throw std::invalid_argument("quadtree range must be a positive finite number");
  }
  auto* root = new Internal(Region{0.0, 0.0, range, range}, true);
  for (Quadrant q : kQuadrants) {
    auto* d = new Internal(subregion(root->region, q), true);
    for (Quadrant q2 : kQuadrants) d->slot(q2).store(new Empty, std::memory_order_relaxed);
    root->slot(q).store(d, std::memory_order_relaxed);
  }
  return root;
}

/// True iff n is a Leaf holding exactly p.
inline bool in_tree(const Node* n, Point p) noexcept {
  return n->kind == NodeKind::leaf && as_leaf(n)->key == p;
}

inline bool has_child(const Internal* parent, const Node* c) noexcept {
  for (const auto& slot : parent->child) {
    if (slot.load(std::memory_order_acquire) == c) return true;
  }
  return false;
}

/// True iff n is a Leaf whose move has completed its insert-side replace.
inline bool moved(const Node* n) noexcept {
  if (n->kind != NodeKind::leaf) return false;
  const MoveOp* op = as_leaf(n)->move_op.load(std::memory_order_acquire);
  return op != nullptr && !has_child(op->i_parent, op->old_i_child);
}

inline bool all_children_empty(const Internal* n) noexcept {
  for (const auto& slot : n->child) {
    if (slot.load(std::memory_order_acquire)->kind != NodeKind::empty) return false;
  }
  return true;
}

namespace detail {
// Doubles run out of distinct midpoints after roughly 1100 halvings.
inline constexpr int kMaxSplitDepth = 1100;
}  // namespace detail

/// Replacement for terminal `l` in quadrant `q` of `parent_region` that
/// additionally holds (p, value). An Empty becomes a fresh Leaf; a Leaf
/// becomes a fresh chain of Internals that splits until both keys separate,
/// with `l` itself re-linked at the bottom.
template <typename V>
Node* create_subtree(Node* l, const Region& parent_region, Quadrant q, Point p, const V& value) {
  if (l->kind == NodeKind::empty) return new Leaf<V>(p, value);
  if (l->kind == NodeKind::internal) {
    throw std::domain_error("create_subtree: terminal is an Internal node");
  }
  const Point k = as_leaf(l)->key;
  if (k == p) throw std::domain_error("create_subtree: key already present at terminal");

  auto* top = new Internal(subregion(parent_region, q));
  Internal* cur = top;
  for (int depth = 0;; ++depth) {
    const Quadrant qa = route(cur->region, k);
    const Quadrant qb = route(cur->region, p);
    if (qa != qb) {
      for (Quadrant s : kQuadrants) {
        Node* c = s == qa ? l : s == qb ? static_cast<Node*>(new Leaf<V>(p, value)) : new Empty;
        cur->slot(s).store(c, std::memory_order_relaxed);
      }
      return top;
    }
    if (depth >= detail::kMaxSplitDepth) {
      for (Quadrant s : kQuadrants) cur->slot(s).store(new Empty, std::memory_order_relaxed);
      discard_subtree<V>(top, l);
      throw std::domain_error("create_subtree: keys do not separate at double precision");
    }
    auto* next = new Internal(subregion(cur->region, qa));
    for (Quadrant s : kQuadrants) {
      cur->slot(s).store(s == qa ? static_cast<Node*>(next) : new Empty, std::memory_order_relaxed);
    }
    cur = next;
  }
}

}  // namespace quadboost
