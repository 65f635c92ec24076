#pragma once

// Test hooks and per-tree counters.
//
// Hooks are compiled in only when QUADBOOST_HOOKS is nonzero; counters only
// when QUADBOOST_STATS is nonzero. Both are off for benchmark builds.

#include <atomic>
#include <cstdint>

#include "quadboost/config.hpp"

#ifndef QUADBOOST_HOOKS
#define QUADBOOST_HOOKS 0
#endif

namespace quadboost {

inline constexpr bool kHooksEnabled = QUADBOOST_HOOKS != 0;

enum class HookPoint : std::uint8_t {
  substitute_flagged,     // insert/remove flag succeeded, before help_substitute
  compress_flagged,       // Compress flag succeeded, before help_compress
  move_first_flagged,     // first of two move parents flagged, before help_move
  move_all_flagged,       // both move parents flagged, before moveOp publication
  move_insert_replaced,   // insert-side replace attempted, before remove-side replace
  coupled_first_flagged,  // qb-f remove: first of parent/grandparent flagged
  before_flag,            // any flag CAS is about to run
  before_replace,         // any child-link CAS is about to run
  traversal_step,         // find descended one level
};

using HookFn = void (*)(HookPoint point, const void* tree);

namespace detail {
inline std::atomic<HookFn> g_hook{nullptr};
}  // namespace detail

/// Installs a process-wide hook; pass nullptr to remove it.
inline void set_hook(HookFn fn) { detail::g_hook.store(fn, std::memory_order_release); }

inline void fire_hook([[maybe_unused]] HookPoint point, [[maybe_unused]] const void* tree) {
  if constexpr (kHooksEnabled) {
    HookFn fn = detail::g_hook.load(std::memory_order_acquire);
    if (fn != nullptr) fn(point, tree);
  }
}

struct StatsSnapshot {
  std::uint64_t flag_attempts = 0;
  std::uint64_t flag_failures = 0;
  std::uint64_t replace_failures = 0;
  std::uint64_t helps = 0;
  std::uint64_t restarts = 0;        // continue_find / continue_find_common calls
  std::uint64_t root_restarts = 0;   // restarts that began at the root
  std::uint64_t compressions = 0;    // Compress descriptors installed
  std::uint64_t prunes = 0;          // qb-f coupled removals that pruned the parent
  std::uint64_t moves_linearized = 0;
  // Invariant violations; expected to stay zero.
  std::uint64_t bad_transitions = 0;
  std::uint64_t move_discipline = 0;
  std::uint64_t move_order = 0;
  std::uint64_t continuous_find = 0;

  std::uint64_t violations() const {
    return bad_transitions + move_discipline + move_order + continuous_find;
  }
};

/// Relaxed counters; every member is a no-op without QUADBOOST_STATS.
class Stats {
 public:
  enum Counter : std::uint8_t {
    flag_attempts,
    flag_failures,
    replace_failures,
    helps,
    restarts,
    root_restarts,
    compressions,
    prunes,
    moves_linearized,
    bad_transitions,
    move_discipline,
    move_order,
    continuous_find,
    kCount,
  };

  void bump([[maybe_unused]] Counter c) {
    if constexpr (kStatsEnabled) values_[c].fetch_add(1, std::memory_order_relaxed);
  }

  StatsSnapshot snapshot() const {
    StatsSnapshot s;
    s.flag_attempts = get(flag_attempts);
    s.flag_failures = get(flag_failures);
    s.replace_failures = get(replace_failures);
    s.helps = get(helps);
    s.restarts = get(restarts);
    s.root_restarts = get(root_restarts);
    s.compressions = get(compressions);
    s.prunes = get(prunes);
    s.moves_linearized = get(moves_linearized);
    s.bad_transitions = get(bad_transitions);
    s.move_discipline = get(move_discipline);
    s.move_order = get(move_order);
    s.continuous_find = get(continuous_find);
    return s;
  }

 private:
  std::uint64_t get(Counter c) const { return values_[c].load(std::memory_order_relaxed); }

  std::atomic<std::uint64_t> values_[kCount] = {};
};

}  // namespace quadboost
