#pragma once

// Epoch-based deferred reclamation for unlinked nodes and replaced
// descriptors.
//
// Every tree operation runs inside a pin. An object handed to retire() is
// freed only after the global epoch has advanced twice past the epoch read at
// retirement, and the epoch advances only when every pinned thread has
// observed the current value. A "leak" mode keeps every retired object alive
// until process exit; select it with QUADBOOST_RECLAIM=leak or set_mode().

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <deque>
#include <mutex>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "quadboost/config.hpp"

namespace quadboost::reclaim {

enum class Mode { epoch, leak };

using Deleter = void (*)(void*);

namespace detail {

struct Retired {
  void* ptr;
  Deleter deleter;
  std::uint64_t epoch;
};

struct alignas(64) ThreadRecord {
  // (epoch << 1) | active
  std::atomic<std::uint64_t> state{0};
  std::atomic<bool> owned{false};
  ThreadRecord* next = nullptr;
  unsigned depth = 0;
  std::size_t since_collect = 0;
  // Epoch tags are non-decreasing from front to back.
  std::deque<Retired> limbo;
  std::vector<Retired> graveyard;
};

inline Mode mode_from_env() {
  const char* v = std::getenv("QUADBOOST_RECLAIM");
  return (v != nullptr && std::string_view(v) == "leak") ? Mode::leak : Mode::epoch;
}

class Domain {
 public:
  static Domain& instance() {
    static Domain domain;
    return domain;
  }

  Domain(const Domain&) = delete;
  Domain& operator=(const Domain&) = delete;

  ~Domain() {
    shutting_down_.store(true, std::memory_order_relaxed);
    ThreadRecord* r = head_.load(std::memory_order_acquire);
    while (r != nullptr) {
      ThreadRecord* next = r->next;
      free_all(r->limbo);
      free_all(r->graveyard);
      delete r;
      r = next;
    }
  }

  ThreadRecord* acquire() {
    for (ThreadRecord* r = head_.load(std::memory_order_acquire); r != nullptr; r = r->next) {
      bool expected = false;
      if (!r->owned.load(std::memory_order_relaxed) &&
          r->owned.compare_exchange_strong(expected, true, std::memory_order_acq_rel)) {
        return r;
      }
    }
    auto* r = new ThreadRecord;
    r->owned.store(true, std::memory_order_relaxed);
    ThreadRecord* head = head_.load(std::memory_order_relaxed);
    do {
      r->next = head;
    } while (!head_.compare_exchange_weak(head, r, std::memory_order_acq_rel,
                                          std::memory_order_relaxed));
    return r;
  }

  void release(ThreadRecord* r) {
    if (r->depth == 0) {
      try_advance();
      collect(*r);
    }
    r->owned.store(false, std::memory_order_release);
  }

  void pin(ThreadRecord& r) {
    if (r.depth++ > 0) return;
    // Announce, then confirm the epoch did not move in between; otherwise the
    // announcement could name an epoch that others have already left.
    std::uint64_t e = epoch_.load(std::memory_order_seq_cst);
    while (true) {
      r.state.exchange((e << 1) | 1U, std::memory_order_seq_cst);
      const std::uint64_t now = epoch_.load(std::memory_order_seq_cst);
      if (now == e) return;
      e = now;
    }
  }

  void unpin(ThreadRecord& r) {
    if (--r.depth > 0) return;
    const std::uint64_t s = r.state.load(std::memory_order_relaxed);
    r.state.store(s & ~std::uint64_t{1}, std::memory_order_release);
  }

  void retire(ThreadRecord& r, void* p, Deleter d) {
    if constexpr (kStatsEnabled) {
      std::lock_guard lock(audit_mu_);
      if (!audit_.insert(p).second) double_retires_.fetch_add(1, std::memory_order_relaxed);
    }
    if (mode_.load(std::memory_order_relaxed) == Mode::leak) {
      r.graveyard.push_back({p, d, 0});
      return;
    }
    r.limbo.push_back({p, d, epoch_.load(std::memory_order_seq_cst)});
    pending_.fetch_add(1, std::memory_order_relaxed);
    if (++r.since_collect >= kCollectInterval) {
      r.since_collect = 0;
      try_advance();
      collect(r);
    }
  }

  bool try_advance() {
    std::uint64_t g = epoch_.load(std::memory_order_seq_cst);
    for (ThreadRecord* r = head_.load(std::memory_order_acquire); r != nullptr; r = r->next) {
      const std::uint64_t s = r->state.load(std::memory_order_seq_cst);
      if ((s & 1U) != 0 && (s >> 1) != g) return false;
    }
    return epoch_.compare_exchange_strong(g, g + 1, std::memory_order_seq_cst);
  }

  void collect(ThreadRecord& r) {
    const std::uint64_t g = epoch_.load(std::memory_order_acquire);
    while (!r.limbo.empty() && r.limbo.front().epoch + 2 <= g) {
      Retired item = r.limbo.front();
      r.limbo.pop_front();
      free_one(item);
      pending_.fetch_sub(1, std::memory_order_relaxed);
    }
  }

  // Frees every object in every limbo list. Only valid when no thread is
  // inside a pin.
  void drain() {
    bool again = true;
    while (again) {
      again = false;
      epoch_.fetch_add(2, std::memory_order_seq_cst);
      for (ThreadRecord* r = head_.load(std::memory_order_acquire); r != nullptr; r = r->next) {
        if (r->limbo.empty()) continue;
        again = true;
        pending_.fetch_sub(r->limbo.size(), std::memory_order_relaxed);
        free_all(r->limbo);
      }
    }
  }

  bool shutting_down() const { return shutting_down_.load(std::memory_order_relaxed); }

  Mode mode() const { return mode_.load(std::memory_order_relaxed); }
  void set_mode(Mode m) { mode_.store(m, std::memory_order_relaxed); }
  std::size_t pending() const { return pending_.load(std::memory_order_relaxed); }
  std::uint64_t epoch() const { return epoch_.load(std::memory_order_relaxed); }
  std::size_t double_retires() const { return double_retires_.load(std::memory_order_relaxed); }

 private:
  static constexpr std::size_t kCollectInterval = 64;

  Domain() : mode_(mode_from_env()) {}

  void free_one(const Retired& item) {
    if constexpr (kStatsEnabled) {
      std::lock_guard lock(audit_mu_);
      audit_.erase(item.ptr);
    }
    item.deleter(item.ptr);
  }

  template <typename Container>
  void free_all(Container& items) {
    // Deleters may retire further objects into the calling thread's record.
    Container batch;
    batch.swap(items);
    for (const Retired& item : batch) free_one(item);
  }

  std::atomic<std::uint64_t> epoch_{0};
  std::atomic<ThreadRecord*> head_{nullptr};
  std::atomic<Mode> mode_;
  std::atomic<std::size_t> pending_{0};
  std::atomic<std::size_t> double_retires_{0};
  std::atomic<bool> shutting_down_{false};
  std::mutex audit_mu_;
  std::unordered_set<void*> audit_;
};

struct LocalHandle {
  ThreadRecord* record = nullptr;
  ~LocalHandle() {
    if (record != nullptr) Domain::instance().release(record);
  }
};

inline ThreadRecord& local_record() {
  thread_local LocalHandle handle;
  if (handle.record == nullptr) handle.record = Domain::instance().acquire();
  return *handle.record;
}

}  // namespace detail

/// RAII pin. Objects retired after the pin began are not freed before the
/// guard is destroyed.
class Guard {
 public:
  Guard() : record_(&detail::local_record()) { detail::Domain::instance().pin(*record_); }
  ~Guard() {
    if (record_ != nullptr) detail::Domain::instance().unpin(*record_);
  }
  Guard(Guard&& other) noexcept : record_(std::exchange(other.record_, nullptr)) {}
  Guard(const Guard&) = delete;
  Guard& operator=(const Guard&) = delete;
  Guard& operator=(Guard&&) = delete;

 private:
  detail::ThreadRecord* record_;
};

[[nodiscard]] inline Guard pin() { return Guard{}; }

inline void retire(void* p, Deleter d) {
  detail::Domain& domain = detail::Domain::instance();
  if (domain.shutting_down()) {
    d(p);
    return;
  }
  domain.retire(detail::local_record(), p, d);
}

template <typename T>
void retire(T* p) {
  retire(static_cast<void*>(p), [](void* q) { delete static_cast<T*>(q); });
}

inline Mode mode() { return detail::Domain::instance().mode(); }

/// Switch reclamation mode. Call only while no tree operation is running.
inline void set_mode(Mode m) { detail::Domain::instance().set_mode(m); }

/// Free everything awaiting reclamation. Quiescent states only.
inline void drain() { detail::Domain::instance().drain(); }

/// Objects retired in epoch mode and not yet freed.
inline std::size_t pending() { return detail::Domain::instance().pending(); }

inline std::uint64_t current_epoch() { return detail::Domain::instance().epoch(); }

/// Number of times the same live address was retired twice (stats builds).
inline std::size_t double_retires() { return detail::Domain::instance().double_retires(); }

}  // namespace quadboost::reclaim
