#pragma once

// Offline linearizability check for dictionary histories.
//
// Depth-first search over linearization prefixes. A configuration is the
// number of events taken from each thread plus the resulting key set, so
// prefixes that reach the same configuration are explored once. Only
// membership matters: every result in a history is a boolean, so values
// never influence which orders are legal.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "quadboost/checker/history.hpp"

namespace quadboost::checker {

struct CheckResult {
  bool linearizable = false;
  std::size_t states = 0;   // distinct configurations visited
  std::size_t deepest = 0;  // longest legal prefix found
  std::size_t events = 0;

  explicit operator bool() const { return linearizable; }
};

struct CheckOptions {
  /// 0 means unbounded. Exceeding it throws std::runtime_error.
  std::size_t max_states = 0;
};

/// Throws std::invalid_argument unless every event has invoke < response,
/// moves carry a new key (and nothing else does), and each thread's events
/// do not overlap.
inline void validate_history(const std::vector<HistoryEvent>& h) {
  std::map<std::uint32_t, std::vector<const HistoryEvent*>> per_thread;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const HistoryEvent& e = h[i];
    const std::string where = "event " + std::to_string(i);
    if (!(e.invoke_ns < e.response_ns)) {
      throw std::invalid_argument(where + ": invoke stamp not before response stamp");
    }
    if ((e.op == OpType::move) != e.new_key.has_value()) {
      throw std::invalid_argument(where + ": new key present iff op is move");
    }
    per_thread[e.thread].push_back(&e);
  }
  for (auto& [thread, events] : per_thread) {
    std::sort(events.begin(), events.end(),
              [](const HistoryEvent* a, const HistoryEvent* b) { return a->invoke_ns < b->invoke_ns; });
    for (std::size_t i = 1; i < events.size(); ++i) {
      if (events[i]->invoke_ns < events[i - 1]->response_ns) {
        throw std::invalid_argument("thread " + std::to_string(thread) +
                                    ": overlapping events");
      }
    }
  }
}

namespace detail {

class LinearizabilitySearch {
 public:
  LinearizabilitySearch(const std::vector<HistoryEvent>& h, const std::vector<Point>& initial,
                        CheckOptions options)
      : options_(options) {
    std::map<std::uint32_t, std::size_t> thread_index;
    for (const auto& e : h) {
      auto [it, fresh] = thread_index.emplace(e.thread, threads_.size());
      if (fresh) threads_.emplace_back();
      Ev ev;
      ev.op = e.op;
      ev.key = intern(e.key);
      ev.new_key = e.new_key ? intern(*e.new_key) : ev.key;
      ev.result = e.result;
      ev.invoke = e.invoke_ns;
      ev.response = e.response_ns;
      threads_[it->second].push_back(ev);
    }
    for (Point p : initial) intern(p);
    for (auto& t : threads_) {
      std::sort(t.begin(), t.end(), [](const Ev& a, const Ev& b) { return a.invoke < b.invoke; });
    }

    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    key_zobrist_.resize(keys_.size());
    for (auto& z : key_zobrist_) z = {rng(), rng()};
    pos_zobrist_.resize(threads_.size());
    for (std::size_t t = 0; t < threads_.size(); ++t) {
      pos_zobrist_[t].resize(threads_[t].size() + 1);
      for (auto& z : pos_zobrist_[t]) z = {rng(), rng()};
    }

    present_.assign(keys_.size(), 0);
    pos_.assign(threads_.size(), 0);
    for (std::size_t t = 0; t < threads_.size(); ++t) hash_ ^= pos_zobrist_[t][0];
    for (Point p : initial) {
      std::uint32_t k = keys_.at(p);
      if (!present_[k]) toggle(k);
    }
    total_ = h.size();
  }

  CheckResult run() {
    CheckResult result;
    result.events = total_;
    visited_.insert(hash_);
    std::vector<Frame> stack;
    stack.push_back(Frame{});
    std::size_t depth = 0;
    while (!stack.empty()) {
      if (depth == total_) {
        result.linearizable = true;
        break;
      }
      Frame& f = stack.back();
      const std::int64_t horizon = min_pending_response();
      bool advanced = false;
      for (; f.next < threads_.size(); ++f.next) {
        const std::size_t t = f.next;
        if (pos_[t] == threads_[t].size()) continue;
        const Ev& e = threads_[t][pos_[t]];
        // Some pending event finished before e started, so it must go first.
        if (horizon < e.invoke) continue;
        Frame child;
        child.taken = static_cast<int>(t);
        if (!apply(e, child)) continue;
        advance(t);
        if (!visited_.insert(hash_).second) {
          retreat(t);
          undo(child);
          continue;
        }
        if (options_.max_states != 0 && visited_.size() > options_.max_states) {
          throw std::runtime_error("linearizability search exceeded its state budget");
        }
        ++f.next;
        stack.push_back(child);
        ++depth;
        result.deepest = std::max(result.deepest, depth);
        advanced = true;
        break;
      }
      if (advanced) continue;
      Frame done = stack.back();
      stack.pop_back();
      if (done.taken >= 0) {
        retreat(static_cast<std::size_t>(done.taken));
        undo(done);
        --depth;
      }
    }
    result.states = visited_.size();
    return result;
  }

 private:
  struct Ev {
    OpType op;
    std::uint32_t key;
    std::uint32_t new_key;
    bool result;
    std::int64_t invoke;
    std::int64_t response;
  };

  struct Hash128 {
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    Hash128& operator^=(const Hash128& o) {
      a ^= o.a;
      b ^= o.b;
      return *this;
    }
    friend bool operator==(const Hash128&, const Hash128&) = default;
  };
  struct Hash128Hasher {
    std::size_t operator()(const Hash128& h) const noexcept { return static_cast<std::size_t>(h.a); }
  };

  struct Frame {
    std::size_t next = 0;  // next thread to try from this configuration
    int taken = -1;        // thread whose event led here
    std::uint32_t flipped[2] = {0, 0};
    int nflipped = 0;
  };

  std::uint32_t intern(Point p) {
    auto [it, fresh] = keys_.emplace(p, static_cast<std::uint32_t>(keys_.size()));
    return it->second;
  }

  void toggle(std::uint32_t k) {
    present_[k] ^= 1;
    hash_ ^= key_zobrist_[k];
  }

  void advance(std::size_t t) {
    hash_ ^= pos_zobrist_[t][pos_[t]];
    ++pos_[t];
    hash_ ^= pos_zobrist_[t][pos_[t]];
  }

  void retreat(std::size_t t) {
    hash_ ^= pos_zobrist_[t][pos_[t]];
    --pos_[t];
    hash_ ^= pos_zobrist_[t][pos_[t]];
  }

  // Replays e against the current key set. Returns false if the recorded
  // result disagrees; otherwise records the flipped keys in f.
  bool apply(const Ev& e, Frame& f) {
    auto flip = [&](std::uint32_t k) {
      toggle(k);
      f.flipped[f.nflipped++] = k;
    };
    const bool has = present_[e.key] != 0;
    switch (e.op) {
      case OpType::insert:
        if (e.result == has) return false;
        if (e.result) flip(e.key);
        return true;
      case OpType::remove:
        if (e.result != has) return false;
        if (e.result) flip(e.key);
        return true;
      case OpType::contain:
        return e.result == has;
      case OpType::move: {
        const bool ok = e.key != e.new_key && has && present_[e.new_key] == 0;
        if (e.result != ok) return false;
        if (ok) {
          flip(e.key);
          flip(e.new_key);
        }
        return true;
      }
    }
    return false;
  }

  void undo(const Frame& f) {
    for (int i = 0; i < f.nflipped; ++i) toggle(f.flipped[i]);
  }

  std::int64_t min_pending_response() const {
    std::int64_t m = INT64_MAX;
    for (std::size_t t = 0; t < threads_.size(); ++t) {
      if (pos_[t] < threads_[t].size()) m = std::min(m, threads_[t][pos_[t]].response);
    }
    return m;
  }

  CheckOptions options_;
  std::map<Point, std::uint32_t, PointLess> keys_;
  std::vector<std::vector<Ev>> threads_;
  std::vector<Hash128> key_zobrist_;
  std::vector<std::vector<Hash128>> pos_zobrist_;
  std::vector<std::uint8_t> present_;
  std::vector<std::size_t> pos_;
  Hash128 hash_;
  std::unordered_set<Hash128, Hash128Hasher> visited_;
  std::size_t total_ = 0;
};

}  // namespace detail

/// Searches for a total order of h that respects real-time precedence (an
/// event whose response precedes another's invocation stays before it) and
/// replays correctly from the key set `initial`. Throws
/// std::invalid_argument for malformed histories.
inline CheckResult check_history(const std::vector<HistoryEvent>& h,
                                 const std::vector<Point>& initial = {},
                                 CheckOptions options = {}) {
  validate_history(h);
  return detail::LinearizabilitySearch(h, initial, options).run();
}

inline bool check_linearizable(const std::vector<HistoryEvent>& h,
                               const std::vector<Point>& initial = {}) {
  return check_history(h, initial).linearizable;
}

}  // namespace quadboost::checker
