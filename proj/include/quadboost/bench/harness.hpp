#pragma once

// Benchmark runner: prefill, timed or fixed-count concurrent runs, median
// throughput over the measurement runs, optional node counts and history.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <latch>
#include <memory>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "quadboost/bench/keys.hpp"
#include "quadboost/bench/workload.hpp"
#include "quadboost/checker/history.hpp"
#include "quadboost/checker/structure.hpp"
#include "quadboost/dictionary.hpp"
#include "quadboost/reclamation.hpp"

namespace quadboost::bench {

using Value = std::int64_t;

struct RunResult {
  unsigned index = 0;
  std::uint64_t ops = 0;
  double seconds = 0;
  double ops_per_sec = 0;
  std::size_t prefilled = 0;  // successful prefill inserts
  // Indexed by checker::OpType.
  std::array<std::uint64_t, 4> attempted{};
  std::array<std::uint64_t, 4> succeeded{};
  std::optional<checker::NodeCounts> nodes;
  std::optional<checker::StructureReport> structure;
  StatsSnapshot stats;
};

struct BenchResult {
  WorkloadSpec spec;
  std::vector<RunResult> runs;
  double median_ops_per_sec = 0;
  /// History mode: every event of the last run, prefill inserts included
  /// under thread id spec.threads.
  std::vector<checker::HistoryEvent> history;
};

/// Median of the runs after the first `warmup`.
inline double measured_median(const std::vector<RunResult>& runs, unsigned warmup) {
  std::vector<double> v;
  for (std::size_t i = warmup; i < runs.size(); ++i) v.push_back(runs[i].ops_per_sec);
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2;
}

inline std::size_t prefill_count(const WorkloadSpec& spec) {
  return static_cast<std::size_t>(std::ceil(spec.prefill * static_cast<double>(spec.keys)));
}

namespace detail {

inline RunResult run_once(const WorkloadSpec& spec, const std::vector<Point>& keys, unsigned index,
                          std::vector<checker::HistoryEvent>* history) {
  using checker::OpType;
  RunResult result;
  result.index = index;
  auto tree = make_tree<Value>(spec.algo, spec.range);

  std::unique_ptr<checker::HistoryRecorder> recorder;
  if (history != nullptr) {
    recorder = std::make_unique<checker::HistoryRecorder>(spec.threads + 1,
                                                          spec.ops_per_thread);
  }
  const std::size_t nprefill = std::min(prefill_count(spec), keys.size());
  for (std::size_t i = 0; i < nprefill; ++i) {
    const Point k = keys[i];
    auto op = [&] { return tree->insert(k, static_cast<Value>(i)); };
    const bool ok = recorder ? recorder->record(spec.threads, OpType::insert, k, std::nullopt, op)
                             : op();
    result.prefilled += ok ? 1 : 0;
  }

  struct alignas(64) Counters {
    std::uint64_t ops = 0;
    std::array<std::uint64_t, 4> attempted{};
    std::array<std::uint64_t, 4> succeeded{};
  };
  std::vector<Counters> counters(spec.threads);
  std::atomic<bool> stop{false};
  std::latch start(static_cast<std::ptrdiff_t>(spec.threads) + 1);
  const Mix mix = spec.mix;

  auto worker = [&](unsigned tid) {
    std::seed_seq seq{static_cast<std::uint64_t>(spec.seed ^ tid), static_cast<std::uint64_t>(index)};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<unsigned> pct(0, 99);
    std::uniform_int_distribution<std::size_t> pick(0, keys.size() - 1);
    Counters& c = counters[tid];
    Value next_value = static_cast<Value>(tid) << 40;
    start.arrive_and_wait();
    while (spec.ops_per_thread != 0 ? c.ops < spec.ops_per_thread
                                    : !stop.load(std::memory_order_relaxed)) {
      const unsigned roll = pct(rng);
      OpType op;
      if (roll < mix.insert) {
        op = OpType::insert;
      } else if (roll < mix.insert + mix.remove) {
        op = OpType::remove;
      } else if (roll < mix.insert + mix.remove + mix.contain) {
        op = OpType::contain;
      } else {
        op = OpType::move;
      }
      const Point k = keys[pick(rng)];
      std::optional<Point> nk;
      if (op == OpType::move) nk = keys[pick(rng)];
      const Value v = next_value++;
      auto body = [&]() -> bool {
        switch (op) {
          case OpType::insert: return tree->insert(k, v);
          case OpType::remove: return tree->remove(k);
          case OpType::contain: return tree->contains(k);
          case OpType::move: return tree->move(k, *nk);
        }
        return false;
      };
      const bool ok = recorder ? recorder->record(tid, op, k, nk, body) : body();
      const auto slot = static_cast<std::size_t>(op);
      ++c.attempted[slot];
      c.succeeded[slot] += ok ? 1 : 0;
      ++c.ops;
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(spec.threads);
  try {
    for (unsigned t = 0; t < spec.threads; ++t) pool.emplace_back(worker, t);
  } catch (...) {
    // Release the workers that did start, then let them see stop.
    stop.store(true);
    for (std::size_t i = pool.size(); i < spec.threads + 1u; ++i) start.count_down();
    for (auto& th : pool) th.join();
    throw;
  }
  start.arrive_and_wait();
  const auto t0 = std::chrono::steady_clock::now();
  if (spec.ops_per_thread == 0) {
    std::this_thread::sleep_for(std::chrono::milliseconds(spec.duration_ms));
    stop.store(true, std::memory_order_relaxed);
  }
  for (auto& th : pool) th.join();
  const auto t1 = std::chrono::steady_clock::now();

  for (const auto& c : counters) {
    result.ops += c.ops;
    for (std::size_t i = 0; i < 4; ++i) {
      result.attempted[i] += c.attempted[i];
      result.succeeded[i] += c.succeeded[i];
    }
  }
  result.seconds = std::chrono::duration<double>(t1 - t0).count();
  result.ops_per_sec = result.seconds > 0 ? static_cast<double>(result.ops) / result.seconds : 0;
  if (spec.mode == Mode::nodecount) result.nodes = checker::count_nodes(tree->root());
  if (spec.validate_structure) result.structure = checker::validate_structure(tree->root());
  result.stats = tree->stats();
  if (recorder) *history = recorder->merge();
  tree.reset();
  reclaim::drain();
  return result;
}

}  // namespace detail

/// Throws std::invalid_argument for an invalid spec.
inline BenchResult run_benchmark(const WorkloadSpec& spec) {
  validate(spec);
  BenchResult out;
  out.spec = spec;
  const std::vector<Point> keys = generate_keys(spec.range, spec.keys, spec.key_type, spec.seed);
  for (unsigned r = 0; r < spec.runs; ++r) {
    const bool last = r + 1 == spec.runs;
    std::vector<checker::HistoryEvent>* history =
        spec.mode == Mode::history && last ? &out.history : nullptr;
    out.runs.push_back(detail::run_once(spec, keys, r, history));
  }
  out.median_ops_per_sec = measured_median(out.runs, spec.warmup);
  return out;
}

}  // namespace quadboost::bench
