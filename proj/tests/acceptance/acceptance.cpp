// Acceptance runner. Prints one PASS/FAIL/SKIP line per criterion and exits
// nonzero if any criterion failed.

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <sys/wait.h>

#include "quadboost/bench/harness.hpp"
#include "quadboost/bench/keys.hpp"
#include "quadboost/checker/history.hpp"
#include "quadboost/checker/linearizability.hpp"
#include "quadboost/checker/oracle.hpp"
#include "quadboost/checker/structure.hpp"
#include "quadboost/dictionary.hpp"
#include "quadboost/quadboost_tree.hpp"
#include "quadboost/reclamation.hpp"
#include "support/pause.hpp"
#include "support/perturb.hpp"

using namespace quadboost;
using checker::HistoryEvent;
using checker::OpType;
using Clock = std::chrono::steady_clock;

namespace {

// Pinned thresholds.
constexpr double kSuiteBudgetSec = 600;       // criterion 1
constexpr double kCompressBudgetSec = 60;     // criterion 4
constexpr double kQcOverQbsFactor = 2.0;      // criterion 4
constexpr double kProgressBudgetSec = 10;     // criterion 5
constexpr std::size_t kProgressOps = 1000;    // criterion 5
constexpr unsigned kProgressWorkers = 4;      // criterion 5
constexpr unsigned kScalingMinThreads = 8;    // criterion 6
constexpr double kScalingFactor = 3.0;        // criterion 6
constexpr double kQboOverQbfFactor = 1.0;     // criterion 6
constexpr double kMoveBudgetSec = 300;        // criterion 7
constexpr std::uint64_t kMoveOps = 1'000'000; // criterion 7

constexpr std::array kDescriptorVariants{Variant::qb_s, Variant::qb_o, Variant::qb_d,
                                         Variant::qb_f};

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fixed(double v, int digits = 1) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

// Lines are printed in criterion order once everything has run, so that
// criterion 3 can include the validations done by criterion 7.
struct Report {
  int failed = 0;
  std::map<int, std::string> lines;

  void line(int id, const char* name, bool pass, const std::string& detail) {
    failed += pass ? 0 : 1;
    add(id, pass ? "PASS" : "FAIL", name, detail);
  }
  void skip(int id, const char* name, const std::string& why) { add(id, "SKIP", name, why); }
  void print() const {
    for (const auto& [id, text] : lines) std::cout << text << '\n';
    std::cout << std::flush;
  }

 private:
  void add(int id, const char* verdict, const char* name, const std::string& detail) {
    lines[id] = std::string(verdict) + " [" + std::to_string(id) + "] " + name + ": " + detail;
    std::cerr << "criterion " << id << " done: " << verdict << std::endl;
  }
};

// Structure validations performed by criteria 1, 2 and 7, reported by 3.
struct StructureTally {
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::string first_error;

  void add(const checker::StructureReport& r, const std::string& where) {
    ++runs;
    if (r.ok) return;
    if (failures++ == 0) first_error = where + ": " + r.summary();
  }
};

StructureTally g_structure;

// Events whose interval overlaps an event of another thread.
std::size_t overlapping_events(std::vector<HistoryEvent> h) {
  std::sort(h.begin(), h.end(),
            [](const HistoryEvent& a, const HistoryEvent& b) { return a.invoke_ns < b.invoke_ns; });
  std::vector<bool> hit(h.size(), false);
  // Per thread: latest response seen so far and its event index.
  std::vector<std::pair<std::int64_t, std::size_t>> last;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i].thread >= last.size()) last.resize(h[i].thread + 1, {INT64_MIN, 0});
    for (std::size_t t = 0; t < last.size(); ++t) {
      if (t == h[i].thread || last[t].first <= h[i].invoke_ns) continue;
      hit[i] = true;
      hit[last[t].second] = true;
    }
    auto& mine = last[h[i].thread];
    if (h[i].response_ns > mine.first) mine = {h[i].response_ns, i};
  }
  return static_cast<std::size_t>(std::count(hit.begin(), hit.end(), true));
}

// ---------------------------------------------------------------------------
// Criterion 1

struct SuiteOutcome {
  std::size_t histories = 0;
  std::size_t violations = 0;
  std::size_t errors = 0;
  std::size_t events = 0;
  std::size_t overlapping = 0;
  std::string first_problem;
  double seconds = 0;
};

SuiteOutcome run_linearizability_suite(unsigned seeds) {
  SuiteOutcome out;
  const auto t0 = Clock::now();
  for (Variant v : kAllVariants) {
    std::vector<bench::Mix> mixes{bench::parse_mix("50:50:0:0")};
    if (v != Variant::qc) mixes.push_back(bench::parse_mix("10:10:0:80"));
    for (const bench::Mix& mix : mixes) {
      for (unsigned s = 1; s <= seeds; ++s) {
        bench::WorkloadSpec spec;
        spec.algo = v;
        spec.threads = 4;
        spec.ops_per_thread = 500;
        spec.range = 8;
        spec.keys = 64;
        spec.mix = mix;
        spec.prefill = 0.5;
        spec.runs = 1;
        spec.warmup = 0;
        spec.seed = s;
        spec.mode = bench::Mode::history;
        spec.validate_structure = true;
        const std::string where = std::string(to_string(v)) + " " + bench::to_string(mix) +
                                  " seed " + std::to_string(s);
        try {
          const bench::BenchResult r = bench::run_benchmark(spec);
          g_structure.add(*r.runs.back().structure, where);
          ++out.histories;
          out.events += r.history.size();
          out.overlapping += overlapping_events(r.history);
          if (!checker::check_linearizable(r.history)) {
            if (out.violations++ == 0 && out.first_problem.empty()) {
              out.first_problem = "not linearizable: " + where;
            }
          }
        } catch (const std::exception& e) {
          if (out.errors++ == 0 && out.first_problem.empty()) {
            out.first_problem = where + ": " + e.what();
          }
        }
      }
    }
  }
  out.seconds = since(t0);
  return out;
}

// ---------------------------------------------------------------------------
// Sequential sequences (criteria 2 and 8)

struct SeqOp {
  OpType op;
  Point key;
  Point new_key;
  bench::Value value;
};

std::vector<SeqOp> generate_ops(std::uint64_t seed, std::size_t n, bool with_move) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coord(0, 15);
  std::uniform_int_distribution<int> kind(0, with_move ? 3 : 2);
  std::vector<SeqOp> ops;
  ops.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    SeqOp o;
    o.op = static_cast<OpType>(kind(rng));
    o.key = Point{double(coord(rng)), double(coord(rng))};
    o.new_key = Point{double(coord(rng)), double(coord(rng))};
    o.value = static_cast<bench::Value>(i);
    ops.push_back(o);
  }
  return ops;
}

// Each op contributes its boolean result; contain also contributes the
// looked-up value (or -1).
template <typename Target>
std::vector<bench::Value> apply_ops(Target& t, const std::vector<SeqOp>& ops) {
  std::vector<bench::Value> out;
  out.reserve(ops.size() * 2);
  for (const SeqOp& o : ops) {
    switch (o.op) {
      case OpType::insert: out.push_back(t.insert(o.key, o.value)); break;
      case OpType::remove: out.push_back(t.remove(o.key)); break;
      case OpType::contain:
        out.push_back(t.contains(o.key));
        out.push_back(t.lookup(o.key).value_or(-1));
        break;
      case OpType::move: out.push_back(t.move(o.key, o.new_key)); break;
    }
  }
  return out;
}

std::vector<Point> sorted(std::vector<Point> v) {
  std::sort(v.begin(), v.end(), checker::PointLess{});
  return v;
}

struct SeqRun {
  std::vector<bench::Value> results;
  std::vector<Point> keys;
  checker::StructureReport report;
};

SeqRun run_sequence(Variant v, const std::vector<SeqOp>& ops) {
  SeqRun r;
  {
    auto tree = make_tree<bench::Value>(v, 16);
    r.results = apply_ops(*tree, ops);
    r.report = checker::validate_structure(tree->root());
    r.keys = sorted(r.report.keys);
  }
  reclaim::drain();
  return r;
}

// ---------------------------------------------------------------------------
// Criterion 5

struct ProgressOutcome {
  bool paused = false;
  bool finished_in_time = false;
  bool victim_held = false;  // victim still suspended when the workers finished
  bool victim_done = false;
  bool structure_ok = false;
  double seconds = 0;
  std::uint64_t helps = 0;
};

template <Variant Var>
ProgressOutcome progress_scenario(int flag_type) {
  using Tree = QuadboostTree<bench::Value, Var>;
  ProgressOutcome out;
  Tree t(16);
  std::vector<HookPoint> pause_at;
  std::function<bool()> victim_op;
  switch (flag_type) {
    case 0:
      pause_at = {HookPoint::substitute_flagged};
      victim_op = [&] { return t.insert({1, 1}, 1); };
      break;
    case 1:
      t.insert({0, 0}, 0);
      t.insert({1, 1}, 1);
      t.remove({1, 1});
      pause_at = {Var == Variant::qb_f ? HookPoint::coupled_first_flagged
                                       : HookPoint::compress_flagged};
      victim_op = [&] { return t.remove({0, 0}); };
      break;
    default:
      t.insert({15, 15}, 8);
      pause_at = {HookPoint::move_first_flagged};
      victim_op = [&] { return t.move({15, 15}, {0, 0}); };
      break;
  }

  auto& pauser = qbtest::Pauser::instance();
  qbtest::PauseScope scope;
  auto victim = std::async(std::launch::async, [&] {
    pauser.arm_self(pause_at);
    return victim_op();
  });
  out.paused = pauser.wait_paused();
  if (!out.paused) {
    pauser.release();
    victim.wait();
    return out;
  }

  const auto helps_before = t.stats().helps;
  std::atomic<bool> abort{false};
  std::atomic<unsigned> done{0};
  std::vector<std::thread> pool;
  const auto t0 = Clock::now();
  for (unsigned w = 0; w < kProgressWorkers; ++w) {
    pool.emplace_back([&, w] {
      std::mt19937_64 rng(1000 + w);
      std::uniform_int_distribution<int> coord(0, 15);
      std::uniform_int_distribution<int> kind(0, 3);
      for (std::size_t i = 0; i < kProgressOps && !abort.load(); ++i) {
        const Point k{double(coord(rng)), double(coord(rng))};
        switch (kind(rng)) {
          case 0: t.insert(k, static_cast<bench::Value>(i)); break;
          case 1: t.remove(k); break;
          case 2: t.contains(k); break;
          default: t.move(k, Point{double(coord(rng)), double(coord(rng))}); break;
        }
        if (i + 1 == kProgressOps) done.fetch_add(1);
      }
    });
  }
  // Joining happens after the deadline check, so a stuck worker cannot hang
  // the runner past a few multiples of the budget.
  while (done.load() < kProgressWorkers && since(t0) < 3 * kProgressBudgetSec) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  out.seconds = since(t0);
  out.finished_in_time = done.load() == kProgressWorkers && out.seconds <= kProgressBudgetSec;
  out.victim_held = pauser.paused();
  abort.store(true);
  for (auto& th : pool) th.join();
  out.helps = t.stats().helps - helps_before;

  pauser.release();
  out.victim_done = victim.wait_for(std::chrono::seconds(10)) == std::future_status::ready;
  if (out.victim_done) victim.get();
  out.structure_ok = checker::validate_structure(t.root()).ok;
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 7

struct MoveOutcome {
  std::uint64_t ops = 0;
  std::size_t rounds = 0;
  std::size_t structure_failures = 0;
  std::size_t checked = 0;
  std::size_t not_linearizable = 0;
  std::size_t inconclusive = 0;
  std::uint64_t moves_succeeded = 0;
  double seconds = 0;
  std::string first_problem;
};

MoveOutcome run_move_contention(std::uint64_t total_ops, unsigned threads, std::size_t per_thread,
                                std::size_t sample_every) {
  MoveOutcome out;
  const auto t0 = Clock::now();
  const std::vector<Point> grid = bench::generate_keys(4, 16, bench::KeyType::integer, 7);
  QuadboostTree<bench::Value, Variant::qb_o> tree(4);
  for (std::size_t i = 0; i < grid.size(); i += 2) tree.insert(grid[i], static_cast<bench::Value>(i));
  std::vector<Point> initial = checker::validate_structure(tree.root()).keys;

  for (std::size_t round = 0; out.ops < total_ops; ++round) {
    const bool sampled = round % sample_every == 0;
    std::optional<checker::HistoryRecorder> rec;
    if (sampled) rec.emplace(threads, per_thread);
    std::atomic<std::uint64_t> moved{0};
    std::vector<std::thread> pool;
    for (unsigned tid = 0; tid < threads; ++tid) {
      pool.emplace_back([&, tid] {
        std::mt19937_64 rng(round * 131 + tid);
        std::uniform_int_distribution<std::size_t> pick(0, grid.size() - 1);
        std::uniform_int_distribution<int> pct(0, 99);
        std::uint64_t local_moved = 0;
        for (std::size_t i = 0; i < per_thread; ++i) {
          const int roll = pct(rng);
          const Point k = grid[pick(rng)];
          OpType op = roll < 10 ? OpType::insert
                      : roll < 20 ? OpType::remove
                      : roll < 30 ? OpType::contain
                                  : OpType::move;
          std::optional<Point> nk;
          if (op == OpType::move) nk = grid[pick(rng)];
          const bench::Value v = static_cast<bench::Value>(i);
          auto body = [&]() -> bool {
            switch (op) {
              case OpType::insert: return tree.insert(k, v);
              case OpType::remove: return tree.remove(k);
              case OpType::contain: return tree.contains(k);
              case OpType::move: return tree.move(k, *nk);
            }
            return false;
          };
          const bool ok = rec ? rec->record(tid, op, k, nk, body) : body();
          if (op == OpType::move && ok) ++local_moved;
        }
        moved.fetch_add(local_moved);
      });
    }
    for (auto& th : pool) th.join();
    out.ops += std::uint64_t{threads} * per_thread;
    out.moves_succeeded += moved.load();
    ++out.rounds;

    const auto report = checker::validate_structure(tree.root());
    g_structure.add(report, "move round " + std::to_string(round));
    if (!report.ok) {
      if (out.structure_failures++ == 0 && out.first_problem.empty()) {
        out.first_problem = "round " + std::to_string(round) + ": " + report.summary();
      }
    }
    if (rec) {
      ++out.checked;
      try {
        checker::CheckOptions opts;
        opts.max_states = 50'000'000;
        if (!checker::check_history(rec->merge(), initial, opts).linearizable) {
          if (out.not_linearizable++ == 0 && out.first_problem.empty()) {
            out.first_problem = "round " + std::to_string(round) + " not linearizable";
          }
        }
      } catch (const std::exception& e) {
        ++out.inconclusive;
        if (out.first_problem.empty()) {
          out.first_problem = "round " + std::to_string(round) + ": " + e.what();
        }
      }
    }
    initial = report.keys;
  }
  out.seconds = since(t0);
  return out;
}

// ---------------------------------------------------------------------------
// Criterion 8

struct ChildOutcome {
  int status = -1;
  std::size_t tsan_reports = 0;
  std::size_t asan_reports = 0;
  std::size_t lsan_reports = 0;
  std::string output;
};

std::size_t count_occurrences(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

ChildOutcome run_child(const std::string& command) {
  ChildOutcome out;
  FILE* pipe = popen((command + " 2>&1").c_str(), "r");
  if (pipe == nullptr) return out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.output.append(buf, n);
  const int raw = pclose(pipe);
  out.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : 128 + WTERMSIG(raw);
  out.tsan_reports = count_occurrences(out.output, "WARNING: ThreadSanitizer");
  out.asan_reports = count_occurrences(out.output, "ERROR: AddressSanitizer");
  out.lsan_reports = count_occurrences(out.output, "ERROR: LeakSanitizer");
  return out;
}

std::string tail_lines(const std::string& s, std::size_t n) {
  std::size_t pos = s.size();
  for (std::size_t i = 0; i <= n && pos != std::string::npos && pos > 0; ++i) {
    pos = s.rfind('\n', pos - 1);
  }
  return pos == std::string::npos ? s : s.substr(pos + 1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadboost acceptance runner"};
  std::vector<int> only;
  unsigned seeds = 100;
  std::string log_dir = ".";
  bool no_perturb = false;
  app.add_option("--only", only, "run only these criteria")->check(CLI::Range(1, 8));
  app.add_option("--seeds", seeds, "seeds per configuration in criterion 1")
      ->check(CLI::PositiveNumber);
  app.add_option("--log-dir", log_dir, "where sanitizer child output is saved");
  app.add_flag("--no-perturb", no_perturb, "do not yield at hook points in criteria 1 and 7");
  CLI11_PARSE(app, argc, argv);

  auto enabled = [&](int id) {
    return only.empty() || std::find(only.begin(), only.end(), id) != only.end();
  };
  Report rep;
  std::cout << "reclamation mode: " << (reclaim::mode() == reclaim::Mode::epoch ? "epoch" : "leak")
            << ", hardware threads: " << std::thread::hardware_concurrency() << std::endl;

  // 1. Linearizability suite.
  if (enabled(1)) {
    qbtest::PerturbScope perturb(!no_perturb);
    const SuiteOutcome s = run_linearizability_suite(seeds);
    std::string detail = std::to_string(s.histories) + " histories, " +
                         std::to_string(s.violations) + " violations, " +
                         std::to_string(s.errors) + " errors, " + std::to_string(s.overlapping) +
                         "/" + std::to_string(s.events) + " events concurrent, " +
                         fixed(s.seconds) + " s (limit " +
                         fixed(kSuiteBudgetSec, 0) + " s)";
    if (!s.first_problem.empty()) detail += "; " + s.first_problem;
    rep.line(1, "linearizability suite", s.violations == 0 && s.errors == 0 &&
                                             s.seconds < kSuiteBudgetSec,
             detail);
  }

  // 2. Sequential oracle equivalence.
  if (enabled(2)) {
    constexpr std::size_t kOps = 10'000;
    constexpr std::uint64_t kSeeds = 5;
    std::size_t sequences = 0;
    std::size_t mismatches = 0;
    std::string first;
    for (Variant v : kAllVariants) {
      for (std::uint64_t seed = 1; seed <= kSeeds; ++seed) {
        const auto ops = generate_ops(seed, kOps, v != Variant::qc);
        checker::OracleState<bench::Value> oracle;
        const auto expected = apply_ops(oracle, ops);
        const SeqRun got = run_sequence(v, ops);
        g_structure.add(got.report, std::string(to_string(v)) + " sequence " + std::to_string(seed));
        ++sequences;
        if (got.results != expected || got.keys != sorted(oracle.keys())) {
          if (mismatches++ == 0) {
            first = std::string(to_string(v)) + " seed " + std::to_string(seed);
          }
        }
      }
    }
    std::string detail = std::to_string(sequences) + " sequences of " + std::to_string(kOps) +
                         " ops, " + std::to_string(mismatches) + " mismatching";
    if (!first.empty()) detail += " (first: " + first + ")";
    rep.line(2, "sequential oracle equivalence", mismatches == 0, detail);
  }

  // 4. Compression accounting.
  if (enabled(4)) {
    const auto t0 = Clock::now();
    const std::vector<Point> keys = bench::generate_keys(16, 10'000, bench::KeyType::floating, 4);
    checker::NodeCounts after;
    std::size_t inserted = 0;
    std::size_t removed = 0;
    {
      QuadboostTree<bench::Value, Variant::qb_s> t(16);
      for (Point k : keys) inserted += t.insert(k, 1);
      for (Point k : keys) removed += t.remove(k);
      after = checker::count_nodes(t.root());
    }
    reclaim::drain();
    const checker::NodeCounts expected{5, 0, 16};

    auto steady_internal = [](Variant v) {
      bench::WorkloadSpec spec;
      spec.algo = v;
      spec.threads = 1;
      spec.range = 64;
      spec.keys = 2000;
      spec.mix = bench::parse_mix("10:90:0:0");
      spec.prefill = 1.0;
      spec.runs = 1;
      spec.warmup = 0;
      spec.seed = 16;
      spec.mode = bench::Mode::nodecount;
      spec.ops_per_thread = 100'000;
      return bench::run_benchmark(spec).runs.back().nodes->internal;
    };
    const std::size_t qc_internal = steady_internal(Variant::qc);
    const std::size_t qbs_internal = steady_internal(Variant::qb_s);
    const double secs = since(t0);
    const bool counts_ok = after == expected && inserted == keys.size() && removed == keys.size();
    const bool ratio_ok = static_cast<double>(qc_internal) >=
                          kQcOverQbsFactor * static_cast<double>(qbs_internal);
    std::string detail = "qb-s after insert/remove of " + std::to_string(keys.size()) +
                         " float keys: (" + std::to_string(after.internal) + "," +
                         std::to_string(after.leaf) + "," + std::to_string(after.empty) +
                         ") expected (5,0,16); steady 10:90 internals qc " +
                         std::to_string(qc_internal) + " vs qb-s " + std::to_string(qbs_internal) +
                         " (ratio " +
                         fixed(qbs_internal ? double(qc_internal) / double(qbs_internal) : 0, 2) +
                         ", need >= " + fixed(kQcOverQbsFactor, 1) + "); " + fixed(secs) + " s";
    rep.line(4, "compression accounting", counts_ok && ratio_ok && secs < kCompressBudgetSec,
             detail);
  }

  // 5. Non-blocking progress.
  if (enabled(5)) {
    if constexpr (!kHooksEnabled) {
      rep.skip(5, "non-blocking progress", "built without QUADBOOST_HOOKS");
    } else {
      std::size_t scenarios = 0;
      std::size_t failures = 0;
      double worst = 0;
      std::uint64_t min_helps = UINT64_MAX;
      std::string first;
      const char* flag_names[] = {"substitute", "compress", "move"};
      for (Variant v : kDescriptorVariants) {
        for (int flag = 0; flag < 3; ++flag) {
          const ProgressOutcome o = visit_variant(v, [flag]<Variant Var>() {
            if constexpr (Var == Variant::qc) {
              return ProgressOutcome{};
            } else {
              return progress_scenario<Var>(flag);
            }
          });
          ++scenarios;
          worst = std::max(worst, o.seconds);
          min_helps = std::min(min_helps, o.helps);
          const bool ok = o.paused && o.finished_in_time && o.victim_held && o.victim_done &&
                          o.structure_ok && o.helps > 0;
          if (!ok && failures++ == 0) {
            first = std::string(to_string(v)) + "/" + flag_names[flag] +
                    " paused=" + std::to_string(o.paused) +
                    " in_time=" + std::to_string(o.finished_in_time) +
                    " held=" + std::to_string(o.victim_held) +
                    " victim_done=" + std::to_string(o.victim_done) +
                    " structure=" + std::to_string(o.structure_ok) +
                    " helps=" + std::to_string(o.helps);
          }
        }
      }
      std::string detail = std::to_string(scenarios) + " scenarios (qb-s/qb-o/qb-d/qb-f x " +
                           "substitute/compress/move; qb-f compress = coupled remove flag), " +
                           std::to_string(kProgressWorkers) + " workers x " +
                           std::to_string(kProgressOps) + " ops, slowest " + fixed(worst, 2) +
                           " s (limit " + fixed(kProgressBudgetSec, 0) + " s), fewest helps " +
                           std::to_string(min_helps) + ", " + std::to_string(failures) +
                           " failing";
      if (!first.empty()) detail += "; " + first;
      rep.line(5, "non-blocking progress", failures == 0, detail);
    }
  }

  // 6. Scalability trend.
  if (enabled(6)) {
    const unsigned hw = std::thread::hardware_concurrency();
    if (hw < kScalingMinThreads) {
      rep.skip(6, "scalability trend",
               "needs >= " + std::to_string(kScalingMinThreads) + " hardware threads, have " +
                   std::to_string(hw));
    } else {
      auto median = [](Variant v, unsigned threads, const char* mix) {
        bench::WorkloadSpec spec;
        spec.algo = v;
        spec.threads = threads;
        spec.range = 1024;
        spec.keys = 1'000'000;
        spec.mix = bench::parse_mix(mix);
        spec.duration_ms = 1000;
        spec.runs = 5;
        spec.warmup = 1;
        return bench::run_benchmark(spec).median_ops_per_sec;
      };
      const double one = median(Variant::qb_o, 1, "50:50:0:0");
      const double eight = median(Variant::qb_o, 8, "50:50:0:0");
      const double qbo = median(Variant::qb_o, hw, "10:90:0:0");
      const double qbf = median(Variant::qb_f, hw, "10:90:0:0");
      const double scale = one > 0 ? eight / one : 0;
      const double rel = qbf > 0 ? qbo / qbf : 0;
      rep.line(6, "scalability trend", scale >= kScalingFactor && rel >= kQboOverQbfFactor,
               "qb-o 8t/1t " + fixed(scale, 2) + " (need >= " + fixed(kScalingFactor, 1) +
                   "); qb-o/qb-f at " + std::to_string(hw) + "t on 10:90 " + fixed(rel, 2) +
                   " (need >= " + fixed(kQboOverQbfFactor, 1) + ")");
    }
  }

  // 7. Move correctness under contention.
  if (enabled(7)) {
    bool fixture_rejected = false;
    std::string fixture_note;
    try {
      std::ifstream in(std::string(QUADBOOST_TEST_DATA_DIR) + "/move_anomaly.ndjson");
      if (!in) throw std::runtime_error("cannot open move_anomaly.ndjson");
      fixture_rejected = !checker::check_linearizable(checker::read_history(in));
    } catch (const std::exception& e) {
      fixture_note = std::string("; fixture error: ") + e.what();
    }
    MoveOutcome m;
    {
      qbtest::PerturbScope perturb(!no_perturb);
      m = run_move_contention(kMoveOps, 8, 1250, 10);
    }
    std::string detail = std::string("anomaly fixture ") +
                         (fixture_rejected ? "rejected" : "NOT rejected") + fixture_note + "; " +
                         std::to_string(m.ops) + " ops in " + std::to_string(m.rounds) +
                         " rounds (" + std::to_string(m.moves_succeeded) + " successful moves), " +
                         std::to_string(m.structure_failures) + " validator failures, " +
                         std::to_string(m.checked) + " round histories checked, " +
                         std::to_string(m.not_linearizable) + " not linearizable, " +
                         std::to_string(m.inconclusive) + " inconclusive; " + fixed(m.seconds) +
                         " s (limit " + fixed(kMoveBudgetSec, 0) + " s)";
    if (!m.first_problem.empty()) detail += "; " + m.first_problem;
    rep.line(7, "move correctness under contention",
             fixture_rejected && m.structure_failures == 0 && m.not_linearizable == 0 &&
                 m.inconclusive == 0 && m.seconds < kMoveBudgetSec,
             detail);
  }

  // 3. Structural validation and shape determinism.
  if (enabled(3)) {
    const std::vector<Point> keys = bench::generate_keys(32, 200, bench::KeyType::integer, 42);
    std::size_t shape_mismatches = 0;
    std::size_t shape_invalid = 0;
    std::optional<std::string> reference;
    std::mt19937_64 rng(99);
    for (Variant v : kAllVariants) {
      for (int perm = 0; perm < 20; ++perm) {
        std::vector<Point> order = keys;
        std::shuffle(order.begin(), order.end(), rng);
        {
          auto tree = make_tree<bench::Value>(v, 32);
          for (Point k : order) tree->insert(k, 0);
          const auto report = checker::validate_structure(tree->root());
          if (!report.ok || report.keys.size() != keys.size()) ++shape_invalid;
          const std::string shape = checker::canonical_shape(tree->root());
          if (!reference) reference = shape;
          if (shape != *reference) ++shape_mismatches;
        }
        reclaim::drain();
      }
    }
    std::string detail = std::to_string(g_structure.runs) + " validated runs from criteria 1/2/7, " +
                         std::to_string(g_structure.failures) + " failing; 5 variants x 20 " +
                         "permutations of 200 keys, " + std::to_string(shape_mismatches) +
                         " shape mismatches, " + std::to_string(shape_invalid) + " invalid";
    if (!g_structure.first_error.empty()) detail += "; " + g_structure.first_error;
    rep.line(3, "structural validation", g_structure.failures == 0 && shape_mismatches == 0 &&
                                             shape_invalid == 0,
             detail);
  }

  // 8. Reclamation safety.
  if (enabled(8)) {
#if defined(QUADBOOST_SANITIZED_BUILD)
    rep.skip(8, "reclamation safety", "runs from the uninstrumented binary");
#else
    std::string detail;
    bool pass = true;
#if defined(QUADBOOST_ASAN_BINARY) && defined(QUADBOOST_TSAN_BINARY)
    const std::pair<const char*, std::string> children[] = {
        {"asan", std::string("ASAN_OPTIONS=detect_leaks=1:halt_on_error=0 ") +
                     QUADBOOST_ASAN_BINARY},
        {"tsan", std::string("TSAN_OPTIONS=halt_on_error=0:exitcode=66 ") +
                     QUADBOOST_TSAN_BINARY},
    };
    for (const auto& [name, bin] : children) {
      const auto t0 = Clock::now();
      const ChildOutcome c = run_child("QUADBOOST_RECLAIM=epoch " + bin + " --only 1 --seeds " +
                                       std::to_string(seeds));
      const std::string log = log_dir + "/acceptance_" + name + ".log";
      std::ofstream(log) << c.output;
      const std::size_t reports = c.tsan_reports + c.asan_reports + c.lsan_reports;
      const bool ok = c.status == 0 && reports == 0;
      pass = pass && ok;
      detail += std::string(name) + ": exit " + std::to_string(c.status) + ", " +
                std::to_string(reports) + " sanitizer reports, " + fixed(since(t0)) + " s; ";
      if (!ok) std::cout << tail_lines(c.output, 20) << std::flush;
    }
#else
    pass = false;
    detail += "sanitizer binaries not built (configure with QUADBOOST_BUILD_SANITIZED=ON); ";
#endif
    const reclaim::Mode saved = reclaim::mode();
    std::size_t compared = 0;
    std::size_t differing = 0;
    for (Variant v : kAllVariants) {
      for (std::uint64_t seed = 11; seed <= 13; ++seed) {
        const auto ops = generate_ops(seed, 10'000, v != Variant::qc);
        reclaim::set_mode(reclaim::Mode::leak);
        const SeqRun leak = run_sequence(v, ops);
        reclaim::set_mode(reclaim::Mode::epoch);
        const SeqRun epoch = run_sequence(v, ops);
        ++compared;
        if (leak.results != epoch.results || leak.keys != epoch.keys) ++differing;
      }
    }
    reclaim::set_mode(saved);
    pass = pass && differing == 0;
    detail += "leak vs epoch: " + std::to_string(compared) + " sequences, " +
              std::to_string(differing) + " differing";
    rep.line(8, "reclamation safety", pass, detail);
#endif
  }

  rep.print();
  if (rep.failed == 0) {
    std::cout << "all criteria passed or skipped" << std::endl;
  } else {
    std::cout << rep.failed << " criteria failed" << std::endl;
  }
  return rep.failed == 0 ? 0 : 1;
}
