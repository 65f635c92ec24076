#pragma once

// CSV rendering of benchmark results. Numbers go through std::to_chars, so
// the output does not depend on the C locale.

#include <charconv>
#include <optional>
#include <string>
#include <vector>

#include "quadboost/bench/harness.hpp"

namespace quadboost::bench {

inline constexpr const char* kCsvHeader =
    "algo,threads,range,keys,mix,run,ops,ops_per_sec,median_ops_per_sec,internal_nodes,leaf_nodes,"
    "empty_nodes,seed";

namespace detail {

template <typename T>
void append_number(std::string& out, T value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, ptr);
}

inline void append_fixed(std::string& out, double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, 3);
  out.append(buf, ptr);
}

}  // namespace detail

/// One row per run and then a summary row (run column "median") per result.
/// Run rows leave the median column empty; the summary row leaves ops and
/// ops_per_sec empty and repeats the last run's node counts.
inline std::string emit_csv(const std::vector<BenchResult>& results) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const BenchResult& r : results) {
    std::string prefix(to_string(r.spec.algo));
    prefix += ',';
    detail::append_number(prefix, r.spec.threads);
    prefix += ',';
    detail::append_number(prefix, r.spec.range);
    prefix += ',';
    detail::append_number(prefix, r.spec.keys);
    prefix += ',';
    prefix += to_string(r.spec.mix);
    prefix += ',';

    auto nodes_and_seed = [&](const std::optional<checker::NodeCounts>& nodes) {
      std::string s;
      if (nodes) {
        detail::append_number(s, nodes->internal);
        s += ',';
        detail::append_number(s, nodes->leaf);
        s += ',';
        detail::append_number(s, nodes->empty);
      } else {
        s += ",,";
      }
      s += ',';
      detail::append_number(s, r.spec.seed);
      return s;
    };

    for (const RunResult& run : r.runs) {
      out += prefix;
      detail::append_number(out, run.index + 1);
      out += ',';
      detail::append_number(out, run.ops);
      out += ',';
      detail::append_fixed(out, run.ops_per_sec);
      out += ",,";
      out += nodes_and_seed(run.nodes);
      out += '\n';
    }
    out += prefix;
    out += "median,,,";
    detail::append_fixed(out, r.median_ops_per_sec);
    out += ',';
    out += nodes_and_seed(r.runs.empty() ? std::nullopt : r.runs.back().nodes);
    out += '\n';
  }
  return out;
}

}  // namespace quadboost::bench
