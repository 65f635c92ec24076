#pragma once

// Benchmark workload description.

#include <charconv>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "quadboost/bench/keys.hpp"
#include "quadboost/variants.hpp"

namespace quadboost::bench {

/// Operation percentages; they sum to 100.
struct Mix {
  unsigned insert = 50;
  unsigned remove = 50;
  unsigned contain = 0;
  unsigned move = 0;

  unsigned total() const { return insert + remove + contain + move; }
  friend bool operator==(const Mix&, const Mix&) = default;
};

inline std::string to_string(const Mix& m) {
  return std::to_string(m.insert) + ":" + std::to_string(m.remove) + ":" +
         std::to_string(m.contain) + ":" + std::to_string(m.move);
}

/// Parses "I:R:C:M". Throws std::invalid_argument on bad syntax or a sum
/// other than 100.
inline Mix parse_mix(std::string_view s) {
  unsigned parts[4];
  std::size_t start = 0;
  for (int i = 0; i < 4; ++i) {
    const std::size_t end = i < 3 ? s.find(':', start) : s.size();
    if (end == std::string_view::npos) throw std::invalid_argument("mix must look like I:R:C:M");
    const std::string_view field = s.substr(start, end - start);
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), parts[i]);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty()) {
      throw std::invalid_argument("mix must look like I:R:C:M");
    }
    start = end + 1;
  }
  Mix m{parts[0], parts[1], parts[2], parts[3]};
  if (m.total() != 100) throw std::invalid_argument("mix percentages must sum to 100");
  return m;
}

enum class Mode : std::uint8_t { throughput, nodecount, history };

constexpr std::string_view to_string(Mode m) noexcept {
  switch (m) {
    case Mode::throughput: return "throughput";
    case Mode::nodecount: return "nodecount";
    case Mode::history: return "history";
  }
  return "?";
}

constexpr std::optional<Mode> parse_mode(std::string_view s) noexcept {
  if (s == "throughput") return Mode::throughput;
  if (s == "nodecount") return Mode::nodecount;
  if (s == "history") return Mode::history;
  return std::nullopt;
}

struct WorkloadSpec {
  Variant algo = Variant::qb_o;
  unsigned threads = 1;
  unsigned duration_ms = 1000;
  double range = 10;
  std::size_t keys = 100;
  KeyType key_type = KeyType::integer;
  Mix mix{};
  double prefill = 0.5;
  unsigned runs = 8;
  unsigned warmup = 3;
  std::uint64_t seed = 1;
  Mode mode = Mode::throughput;
  /// When nonzero each thread runs exactly this many operations instead of
  /// running for duration_ms.
  std::size_t ops_per_thread = 0;
  /// Run the structural validator on the quiescent tree after each run.
  bool validate_structure = false;
};

/// Throws std::invalid_argument describing the first problem found.
inline void validate(const WorkloadSpec& s) {
  if (s.threads == 0) throw std::invalid_argument("threads must be at least 1");
  if (s.mix.total() != 100) throw std::invalid_argument("mix percentages must sum to 100");
  if (s.algo == Variant::qc && s.mix.move != 0) {
    throw std::invalid_argument("qc has no move operation; move percentage must be 0");
  }
  if (!(s.prefill >= 0.0 && s.prefill <= 1.0)) throw std::invalid_argument("prefill must be in [0,1]");
  if (s.runs == 0) throw std::invalid_argument("runs must be at least 1");
  if (s.warmup >= s.runs) throw std::invalid_argument("warmup must be smaller than runs");
  if (s.keys == 0) throw std::invalid_argument("keys must be at least 1");
  if (s.ops_per_thread == 0 && s.duration_ms == 0) {
    throw std::invalid_argument("duration must be positive");
  }
  const auto side = static_cast<long double>(lattice_side(s.range, s.key_type));
  if (static_cast<long double>(s.keys) > side * side) {
    throw std::invalid_argument("more keys requested than distinct points in range");
  }
}

}  // namespace quadboost::bench
