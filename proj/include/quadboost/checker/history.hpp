#pragma once

// Concurrent history recording and the newline-delimited JSON dump format.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "quadboost/checker/oracle.hpp"
#include "quadboost/geometry.hpp"

namespace quadboost::checker {

struct HistoryEvent {
  std::uint32_t thread = 0;
  OpType op = OpType::contain;
  Point key{};
  std::optional<Point> new_key;  // moves only
  bool result = false;
  std::int64_t invoke_ns = 0;
  std::int64_t response_ns = 0;

  friend bool operator==(const HistoryEvent&, const HistoryEvent&) = default;
};

inline std::int64_t now_ns() noexcept {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

/// One buffer per thread, written only by its owner; merge() after join.
class HistoryRecorder {
 public:
  explicit HistoryRecorder(std::size_t threads, std::size_t reserve_per_thread = 0)
      : logs_(threads) {
    for (auto& log : logs_) log.events.reserve(reserve_per_thread);
  }

  std::size_t threads() const { return logs_.size(); }

  /// Stamps, runs f() and appends the event. Stamps are bumped by a
  /// nanosecond where the clock did not advance, so they strictly increase
  /// within a thread.
  template <typename F>
  bool record(std::uint32_t thread, OpType op, Point key, std::optional<Point> new_key, F&& f) {
    Log& log = logs_.at(thread);
    HistoryEvent e;
    e.thread = thread;
    e.op = op;
    e.key = key;
    e.new_key = new_key;
    e.invoke_ns = std::max(now_ns(), log.last + 1);
    e.result = std::forward<F>(f)();
    e.response_ns = std::max(now_ns(), e.invoke_ns + 1);
    log.last = e.response_ns;
    log.events.push_back(e);
    return e.result;
  }

  /// All events ordered by invocation stamp; ties broken by thread id.
  std::vector<HistoryEvent> merge() const {
    std::vector<HistoryEvent> out;
    std::size_t n = 0;
    for (const auto& log : logs_) n += log.events.size();
    out.reserve(n);
    for (const auto& log : logs_) out.insert(out.end(), log.events.begin(), log.events.end());
    std::stable_sort(out.begin(), out.end(), [](const HistoryEvent& a, const HistoryEvent& b) {
      return std::tie(a.invoke_ns, a.thread) < std::tie(b.invoke_ns, b.thread);
    });
    return out;
  }

  const std::vector<HistoryEvent>& events(std::uint32_t thread) const {
    return logs_.at(thread).events;
  }

 private:
  struct Log {
    std::vector<HistoryEvent> events;
    std::int64_t last = 0;
  };
  std::vector<Log> logs_;
};

inline nlohmann::json to_json(const HistoryEvent& e) {
  nlohmann::json j;
  j["thread"] = e.thread;
  j["op"] = std::string(to_string(e.op));
  j["keyX"] = e.key.x;
  j["keyY"] = e.key.y;
  if (e.new_key) {
    j["newKeyX"] = e.new_key->x;
    j["newKeyY"] = e.new_key->y;
  }
  j["result"] = e.result;
  j["invoke_ns"] = e.invoke_ns;
  j["response_ns"] = e.response_ns;
  return j;
}

/// Throws std::invalid_argument naming the missing or mistyped field.
inline HistoryEvent event_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("record is not an object");
  auto field = [&j](const char* name) -> const nlohmann::json& {
    auto it = j.find(name);
    if (it == j.end()) throw std::invalid_argument(std::string("missing field '") + name + "'");
    return *it;
  };
  auto number = [&](const char* name) {
    const auto& v = field(name);
    if (!v.is_number()) throw std::invalid_argument(std::string("field '") + name + "' is not a number");
    return v.get<double>();
  };
  auto integer = [&](const char* name) {
    const auto& v = field(name);
    if (!v.is_number_integer()) {
      throw std::invalid_argument(std::string("field '") + name + "' is not an integer");
    }
    return v.get<std::int64_t>();
  };

  HistoryEvent e;
  const std::int64_t thread = integer("thread");
  if (thread < 0 || thread > static_cast<std::int64_t>(UINT32_MAX)) {
    throw std::invalid_argument("field 'thread' out of range");
  }
  e.thread = static_cast<std::uint32_t>(thread);
  const auto& op = field("op");
  if (!op.is_string()) throw std::invalid_argument("field 'op' is not a string");
  auto parsed = parse_op(op.get<std::string>());
  if (!parsed) throw std::invalid_argument("unknown op '" + op.get<std::string>() + "'");
  e.op = *parsed;
  e.key = {number("keyX"), number("keyY")};
  const bool has_x = j.contains("newKeyX");
  const bool has_y = j.contains("newKeyY");
  if (has_x != has_y) throw std::invalid_argument("newKeyX and newKeyY must appear together");
  if (has_x) e.new_key = Point{number("newKeyX"), number("newKeyY")};
  const auto& result = field("result");
  if (!result.is_boolean()) throw std::invalid_argument("field 'result' is not a boolean");
  e.result = result.get<bool>();
  e.invoke_ns = integer("invoke_ns");
  e.response_ns = integer("response_ns");
  return e;
}

inline void write_history(std::ostream& os, const std::vector<HistoryEvent>& events) {
  for (const auto& e : events) os << to_json(e).dump() << '\n';
}

/// Blank lines are skipped. Errors carry the 1-based line number.
inline std::vector<HistoryEvent> read_history(std::istream& is) {
  std::vector<HistoryEvent> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back(event_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& ex) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": " + ex.what());
    } catch (const std::invalid_argument& ex) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace quadboost::checker
