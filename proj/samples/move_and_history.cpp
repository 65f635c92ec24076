// Several threads insert, remove and move keys on a small grid while every
// operation is recorded; the merged history is then checked offline.

#include <iostream>
#include <random>
#include <thread>
#include <vector>

#include "quadboost/checker/history.hpp"
#include "quadboost/checker/linearizability.hpp"
#include "quadboost/dictionary.hpp"

int main() {
  using namespace quadboost;
  using checker::OpType;

  auto tree = make_tree<int>(Variant::qb_s, 4);
  constexpr std::uint32_t kThreads = 3;
  checker::HistoryRecorder recorder(kThreads, 300);

  std::vector<std::thread> workers;
  for (std::uint32_t tid = 0; tid < kThreads; ++tid) {
    workers.emplace_back([&, tid] {
      std::mt19937 rng(tid);
      auto key = [&] { return Point{double(rng() % 4), double(rng() % 4)}; };
      for (int i = 0; i < 300; ++i) {
        const Point a = key();
        const Point b = key();
        switch (rng() % 3) {
          case 0:
            recorder.record(tid, OpType::insert, a, std::nullopt, [&] { return tree->insert(a, i); });
            break;
          case 1:
            recorder.record(tid, OpType::remove, a, std::nullopt, [&] { return tree->remove(a); });
            break;
          default:
            recorder.record(tid, OpType::move, a, b, [&] { return tree->move(a, b); });
        }
      }
    });
  }
  for (auto& w : workers) w.join();

  const auto history = recorder.merge();
  checker::write_history(std::cout, {history.begin(), history.begin() + 5});
  const auto result = checker::check_history(history);
  std::cout << history.size() << " events, "
            << (result.linearizable ? "linearizable" : "NOT linearizable") << " ("
            << result.states << " states)\n";
  return result.linearizable ? 0 : 1;
}
