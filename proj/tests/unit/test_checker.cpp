#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <thread>

#include "quadboost/checker/history.hpp"
#include "quadboost/checker/linearizability.hpp"
#include "quadboost/checker/oracle.hpp"
#include "quadboost/checker/structure.hpp"
#include "quadboost/dictionary.hpp"

using namespace quadboost;
using namespace quadboost::checker;

namespace {

HistoryEvent ev(std::uint32_t thread, OpType op, Point key, bool result, std::int64_t inv,
                std::int64_t resp, std::optional<Point> nk = std::nullopt) {
  HistoryEvent e;
  e.thread = thread;
  e.op = op;
  e.key = key;
  e.new_key = nk;
  e.result = result;
  e.invoke_ns = inv;
  e.response_ns = resp;
  return e;
}

const Point k1{1, 0};
const Point k2{2, 0};

}  // namespace

TEST(Oracle, Semantics) {
  OracleState<int> s;
  EXPECT_TRUE(s.insert(k1, 5));
  EXPECT_FALSE(s.insert(k1, 6));
  EXPECT_TRUE(s.move(k1, k2));
  EXPECT_EQ(s.lookup(k2), 5);
  EXPECT_FALSE(s.contains(k1));
  EXPECT_FALSE(s.move({7, 7}, {8, 8}));
  EXPECT_EQ(s.size(), 1u);
  EXPECT_FALSE(s.move(k2, k2));
  s.insert(k1, 1);
  EXPECT_FALSE(s.move(k1, k2));  // target occupied
  EXPECT_TRUE(s.remove(k1));
  EXPECT_FALSE(s.remove(k1));
}

TEST(Structure, FreshSkeletonPasses) {
  QuadboostTree<int, Variant::qb_o> t(16);
  const auto r = validate_structure(t.root());
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.counts, (NodeCounts{5, 0, 16}));
}

TEST(Structure, CorruptedLinkIsReportedWithPath) {
  QuadboostTree<int, Variant::qb_o> t(16);
  t.insert({1, 1}, 0);
  t.insert({12, 12}, 1);
  // Swap the two leaves: both keys now sit in the wrong quadrant.
  auto* nw = as_internal(t.root()->slot(Quadrant::nw).load());
  auto* se = as_internal(t.root()->slot(Quadrant::se).load());
  Node* a = nw->slot(Quadrant::nw).load();
  Node* b = se->slot(Quadrant::se).load();
  nw->slot(Quadrant::nw).store(b);
  se->slot(Quadrant::se).store(a);
  const auto r = validate_structure(t.root());
  EXPECT_FALSE(r.ok);
  ASSERT_FALSE(r.errors.empty());
  bool found = false;
  for (const auto& e : r.errors) found |= e.rfind("root/nw/nw", 0) == 0;
  EXPECT_TRUE(found) << r.summary();
  // Restore so the destructor sees a sane tree.
  nw->slot(Quadrant::nw).store(a);
  se->slot(Quadrant::se).store(b);
  EXPECT_TRUE(validate_structure(t.root()).ok);
}

TEST(Structure, SharedNodeIsReported) {
  QuadboostTree<int, Variant::qb_o> t(16);
  t.insert({1, 1}, 0);
  auto* nw = as_internal(t.root()->slot(Quadrant::nw).load());
  Node* leaf = nw->slot(Quadrant::nw).load();
  Node* displaced = nw->slot(Quadrant::ne).exchange(leaf);
  const auto r = validate_structure(t.root());
  EXPECT_FALSE(r.ok);
  nw->slot(Quadrant::ne).store(displaced);
}

TEST(Structure, ShapeIsOrderIndependent) {
  std::vector<Point> keys;
  for (int i = 0; i < 30; ++i) keys.push_back({double(i * 7 % 16), double(i * 11 % 16)});
  std::string first;
  std::mt19937 rng(1);
  for (int round = 0; round < 5; ++round) {
    std::shuffle(keys.begin(), keys.end(), rng);
    QuadboostTree<int, Variant::qb_s> t(16);
    for (Point p : keys) t.insert(p, 0);
    const std::string shape = canonical_shape(t.root());
    if (round == 0) first = shape;
    EXPECT_EQ(shape, first);
  }
}

TEST(Linearizability, SequentialHistoryPasses) {
  OracleState<int> o;
  std::vector<HistoryEvent> h;
  std::mt19937 rng(2);
  std::int64_t now = 0;
  for (int i = 0; i < 300; ++i) {
    const Point a{double(rng() % 3), 0};
    const Point b{double(rng() % 3), 1};
    const auto op = static_cast<OpType>(rng() % 4);
    const bool r = o.apply(op, a, b, i);
    h.push_back(ev(0, op, a, r, now, now + 1, op == OpType::move ? std::optional<Point>(b) : std::nullopt));
    now += 2;
  }
  EXPECT_TRUE(check_linearizable(h));
}

TEST(Linearizability, MoveAnomalyIsRejected) {
  const std::vector<HistoryEvent> h{
      ev(1, OpType::move, k1, true, 10, 40, k2),
      ev(2, OpType::insert, k1, true, 20, 30),
      ev(0, OpType::contain, k1, false, 50, 60),
      ev(0, OpType::contain, k2, true, 70, 80),
  };
  const auto r = check_history(h, {k1});
  EXPECT_FALSE(r.linearizable);
  // With a remove of k1 in between the same results are fine.
  auto fixed = h;
  fixed.push_back(ev(3, OpType::remove, k1, true, 41, 45));
  EXPECT_TRUE(check_linearizable(fixed, {k1}));
}

TEST(Linearizability, OverlappingDuplicateInsertsPass) {
  const std::vector<HistoryEvent> h{
      ev(0, OpType::insert, k1, true, 10, 30),
      ev(1, OpType::insert, k1, false, 5, 20),
  };
  EXPECT_TRUE(check_linearizable(h));
}

TEST(Linearizability, RealTimeOrderIsEnforced) {
  // insert(k1)=false strictly before insert(k1)=true on an empty set.
  const std::vector<HistoryEvent> h{
      ev(0, OpType::insert, k1, false, 1, 2),
      ev(1, OpType::insert, k1, true, 3, 4),
  };
  EXPECT_FALSE(check_linearizable(h));
}

TEST(Linearizability, LostUpdateIsRejected) {
  // Both removes of a single present key succeed.
  const std::vector<HistoryEvent> h{
      ev(0, OpType::remove, k1, true, 1, 10),
      ev(1, OpType::remove, k1, true, 2, 9),
  };
  EXPECT_FALSE(check_linearizable(h, {k1}));
  EXPECT_TRUE(check_linearizable({h[0]}, {k1}));
}

TEST(Linearizability, DoubleMoveOfOneKeyIsRejected) {
  const std::vector<HistoryEvent> h{
      ev(0, OpType::move, k1, true, 1, 10, k2),
      ev(1, OpType::move, k1, true, 2, 9, Point{3, 0}),
  };
  EXPECT_FALSE(check_linearizable(h, {k1}));
}

TEST(Linearizability, MalformedHistoriesThrow) {
  EXPECT_THROW(check_linearizable({ev(0, OpType::insert, k1, true, 5, 5)}), std::invalid_argument);
  EXPECT_THROW(check_linearizable({ev(0, OpType::move, k1, true, 1, 2)}), std::invalid_argument);
  EXPECT_THROW(check_linearizable({ev(0, OpType::insert, k1, true, 1, 2, k2)}),
               std::invalid_argument);
  EXPECT_THROW(check_linearizable({ev(0, OpType::insert, k1, true, 1, 5),
                                   ev(0, OpType::remove, k1, true, 3, 8)}),
               std::invalid_argument);
}

TEST(Linearizability, StateBudget) {
  std::vector<HistoryEvent> h;
  for (std::uint32_t t = 0; t < 6; ++t) h.push_back(ev(t, OpType::contain, k1, false, 1, 100));
  EXPECT_THROW(check_history(h, {}, CheckOptions{3}), std::runtime_error);
  EXPECT_TRUE(check_history(h).linearizable);
}

TEST(History, RecorderPreservesPerThreadOrder) {
  QuadboostTree<int, Variant::qb_o> t(8);
  HistoryRecorder rec(2, 100);
  std::vector<std::thread> pool;
  for (std::uint32_t tid = 0; tid < 2; ++tid) {
    pool.emplace_back([&, tid] {
      std::mt19937 rng(tid);
      for (int i = 0; i < 100; ++i) {
        const Point p{double(rng() % 8), double(rng() % 8)};
        rec.record(tid, OpType::insert, p, std::nullopt, [&] { return t.insert(p, i); });
      }
    });
  }
  for (auto& th : pool) th.join();
  const auto merged = rec.merge();
  EXPECT_EQ(merged.size(), 200u);
  for (std::uint32_t tid = 0; tid < 2; ++tid) {
    const auto& events = rec.events(tid);
    ASSERT_EQ(events.size(), 100u);
    for (std::size_t i = 0; i < events.size(); ++i) {
      EXPECT_LT(events[i].invoke_ns, events[i].response_ns);
      if (i > 0) {
        EXPECT_LT(events[i - 1].response_ns, events[i].invoke_ns);
      }
    }
  }
  EXPECT_TRUE(check_linearizable(merged));
}

TEST(History, DumpRoundTrips) {
  std::vector<HistoryEvent> h{
      ev(0, OpType::insert, {1.5, 2.25}, true, 10, 20),
      ev(3, OpType::move, {0.0001220703125, 7}, false, 15, 40, Point{3, 4}),
      ev(1, OpType::contain, {4294967295.0, 0}, false, 21, 22),
  };
  std::stringstream ss;
  write_history(ss, h);
  const std::string text = ss.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_EQ(text.find('\r'), std::string::npos);
  const auto back = read_history(ss);
  EXPECT_EQ(back, h);
}

TEST(History, ReaderReportsLineNumbers) {
  std::stringstream ss;
  ss << R"({"thread":0,"op":"insert","keyX":1,"keyY":1,"result":true,"invoke_ns":1,"response_ns":2})"
     << "\n\n"
     << R"({"thread":0,"op":"insert","keyX":1,"result":true,"invoke_ns":3,"response_ns":4})" << "\n";
  try {
    read_history(ss);
    FAIL() << "expected invalid_argument";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("keyY"), std::string::npos) << e.what();
  }
  std::stringstream bad("not json\n");
  EXPECT_THROW(read_history(bad), std::invalid_argument);
}
