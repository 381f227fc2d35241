#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "kotta/sim_kernel.hpp"

namespace kotta {
namespace {

TEST(Engine, EarlierEventFiresFirst) {
  Engine e;
  std::vector<SimTime> fired;
  e.schedule(100, EventKind::job_arrival, 1, [&](const Event& ev) { fired.push_back(ev.fire_at); });
  e.schedule(50, EventKind::job_arrival, 2, [&](const Event& ev) { fired.push_back(ev.fire_at); });
  e.run();
  EXPECT_EQ(fired, (std::vector<SimTime>{50, 100}));
}

TEST(Engine, EqualTimesFireInSequenceOrder) {
  Engine e;
  std::vector<std::uint64_t> order;
  for (std::uint64_t i = 0; i < 10; ++i) {
    e.schedule(100, EventKind::watcher_tick, i, [&](const Event& ev) { order.push_back(ev.subject); });
  }
  e.run();
  for (std::uint64_t i = 0; i < 10; ++i) EXPECT_EQ(order[i], i);
  for (std::size_t i = 1; i < e.log().size(); ++i) EXPECT_LT(e.log()[i - 1].sequence, e.log()[i].sequence);
}

TEST(Engine, SchedulingInThePastIsRejected) {
  Engine e;
  e.run_until(20);
  EXPECT_THROW(e.schedule(10, EventKind::job_arrival, 0, nullptr), ClockViolation);
  EXPECT_NO_THROW(e.schedule(20, EventKind::job_arrival, 0, nullptr));
}

TEST(Engine, RunUntilOnEmptyQueueParksClock) {
  Engine e;
  EXPECT_EQ(e.run_until(1000), 0u);
  EXPECT_EQ(e.now(), 1000);
}

TEST(Engine, RunUntilLeavesLaterEvents) {
  Engine e;
  for (SimTime t : {1, 2, 3}) e.schedule(t, EventKind::job_arrival, 0, nullptr);
  EXPECT_EQ(e.run_until(2), 2u);
  EXPECT_EQ(e.pending(), 1u);
  EXPECT_EQ(e.next_fire_time(), 3);
}

TEST(Engine, HandlersMayScheduleAtTheCurrentTime) {
  Engine e;
  std::vector<int> seen;
  e.schedule(5, EventKind::job_arrival, 0, [&](const Event& ev) {
    seen.push_back(1);
    e.schedule(ev.fire_at, EventKind::job_finished, 0, [&](const Event&) { seen.push_back(2); });
  });
  e.schedule(5, EventKind::job_arrival, 0, [&](const Event&) { seen.push_back(3); });
  e.run();
  EXPECT_EQ(seen, (std::vector<int>{1, 3, 2}));
}

TEST(Engine, StopHaltsAfterCurrentHandler) {
  Engine e;
  int count = 0;
  for (int i = 0; i < 5; ++i) {
    e.schedule(i, EventKind::job_arrival, 0, [&](const Event&) {
      if (++count == 2) e.stop();
    });
  }
  e.run();
  EXPECT_EQ(count, 2);
  EXPECT_EQ(e.pending(), 3u);
}

TEST(Engine, NoEventIsLost) {
  Engine e;
  RngStream rng(3, "times");
  std::function<void(const Event&)> spawn = [&](const Event& ev) {
    if (rng.bernoulli(0.6)) e.schedule(ev.fire_at + static_cast<SimTime>(rng.index(50)), EventKind::job_arrival, 0, spawn);
  };
  for (int i = 0; i < 100; ++i) e.schedule(static_cast<SimTime>(rng.index(1000)), EventKind::job_arrival, 0, spawn);
  for (SimTime d = 0; d < 2000; d += 37) {
    e.run_until(d);
    EXPECT_EQ(e.scheduled_count(), e.processed_count() + e.pending());
  }
}

TEST(Engine, IdenticalRunsGiveIdenticalLogs) {
  auto run = [] {
    Engine e;
    RngStream rng(99, "arrivals");
    for (int i = 0; i < 200; ++i) {
      e.schedule(static_cast<SimTime>(rng.exponential(30)), EventKind::job_arrival, static_cast<std::uint64_t>(i), nullptr);
    }
    e.run();
    return e.log_text();
  };
  EXPECT_EQ(run(), run());
}

TEST(RngStream, SameSeedAndLabelRepeat) {
  RngStream a(7, "durations"), b(7, "durations");
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngStream, LabelsAreIndependent) {
  RngStream a(7, "durations"), b(7, "arrivals");
  int same = 0;
  for (int i = 0; i < 1000; ++i) same += a.next_u64() == b.next_u64();
  EXPECT_EQ(same, 0);
}

TEST(RngStream, KnownFirstDrawIsStable) {
  // Pins the stream derivation: a change here silently shifts every experiment.
  RngStream a(42, "arrivals");
  EXPECT_EQ(a.next_u64(), 897734321825947590ULL);
  EXPECT_NE(RngStream(43, "arrivals").next_u64(), 897734321825947590ULL);
}

TEST(RngStream, UniformAndIndexStayInRange) {
  RngStream r(1, "range");
  std::set<std::size_t> seen;
  for (int i = 0; i < 100000; ++i) {
    double u = r.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    auto k = r.index(5);
    ASSERT_LT(k, 5u);
    seen.insert(k);
  }
  EXPECT_EQ(seen.size(), 5u);
}

TEST(RngStream, ExponentialSampleMean) {
  RngStream r(11, "gaps");
  double sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += r.exponential(360);
  EXPECT_NEAR(sum / n, 360, 360 * 0.02);
}

}  // namespace
}  // namespace kotta
