#include <gtest/gtest.h>

#include <algorithm>

#include "kotta/autoscaler.hpp"
#include "support.hpp"

namespace kotta {
namespace {

using testing::fixed_pool;
using testing::limited;
using testing::unlimited;

std::size_t count(const std::vector<ScalingAction>& actions, ScalingAction::Kind kind) {
  return static_cast<std::size_t>(
      std::count_if(actions.begin(), actions.end(), [kind](const ScalingAction& a) { return a.kind == kind; }));
}

PoolState pool(std::size_t provisioning, std::size_t busy, std::vector<IdleInstance> idle = {}) {
  return PoolState{provisioning, busy, std::move(idle)};
}

TEST(React, UnlimitedProvisionsOnePerWaitingJob) {
  auto a = react(unlimited(), 27, pool(0, 0), 0);
  EXPECT_EQ(a.size(), 27u);
  EXPECT_EQ(count(a, ScalingAction::Kind::provision), 27u);
}

TEST(React, ProvisioningInstancesAreMatchedToWaitingJobs) {
  EXPECT_EQ(react(unlimited(), 10, pool(4, 3), 0).size(), 6u);
  EXPECT_TRUE(react(unlimited(), 4, pool(4, 3), 0).empty());
  EXPECT_EQ(react(unlimited(), 5, pool(1, 0, {{9, 0}}), 10).size(), 3u);
}

TEST(React, FixedPoolOnlyFillsToSize) {
  EXPECT_EQ(react(fixed_pool(40), 0, pool(0, 0), 0).size(), 40u);
  for (std::size_t q : {0u, 1u, 27u, 500u}) {
    EXPECT_TRUE(react(fixed_pool(40), q, pool(0, 40), 0).empty());
    std::vector<IdleInstance> idle;
    for (InstanceId i = 1; i <= 40; ++i) idle.push_back({i, 0});
    EXPECT_TRUE(react(fixed_pool(40), q, pool(0, 0, idle), 100 * kDay).empty());
  }
}

TEST(React, LimitedStopsAtCap) {
  EXPECT_TRUE(react(limited(10), 15, pool(0, 10), 0).empty());
  EXPECT_EQ(react(limited(10), 15, pool(2, 5), 0).size(), 3u);
  EXPECT_EQ(react(limited(10), 3, pool(0, 5), 0).size(), 3u);
}

TEST(React, IdleInstancesPastTimeoutTerminateDownToFloor) {
  auto p = unlimited();
  p.min_size = 2;
  std::vector<IdleInstance> idle{{1, 0}, {2, 100}, {3, 200}, {4, 5000}};
  auto a = react(p, 0, pool(0, 0, idle), 55 * kMinute + 200);
  // Four alive, floor of two: the two longest-idle expired instances go.
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[0], (ScalingAction{ScalingAction::Kind::terminate, 1}));
  EXPECT_EQ(a[1], (ScalingAction{ScalingAction::Kind::terminate, 2}));
  EXPECT_TRUE(react(p, 0, pool(0, 0, idle), 55 * kMinute - 1).empty());
}

TEST(React, FloorIsRestored) {
  auto p = unlimited();
  p.min_size = 3;
  EXPECT_EQ(react(p, 0, pool(0, 1), 0).size(), 2u);
}

TEST(React, PoolBoundsHoldUnderRandomDemand) {
  RngStream rng(4, "demand");
  for (auto policy : {limited(10), limited(20), fixed_pool(20), unlimited()}) {
    policy.min_size = policy.strategy == ScalingStrategy::no_scaling ? policy.max_size : 2;
    PoolState s;
    InstanceId next = 1;
    for (SimTime t = 0; t < 2 * kDay; t += 60) {
      // Random churn: some provisioning instances come up, some busy ones finish.
      if (s.provisioning && rng.bernoulli(0.3)) {
        --s.provisioning;
        s.idle.push_back({next++, t});
      }
      if (s.busy && rng.bernoulli(0.3)) {
        --s.busy;
        s.idle.push_back({next++, t});
      }
      auto queue = rng.index(30);
      while (queue && !s.idle.empty()) {
        s.idle.pop_back();
        ++s.busy;
        --queue;
      }
      for (const auto& a : react(policy, queue, s, t)) {
        if (a.kind == ScalingAction::Kind::provision) {
          ++s.provisioning;
        } else {
          auto it = std::find_if(s.idle.begin(), s.idle.end(), [&](const IdleInstance& i) { return i.id == a.instance; });
          ASSERT_NE(it, s.idle.end());
          s.idle.erase(it);
        }
      }
      EXPECT_GE(s.count(), policy.floor());
      if (policy.strategy == ScalingStrategy::limited) {
        EXPECT_LE(s.count(), policy.max_size);
      }
      if (policy.strategy == ScalingStrategy::no_scaling) {
        EXPECT_EQ(s.count(), policy.max_size);
      }
    }
  }
}

TEST(ScalingPolicy, Validation) {
  auto dev = unlimited();
  dev.pool = QueueKind::development;
  EXPECT_THROW(dev.validate(), ConfigError);
  dev.min_size = 1;
  EXPECT_NO_THROW(dev.validate());
  dev.market = Market::spot;
  EXPECT_THROW(dev.validate(), ConfigError);

  auto lim = limited(2);
  lim.min_size = 3;
  EXPECT_THROW(lim.validate(), ConfigError);
  EXPECT_THROW(fixed_pool(0).validate(), ConfigError);
}

TEST(Place, OnDemandUsesHomeAndSpotFollowsScope) {
  PriceBook b;
  b.on_demand_usd_per_hour = {{"m4.xlarge", 0.239}};
  b.spot.emplace(TraceKey{"us-east-1", "us-east-1a", "m4.xlarge"}, SpotTrace({{0, 0.05}}));
  b.spot.emplace(TraceKey{"us-east-1", "us-east-1c", "m4.xlarge"}, SpotTrace({{0, 0.03}}));
  b.spot.emplace(TraceKey{"us-west-2", "us-west-2a", "m4.xlarge"}, SpotTrace({{0, 0.01}}));
  b.spot.emplace(TraceKey{"eu-west-1", "eu-west-1a", "m4.xlarge"}, SpotTrace({{0, 0.01}}));
  MarketModel m(b, RngStream(1, "provisioning"));
  JobSpec job;
  auto od = place(job, unlimited(), m, "m4.xlarge", 0);
  EXPECT_EQ(od.location, b.home);
  EXPECT_EQ(od.market, Market::on_demand);

  auto spot = unlimited(Market::spot);
  spot.az_scope = AzScope::single_az;
  EXPECT_EQ(place(job, spot, m, "m4.xlarge", 0).location, (Location{"us-east-1", "us-east-1a"}));
  spot.az_scope = AzScope::within_region;
  EXPECT_EQ(place(job, spot, m, "m4.xlarge", 0).location, (Location{"us-east-1", "us-east-1c"}));
  spot.az_scope = AzScope::across_regions;
  EXPECT_EQ(place(job, spot, m, "m4.xlarge", 0).location, (Location{"eu-west-1", "eu-west-1a"}));
}

}  // namespace
}  // namespace kotta
