#include <gtest/gtest.h>

#include <map>
#include <set>

#include "kotta/elastic_sim.hpp"
#include "support.hpp"

namespace kotta {
namespace {

using testing::fixed_pool;
using testing::limited;
using testing::standard_elastic;
using testing::unlimited;

const Location kHome{"us-east-1", "us-east-1a"};

void add_trace(ElasticConfig& cfg, std::vector<PricePoint> pts) {
  cfg.prices.spot.emplace(TraceKey{kHome.region, kHome.az, cfg.instance_type}, SpotTrace(std::move(pts)));
}

TEST(ElasticSimulation, EveryJobCompletesOnce) {
  for (auto policy : {unlimited(), fixed_pool(40), fixed_pool(20), limited(10), limited(20)}) {
    ElasticSimulation sim(standard_elastic(policy));
    auto r = sim.run();
    EXPECT_EQ(r.completed, 40u);
    for (const auto& [id, rec] : sim.job_manager().jobs()) {
      EXPECT_EQ(rec.history.count(JobState::completed), 1u) << id;
    }
  }
}

TEST(ElasticSimulation, TimeAccountingHasNoGaps) {
  ElasticSimulation sim(standard_elastic(limited(10)));
  auto r = sim.run();
  SimTime first = r.jobs.front().submit, last = 0;
  for (const auto& j : r.jobs) {
    EXPECT_EQ(j.wait + j.staging_in + j.running + j.staging_out, j.completion - j.submit) << j.id;
    first = std::min(first, j.submit);
    last = std::max(last, j.completion);
  }
  EXPECT_EQ(r.makespan, last - first);
}

TEST(ElasticSimulation, UnlimitedNeverLeavesWorkIdle) {
  ElasticSimulation sim(standard_elastic(unlimited()));
  auto r = sim.run();
  EXPECT_EQ(r.conservation_violations, 0u);
  EXPECT_EQ(r.resubmissions, 0u);
  EXPECT_EQ(r.peak_provisioned, r.instances.size());
}

TEST(ElasticSimulation, PoolBoundsHoldAtEverySample) {
  for (std::size_t cap : {10u, 20u}) {
    ElasticSimulation sim(standard_elastic(limited(cap)));
    auto r = sim.run();
    for (const auto& s : r.pool_samples) EXPECT_LE(s.provisioned, cap);
    EXPECT_EQ(r.peak_concurrency, cap);
  }
  ElasticSimulation fixed(standard_elastic(fixed_pool(20)));
  auto r = fixed.run();
  for (const auto& s : r.pool_samples) EXPECT_EQ(s.provisioned, 20u);
  EXPECT_EQ(r.instances.size(), 20u);
}

TEST(ElasticSimulation, PrewarmedFixedPoolHasNoWait) {
  auto r = ElasticSimulation(standard_elastic(fixed_pool(40))).run();
  EXPECT_EQ(r.average_wait_s, 0);
  EXPECT_EQ(r.instances.size(), 40u);
}

TEST(ElasticSimulation, IdleInstancesAreReusedWithoutWaiting) {
  // Two short jobs far apart: the second finds the first's instance idle.
  auto cfg = standard_elastic(unlimited());
  cfg.jobs.resize(2);
  cfg.jobs[0].submit_time = 0;
  cfg.jobs[0].duration = 600;
  cfg.jobs[1].submit_time = 2000;
  cfg.jobs[1].duration = 600;
  auto r = ElasticSimulation(cfg).run();
  EXPECT_EQ(r.instances.size(), 1u);
  EXPECT_EQ(r.jobs[1].wait, 0);
  EXPECT_GT(r.jobs[0].wait, 0);
}

TEST(ElasticSimulation, IdleTimeoutReleasesInstances) {
  auto cfg = standard_elastic(unlimited());
  cfg.jobs.resize(2);
  cfg.jobs[0].submit_time = 0;
  cfg.jobs[0].duration = 600;
  cfg.jobs[1].submit_time = 5 * kHour;
  cfg.jobs[1].duration = 600;
  ElasticSimulation sim(cfg);
  auto r = sim.run();
  ASSERT_EQ(r.instances.size(), 2u);
  const auto& first = r.instances[0].instance;
  ASSERT_TRUE(first.terminate_time);
  EXPECT_EQ(first.state, InstanceState::terminated);
  EXPECT_LT(*first.terminate_time, 5 * kHour);
  EXPECT_GE(*first.terminate_time - r.jobs[0].completion, 55 * kMinute);
  EXPECT_LT(*first.terminate_time - r.jobs[0].completion, 55 * kMinute + 60);
}

TEST(ElasticSimulation, RbacInvariants) {
  ElasticSimulation sim(standard_elastic(unlimited()));
  auto r = sim.run();
  const auto& audit = sim.rbac().audit();
  EXPECT_EQ(audit.size(), sim.rbac().decisions());
  EXPECT_EQ(r.audit_allow + r.audit_deny, audit.size());
  std::set<std::string> assumed_by;
  for (const auto& a : audit) {
    EXPECT_EQ(a.decision == Decision::allow, sim.rbac().permits(a.acting_role, a.resource, a.action) ||
                                                 (a.action == Action::assume_role && a.acting_role == "task-executor"));
    if (a.action == Action::assume_role && a.decision == Decision::allow) assumed_by.insert(a.principal);
    if (a.resource.rfind("wos/", 0) == 0 && a.decision == Decision::allow) {
      EXPECT_NE(a.acting_role, "task-executor");
      EXPECT_EQ(a.acting_role, "kotta-read-WOS-private");
      EXPECT_TRUE(assumed_by.count(a.principal)) << a.principal;
    }
  }
  // Submit, switch and staged read per job.
  EXPECT_EQ(audit.size(), 3 * 40u);
}

TEST(ElasticSimulation, FlatSpotCostsOneSixteenth) {
  auto cfg = standard_elastic(unlimited(Market::spot));
  add_trace(cfg, {{0, 0.239 / 16}});
  auto r = ElasticSimulation(cfg).run();
  EXPECT_NEAR(r.cost_usd / r.on_demand_cost_usd, 1.0 / 16, 1e-9);
  EXPECT_EQ(r.revocations, 0u);
}

TEST(ElasticSimulation, RevokedJobsAreResubmittedAndFinish) {
  auto cfg = standard_elastic(unlimited(Market::spot));
  add_trace(cfg, {{0, 0.02}, {2 * kHour, 5.0}, {2 * kHour + 300, 0.02}});
  ElasticSimulation sim(cfg);
  auto r = sim.run();
  EXPECT_EQ(r.completed, 40u);
  EXPECT_GT(r.revocations, 0u);
  EXPECT_GT(r.resubmissions, 0u);
  std::size_t completions = 0;
  for (const auto& row : r.job_events.rows) completions += row[1] == "completed";
  EXPECT_EQ(completions, 40u);
  for (const auto& ir : r.instances) {
    if (ir.instance.state == InstanceState::revoked) {
      EXPECT_EQ(*ir.instance.terminate_time, 2 * kHour);
      EXPECT_LT(ir.instance.launch_time, 2 * kHour);
    }
    EXPECT_FALSE(ir.instance.launch_time >= 2 * kHour && ir.instance.launch_time < 2 * kHour + 300);
  }
}

TEST(ElasticSimulation, GuardTripsWhenVirtualTimeRunsOut) {
  auto cfg = standard_elastic(limited(1));
  cfg.max_virtual_time = kDay;
  EXPECT_THROW(ElasticSimulation(cfg).run(), SimulationGuard);
}

TEST(ElasticSimulation, DeferredJobsWaitForRetrieval) {
  auto cfg = standard_elastic(unlimited());
  cfg.jobs.resize(3);
  for (auto& j : cfg.jobs) j.input_object = "wos/archive";
  cfg.objects = {{"wos/archive", 9, Tier::glacier, 0, "kotta-read-WOS-private", 0, std::nullopt}};
  ElasticSimulation sim(cfg);
  auto r = sim.run();
  EXPECT_EQ(r.completed, 3u);
  EXPECT_EQ(sim.store().retrievals_started(), 1u);
  EXPECT_EQ(sim.store().retrievals_completed(), 1u);
  for (const auto& [id, rec] : sim.job_manager().jobs()) {
    EXPECT_EQ(rec.history.count(JobState::waiting_for_retrieval), 1u);
    // Nothing was staged before the object landed.
    for (const auto& c : rec.history.changes()) {
      if (c.state == JobState::staging_in) {
        EXPECT_GE(c.at, 14400);
      }
    }
  }
}

TEST(ElasticSimulation, SameSeedSameReport) {
  auto a = ElasticSimulation(standard_elastic(unlimited(), 9)).run();
  auto b = ElasticSimulation(standard_elastic(unlimited(), 9)).run();
  EXPECT_EQ(to_csv(a.job_events), to_csv(b.job_events));
  EXPECT_EQ(to_csv(a.instances_csv()), to_csv(b.instances_csv()));
  EXPECT_EQ(to_csv(a.audit), to_csv(b.audit));
}

}  // namespace
}  // namespace kotta
