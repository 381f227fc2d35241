#include <gtest/gtest.h>

#include "kotta/cost_model.hpp"

namespace kotta {
namespace {

const StoragePrices kPrices;

TEST(StorageYearCost, TableRows) {
  EXPECT_NEAR(storage_year_cost(Tier::standard, 10000, kPrices), 3546.0, 1e-9);
  EXPECT_NEAR(storage_year_cost(Tier::infrequent, 10000, kPrices), 1500.0, 1e-9);
  EXPECT_NEAR(storage_year_cost(Tier::glacier, 10000, kPrices), 840.0, 1e-9);
}

TEST(StorageYearCost, TieredStandardBands) {
  EXPECT_NEAR(kPrices.standard_monthly(500), 15.0, 1e-12);
  EXPECT_NEAR(kPrices.standard_monthly(1000), 30.0, 1e-12);
  EXPECT_NEAR(kPrices.standard_monthly(1001), 30.0295, 1e-12);
  EXPECT_EQ(kPrices.standard_monthly(0), 0.0);
}

TEST(StoragePrices, Validation) {
  StoragePrices p;
  p.standard = {{1000.0, 0.03}, {500.0, 0.02}, {std::nullopt, 0.01}};
  EXPECT_THROW(p.validate(), ConfigError);
  p.standard = {{1000.0, 0.03}};
  EXPECT_THROW(p.validate(), ConfigError);
  p = StoragePrices{};
  p.retrieval_window_hours = 0;
  EXPECT_THROW(p.validate(), ConfigError);
  EXPECT_NO_THROW(StoragePrices{}.validate());
}

TEST(GlacierRetrieval, PeakAboveQuota) {
  auto c = glacier_retrieval_cost({300, 10000}, kPrices);
  EXPECT_NEAR(c.peak_rate_gb_per_hour, 75.0, 1e-12);
  EXPECT_NEAR(c.quota_rate_gb_per_hour, 4.1667, 1e-4);
  EXPECT_NEAR(c.monthly_usd, (75.0 - 10000 * 0.05 / 120) * 0.01 * 720, 1e-9);
  EXPECT_NEAR(c.monthly_usd, 510.0, 1e-9);
}

TEST(GlacierRetrieval, PeakBelowQuotaIsFree) {
  EXPECT_EQ(glacier_retrieval_cost({10, 10000}, kPrices).monthly_usd, 0.0);
}

TEST(GlacierRetrieval, ContinuousAtTheBoundary) {
  // Tx_p == Tx_q when peak_daily == resident * 0.05 / 30.
  const double resident = 12000;
  const double boundary = resident * 0.05 / 30;
  EXPECT_NEAR(glacier_retrieval_cost({boundary, resident}, kPrices).monthly_usd, 0.0, 1e-9);
  EXPECT_NEAR(glacier_retrieval_cost({boundary * (1 + 1e-9), resident}, kPrices).monthly_usd, 0.0, 1e-6);
  EXPECT_EQ(glacier_retrieval_cost({boundary * (1 - 1e-9), resident}, kPrices).monthly_usd, 0.0);
}

TEST(GlacierRetrieval, Errors) {
  EXPECT_THROW(glacier_retrieval_cost({-1, 10}, kPrices), ConfigError);
  StoragePrices p;
  p.retrieval_window_hours = 0;
  EXPECT_THROW(glacier_retrieval_cost({1, 10}, p), ConfigError);
}

TEST(LifecycleYearCost, ArchiveChainTableRows) {
  auto policy = TierPolicy::parse("STD30-IA60-Glacier");
  // Hot data spends one month in STD and two in IA per three-month cycle.
  const double hot = (3546.0 + 2 * 1500.0) / 3;
  EXPECT_NEAR(lifecycle_year_cost({10000, 0.03, policy}, kPrices), hot * 0.03 + 840 * 0.97, 1e-9);
  EXPECT_NEAR(lifecycle_year_cost({10000, 0.03, policy}, kPrices), 880.26, 0.005);
  EXPECT_NEAR(lifecycle_year_cost({10000, 0.10, policy}, kPrices), 974.20, 0.005);
}

TEST(LifecycleYearCost, TwoTierChainCascades) {
  auto policy = TierPolicy::parse("STD30-IA");
  EXPECT_NEAR(lifecycle_year_cost({10000, 0, policy}, kPrices), (3546.0 + 11 * 1500.0) / 12, 1e-9);
  EXPECT_NEAR(lifecycle_year_cost({10000, 0, policy}, kPrices), 1670.50, 1e-9);
}

TEST(LifecycleYearCost, DegenerateChains) {
  EXPECT_NEAR(lifecycle_year_cost({10000, 0.5, TierPolicy::parse("Glacier")}, kPrices), 840, 1e-9);
  // All cold: pure Glacier; all hot: pure dwell-weighted hot blend.
  auto policy = TierPolicy::parse("STD30-IA60-Glacier");
  EXPECT_NEAR(lifecycle_year_cost({10000, 0, policy}, kPrices), 840, 1e-9);
  EXPECT_NEAR(lifecycle_year_cost({10000, 1, policy}, kPrices), 2182, 1e-9);
  EXPECT_THROW(lifecycle_year_cost({10000, 1.5, policy}, kPrices), ConfigError);
}

TEST(ProvisionCost, EgressOnlyAcrossRegions) {
  EXPECT_NEAR(provision_cost({0.3, 5, 5, true, 0.020}).transfer_usd, 0.20, 1e-12);
  EXPECT_NEAR(provision_cost({0.3, 5, 5, true, 0.020}).total_usd_per_hour, 0.50, 1e-12);
  EXPECT_EQ(provision_cost({0.3, 500, 500, false, 0.020}).transfer_usd, 0.0);
  EXPECT_EQ(provision_cost({0.3, 0, 0, true, 0.020}).transfer_usd, 0.0);
  EXPECT_THROW(provision_cost({0.3, -1, 0, true, 0.020}), ConfigError);
}

class StrategyComparison : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(StrategyComparison, ScopeAndEgressProperties) {
  TraceGenParams p;
  p.zones = default_trace_zones();
  PriceBook b;
  b.on_demand_usd_per_hour = {{p.instance_type, p.on_demand_usd_per_hour}};
  b.spot = generate_spot_traces(p, GetParam());
  const std::vector<double> grid{0, 0.5, 1, 2, 5, 10, 20, 50, 100, 500};
  auto rows = strategy_comparison(b, p.instance_type, grid);
  ASSERT_EQ(rows.size(), grid.size() * 4);
  auto cost = [&](std::size_t g, const std::string& name) {
    for (std::size_t k = 0; k < 4; ++k) {
      if (rows[g * 4 + k].strategy == name) return rows[g * 4 + k].monthly_usd;
    }
    ADD_FAILURE() << name;
    return 0.0;
  };
  EXPECT_LE(cost(0, "cheapest-across-regions"), cost(0, "cheapest-within-region") + 1e-9);
  EXPECT_LE(cost(0, "cheapest-within-region"), cost(0, "cheapest-single-az") + 1e-9);
  double last_advantage = 1e300;
  bool crossover = false;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    EXPECT_GE(cost(g, "most-expensive-single-az"), cost(g, "cheapest-single-az"));
    double advantage = cost(g, "cheapest-within-region") - cost(g, "cheapest-across-regions");
    EXPECT_LE(advantage, last_advantage + 1e-9);
    last_advantage = advantage;
    crossover |= advantage < 0;
  }
  EXPECT_TRUE(crossover);
}

INSTANTIATE_TEST_SUITE_P(Seeds, StrategyComparison, ::testing::Values(1u, 7u, 2016u, 31337u));

TEST(StrategyComparisonCsv, Header) {
  auto t = strategy_costs_csv({{1, "cheapest-single-az", 12.5, 0}});
  EXPECT_EQ(to_csv(t), "data_gb,strategy,monthly_usd\n1.000,cheapest-single-az,12.5000\n");
}

}  // namespace
}  // namespace kotta
