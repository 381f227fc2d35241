#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kotta/error.hpp"
#include "kotta/market.hpp"
#include "kotta/storage.hpp"

namespace kotta {

// One band of tiered per-GB pricing. `up_to_gb` is the cumulative upper bound
// of the band; the last band is open-ended.
struct RateBand {
  std::optional<double> up_to_gb;
  double usd_per_gb_month = 0;
};

struct StoragePrices {
  std::vector<RateBand> standard{{1000.0, 0.0300}, {std::nullopt, 0.0295}};
  double infrequent_usd_per_gb_month = 0.0125;
  double glacier_usd_per_gb_month = 0.007;
  double glacier_transfer_usd_per_gb = 0.01;
  double free_quota_fraction = 0.05;
  double retrieval_window_hours = 4;

  void validate() const {
    if (standard.empty()) throw ConfigError("standard storage needs at least one price band");
    double last = 0;
    for (std::size_t i = 0; i < standard.size(); ++i) {
      const auto& b = standard[i];
      if (b.usd_per_gb_month < 0) throw ConfigError("negative standard storage price");
      if (i + 1 < standard.size()) {
        if (!b.up_to_gb || *b.up_to_gb <= last) {
          throw ConfigError("standard price band limits must be strictly increasing");
        }
        last = *b.up_to_gb;
      } else if (b.up_to_gb) {
        throw ConfigError("last standard price band must be open-ended");
      }
    }
    if (infrequent_usd_per_gb_month < 0 || glacier_usd_per_gb_month < 0 || glacier_transfer_usd_per_gb < 0 ||
        free_quota_fraction < 0) {
      throw ConfigError("storage prices must be non-negative");
    }
    if (!(retrieval_window_hours > 0)) throw ConfigError("retrieval window must be positive");
  }

  double standard_monthly(double gb) const {
    double cost = 0;
    double lower = 0;
    for (const auto& b : standard) {
      if (gb <= lower) break;
      double upper = b.up_to_gb ? std::min(gb, *b.up_to_gb) : gb;
      cost += (upper - lower) * b.usd_per_gb_month;
      lower = upper;
    }
    return cost;
  }

  // Monthly cost of holding `gb` in `tier`. Objects in retrieval are billed as Glacier.
  double monthly(Tier tier, double gb) const {
    switch (tier) {
      case Tier::standard: return standard_monthly(gb);
      case Tier::infrequent: return gb * infrequent_usd_per_gb_month;
      case Tier::glacier:
      case Tier::retrieving: return gb * glacier_usd_per_gb_month;
    }
    return 0;
  }
};

inline double storage_year_cost(Tier tier, double gb, const StoragePrices& prices) {
  return prices.monthly(tier, gb) * 12;
}

struct RetrievalDemand {
  double peak_daily_gb = 0;
  double glacier_resident_gb = 0;
};

struct RetrievalCost {
  double peak_rate_gb_per_hour = 0;   // Tx_p
  double quota_rate_gb_per_hour = 0;  // Tx_q
  double monthly_usd = 0;
};

// Peak-rate Glacier retrieval charge. The free quota is the pro-rated daily
// share of the monthly free fraction spread over the retrieval window.
inline RetrievalCost glacier_retrieval_cost(const RetrievalDemand& demand, const StoragePrices& prices) {
  if (!(prices.retrieval_window_hours > 0)) throw ConfigError("retrieval window must be positive");
  if (demand.peak_daily_gb < 0 || demand.glacier_resident_gb < 0) throw ConfigError("negative retrieval demand");
  RetrievalCost c;
  c.peak_rate_gb_per_hour = demand.peak_daily_gb / prices.retrieval_window_hours;
  c.quota_rate_gb_per_hour =
      demand.glacier_resident_gb * prices.free_quota_fraction / (30.0 * prices.retrieval_window_hours);
  if (c.peak_rate_gb_per_hour >= c.quota_rate_gb_per_hour) {
    c.monthly_usd = (c.peak_rate_gb_per_hour - c.quota_rate_gb_per_hour) * prices.glacier_transfer_usd_per_gb * 720.0;
  }
  return c;
}

struct LifecycleCostInputs {
  double dataset_gb = 0;
  double hot_fraction = 0;
  TierPolicy policy;
};

// Yearly cost of a lifecycle policy over a dataset.
//
// Chains ending in Glacier are priced in steady state: the hot fraction of
// the data cycles through the non-terminal tiers, weighted by each tier's
// dwell days, and the cold remainder sits in Glacier. Chains without an
// archival tier are priced as a fresh upload cascading down the chain over
// the first year.
inline double lifecycle_year_cost(const LifecycleCostInputs& in, const StoragePrices& prices) {
  if (in.hot_fraction < 0 || in.hot_fraction > 1) throw ConfigError("hot fraction must lie in [0, 1]");
  if (in.dataset_gb < 0) throw ConfigError("negative dataset size");
  const auto& chain = in.policy.chain();
  if (chain.empty()) throw ConfigError("empty tier policy");
  const double size = in.dataset_gb;
  if (chain.size() == 1) return storage_year_cost(chain.front().tier, size, prices);

  if (in.policy.terminal() == Tier::glacier) {
    double weighted = 0;
    double days = 0;
    for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
      weighted += *chain[i].staleness_days * prices.monthly(chain[i].tier, size);
      days += *chain[i].staleness_days;
    }
    const double hot_monthly = weighted / days;
    const double monthly = hot_monthly * in.hot_fraction + prices.monthly(Tier::glacier, size) * (1 - in.hot_fraction);
    return monthly * 12;
  }

  double months_left = 12;
  double total = 0;
  for (std::size_t i = 0; i + 1 < chain.size() && months_left > 0; ++i) {
    double dwell = std::min(months_left, *chain[i].staleness_days / 30.0);
    total += dwell * prices.monthly(chain[i].tier, size);
    months_left -= dwell;
  }
  total += months_left * prices.monthly(in.policy.terminal(), size);
  return total;
}

struct EgressCostInputs {
  double instance_usd_per_hour = 0;
  double download_gb = 0;
  double upload_gb = 0;
  bool cross_region = false;
  double transfer_usd_per_gb = 0.020;
};

struct ProvisionCost {
  double transfer_usd = 0;
  double total_usd_per_hour = 0;
};

inline ProvisionCost provision_cost(const EgressCostInputs& in) {
  if (in.download_gb < 0 || in.upload_gb < 0) throw ConfigError("negative data volume");
  ProvisionCost c;
  c.transfer_usd = in.cross_region ? (in.download_gb + in.upload_gb) * in.transfer_usd_per_gb : 0.0;
  c.total_usd_per_hour = in.instance_usd_per_hour + c.transfer_usd;
  return c;
}

inline const std::vector<std::string>& provisioning_strategies() {
  static const std::vector<std::string> names{"cheapest-single-az", "most-expensive-single-az",
                                              "cheapest-within-region", "cheapest-across-regions"};
  return names;
}

struct StrategyCost {
  double data_gb = 0;
  std::string strategy;
  double monthly_usd = 0;
  // Hours in which the chosen zone was outside the data's home region.
  std::size_t remote_hours = 0;
};

// Runs a one-hour task every hour for `hours` hours under each instance
// selection strategy. Single-AZ strategies commit to one home-region zone
// for the whole period; the within/across strategies re-pick the cheapest
// spot zone each hour by instance price, then pay egress when the pick lies
// outside the home region. `data_gb` is the per-direction volume per task.
inline std::vector<StrategyCost> strategy_comparison(const PriceBook& book, const std::string& instance_type,
                                                     const std::vector<double>& data_grid_gb,
                                                     SimTime hours = 720) {
  MarketModel market(book, RngStream(0, "unused"));
  auto home_zones = market.zones_in_scope(AzScope::within_region);
  std::vector<Location> with_trace;
  for (const auto& z : home_zones) {
    if (book.trace(z, instance_type)) with_trace.push_back(z);
  }
  if (with_trace.empty()) throw ConfigError("no spot traces in the home region for " + instance_type);

  std::map<Location, double> zone_totals;
  double within_total = 0;
  double across_price_total = 0;
  std::size_t across_remote = 0;
  for (SimTime h = 0; h < hours; ++h) {
    const SimTime t = h * kHour;
    for (const auto& z : with_trace) zone_totals[z] += book.trace(z, instance_type)->price_at(t);
    within_total += market.cheapest_az(AzScope::within_region, instance_type, t).usd_per_hour;
    auto q = market.cheapest_az(AzScope::across_regions, instance_type, t);
    across_price_total += q.usd_per_hour;
    if (q.location.region != book.home.region) ++across_remote;
  }
  double cheapest_single = std::numeric_limits<double>::infinity();
  double priciest_single = -std::numeric_limits<double>::infinity();
  for (const auto& [_, total] : zone_totals) {
    cheapest_single = std::min(cheapest_single, total);
    priciest_single = std::max(priciest_single, total);
  }

  std::vector<StrategyCost> out;
  for (double gb : data_grid_gb) {
    if (gb < 0) throw ConfigError("negative data volume in grid");
    const double egress =
        provision_cost({0.0, gb, gb, true, book.transfer_usd_per_gb}).transfer_usd * static_cast<double>(across_remote);
    out.push_back({gb, "cheapest-single-az", cheapest_single, 0});
    out.push_back({gb, "most-expensive-single-az", priciest_single, 0});
    out.push_back({gb, "cheapest-within-region", within_total, 0});
    out.push_back({gb, "cheapest-across-regions", across_price_total + egress, across_remote});
  }
  return out;
}

inline CsvTable strategy_costs_csv(const std::vector<StrategyCost>& rows) {
  CsvTable t;
  t.header = {"data_gb", "strategy", "monthly_usd"};
  for (const auto& r : rows) t.rows.push_back({fixed(r.data_gb, 3), r.strategy, fixed(r.monthly_usd, 4)});
  return t;
}

}  // namespace kotta
