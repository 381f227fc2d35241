#pragma once

#include <algorithm>
#include <string>
#include <string_view>
#include <vector>

#include "kotta/error.hpp"
#include "kotta/market.hpp"
#include "kotta/sim_kernel.hpp"
#include "kotta/workload.hpp"

namespace kotta {

enum class ScalingStrategy { no_scaling, limited, unlimited };

inline std::string_view to_string(ScalingStrategy s) {
  switch (s) {
    case ScalingStrategy::no_scaling: return "no-scaling";
    case ScalingStrategy::limited: return "limited";
    case ScalingStrategy::unlimited: return "unlimited";
  }
  return "unknown";
}

inline ScalingStrategy parse_scaling_strategy(std::string_view s) {
  if (s == "no-scaling") return ScalingStrategy::no_scaling;
  if (s == "limited") return ScalingStrategy::limited;
  if (s == "unlimited") return ScalingStrategy::unlimited;
  throw ConfigError("unknown scaling strategy '" + std::string(s) + "'");
}

struct ScalingPolicy {
  ScalingStrategy strategy = ScalingStrategy::unlimited;
  // For no-scaling the pool size is max_size; min_size is ignored.
  std::size_t min_size = 0;
  std::size_t max_size = 0;
  QueueKind pool = QueueKind::production;
  Market market = Market::on_demand;
  AzScope az_scope = AzScope::single_az;
  SimTime idle_timeout = 55 * kMinute;
  BidPolicy bid;
  // Instances that fill the pool at t=0 are ready immediately.
  bool prewarm = true;

  std::size_t floor() const { return strategy == ScalingStrategy::no_scaling ? max_size : min_size; }

  void validate() const {
    if (pool == QueueKind::development && (floor() < 1 || market != Market::on_demand)) {
      throw ConfigError("development pool needs at least one on-demand instance");
    }
    if (strategy == ScalingStrategy::limited && max_size < min_size) {
      throw ConfigError("limited scaling needs max_size >= min_size");
    }
    if (strategy == ScalingStrategy::no_scaling && max_size == 0) {
      throw ConfigError("no-scaling needs a fixed pool size > 0");
    }
    if (idle_timeout < 0) throw ConfigError("idle timeout must be non-negative");
    if (market == Market::spot) bid.validate();
  }
};

struct IdleInstance {
  InstanceId id = 0;
  SimTime idle_since = 0;
};

struct PoolState {
  std::size_t provisioning = 0;
  std::size_t busy = 0;
  std::vector<IdleInstance> idle;

  std::size_t count() const noexcept { return provisioning + busy + idle.size(); }
};

struct ScalingAction {
  enum class Kind { provision, terminate };
  Kind kind = Kind::provision;
  InstanceId instance = 0;  // terminate only

  bool operator==(const ScalingAction&) const = default;
};

// One scaling decision for the current queue and pool.
//
// Waiting jobs are matched one-to-one against instances still provisioning;
// only unmatched jobs trigger new requests. Instances counted against a
// limit include those in flight.
inline std::vector<ScalingAction> react(const ScalingPolicy& policy, std::size_t queue_depth, const PoolState& pool,
                                        SimTime at) {
  std::vector<ScalingAction> actions;
  const std::size_t count = pool.count();
  const std::size_t floor = policy.floor();

  std::size_t want = 0;
  switch (policy.strategy) {
    case ScalingStrategy::no_scaling:
      want = count < policy.max_size ? policy.max_size - count : 0;
      break;
    case ScalingStrategy::unlimited:
    case ScalingStrategy::limited: {
      std::size_t unmatched = queue_depth > pool.provisioning ? queue_depth - pool.provisioning : 0;
      // Idle workers pick up queued jobs before scaling runs; any still idle
      // here will absorb that many waiting jobs.
      unmatched = unmatched > pool.idle.size() ? unmatched - pool.idle.size() : 0;
      want = unmatched;
      if (count + want < floor) want = floor - count;
      if (policy.strategy == ScalingStrategy::limited) {
        std::size_t room = count < policy.max_size ? policy.max_size - count : 0;
        want = std::min(want, room);
      }
      break;
    }
  }
  for (std::size_t i = 0; i < want; ++i) actions.push_back({ScalingAction::Kind::provision, 0});

  if (policy.strategy != ScalingStrategy::no_scaling && want == 0) {
    std::vector<IdleInstance> idle = pool.idle;
    std::sort(idle.begin(), idle.end(), [](const IdleInstance& a, const IdleInstance& b) {
      return a.idle_since != b.idle_since ? a.idle_since < b.idle_since : a.id < b.id;
    });
    std::size_t remaining = count;
    for (const auto& i : idle) {
      if (remaining <= floor) break;
      if (at - i.idle_since >= policy.idle_timeout) {
        actions.push_back({ScalingAction::Kind::terminate, i.id});
        --remaining;
      }
    }
  }
  return actions;
}

struct Placement {
  Location location;
  Market market = Market::on_demand;
};

// Spot requests go to the cheapest zone in the policy's scope; on-demand
// requests stay in the home zone.
inline Placement place(const JobSpec& /*job*/, const ScalingPolicy& policy, const MarketModel& market,
                       const std::string& instance_type, SimTime at) {
  if (policy.market == Market::on_demand) return {market.price_book().home, Market::on_demand};
  return {market.cheapest_az(policy.az_scope, instance_type, at).location, Market::spot};
}

}  // namespace kotta
