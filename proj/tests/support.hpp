#pragma once

#include <string>
#include <vector>

#include "kotta/kotta.hpp"

namespace kotta::testing {

inline std::string source_path(const std::string& rel) { return std::string(KOTTA_SOURCE_DIR) + "/" + rel; }

inline WorkloadParams standard_workload() {
  WorkloadParams p;
  p.job_count = 40;
  p.mean_inter_arrival_s = 360;
  p.duration_mix = {{3600, 0.4}, {10800, 0.2}, {14400, 0.4}};
  p.duration_jitter_fraction = 0.05;
  p.input_size_choices_gb = {1, 3, 5, 7, 9};
  p.owner_role = "kotta-read-WOS-private";
  p.input_prefix = "wos/";
  return p;
}

inline std::vector<Role> standard_roles() {
  return {{"task-executor", RoleKind::internal, true},
          {"web-server", RoleKind::internal, false},
          {"kotta-read-WOS-private", RoleKind::user, false},
          {"kotta-public-only", RoleKind::user, false}};
}

inline std::vector<Policy> standard_policies() {
  return {{"kotta-read-WOS-private", "wos/*", {Action::read}},
          {"kotta-read-WOS-private", "queue/production", {Action::submit}},
          {"kotta-public-only", "public/*", {Action::read, Action::download}}};
}

inline PriceBook on_demand_book() {
  PriceBook b;
  b.on_demand_usd_per_hour = {{"m4.xlarge", 0.239}};
  return b;
}

// The 40-job elastic experiment on m4.xlarge.
inline ElasticConfig standard_elastic(ScalingPolicy policy, std::uint64_t seed = 42) {
  ElasticConfig cfg;
  cfg.jobs = generate(standard_workload(), seed);
  cfg.policy = policy;
  cfg.prices = on_demand_book();
  cfg.seed = seed;
  cfg.roles = standard_roles();
  cfg.policies = standard_policies();
  return cfg;
}

inline ScalingPolicy unlimited(Market market = Market::on_demand) {
  ScalingPolicy p;
  p.strategy = ScalingStrategy::unlimited;
  p.market = market;
  return p;
}

inline ScalingPolicy fixed_pool(std::size_t n) {
  ScalingPolicy p;
  p.strategy = ScalingStrategy::no_scaling;
  p.min_size = p.max_size = n;
  return p;
}

inline ScalingPolicy limited(std::size_t max) {
  ScalingPolicy p;
  p.strategy = ScalingStrategy::limited;
  p.max_size = max;
  return p;
}

}  // namespace kotta::testing
