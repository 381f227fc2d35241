#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kotta/autoscaler.hpp"
#include "kotta/config_file.hpp"
#include "kotta/cost_model.hpp"
#include "kotta/csv.hpp"
#include "kotta/elastic_sim.hpp"
#include "kotta/error.hpp"
#include "kotta/job_manager.hpp"
#include "kotta/lifecycle_sim.hpp"
#include "kotta/market.hpp"
#include "kotta/rbac.hpp"
#include "kotta/storage.hpp"
#include "kotta/workload.hpp"

namespace kotta {

enum class ExperimentKind { elastic_scaling, storage_cost, throughput, cost_aware_provisioning, lifecycle_simulation };

inline std::string_view to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::elastic_scaling: return "elastic-scaling";
    case ExperimentKind::storage_cost: return "storage-cost";
    case ExperimentKind::throughput: return "throughput";
    case ExperimentKind::cost_aware_provisioning: return "cost-aware-provisioning";
    case ExperimentKind::lifecycle_simulation: return "lifecycle-simulation";
  }
  return "unknown";
}

inline ExperimentKind parse_experiment_kind(std::string_view s) {
  for (auto k : {ExperimentKind::elastic_scaling, ExperimentKind::storage_cost, ExperimentKind::throughput,
                 ExperimentKind::cost_aware_provisioning, ExperimentKind::lifecycle_simulation}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown experiment kind '" + std::string(s) + "'");
}

// Storage prices and compute market settings from a price file.
struct PriceFile {
  StoragePrices storage;
  PriceBook compute;
};

inline PriceFile parse_price_file(const ConfigFile& file) {
  PriceFile pf;
  const auto& s = file.section_or_empty("storage");
  if (s.has("std_band1_usd_per_gb_month")) {
    pf.storage.standard.clear();
    for (int n = 1;; ++n) {
      const std::string rate_key = "std_band" + std::to_string(n) + "_usd_per_gb_month";
      if (!s.has(rate_key)) break;
      const std::string limit_key = "std_band" + std::to_string(n) + "_up_to_gb";
      RateBand band;
      band.usd_per_gb_month = s.number(rate_key);
      if (s.has(limit_key)) band.up_to_gb = s.number(limit_key);
      pf.storage.standard.push_back(band);
    }
  }
  pf.storage.infrequent_usd_per_gb_month = s.number("ia_usd_per_gb_month", pf.storage.infrequent_usd_per_gb_month);
  pf.storage.glacier_usd_per_gb_month = s.number("glacier_usd_per_gb_month", pf.storage.glacier_usd_per_gb_month);
  pf.storage.glacier_transfer_usd_per_gb =
      s.number("glacier_transfer_usd_per_gb", pf.storage.glacier_transfer_usd_per_gb);
  pf.storage.free_quota_fraction = s.number("glacier_free_quota_fraction_per_month", pf.storage.free_quota_fraction);
  pf.storage.retrieval_window_hours = s.number("glacier_retrieval_window_hours", pf.storage.retrieval_window_hours);
  try {
    pf.storage.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(file.path() + ": " + e.what());
  }

  const auto& c = file.section_or_empty("compute");
  const std::string prefix = "on_demand_usd_per_hour.";
  for (const auto& e : c.entries()) {
    if (e.key.rfind(prefix, 0) == 0) {
      auto v = parse_double(e.value);
      if (!v || *v < 0) throw c.error_at(e, "bad on-demand price '" + e.value + "'");
      pf.compute.on_demand_usd_per_hour[e.key.substr(prefix.size())] = *v;
    }
  }
  pf.compute.transfer_usd_per_gb = c.number("transfer_usd_per_gb", pf.compute.transfer_usd_per_gb);
  pf.compute.billing_quantum = c.integer("billing_quantum_seconds", pf.compute.billing_quantum);
  if (const auto* e = c.find("provisioning_delay_seconds")) {
    try {
      pf.compute.provisioning_delay = DelayModel::parse(e->value);
    } catch (const ConfigError& err) {
      throw c.error_at(*e, err.what());
    }
  }
  pf.compute.home.region = c.string("home_region", pf.compute.home.region);
  pf.compute.home.az = c.string("home_az", pf.compute.home.az);
  try {
    pf.compute.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(file.path() + ": " + e.what());
  }
  return pf;
}

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<double> max_virtual_days;
  std::string out_dir;  // empty: do not write files
};

// A loaded and validated scenario file with every referenced input parsed.
struct Scenario {
  std::string path;
  std::string name;
  ExperimentKind kind = ExperimentKind::elastic_scaling;
  std::uint64_t seed = 1;
  double max_virtual_days = 30;
  ConfigFile file;
  PriceFile prices;
  std::map<TraceKey, SpotTrace> traces;
  std::vector<DataObject> manifest;
};

inline std::string resolve_relative(const std::string& scenario_path, const std::string& ref) {
  std::filesystem::path p(ref);
  if (p.is_absolute()) return ref;
  return (std::filesystem::path(scenario_path).parent_path() / p).lexically_normal().string();
}

inline Scenario load_scenario(const std::string& path) {
  Scenario sc;
  sc.path = path;
  sc.file = ConfigFile::load(path);
  const auto& s = sc.file.section("scenario");
  sc.name = s.string("name", std::filesystem::path(path).stem().string());
  {
    const auto& e = s.require("experiment");
    try {
      sc.kind = parse_experiment_kind(e.value);
    } catch (const ConfigError& err) {
      throw s.error_at(e, err.what());
    }
  }
  const auto seed = s.integer("seed", 1);
  if (seed < 0) throw s.error_at(s.require("seed"), "seed must be non-negative");
  sc.seed = static_cast<std::uint64_t>(seed);
  sc.max_virtual_days = s.number("max_virtual_days", 30);
  if (const auto* e = s.find("prices")) {
    sc.prices = parse_price_file(ConfigFile::load(resolve_relative(path, e->value)));
  }
  if (const auto* e = s.find("spot_traces")) {
    std::string p = resolve_relative(path, e->value);
    sc.traces = parse_spot_traces(read_csv_file(p), p);
    for (const auto& [k, t] : sc.traces) sc.prices.compute.spot.emplace(k, t);
  }
  if (const auto* e = s.find("manifest")) {
    std::string p = resolve_relative(path, e->value);
    sc.manifest = parse_manifest(read_csv_file(p), p);
  }
  return sc;
}

// Parses an enumerated value, reporting failures at the entry's line.
template <typename Parse>
auto parse_entry(const ConfigFile::Section& s, std::string_view key, const std::string& fallback, Parse parse) {
  const auto* e = s.find(key);
  if (!e) return parse(fallback);
  try {
    return parse(e->value);
  } catch (const ConfigError& err) {
    throw s.error_at(*e, err.what());
  }
}

inline WorkloadParams parse_workload(const ConfigFile::Section& w) {
  WorkloadParams p;
  const auto count = w.integer("job_count");
  if (count < 0) throw w.error_at(w.require("job_count"), "job_count must be non-negative");
  p.job_count = static_cast<std::size_t>(count);
  if (w.has("mean_inter_arrival_s")) {
    p.mean_inter_arrival_s = w.number("mean_inter_arrival_s");
  } else {
    double rate = w.number("arrival_rate_per_hour");
    if (!(rate > 0)) throw w.error_at(w.require("arrival_rate_per_hour"), "arrival rate must be positive");
    p.mean_inter_arrival_s = 3600.0 / rate;
  }
  const auto& mix = w.require("duration_mix");
  for (const auto& word : split_words(mix.value)) {
    auto colon = word.find(':');
    auto secs = colon == std::string::npos ? std::nullopt : parse_int(word.substr(0, colon));
    auto prob = colon == std::string::npos ? std::nullopt : parse_double(word.substr(colon + 1));
    if (!secs || !prob) throw w.error_at(mix, "duration_mix entries look like <seconds>:<probability>, got '" + word + "'");
    p.duration_mix.push_back({*secs, *prob});
  }
  p.duration_jitter_fraction = w.number("duration_jitter_fraction", 0);
  if (w.has("input_size_choices_gb")) p.input_size_choices_gb = w.numbers("input_size_choices_gb");
  p.output_gb = w.number("output_size_gb", 0);
  p.queue = parse_entry(w, "queue", "production", parse_queue_kind);
  p.owner_role = w.string("owner_role");
  p.input_prefix = w.string("input_prefix", p.input_prefix);
  try {
    p.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(w.name().empty() ? e.what() : "[" + w.name() + "] " + e.what());
  }
  return p;
}

inline ScalingPolicy parse_scaling(const ConfigFile::Section& s) {
  ScalingPolicy p;
  s.require("strategy");
  p.strategy = parse_entry(s, "strategy", "", parse_scaling_strategy);
  if (s.has("fixed_size")) {
    p.max_size = static_cast<std::size_t>(s.integer("fixed_size"));
    p.min_size = p.max_size;
  }
  for (const char* key : {"fixed_size", "min_size", "max_size", "idle_timeout_s"}) {
    if (s.has(key) && s.integer(key) < 0) throw s.error_at(s.require(key), std::string(key) + " must be non-negative");
  }
  p.min_size = static_cast<std::size_t>(s.integer("min_size", static_cast<std::int64_t>(p.min_size)));
  p.max_size = static_cast<std::size_t>(s.integer("max_size", static_cast<std::int64_t>(p.max_size)));
  p.pool = parse_entry(s, "pool", "production", parse_queue_kind);
  p.market = parse_entry(s, "market", "on-demand", parse_market);
  p.az_scope = parse_entry(s, "az_scope", "single-az", parse_az_scope);
  p.idle_timeout = s.integer("idle_timeout_s", p.idle_timeout);
  p.bid.kind = parse_entry(s, "bid_kind", "fraction-of-on-demand", BidPolicy::parse_kind);
  p.bid.value = s.number("bid_value", 1.0);
  p.prewarm = s.boolean("prewarm", true);
  try {
    p.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(s.error_at(s.require("strategy"), std::string("[scaling] ") + e.what()));
  }
  return p;
}

inline void parse_rbac(const ConfigFile::Section& r, std::vector<Role>& roles, std::vector<Policy>& policies) {
  for (const auto& e : r.all("role")) {
    auto w = split_words(e.value);
    if (w.size() < 2 || w.size() > 3 || (w[1] != "user" && w[1] != "internal") || (w.size() == 3 && w[2] != "trusted")) {
      throw r.error_at(e, "role lines look like '<name> <user|internal> [trusted]'");
    }
    roles.push_back({w[0], w[1] == "internal" ? RoleKind::internal : RoleKind::user, w.size() == 3});
  }
  for (const auto& e : r.all("allow")) {
    auto w = split_words(e.value);
    if (w.size() < 3) throw r.error_at(e, "allow lines look like '<role> <resource> <action>...'");
    Policy p{w[0], w[1], {}};
    for (std::size_t i = 2; i < w.size(); ++i) {
      try {
        p.actions.insert(parse_action(w[i]));
      } catch (const ConfigError& err) {
        throw r.error_at(e, err.what());
      }
    }
    policies.push_back(std::move(p));
  }
}

struct StorageCostRow {
  std::string strategy;
  double cost_usd_per_year = 0;
  std::optional<double> access_cost_usd_per_year;
  std::optional<SimTime> access_time;
};

struct ThroughputRow {
  std::size_t workers = 0;
  double model_tasks_per_s = 0;
  SimTime completion_s = 0;
  double simulated_tasks_per_s = 0;
};

struct ScenarioReport {
  std::string name;
  std::string path;
  ExperimentKind kind = ExperimentKind::elastic_scaling;
  std::uint64_t seed = 0;
  std::string strategy_label;
  std::optional<ElasticReport> elastic;
  std::vector<StorageCostRow> storage_rows;
  std::vector<ThroughputRow> throughput;
  std::vector<StrategyCost> strategy_costs;
  std::optional<double> crossover_gb;
  std::optional<LifecycleSimResult> lifecycle;
  double lifecycle_formula_usd = 0;
  // Output file name -> contents, written to the output directory if one is given.
  std::map<std::string, std::string> files;
  std::string summary;
};

inline std::string format_duration(double seconds) {
  auto total = static_cast<long long>(std::llround(seconds));
  char buf[48];
  std::snprintf(buf, sizeof buf, "%lld:%02lld:%02lld", total / 3600, (total % 3600) / 60, total % 60);
  return buf;
}

namespace detail {

inline std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

inline void run_elastic(const Scenario& sc, std::uint64_t seed, double max_days, ScenarioReport& rep) {
  const auto& f = sc.file;
  ElasticConfig cfg;
  WorkloadParams wp = parse_workload(f.section("workload"));
  cfg.jobs = generate(wp, seed);
  cfg.policy = parse_scaling(f.section("scaling"));
  if (cfg.policy.pool != wp.queue) throw ConfigError(sc.path + ": workload queue and scaling pool differ");
  cfg.prices = sc.prices.compute;
  const auto& scen = f.section("scenario");
  cfg.instance_type = scen.string("instance_type", "m4.xlarge");
  cfg.prices.on_demand(cfg.instance_type);
  const auto& st = f.section_or_empty("storage");
  cfg.staging.bandwidth_gb_per_s = st.number("bandwidth_gb_per_s", cfg.staging.bandwidth_gb_per_s);
  cfg.staging.glacier_retrieval_time = st.integer("glacier_retrieval_s", cfg.staging.glacier_retrieval_time);
  cfg.staging.validate();
  const auto& jm = f.section_or_empty("jobmgr");
  cfg.watcher_period = jm.integer("watcher_period_s", cfg.watcher_period);
  cfg.seed = seed;
  cfg.max_virtual_time = static_cast<SimTime>(std::llround(max_days * kDay));
  cfg.principal = f.section_or_empty("workload").string("principal", cfg.principal);
  cfg.worker_role = f.section_or_empty("rbac").string("worker_role", cfg.worker_role);
  parse_rbac(f.section_or_empty("rbac"), cfg.roles, cfg.policies);
  cfg.objects = sc.manifest;

  ElasticSimulation sim(std::move(cfg));
  ElasticReport r = sim.run();

  rep.strategy_label = scen.string("label", sc.name);
  rep.files["job_events.csv"] = to_csv(r.job_events);
  rep.files["jobs.csv"] = to_csv(r.jobs_csv());
  rep.files["costs.csv"] = to_csv(r.instances_csv());
  rep.files["audit.csv"] = to_csv(r.audit);

  std::string s;
  s += "experiment: elastic-scaling\n";
  s += "scenario: " + sc.name + "\n";
  s += "seed: " + std::to_string(seed) + "\n";
  s += "jobs completed: " + std::to_string(r.completed) + " / " + std::to_string(r.jobs.size()) + "\n";
  s += "makespan: " + format_duration(static_cast<double>(r.makespan)) + "\n";
  s += "cost (as provisioned): $" + fixed(r.cost_usd, 2) + "\n";
  s += "cost (on-demand equivalent): $" + fixed(r.on_demand_cost_usd, 2) + "\n";
  s += "average wait: " + format_duration(r.average_wait_s) + "\n";
  s += "peak wait: " + format_duration(static_cast<double>(r.peak_wait_s)) + "\n";
  s += "peak concurrent jobs: " + std::to_string(r.peak_concurrency) + "\n";
  s += "peak provisioned instances: " + std::to_string(r.peak_provisioned) + "\n";
  s += "instances launched: " + std::to_string(r.instances.size()) + "\n";
  s += "spot revocations: " + std::to_string(r.revocations) + "\n";
  s += "refused spot requests: " + std::to_string(r.failed_provisions) + "\n";
  s += "resubmissions: " + std::to_string(r.resubmissions) + "\n";
  s += "audit records: " + std::to_string(r.audit_allow + r.audit_deny) + " (allow " + std::to_string(r.audit_allow) +
       ", deny " + std::to_string(r.audit_deny) + ")\n";
  s += "broker operations: " + std::to_string(r.broker_reads) + " reads, " + std::to_string(r.broker_writes) + " writes\n";
  rep.summary = s;
  rep.elastic = std::move(r);
}

inline void run_storage_cost(const Scenario& sc, ScenarioReport& rep) {
  const auto& c = sc.file.section("storage_cost");
  const StoragePrices& prices = sc.prices.storage;
  const double size = c.number("dataset_gb", 10000);
  const double peak_daily = c.number("peak_daily_retrieval_gb", 300);
  const double glacier_fraction = c.number("glacier_access_fraction", 0.03);
  const auto two_tier = TierPolicy::parse(c.string("two_tier_policy", "STD30-IA"));
  const auto archive = TierPolicy::parse(c.string("archive_policy", "STD30-IA60-Glacier"));
  std::vector<double> hot = {0.03, 0.10};
  if (c.has("hot_fractions")) hot = c.numbers("hot_fractions");
  const auto window = static_cast<SimTime>(std::llround(prices.retrieval_window_hours * kHour));

  auto pct = [](double f) { return fixed(f * 100, 0) + "%"; };
  rep.storage_rows.push_back({"S3-Standard", storage_year_cost(Tier::standard, size, prices), std::nullopt, std::nullopt});
  rep.storage_rows.push_back(
      {"S3-Infrequent Access", storage_year_cost(Tier::infrequent, size, prices), std::nullopt, std::nullopt});
  rep.storage_rows.push_back({"Glacier (" + pct(glacier_fraction) + ")", storage_year_cost(Tier::glacier, size, prices),
                              glacier_retrieval_cost({peak_daily, size}, prices).monthly_usd * 12, window});
  rep.storage_rows.push_back(
      {two_tier.text(), lifecycle_year_cost({size, 0, two_tier}, prices), std::nullopt, std::nullopt});
  for (double a : hot) {
    rep.storage_rows.push_back({archive.text() + " (" + pct(a) + ")", lifecycle_year_cost({size, a, archive}, prices),
                                glacier_retrieval_cost({peak_daily, size * (1 - a)}, prices).monthly_usd * 12, window});
  }

  CsvTable t;
  t.header = {"strategy", "cost_usd_per_year", "access_cost_usd_per_year", "access_time"};
  std::string s = "experiment: storage-cost\nscenario: " + sc.name + "\ndataset: " + fixed(size, 0) + " GB\n\n";
  s += pad("Storage Strategy", 30) + pad("Cost", 12) + pad("Access cost", 14) + "Access time\n";
  for (const auto& r : rep.storage_rows) {
    std::string access = r.access_cost_usd_per_year ? fixed(*r.access_cost_usd_per_year, 2) : "NIL";
    std::string when = r.access_time ? fixed(static_cast<double>(*r.access_time) / kHour, 0) + "hours" : "NIL";
    t.rows.push_back({r.strategy, fixed(r.cost_usd_per_year, 2), access, when});
    s += pad(r.strategy, 30) + pad("$" + fixed(r.cost_usd_per_year, 2), 12) +
         pad(r.access_cost_usd_per_year ? "$" + access : access, 14) + when + "\n";
  }
  rep.files["storage_costs.csv"] = to_csv(t);
  rep.summary = s;
}

inline void run_throughput(const Scenario& sc, ScenarioReport& rep) {
  const auto& c = sc.file.section("throughput");
  const auto tasks = throughput_workload(static_cast<std::size_t>(c.integer("task_count", 10000)));
  const double rate = c.number("per_worker_tasks_per_s", 4.90);
  BrokerCapacity cap{c.number("broker_read_capacity", 100), c.number("broker_write_capacity", 400)};
  const auto writes = static_cast<unsigned>(c.integer("writes_per_task", 5));
  std::vector<double> workers = {1, 2, 4, 8, 16, 32};
  if (c.has("workers")) workers = c.numbers("workers");

  CsvTable t;
  t.header = {"workers", "model_tasks_per_s", "completion_s", "simulated_tasks_per_s"};
  std::string s = "experiment: throughput\nscenario: " + sc.name + "\ntasks: " + std::to_string(tasks.size()) + "\n\n";
  s += pad("workers", 10) + pad("model t/s", 12) + pad("completion", 14) + "simulated t/s\n";
  for (double w : workers) {
    if (w < 1) throw ConfigError(sc.path + ": worker counts must be >= 1");
    auto n = static_cast<std::size_t>(w);
    ThroughputRow row;
    row.workers = n;
    row.model_tasks_per_s = effective_throughput(n, rate, cap, writes);
    auto run = simulate_throughput(tasks, n, rate, cap, writes);
    row.completion_s = run.completion_s;
    row.simulated_tasks_per_s = run.tasks_per_s;
    rep.throughput.push_back(row);
    t.rows.push_back({std::to_string(n), fixed(row.model_tasks_per_s, 3), std::to_string(row.completion_s),
                      fixed(row.simulated_tasks_per_s, 3)});
    s += pad(std::to_string(n), 10) + pad(fixed(row.model_tasks_per_s, 2), 12) +
         pad(std::to_string(row.completion_s) + " s", 14) + fixed(row.simulated_tasks_per_s, 2) + "\n";
  }
  rep.files["throughput.csv"] = to_csv(t);
  rep.summary = s;
}

inline void run_cost_aware(const Scenario& sc, ScenarioReport& rep) {
  const auto& c = sc.file.section("cost_aware");
  const std::string type = c.string("instance_type", "c4.8xlarge");
  const auto grid = c.numbers("data_gb_grid");
  const SimTime hours = c.integer("hours", 720);
  PriceBook book = sc.prices.compute;
  if (book.spot.empty()) throw ConfigError(sc.path + ": cost-aware provisioning needs spot_traces");
  rep.strategy_costs = strategy_comparison(book, type, grid, hours);

  std::string s = "experiment: cost-aware-provisioning\nscenario: " + sc.name + "\ninstance type: " + type +
                  "\nhome region: " + book.home.region + "\nhours: " + std::to_string(hours) + "\n\n";
  s += pad("data GB", 10);
  for (const auto& name : provisioning_strategies()) s += pad(name, 27);
  s += "\n";
  for (std::size_t i = 0; i < rep.strategy_costs.size(); i += 4) {
    s += pad(fixed(rep.strategy_costs[i].data_gb, 1), 10);
    for (std::size_t k = 0; k < 4; ++k) s += pad("$" + fixed(rep.strategy_costs[i + k].monthly_usd, 2), 27);
    s += "\n";
    if (!rep.crossover_gb && rep.strategy_costs[i + 2].monthly_usd < rep.strategy_costs[i + 3].monthly_usd) {
      rep.crossover_gb = rep.strategy_costs[i].data_gb;
    }
  }
  s += "\nacross-regions choices outside the home region: " +
       std::to_string(rep.strategy_costs.empty() ? 0 : rep.strategy_costs[3].remote_hours) + " h\n";
  s += "home-region selection cheaper from: " + (rep.crossover_gb ? fixed(*rep.crossover_gb, 1) + " GB" : "never") + "\n";
  rep.files["strategy_costs.csv"] = to_csv(strategy_costs_csv(rep.strategy_costs));
  rep.summary = s;
}

inline void run_lifecycle_sim(const Scenario& sc, std::uint64_t seed, ScenarioReport& rep) {
  const auto& c = sc.file.section("lifecycle");
  LifecycleSimConfig cfg;
  cfg.policy = TierPolicy::parse(c.string("policy", "STD30-IA60-Glacier"));
  cfg.prices = sc.prices.storage;
  cfg.days = static_cast<int>(c.integer("days", 365));
  cfg.staging.glacier_retrieval_time = static_cast<SimTime>(std::llround(cfg.prices.retrieval_window_hours * kHour));
  if (!sc.manifest.empty()) {
    cfg.objects = sc.manifest;
  } else {
    cfg.objects = make_lifecycle_manifest(c.number("dataset_gb", 10000), static_cast<std::size_t>(c.integer("object_count", 1000)),
                                          c.number("hot_fraction", 0.03));
  }
  cfg.accesses = periodic_hot_accesses(cfg.objects, static_cast<int>(c.integer("access_period_min_days", 91)),
                                       static_cast<int>(c.integer("access_period_max_days", 97)), cfg.days, seed);
  double total = 0;
  double hot = 0;
  for (const auto& o : cfg.objects) {
    total += o.size_gb;
    if (o.tier == Tier::standard) hot += o.size_gb;
  }
  auto result = run_lifecycle(cfg);
  rep.lifecycle_formula_usd = lifecycle_year_cost({total, total > 0 ? hot / total : 0, cfg.policy}, cfg.prices);

  std::string s = "experiment: lifecycle-simulation\nscenario: " + sc.name + "\npolicy: " + cfg.policy.text() +
                  "\nobjects: " + std::to_string(cfg.objects.size()) + " (" + fixed(total, 0) + " GB, hot " +
                  fixed(hot, 0) + " GB)\ndays: " + std::to_string(cfg.days) + "\n";
  s += "accesses: " + std::to_string(cfg.accesses.size()) + "\n";
  s += "demotions: " + std::to_string(result.demotions) + "\n";
  s += "glacier retrievals: " + std::to_string(result.retrievals) + "\n";
  s += "simulated storage cost: $" + fixed(result.total_cost_usd, 2) + "\n";
  s += "closed-form lifecycle cost: $" + fixed(rep.lifecycle_formula_usd, 2) + "\n";
  s += "relative difference: " +
       fixed(100 * (result.total_cost_usd - rep.lifecycle_formula_usd) / rep.lifecycle_formula_usd, 2) + "%\n";
  rep.files["lifecycle_daily.csv"] = to_csv(result.daily_csv());
  rep.summary = s;
  rep.lifecycle = std::move(result);
}

}  // namespace detail

// Parses every experiment-specific setting without running anything.
inline void validate_scenario(const Scenario& sc) {
  const auto& f = sc.file;
  switch (sc.kind) {
    case ExperimentKind::elastic_scaling: {
      auto wp = parse_workload(f.section("workload"));
      auto policy = parse_scaling(f.section("scaling"));
      if (policy.pool != wp.queue) throw ConfigError(sc.path + ": workload queue and scaling pool differ");
      sc.prices.compute.on_demand(f.section("scenario").string("instance_type", "m4.xlarge"));
      std::vector<Role> roles;
      std::vector<Policy> policies;
      parse_rbac(f.section_or_empty("rbac"), roles, policies);
      Rbac rbac;
      for (auto& r : roles) rbac.add_role(std::move(r));
      for (auto& p : policies) rbac.add_policy(std::move(p));
      if (policy.market == Market::spot && sc.traces.empty()) throw ConfigError(sc.path + ": spot scaling needs spot_traces");
      break;
    }
    case ExperimentKind::storage_cost: {
      const auto& c = f.section("storage_cost");
      TierPolicy::parse(c.string("two_tier_policy", "STD30-IA"));
      TierPolicy::parse(c.string("archive_policy", "STD30-IA60-Glacier"));
      c.number("dataset_gb", 10000);
      c.number("peak_daily_retrieval_gb", 300);
      break;
    }
    case ExperimentKind::throughput: {
      const auto& c = f.section("throughput");
      if (c.integer("task_count", 10000) <= 0) throw ConfigError(sc.path + ": task_count must be positive");
      BrokerCapacity{c.number("broker_read_capacity", 100), c.number("broker_write_capacity", 400)}.validate();
      break;
    }
    case ExperimentKind::cost_aware_provisioning: {
      const auto& c = f.section("cost_aware");
      c.numbers("data_gb_grid");
      if (sc.traces.empty()) throw ConfigError(sc.path + ": cost-aware provisioning needs spot_traces");
      break;
    }
    case ExperimentKind::lifecycle_simulation: {
      const auto& c = f.section("lifecycle");
      TierPolicy::parse(c.string("policy", "STD30-IA60-Glacier"));
      if (c.integer("days", 365) <= 0) throw ConfigError(sc.path + ": days must be positive");
      break;
    }
  }
}

// Runs a scenario. The report and its files are a pure function of the
// scenario inputs and seed.
inline ScenarioReport run_scenario(const Scenario& sc, const RunOptions& opts = {}) {
  ScenarioReport rep;
  rep.name = sc.name;
  rep.path = sc.path;
  rep.kind = sc.kind;
  rep.seed = opts.seed.value_or(sc.seed);
  rep.strategy_label = sc.name;
  const double max_days = opts.max_virtual_days.value_or(sc.max_virtual_days);
  if (!(max_days > 0)) throw ConfigError("max virtual days must be positive");
  switch (sc.kind) {
    case ExperimentKind::elastic_scaling: detail::run_elastic(sc, rep.seed, max_days, rep); break;
    case ExperimentKind::storage_cost: detail::run_storage_cost(sc, rep); break;
    case ExperimentKind::throughput: detail::run_throughput(sc, rep); break;
    case ExperimentKind::cost_aware_provisioning: detail::run_cost_aware(sc, rep); break;
    case ExperimentKind::lifecycle_simulation: detail::run_lifecycle_sim(sc, rep.seed, rep); break;
  }
  rep.files["summary.txt"] = rep.summary;
  if (!opts.out_dir.empty()) {
    std::filesystem::create_directories(opts.out_dir);
    for (const auto& [name, content] : rep.files) {
      write_text_file((std::filesystem::path(opts.out_dir) / name).string(), content);
    }
  }
  return rep;
}

struct ComparisonRow {
  std::string label;
  std::uint64_t seed = 0;
  SimTime makespan = 0;
  double cost_usd = 0;
  double on_demand_usd = 0;
  double average_wait_s = 0;
  double savings_pct = 0;  // on-demand-equivalent cost vs the first row
};

struct Comparison {
  std::vector<ComparisonRow> rows;
  bool seeds_mismatched = false;

  CsvTable csv() const {
    CsvTable t;
    t.header = {"strategy", "seed", "makespan_s", "spot_cost_usd", "on_demand_cost_usd", "average_wait_s", "savings_pct"};
    for (const auto& r : rows) {
      t.rows.push_back({r.label, std::to_string(r.seed), std::to_string(r.makespan), fixed(r.cost_usd, 2),
                        fixed(r.on_demand_usd, 2), fixed(r.average_wait_s, 1), fixed(r.savings_pct, 2)});
    }
    return t;
  }

  std::string table() const {
    using detail::pad;
    std::string s = pad("Strategy", 26) + pad("Makespan", 12) + pad("Spot cost", 12) + pad("On-demand", 12) +
                    pad("Avg wait", 12) + "Savings\n";
    for (const auto& r : rows) {
      s += pad(r.label, 26) + pad(format_duration(static_cast<double>(r.makespan)), 12) + pad("$" + fixed(r.cost_usd, 2), 12) +
           pad("$" + fixed(r.on_demand_usd, 2), 12) + pad(format_duration(r.average_wait_s), 12) + fixed(r.savings_pct, 1) +
           "%\n";
    }
    if (seeds_mismatched) s += "warning: scenarios use different workload seeds\n";
    return s;
  }
};

inline Comparison compare_reports(const std::vector<ScenarioReport>& reports) {
  if (reports.size() < 2) throw ConfigError("compare needs at least two scenarios");
  Comparison c;
  for (const auto& r : reports) {
    if (!r.elastic) throw ConfigError("compare only supports elastic-scaling scenarios: " + r.path);
    const auto& e = *r.elastic;
    ComparisonRow row{r.strategy_label, r.seed, e.makespan, e.cost_usd, e.on_demand_cost_usd, e.average_wait_s, 0};
    c.rows.push_back(row);
    if (r.seed != reports.front().seed) c.seeds_mismatched = true;
  }
  const double base = c.rows.front().on_demand_usd;
  for (auto& row : c.rows) row.savings_pct = base > 0 ? 100.0 * (base - row.on_demand_usd) / base : 0;
  return c;
}

}  // namespace kotta
