#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "kotta/cost_model.hpp"
#include "kotta/csv.hpp"
#include "kotta/sim_kernel.hpp"
#include "kotta/storage.hpp"

namespace kotta {

struct AccessEvent {
  SimTime at = 0;
  std::string object;
};

struct LifecycleSimConfig {
  std::vector<DataObject> objects;
  TierPolicy policy;
  StoragePrices prices;
  StagingModel staging;
  std::vector<AccessEvent> accesses;
  int days = 365;
};

struct LifecycleDay {
  int day = 0;
  double standard_gb = 0;
  double infrequent_gb = 0;
  double glacier_gb = 0;
  double retrieving_gb = 0;
  double cost_usd = 0;
};

struct LifecycleSimResult {
  std::vector<std::string> object_ids;
  // tiers[d][i]: tier of object_ids[i] right after the day-d lifecycle tick.
  std::vector<std::vector<Tier>> tiers;
  std::vector<LifecycleDay> days;
  double total_cost_usd = 0;
  std::size_t demotions = 0;
  std::size_t retrievals = 0;

  CsvTable daily_csv() const {
    CsvTable t;
    t.header = {"day", "std_gb", "ia_gb", "glacier_gb", "retrieving_gb", "cost_usd"};
    for (const auto& d : days) {
      t.rows.push_back({std::to_string(d.day), fixed(d.standard_gb, 3), fixed(d.infrequent_gb, 3),
                        fixed(d.glacier_gb, 3), fixed(d.retrieving_gb, 3), fixed(d.cost_usd, 6)});
    }
    return t;
  }
};

// Daily cost of the store's current tier occupancy, with the year spread
// evenly over 365 days.
inline double daily_storage_cost(const ObjectStore& store, const StoragePrices& prices) {
  double monthly = 0;
  for (Tier t : {Tier::standard, Tier::infrequent, Tier::glacier, Tier::retrieving}) {
    monthly += prices.monthly(t, store.gb_in(t));
  }
  return monthly * 12.0 / 365.0;
}

// Runs `days` days of lifecycle ticks (one at the start of each day) over a
// manifest while replaying data accesses. Glacier accesses start a
// retrieval that lands the object back in STD.
inline LifecycleSimResult run_lifecycle(const LifecycleSimConfig& cfg) {
  if (cfg.days <= 0) throw ConfigError("lifecycle simulation needs a positive number of days");
  ObjectStore store(cfg.staging);
  for (const auto& o : cfg.objects) store.add(o);
  LifecycleSimResult result;
  for (const auto& [id, _] : store.objects()) result.object_ids.push_back(id);

  Engine engine(false);
  for (int d = 0; d < cfg.days; ++d) {
    engine.schedule(static_cast<SimTime>(d) * kDay, EventKind::lifecycle_tick, static_cast<std::uint64_t>(d),
                    [&](const Event& ev) {
                      result.demotions += store.lifecycle_tick(cfg.policy, ev.fire_at).size();
                      LifecycleDay day;
                      day.day = static_cast<int>(ev.subject);
                      day.standard_gb = store.gb_in(Tier::standard);
                      day.infrequent_gb = store.gb_in(Tier::infrequent);
                      day.glacier_gb = store.gb_in(Tier::glacier);
                      day.retrieving_gb = store.gb_in(Tier::retrieving);
                      day.cost_usd = daily_storage_cost(store, cfg.prices);
                      result.total_cost_usd += day.cost_usd;
                      result.days.push_back(day);
                      std::vector<Tier> snapshot;
                      snapshot.reserve(result.object_ids.size());
                      for (const auto& [_, o] : store.objects()) snapshot.push_back(o.tier);
                      result.tiers.push_back(std::move(snapshot));
                    });
  }
  const SimTime horizon = static_cast<SimTime>(cfg.days) * kDay;
  for (std::size_t i = 0; i < cfg.accesses.size(); ++i) {
    const auto& a = cfg.accesses[i];
    if (a.at < 0 || a.at >= horizon) continue;
    engine.schedule(a.at, EventKind::job_arrival, i, [&, i](const Event& ev) {
      const auto& object = cfg.accesses[i].object;
      auto plan = store.request(object, ev.fire_at);
      if (auto* d = std::get_if<DeferredStaging>(&plan); d && d->started_retrieval) {
        ++result.retrievals;
        engine.schedule(d->ready_at, EventKind::retrieval_done, i,
                        [&store, object](const Event& e) { store.complete_retrieval(object, e.fire_at); });
      }
    });
  }
  engine.run_until(horizon - 1);
  return result;
}

// Manifest of `object_count` equal objects totalling `total_gb`; the first
// hot_fraction of them start in STD, the rest in Glacier.
inline std::vector<DataObject> make_lifecycle_manifest(double total_gb, std::size_t object_count, double hot_fraction,
                                                       const std::string& owner_role = "kotta-public-only") {
  if (object_count == 0) throw ConfigError("manifest needs at least one object");
  std::vector<DataObject> out;
  const auto hot = static_cast<std::size_t>(std::llround(hot_fraction * static_cast<double>(object_count)));
  const double size = total_gb / static_cast<double>(object_count);
  for (std::size_t i = 0; i < object_count; ++i) {
    char name[48];
    std::snprintf(name, sizeof name, "dataset/obj-%05zu", i);
    out.push_back(DataObject{name, size, i < hot ? Tier::standard : Tier::glacier, 0, owner_role, 0, std::nullopt});
  }
  return out;
}

// Seeded access pattern: every object that starts in STD is re-read at
// intervals drawn uniformly from [period_lo, period_hi] days, at a random
// second inside the day.
inline std::vector<AccessEvent> periodic_hot_accesses(const std::vector<DataObject>& objects, int period_lo_days,
                                                      int period_hi_days, int days, std::uint64_t seed) {
  if (period_lo_days <= 0 || period_hi_days < period_lo_days) throw ConfigError("bad access period range");
  RngStream rng(seed, "accesses");
  std::vector<AccessEvent> out;
  for (const auto& o : objects) {
    if (o.tier != Tier::standard) continue;
    int day = 0;
    while (true) {
      day += period_lo_days + static_cast<int>(rng.index(static_cast<std::size_t>(period_hi_days - period_lo_days + 1)));
      if (day >= days) break;
      SimTime second = 1 + static_cast<SimTime>(rng.index(kDay - 1));
      out.push_back({static_cast<SimTime>(day) * kDay + second, o.id});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const AccessEvent& a, const AccessEvent& b) { return a.at < b.at; });
  return out;
}

}  // namespace kotta
