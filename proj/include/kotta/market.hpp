#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kotta/config_file.hpp"
#include "kotta/csv.hpp"
#include "kotta/error.hpp"
#include "kotta/sim_kernel.hpp"

namespace kotta {

enum class Market { on_demand, spot };

inline std::string_view to_string(Market m) { return m == Market::spot ? "spot" : "on-demand"; }

inline Market parse_market(std::string_view s) {
  if (s == "on-demand") return Market::on_demand;
  if (s == "spot") return Market::spot;
  throw ConfigError("unknown market '" + std::string(s) + "'");
}

struct Location {
  std::string region;
  std::string az;

  auto operator<=>(const Location&) const = default;
  bool operator==(const Location&) const = default;
};

inline std::string to_string(const Location& l) { return l.region + "/" + l.az; }

struct TraceKey {
  std::string region;
  std::string az;
  std::string instance_type;

  auto operator<=>(const TraceKey&) const = default;
  bool operator==(const TraceKey&) const = default;

  Location location() const { return {region, az}; }
};

struct PricePoint {
  SimTime at = 0;
  double usd_per_hour = 0;
};

// Spot price history for one (region, AZ, type). The price holds constant
// between points; before the first point the first price applies.
class SpotTrace {
 public:
  SpotTrace() = default;
  explicit SpotTrace(std::vector<PricePoint> points) : points_(std::move(points)) { validate(); }

  void add(SimTime at, double price) {
    if (!points_.empty() && at <= points_.back().at) {
      throw ConfigError("spot trace timestamps must be strictly increasing (t=" + std::to_string(at) + ")");
    }
    if (price < 0) throw ConfigError("negative spot price at t=" + std::to_string(at));
    points_.push_back({at, price});
  }

  const std::vector<PricePoint>& points() const noexcept { return points_; }
  bool empty() const noexcept { return points_.empty(); }

  double price_at(SimTime t) const {
    if (points_.empty()) throw ConfigError("empty spot trace");
    auto it = std::upper_bound(points_.begin(), points_.end(), t,
                               [](SimTime v, const PricePoint& p) { return v < p.at; });
    if (it == points_.begin()) return points_.front().usd_per_hour;
    return std::prev(it)->usd_per_hour;
  }

  // First trace timestamp strictly after `after` whose price exceeds `bid`.
  std::optional<SimTime> first_crossing_after(SimTime after, double bid) const {
    auto it = std::upper_bound(points_.begin(), points_.end(), after,
                               [](SimTime v, const PricePoint& p) { return v < p.at; });
    for (; it != points_.end(); ++it) {
      if (it->usd_per_hour > bid) return it->at;
    }
    return std::nullopt;
  }

 private:
  void validate() const {
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (points_[i].usd_per_hour < 0) throw ConfigError("negative spot price in trace");
      if (i && points_[i].at <= points_[i - 1].at) {
        throw ConfigError("spot trace timestamps must be strictly increasing");
      }
    }
  }

  std::vector<PricePoint> points_;
};

// Provisioning delay distribution:
//   constant <s>
//   uniform <lo> <hi>
//   tailed <lo> <hi> <tail-probability> <tail-max>   (uniform, with a
//       tail-probability chance of a draw from [hi, tail-max] instead)
struct DelayModel {
  enum class Kind { constant, uniform, tailed };
  Kind kind = Kind::uniform;
  double lo = 240;
  double hi = 720;
  double tail_probability = 0;
  double tail_max = 0;

  static DelayModel constant(SimTime s) { return {Kind::constant, static_cast<double>(s), static_cast<double>(s), 0, 0}; }

  static DelayModel parse(std::string_view text) {
    auto words = split_words(text);
    auto num = [&](std::size_t i) {
      if (i >= words.size()) throw ParseError("provisioning delay '" + std::string(text) + "' is missing a value", std::string(text));
      auto v = parse_double(words[i]);
      if (!v || *v < 0) throw ParseError("bad provisioning delay value '" + words[i] + "'", words[i]);
      return *v;
    };
    if (words.empty()) throw ParseError("empty provisioning delay", "");
    DelayModel m;
    if (words[0] == "constant" && words.size() == 2) {
      m = constant(std::llround(num(1)));
    } else if (words[0] == "uniform" && words.size() == 3) {
      m = {Kind::uniform, num(1), num(2), 0, 0};
    } else if (words[0] == "tailed" && words.size() == 5) {
      m = {Kind::tailed, num(1), num(2), num(3), num(4)};
      if (m.tail_probability > 1 || m.tail_max < m.hi) {
        throw ParseError("tailed delay needs probability <= 1 and tail-max >= hi", words[0]);
      }
    } else {
      throw ParseError("unknown provisioning delay '" + std::string(text) + "'", words[0]);
    }
    if (m.hi < m.lo) throw ParseError("provisioning delay hi < lo", std::string(text));
    return m;
  }

  SimTime draw(RngStream& rng) const {
    switch (kind) {
      case Kind::constant: return std::llround(lo);
      case Kind::uniform: return std::llround(rng.uniform(lo, hi));
      case Kind::tailed:
        if (rng.bernoulli(tail_probability)) return std::llround(rng.uniform(hi, tail_max));
        return std::llround(rng.uniform(lo, hi));
    }
    return 0;
  }

  double mean() const {
    double body = (lo + hi) / 2;
    if (kind == Kind::tailed) return (1 - tail_probability) * body + tail_probability * (hi + tail_max) / 2;
    return body;
  }
};

struct PriceBook {
  std::map<std::string, double> on_demand_usd_per_hour;
  std::map<TraceKey, SpotTrace> spot;
  double transfer_usd_per_gb = 0.020;
  DelayModel provisioning_delay;
  SimTime billing_quantum = kHour;
  Location home{"us-east-1", "us-east-1a"};
  // Zones usable for on-demand even without a spot trace.
  std::set<Location> extra_zones;

  double on_demand(const std::string& type) const {
    auto it = on_demand_usd_per_hour.find(type);
    if (it == on_demand_usd_per_hour.end()) throw ConfigError("no on-demand price for '" + type + "'");
    return it->second;
  }

  std::set<Location> zones() const {
    std::set<Location> out = extra_zones;
    out.insert(home);
    for (const auto& [k, _] : spot) out.insert(k.location());
    return out;
  }

  const SpotTrace* trace(const Location& loc, const std::string& type) const {
    auto it = spot.find(TraceKey{loc.region, loc.az, type});
    return it == spot.end() ? nullptr : &it->second;
  }

  void validate() const {
    for (const auto& [type, p] : on_demand_usd_per_hour) {
      if (p < 0) throw ConfigError("negative on-demand price for " + type);
    }
    if (transfer_usd_per_gb < 0) throw ConfigError("negative transfer price");
    if (billing_quantum <= 0) throw ConfigError("billing quantum must be positive");
  }
};

// Spot trace CSV: timestamp,region,az,instance_type,price_usd_per_hour
inline std::map<TraceKey, SpotTrace> parse_spot_traces(const CsvTable& table, const std::string& source = "<traces>") {
  const std::vector<std::string> expected{"timestamp", "region", "az", "instance_type", "price_usd_per_hour"};
  if (table.header != expected) {
    throw ConfigError(source + ": spot trace header must be timestamp,region,az,instance_type,price_usd_per_hour");
  }
  std::map<TraceKey, std::vector<PricePoint>> raw;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    auto t = parse_int(r[0]);
    auto p = parse_double(r[4]);
    if (!t || !p) throw ConfigError(source + ": bad row " + std::to_string(i + 2));
    raw[TraceKey{r[1], r[2], r[3]}].push_back({*t, *p});
  }
  std::map<TraceKey, SpotTrace> out;
  for (auto& [k, pts] : raw) {
    std::stable_sort(pts.begin(), pts.end(), [](const PricePoint& a, const PricePoint& b) { return a.at < b.at; });
    try {
      out.emplace(k, SpotTrace(std::move(pts)));
    } catch (const ConfigError& e) {
      throw ConfigError(source + ": trace " + k.region + "/" + k.az + "/" + k.instance_type + ": " + e.what());
    }
  }
  return out;
}

inline CsvTable spot_traces_to_csv(const std::map<TraceKey, SpotTrace>& traces) {
  CsvTable t;
  t.header = {"timestamp", "region", "az", "instance_type", "price_usd_per_hour"};
  std::vector<std::pair<SimTime, std::vector<std::string>>> rows;
  for (const auto& [k, trace] : traces) {
    for (const auto& p : trace.points()) {
      rows.push_back({p.at, {std::to_string(p.at), k.region, k.az, k.instance_type, fixed(p.usd_per_hour, 4)}});
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  for (auto& r : rows) t.rows.push_back(std::move(r.second));
  return t;
}

struct BidPolicy {
  enum class Kind { static_price, fraction_of_on_demand };
  Kind kind = Kind::fraction_of_on_demand;
  double value = 1.0;

  void validate() const {
    if (!(value > 0)) throw ConfigError("bid value must be positive");
  }

  double bid_for(double on_demand_price) const {
    return kind == Kind::static_price ? value : value * on_demand_price;
  }

  static Kind parse_kind(std::string_view s) {
    if (s == "static") return Kind::static_price;
    if (s == "fraction-of-on-demand") return Kind::fraction_of_on_demand;
    throw ConfigError("unknown bid kind '" + std::string(s) + "'");
  }
};

enum class InstanceState { provisioning, idle, busy, revoked, terminated };

inline std::string_view to_string(InstanceState s) {
  switch (s) {
    case InstanceState::provisioning: return "provisioning";
    case InstanceState::idle: return "idle";
    case InstanceState::busy: return "busy";
    case InstanceState::revoked: return "revoked";
    case InstanceState::terminated: return "terminated";
  }
  return "unknown";
}

using InstanceId = std::uint64_t;

struct Instance {
  InstanceId id = 0;
  Market market = Market::on_demand;
  Location location;
  std::string instance_type;
  double bid = 0;  // spot only
  SimTime launch_time = 0;
  SimTime ready_time = 0;
  std::optional<SimTime> terminate_time;
  // Scheduled revocation for spot instances, if the trace ever crosses the bid.
  std::optional<SimTime> revoke_at;
  InstanceState state = InstanceState::provisioning;
  double accrued_cost = 0;
  SimTime idle_since = 0;

  bool alive() const noexcept {
    return state == InstanceState::provisioning || state == InstanceState::idle || state == InstanceState::busy;
  }
};

enum class AzScope { single_az, within_region, across_regions };

inline std::string_view to_string(AzScope s) {
  switch (s) {
    case AzScope::single_az: return "single-az";
    case AzScope::within_region: return "within-region";
    case AzScope::across_regions: return "across-regions";
  }
  return "unknown";
}

inline AzScope parse_az_scope(std::string_view s) {
  if (s == "single-az") return AzScope::single_az;
  if (s == "within-region") return AzScope::within_region;
  if (s == "across-regions") return AzScope::across_regions;
  throw ConfigError("unknown AZ scope '" + std::string(s) + "'");
}

struct Quote {
  Location location;
  double usd_per_hour = 0;
};

struct ProvisionResult {
  std::optional<Instance> instance;
  // Set when a spot request was refused because the price already exceeds the bid.
  bool price_exceeded = false;
  double price_at_request = 0;
};

// Number of billing quanta whose start lies in [from, to), for quanta laid
// out from `origin` every `quantum` seconds.
inline std::int64_t quanta_starting_in(SimTime origin, SimTime quantum, SimTime from, SimTime to) {
  auto ceil_div = [](SimTime a, SimTime b) { return a <= 0 ? -((-a) / b) : (a + b - 1) / b; };
  if (to <= from) return 0;
  return ceil_div(to - origin, quantum) - ceil_div(from - origin, quantum);
}

// EC2-style instance acquisition against a price book.
class MarketModel {
 public:
  MarketModel(PriceBook book, RngStream delay_rng) : book_(std::move(book)), delay_rng_(std::move(delay_rng)) {
    book_.validate();
  }

  const PriceBook& price_book() const noexcept { return book_; }

  // Requests one instance. The instance is ready after a delay drawn from the
  // provisioning-delay model, or immediately when `instant` is set.
  ProvisionResult provision(Market market, const Location& where, const BidPolicy& bid_policy,
                            const std::string& instance_type, SimTime at, bool instant = false) {
    if (!book_.zones().count(where)) throw ConfigError("unknown availability zone " + to_string(where));
    const double od = book_.on_demand(instance_type);
    ProvisionResult result;
    Instance inst;
    inst.id = ++last_id_;
    inst.market = market;
    inst.location = where;
    inst.instance_type = instance_type;
    inst.launch_time = at;
    if (market == Market::spot) {
      bid_policy.validate();
      const SpotTrace* trace = book_.trace(where, instance_type);
      if (!trace) {
        throw ConfigError("no spot trace for " + to_string(where) + " " + instance_type);
      }
      inst.bid = bid_policy.bid_for(od);
      result.price_at_request = trace->price_at(at);
      if (result.price_at_request > inst.bid) {
        --last_id_;
        result.price_exceeded = true;
        return result;
      }
      inst.revoke_at = trace->first_crossing_after(at, inst.bid);
    } else {
      result.price_at_request = od;
    }
    inst.ready_time = at + (instant ? 0 : book_.provisioning_delay.draw(delay_rng_));
    inst.state = InstanceState::provisioning;
    result.instance = std::move(inst);
    return result;
  }

  // Cost charged from launch until `until`, rounded up to whole quanta.
  // Spot quanta are priced at the trace price at each quantum's start.
  double billing(const Instance& inst, SimTime until) const {
    if (until <= inst.launch_time) return 0;
    const SimTime q = book_.billing_quantum;
    const double quantum_hours = static_cast<double>(q) / kHour;
    const SimTime end = inst.launch_time + quanta_starting_in(inst.launch_time, q, inst.launch_time, until) * q;
    if (inst.market == Market::on_demand) {
      return static_cast<double>(quanta_starting_in(inst.launch_time, q, inst.launch_time, end)) * quantum_hours *
             book_.on_demand(inst.instance_type);
    }
    const SpotTrace* trace = book_.trace(inst.location, inst.instance_type);
    if (!trace) throw ConfigError("no spot trace for " + to_string(inst.location));
    const auto& pts = trace->points();
    // Segments of constant price covering [launch, end).
    double total = 0;
    SimTime seg_start = inst.launch_time;
    double price = trace->price_at(seg_start);
    auto it = std::upper_bound(pts.begin(), pts.end(), seg_start,
                               [](SimTime v, const PricePoint& p) { return v < p.at; });
    while (seg_start < end) {
      SimTime seg_end = (it != pts.end() && it->at < end) ? it->at : end;
      total += static_cast<double>(quanta_starting_in(inst.launch_time, q, seg_start, seg_end)) * quantum_hours * price;
      seg_start = seg_end;
      if (it != pts.end() && it->at == seg_end) {
        price = it->usd_per_hour;
        ++it;
      }
    }
    return total;
  }

  // The same instance time priced as on-demand.
  double on_demand_equivalent(const Instance& inst, SimTime until) const {
    Instance as_od = inst;
    as_od.market = Market::on_demand;
    return billing(as_od, until);
  }

  std::vector<Location> zones_in_scope(AzScope scope) const {
    std::vector<Location> out;
    for (const auto& z : book_.zones()) {
      bool in = scope == AzScope::across_regions || (scope == AzScope::within_region && z.region == book_.home.region) ||
                (scope == AzScope::single_az && z == book_.home);
      if (in) out.push_back(z);
    }
    return out;
  }

  // Lowest current spot price in scope; ties go to the lexicographically
  // first (region, AZ).
  Quote cheapest_az(AzScope scope, const std::string& instance_type, SimTime at) const {
    std::optional<Quote> best;
    for (const auto& z : zones_in_scope(scope)) {
      const SpotTrace* trace = book_.trace(z, instance_type);
      if (!trace || trace->empty()) continue;
      double p = trace->price_at(at);
      if (!best || p < best->usd_per_hour) best = Quote{z, p};
    }
    if (!best) throw ConfigError("no spot prices for " + instance_type + " in scope " + std::string(to_string(scope)));
    return *best;
  }

 private:
  PriceBook book_;
  RngStream delay_rng_;
  InstanceId last_id_ = 0;
};

// Synthetic spot traces for a set of zones. Each zone hovers around its own
// fraction of the on-demand price with mean-reverting noise and occasional
// short spikes above on-demand.
struct TraceGenParams {
  std::vector<Location> zones;
  std::string instance_type = "c4.8xlarge";
  double on_demand_usd_per_hour = 1.675;
  SimTime horizon = 30 * kDay;
  SimTime step = kHour;
  double base_fraction_lo = 0.12;
  double base_fraction_hi = 0.40;
  double volatility = 0.08;
  double spike_probability = 0.01;
  double spike_multiplier = 3.0;
  // When positive, every zone is flat at this fraction of on-demand.
  double flat_fraction = 0;
};

inline std::vector<Location> default_trace_zones() {
  return {{"us-east-1", "us-east-1a"}, {"us-east-1", "us-east-1b"}, {"us-east-1", "us-east-1c"},
          {"us-east-1", "us-east-1e"}, {"us-west-1", "us-west-1a"}, {"us-west-1", "us-west-1b"},
          {"us-west-2", "us-west-2a"}, {"us-west-2", "us-west-2b"}, {"eu-west-1", "eu-west-1a"},
          {"eu-west-1", "eu-west-1b"}};
}

inline std::map<TraceKey, SpotTrace> generate_spot_traces(const TraceGenParams& p, std::uint64_t seed) {
  if (p.step <= 0 || p.horizon <= 0) throw ConfigError("trace generator needs positive step and horizon");
  if (p.zones.empty()) throw ConfigError("trace generator needs at least one zone");
  std::map<TraceKey, SpotTrace> out;
  for (const auto& z : p.zones) {
    RngStream rng(seed, "trace:" + z.region + "/" + z.az);
    const double od = p.on_demand_usd_per_hour;
    SpotTrace trace;
    if (p.flat_fraction > 0) {
      trace.add(0, std::round(od * p.flat_fraction * 1e4) / 1e4);
      out.emplace(TraceKey{z.region, z.az, p.instance_type}, std::move(trace));
      continue;
    }
    const double base = rng.uniform(p.base_fraction_lo, p.base_fraction_hi);
    double level = 0;  // log-deviation from base
    SimTime spike_left = 0;
    for (SimTime t = 0; t < p.horizon; t += p.step) {
      level = 0.8 * level + p.volatility * (rng.uniform01() * 2 - 1);
      double price = od * base * std::exp(level);
      if (spike_left > 0) {
        --spike_left;
        price = od * p.spike_multiplier * rng.uniform(0.6, 1.0);
      } else if (rng.bernoulli(p.spike_probability)) {
        spike_left = 1 + static_cast<SimTime>(rng.index(3));
        price = od * p.spike_multiplier * rng.uniform(0.6, 1.0);
      }
      trace.add(t, std::round(price * 1e4) / 1e4);
    }
    out.emplace(TraceKey{z.region, z.az, p.instance_type}, std::move(trace));
  }
  return out;
}

}  // namespace kotta
