#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kotta/config_file.hpp"
#include "kotta/csv.hpp"
#include "kotta/error.hpp"
#include "kotta/rbac.hpp"
#include "kotta/sim_kernel.hpp"

namespace kotta {

enum class Tier { standard, infrequent, glacier, retrieving };

inline std::string_view to_string(Tier t) {
  switch (t) {
    case Tier::standard: return "STD";
    case Tier::infrequent: return "IA";
    case Tier::glacier: return "GLACIER";
    case Tier::retrieving: return "RETRIEVING";
  }
  return "unknown";
}

// Accepts the storage-class names in any case. RETRIEVING is transient and
// never a valid policy or manifest tier.
inline std::optional<Tier> parse_tier_name(std::string_view s) {
  std::string up;
  for (char c : s) up += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "STD") return Tier::standard;
  if (up == "IA") return Tier::infrequent;
  if (up == "GLACIER") return Tier::glacier;
  return std::nullopt;
}

struct TierLink {
  Tier tier = Tier::standard;
  std::optional<int> staleness_days;  // empty on the terminal link
};

// A demotion chain such as STD30-IA60-Glacier: data moves one link down
// after the stated number of days without access, counted cumulatively from
// the last access.
class TierPolicy {
 public:
  static TierPolicy parse(std::string_view text) {
    if (trim(text).empty()) throw ParseError("empty tier policy", "");
    TierPolicy p;
    p.text_ = std::string(text);
    std::vector<std::string> tokens;
    std::size_t start = 0;
    while (true) {
      auto dash = text.find('-', start);
      tokens.emplace_back(text.substr(start, dash == std::string_view::npos ? std::string_view::npos : dash - start));
      if (dash == std::string_view::npos) break;
      start = dash + 1;
    }
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const std::string& tok = tokens[i];
      std::size_t split = 0;
      while (split < tok.size() && std::isalpha(static_cast<unsigned char>(tok[split]))) ++split;
      auto tier = parse_tier_name(std::string_view(tok).substr(0, split));
      if (split == 0 || !tier) throw ParseError("unknown tier in policy token '" + tok + "'", tok);
      TierLink link{*tier, std::nullopt};
      const bool terminal = i + 1 == tokens.size();
      if (split < tok.size()) {
        auto days = parse_int(std::string_view(tok).substr(split));
        if (!days || *days <= 0) throw ParseError("bad staleness in policy token '" + tok + "'", tok);
        if (terminal) throw ParseError("terminal tier takes no staleness: '" + tok + "'", tok);
        link.staleness_days = static_cast<int>(*days);
      } else if (!terminal) {
        throw ParseError("non-terminal tier needs a staleness in days: '" + tok + "'", tok);
      }
      if (!p.chain_.empty() && static_cast<int>(link.tier) <= static_cast<int>(p.chain_.back().tier)) {
        throw ParseError("tiers must appear in demotion order: '" + tok + "'", tok);
      }
      p.chain_.push_back(link);
    }
    return p;
  }

  const std::vector<TierLink>& chain() const noexcept { return chain_; }
  const std::string& text() const noexcept { return text_; }
  Tier terminal() const { return chain_.back().tier; }

  std::optional<std::size_t> index_of(Tier t) const {
    for (std::size_t i = 0; i < chain_.size(); ++i) {
      if (chain_[i].tier == t) return i;
    }
    return std::nullopt;
  }

  // Idle days after which an object at link `i` moves on; empty for the terminal link.
  std::optional<long long> cumulative_days(std::size_t i) const {
    if (i + 1 >= chain_.size()) return std::nullopt;
    long long total = 0;
    for (std::size_t k = 0; k <= i; ++k) total += *chain_[k].staleness_days;
    return total;
  }

 private:
  std::vector<TierLink> chain_;
  std::string text_;
};

struct DataObject {
  std::string id;
  double size_gb = 0;
  Tier tier = Tier::standard;
  SimTime last_access = 0;
  std::string owner_role;
  std::uint64_t access_count = 0;
  std::optional<SimTime> retrieval_ready_at;
};

struct StagingModel {
  double bandwidth_gb_per_s = 0.1;
  SimTime glacier_retrieval_time = 4 * kHour;

  void validate() const {
    if (!(bandwidth_gb_per_s > 0)) throw ConfigError("staging bandwidth must be positive");
    if (glacier_retrieval_time <= 0) throw ConfigError("glacier retrieval time must be positive");
  }

  SimTime transfer_time(double gb) const {
    return static_cast<SimTime>(std::ceil(gb / bandwidth_gb_per_s - 1e-9));
  }
};

struct ImmediateStaging {
  SimTime duration = 0;
};

struct DeferredStaging {
  SimTime ready_at = 0;
  // False when the object was already being retrieved for an earlier request.
  bool started_retrieval = false;
};

using StagingPlan = std::variant<ImmediateStaging, DeferredStaging>;

struct Demotion {
  std::string object;
  Tier from = Tier::standard;
  Tier to = Tier::standard;
};

// Identity and role used when an access must be authorized.
struct AccessContext {
  Rbac* rbac = nullptr;
  std::string principal;
  std::string role;
  // Set when the role was assumed for the duration of a stage-in.
  const AssumedRole* assumed = nullptr;
};

// Object store across STD/IA/Glacier with LRU staleness demotion and the
// Glacier retrieval flow.
class ObjectStore {
 public:
  explicit ObjectStore(StagingModel staging = {}) : staging_(staging) { staging_.validate(); }

  const StagingModel& staging() const noexcept { return staging_; }

  void add(DataObject obj) {
    if (obj.size_gb < 0) throw ValidationError("object " + obj.id + " has negative size");
    if (obj.tier == Tier::retrieving) throw ValidationError("object " + obj.id + " cannot start in RETRIEVING");
    auto id = obj.id;
    if (!objects_.emplace(id, std::move(obj)).second) throw ValidationError("duplicate object " + id);
  }

  bool contains(const std::string& id) const { return objects_.count(id) > 0; }

  const DataObject& get(const std::string& id) const {
    auto it = objects_.find(id);
    if (it == objects_.end()) throw NotFound("no object " + id);
    return it->second;
  }

  const std::map<std::string, DataObject>& objects() const noexcept { return objects_; }

  // Demotes every object whose idle time exceeds its link's threshold by one
  // link. Demotion leaves last_access alone.
  std::vector<Demotion> lifecycle_tick(const TierPolicy& policy, SimTime at) {
    std::vector<Demotion> out;
    for (auto& [id, obj] : objects_) {
      if (obj.tier == Tier::retrieving) continue;
      auto idx = policy.index_of(obj.tier);
      if (!idx) continue;
      auto days = policy.cumulative_days(*idx);
      if (!days) continue;
      if (at - obj.last_access > *days * kDay) {
        Tier next = policy.chain()[*idx + 1].tier;
        out.push_back({id, obj.tier, next});
        obj.tier = next;
      }
    }
    return out;
  }

  // Reads an object. STD and IA objects stage immediately; a Glacier object
  // starts a retrieval and the caller must call complete_retrieval() at the
  // returned time.
  StagingPlan request(const std::string& id, SimTime at, const AccessContext* ctx = nullptr) {
    auto it = objects_.find(id);
    if (it == objects_.end()) throw NotFound("no object " + id);
    if (ctx) {
      Decision d = ctx->assumed ? ctx->assumed->authorize(id, Action::read, at)
                                : ctx->rbac->authorize(ctx->principal, ctx->role, id, Action::read, at);
      if (d == Decision::deny) throw AccessDenied("read of " + id + " denied for role " + ctx->role);
    }
    DataObject& obj = it->second;
    obj.last_access = at;
    ++obj.access_count;
    ++requests_;
    switch (obj.tier) {
      case Tier::standard:
      case Tier::infrequent: return ImmediateStaging{staging_.transfer_time(obj.size_gb)};
      case Tier::glacier:
        obj.tier = Tier::retrieving;
        obj.retrieval_ready_at = at + staging_.glacier_retrieval_time;
        ++retrievals_started_;
        return DeferredStaging{*obj.retrieval_ready_at, true};
      case Tier::retrieving: return DeferredStaging{*obj.retrieval_ready_at, false};
    }
    return ImmediateStaging{0};
  }

  // Lands a retrieved object in STD with a fresh LRU clock.
  void complete_retrieval(const std::string& id, SimTime at) {
    auto it = objects_.find(id);
    if (it == objects_.end()) throw NotFound("no object " + id);
    DataObject& obj = it->second;
    if (obj.tier != Tier::retrieving) throw IllegalTransition("object " + id + " is not being retrieved");
    obj.tier = Tier::standard;
    obj.last_access = at;
    obj.retrieval_ready_at.reset();
    ++retrievals_completed_;
  }

  double gb_in(Tier t) const {
    double total = 0;
    for (const auto& [_, o] : objects_) {
      if (o.tier == t) total += o.size_gb;
    }
    return total;
  }

  std::uint64_t requests() const noexcept { return requests_; }
  std::uint64_t retrievals_started() const noexcept { return retrievals_started_; }
  std::uint64_t retrievals_completed() const noexcept { return retrievals_completed_; }

 private:
  StagingModel staging_;
  std::map<std::string, DataObject> objects_;
  std::uint64_t requests_ = 0;
  std::uint64_t retrievals_started_ = 0;
  std::uint64_t retrievals_completed_ = 0;
};

// Dataset manifest CSV: object_id,size_gb,initial_tier,owner_role
inline std::vector<DataObject> parse_manifest(const CsvTable& table, const std::string& source = "<manifest>") {
  const std::vector<std::string> expected{"object_id", "size_gb", "initial_tier", "owner_role"};
  if (table.header != expected) {
    throw ConfigError(source + ": manifest header must be object_id,size_gb,initial_tier,owner_role");
  }
  std::vector<DataObject> out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& r = table.rows[i];
    auto size = parse_double(r[1]);
    auto tier = parse_tier_name(r[2]);
    if (r[0].empty() || !size || *size < 0 || !tier) {
      throw ConfigError(source + ":" + std::to_string(i + 2) + ": bad manifest row");
    }
    out.push_back(DataObject{r[0], *size, *tier, 0, r[3], 0, std::nullopt});
  }
  return out;
}

inline CsvTable manifest_to_csv(const std::vector<DataObject>& objects) {
  CsvTable t;
  t.header = {"object_id", "size_gb", "initial_tier", "owner_role"};
  for (const auto& o : objects) t.rows.push_back({o.id, fixed(o.size_gb, 3), std::string(to_string(o.tier)), o.owner_role});
  return t;
}

}  // namespace kotta
