#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kotta/csv.hpp"
#include "kotta/error.hpp"
#include "kotta/sim_kernel.hpp"

namespace kotta {

enum class Action { read, write, submit, download, assume_role };

inline std::string_view to_string(Action a) {
  switch (a) {
    case Action::read: return "read";
    case Action::write: return "write";
    case Action::submit: return "submit";
    case Action::download: return "download";
    case Action::assume_role: return "assume-role";
  }
  return "unknown";
}

inline Action parse_action(std::string_view s) {
  if (s == "read") return Action::read;
  if (s == "write") return Action::write;
  if (s == "submit") return Action::submit;
  if (s == "download") return Action::download;
  throw ConfigError("unknown action '" + std::string(s) + "'");
}

enum class RoleKind { user, internal };

struct Role {
  std::string name;
  RoleKind kind = RoleKind::user;
  bool trusted_switcher = false;
};

// Allow-only grant. `resource` is a literal id or a prefix ending in "/*".
struct Policy {
  std::string role;
  std::string resource;
  std::set<Action> actions;
};

inline bool resource_matches(std::string_view pattern, std::string_view resource) {
  if (pattern.size() >= 2 && pattern.substr(pattern.size() - 2) == "/*") {
    auto prefix = pattern.substr(0, pattern.size() - 1);  // keeps the '/'
    return resource.size() >= prefix.size() && resource.substr(0, prefix.size()) == prefix;
  }
  return pattern == resource;
}

enum class Decision { allow, deny };

inline std::string_view to_string(Decision d) { return d == Decision::allow ? "allow" : "deny"; }

struct AuditRecord {
  SimTime at = 0;
  std::uint64_t sequence = 0;
  std::string principal;
  std::string acting_role;
  std::string resource;
  Action action = Action::read;
  Decision decision = Decision::deny;
};

// Token and session lifetimes for an authenticated principal.
struct Session {
  std::string principal;
  std::string role;
  SimTime issued_at = 0;
  SimTime token_issued_at = 0;
  SimTime token_lifetime = kHour;
  SimTime session_lifetime = 6 * kHour;

  static Session issue(std::string principal, std::string role, SimTime at) {
    return Session{std::move(principal), std::move(role), at, at, kHour, 6 * kHour};
  }

  bool valid_at(SimTime t) const {
    return t >= issued_at && t < token_issued_at + token_lifetime && t < issued_at + session_lifetime;
  }

  // A fresh token is only available while the session is still alive.
  bool refresh(SimTime t) {
    if (t < issued_at || t >= issued_at + session_lifetime) return false;
    token_issued_at = t;
    return true;
  }
};

class Rbac;

// A worker temporarily acting as a user role. Released explicitly or on
// destruction; afterwards it authorizes nothing.
class AssumedRole {
 public:
  AssumedRole() = default;
  AssumedRole(const AssumedRole&) = delete;
  AssumedRole& operator=(const AssumedRole&) = delete;
  AssumedRole(AssumedRole&& o) noexcept { *this = std::move(o); }
  AssumedRole& operator=(AssumedRole&& o) noexcept {
    rbac_ = std::exchange(o.rbac_, nullptr);
    principal_ = std::move(o.principal_);
    role_ = std::move(o.role_);
    home_role_ = std::move(o.home_role_);
    return *this;
  }
  ~AssumedRole() { release(); }

  bool active() const noexcept { return rbac_ != nullptr; }
  const std::string& role() const noexcept { return role_; }
  const std::string& principal() const noexcept { return principal_; }
  const std::string& home_role() const noexcept { return home_role_; }

  Decision authorize(const std::string& resource, Action action, SimTime at) const;

  void release() noexcept { rbac_ = nullptr; }

 private:
  friend class Rbac;
  AssumedRole(Rbac* rbac, std::string principal, std::string role, std::string home)
      : rbac_(rbac), principal_(std::move(principal)), role_(std::move(role)), home_role_(std::move(home)) {}

  Rbac* rbac_ = nullptr;
  std::string principal_;
  std::string role_;
  std::string home_role_;
};

// Deny-by-default authorization over registered roles and allow policies.
// Every decision is appended to the audit log.
class Rbac {
 public:
  void add_role(Role role) {
    if (role.name.empty()) throw ConfigError("role name is empty");
    if (role.trusted_switcher && role.kind != RoleKind::internal) {
      throw ConfigError("only internal roles may switch roles: " + role.name);
    }
    roles_[role.name] = std::move(role);
  }

  void add_policy(Policy policy) {
    if (!roles_.count(policy.role)) throw ConfigError("policy for unknown role " + policy.role);
    if (policy.actions.empty()) throw ConfigError("policy without actions for " + policy.role);
    policies_.push_back(std::move(policy));
  }

  const std::map<std::string, Role>& roles() const noexcept { return roles_; }
  const std::vector<Policy>& policies() const noexcept { return policies_; }
  bool has_role(const std::string& name) const { return roles_.count(name) > 0; }

  // Pure policy evaluation, no audit.
  bool permits(const std::string& role, const std::string& resource, Action action) const {
    if (!roles_.count(role)) return false;
    for (const auto& p : policies_) {
      if (p.role == role && p.actions.count(action) && resource_matches(p.resource, resource)) return true;
    }
    return false;
  }

  Decision authorize(const std::string& principal, const std::string& acting_role, const std::string& resource,
                     Action action, SimTime at) {
    Decision d = permits(acting_role, resource, action) ? Decision::allow : Decision::deny;
    record(at, principal, acting_role, resource, action, d);
    return d;
  }

  Decision authorize(const Session& session, const std::string& resource, Action action, SimTime at) {
    Decision d = session.valid_at(at) && permits(session.role, resource, action) ? Decision::allow : Decision::deny;
    record(at, session.principal, session.role, resource, action, d);
    return d;
  }

  // Lets a trusted internal role act as `target_role`. Denials are audited
  // and raised as AccessDenied.
  AssumedRole assume_role(const std::string& principal, const std::string& switcher_role,
                          const std::string& target_role, SimTime at) {
    auto it = roles_.find(switcher_role);
    bool ok = it != roles_.end() && it->second.trusted_switcher && roles_.count(target_role);
    record(at, principal, switcher_role, "role/" + target_role, Action::assume_role,
           ok ? Decision::allow : Decision::deny);
    if (!ok) throw AccessDenied("role switch denied: " + switcher_role + " -> " + target_role);
    return AssumedRole(this, principal, target_role, switcher_role);
  }

  const std::vector<AuditRecord>& audit() const noexcept { return audit_; }
  std::uint64_t decisions() const noexcept { return decisions_; }

  CsvTable audit_csv() const {
    CsvTable t;
    t.header = {"at", "principal", "role", "resource", "action", "decision"};
    for (const auto& r : audit_) {
      t.rows.push_back({std::to_string(r.at), r.principal, r.acting_role, r.resource, std::string(to_string(r.action)),
                        std::string(to_string(r.decision))});
    }
    return t;
  }

 private:
  void record(SimTime at, const std::string& principal, const std::string& role, const std::string& resource,
              Action action, Decision d) {
    ++decisions_;
    audit_.push_back({at, audit_.size(), principal, role, resource, action, d});
  }

  std::map<std::string, Role> roles_;
  std::vector<Policy> policies_;
  std::vector<AuditRecord> audit_;
  std::uint64_t decisions_ = 0;
};

inline Decision AssumedRole::authorize(const std::string& resource, Action action, SimTime at) const {
  if (!rbac_) throw AccessDenied("assumed role " + role_ + " has been released");
  return rbac_->authorize(principal_, role_, resource, action, at);
}

}  // namespace kotta
