#include <gtest/gtest.h>

#include "kotta/rbac.hpp"
#include "rbac_oracle.hpp"
#include "support.hpp"

namespace kotta {
namespace {

using testing::expand;
using testing::Grant;
using testing::kActions;

TEST(Rbac, ExhaustiveTinyUniverse) {
  const std::vector<std::string> roles{"r0", "r1"};
  const std::vector<std::string> patterns{"d/a", "d/*"};
  const std::vector<std::string> resources{"d/a", "d/b", "e/a", "d"};
  std::vector<Policy> candidates;
  for (const auto& r : roles) {
    for (const auto& p : patterns) {
      for (Action a : kActions) candidates.push_back({r, p, {a}});
    }
  }
  ASSERT_EQ(candidates.size(), 16u);
  for (std::uint32_t mask = 0; mask < (1u << candidates.size()); ++mask) {
    Rbac rbac;
    for (const auto& r : roles) rbac.add_role({r, RoleKind::user, false});
    std::vector<Policy> chosen;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      if (mask & (1u << i)) chosen.push_back(candidates[i]);
    }
    for (const auto& p : chosen) rbac.add_policy(p);
    auto grants = expand(chosen, resources);
    for (const auto& role : {std::string("r0"), std::string("r1"), std::string("ghost")}) {
      for (const auto& res : resources) {
        for (Action a : kActions) {
          bool expect = grants.count({role, res, a}) > 0;
          ASSERT_EQ(rbac.authorize("p", role, res, a, 0) == Decision::allow, expect)
              << "mask " << mask << " " << role << " " << res << " " << to_string(a);
        }
      }
    }
    ASSERT_EQ(rbac.audit().size(), rbac.decisions());
  }
}

TEST(Rbac, RandomPolicySetsUpToTenByTen) {
  RngStream rng(12, "rbac");
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t nroles = 1 + rng.index(10);
    const std::size_t nres = 1 + rng.index(10);
    std::vector<std::string> roles, resources;
    for (std::size_t i = 0; i < nroles; ++i) roles.push_back("role" + std::to_string(i));
    for (std::size_t i = 0; i < nres; ++i) resources.push_back((i % 3 ? "data/" : "queue/") + std::to_string(i));
    Rbac rbac;
    for (const auto& r : roles) rbac.add_role({r, RoleKind::user, false});
    std::vector<Policy> policies;
    const std::size_t npol = rng.index(25);
    for (std::size_t i = 0; i < npol; ++i) {
      Policy p;
      p.role = roles[rng.index(nroles)];
      const auto pick = rng.index(4);
      p.resource = pick == 0 ? "data/*" : pick == 1 ? "queue/*" : resources[rng.index(nres)];
      for (Action a : kActions) {
        if (rng.bernoulli(0.4)) p.actions.insert(a);
      }
      if (p.actions.empty()) p.actions.insert(Action::read);
      policies.push_back(p);
      rbac.add_policy(p);
    }
    auto grants = expand(policies, resources);
    std::size_t calls = 0;
    for (const auto& role : roles) {
      for (const auto& res : resources) {
        for (Action a : kActions) {
          bool allowed = rbac.authorize("p", role, res, a, static_cast<SimTime>(calls)) == Decision::allow;
          ++calls;
          ASSERT_EQ(allowed, grants.count({role, res, a}) > 0);
          if (allowed) {
            bool matched = false;
            for (const auto& p : policies) matched |= p.role == role && p.actions.count(a) && resource_matches(p.resource, res);
            ASSERT_TRUE(matched);
          }
        }
      }
    }
    EXPECT_EQ(rbac.audit().size(), calls);
  }
}

class StandardRoles : public ::testing::Test {
 protected:
  void SetUp() override {
    for (const auto& r : testing::standard_roles()) rbac.add_role(r);
    for (const auto& p : testing::standard_policies()) rbac.add_policy(p);
  }
  Rbac rbac;
};

TEST_F(StandardRoles, FreshRoleIsDeniedEverything) {
  rbac.add_role({"newcomer", RoleKind::user, false});
  for (Action a : kActions) EXPECT_EQ(rbac.authorize("u", "newcomer", "wos/record-1", a, 0), Decision::deny);
}

TEST_F(StandardRoles, PrivateDatasetReadButNotDownload) {
  EXPECT_EQ(rbac.authorize("u", "kotta-read-WOS-private", "wos/record-1", Action::read, 0), Decision::allow);
  EXPECT_EQ(rbac.authorize("u", "kotta-read-WOS-private", "wos/record-1", Action::download, 0), Decision::deny);
  EXPECT_EQ(rbac.authorize("u", "kotta-public-only", "wos/record-1", Action::read, 0), Decision::deny);
  EXPECT_EQ(rbac.authorize("u", "kotta-public-only", "public/census", Action::download, 0), Decision::allow);
  EXPECT_EQ(rbac.authorize("u", "no-such-role", "public/census", Action::read, 0), Decision::deny);
  EXPECT_EQ(rbac.audit().size(), 5u);
  EXPECT_EQ(rbac.audit().back().acting_role, "no-such-role");
}

TEST_F(StandardRoles, WorkerStagesUnderAssumedRoleOnly) {
  EXPECT_EQ(rbac.authorize("worker-1", "task-executor", "wos/job-1", Action::read, 0), Decision::deny);
  auto handle = rbac.assume_role("worker-1", "task-executor", "kotta-read-WOS-private", 10);
  EXPECT_TRUE(handle.active());
  EXPECT_EQ(handle.role(), "kotta-read-WOS-private");
  EXPECT_EQ(handle.home_role(), "task-executor");
  EXPECT_EQ(handle.authorize("wos/job-1", Action::read, 11), Decision::allow);
  handle.release();
  EXPECT_FALSE(handle.active());
  EXPECT_THROW(handle.authorize("wos/job-1", Action::read, 12), AccessDenied);
  EXPECT_EQ(rbac.authorize("worker-1", "task-executor", "wos/job-1", Action::read, 13), Decision::deny);
}

TEST_F(StandardRoles, OnlyTrustedInternalRolesSwitch) {
  EXPECT_THROW(rbac.assume_role("u", "kotta-public-only", "kotta-read-WOS-private", 0), AccessDenied);
  EXPECT_THROW(rbac.assume_role("w", "web-server", "kotta-read-WOS-private", 0), AccessDenied);
  EXPECT_THROW(rbac.assume_role("w", "task-executor", "no-such-role", 0), AccessDenied);
  ASSERT_EQ(rbac.audit().size(), 3u);
  for (const auto& a : rbac.audit()) {
    EXPECT_EQ(a.action, Action::assume_role);
    EXPECT_EQ(a.decision, Decision::deny);
  }
  EXPECT_THROW(rbac.add_role({"rogue", RoleKind::user, true}), ConfigError);
}

TEST_F(StandardRoles, HandleReleasesOnDestructionAndMoves) {
  AssumedRole outer;
  {
    auto h = rbac.assume_role("worker-2", "task-executor", "kotta-read-WOS-private", 0);
    outer = std::move(h);
    EXPECT_FALSE(h.active());
  }
  EXPECT_TRUE(outer.active());
  EXPECT_EQ(outer.principal(), "worker-2");
}

TEST_F(StandardRoles, SessionsExpire) {
  auto s = Session::issue("alice", "kotta-read-WOS-private", 1000);
  EXPECT_EQ(rbac.authorize(s, "wos/a", Action::read, 1000), Decision::allow);
  EXPECT_EQ(rbac.authorize(s, "wos/a", Action::read, 1000 + kHour - 1), Decision::allow);
  EXPECT_EQ(rbac.authorize(s, "wos/a", Action::read, 1000 + kHour), Decision::deny);
  EXPECT_TRUE(s.refresh(1000 + kHour));
  EXPECT_EQ(rbac.authorize(s, "wos/a", Action::read, 1000 + 2 * kHour - 1), Decision::allow);
  // Refreshing keeps the token alive but not past the session lifetime.
  EXPECT_TRUE(s.refresh(1000 + 6 * kHour - 10));
  EXPECT_EQ(rbac.authorize(s, "wos/a", Action::read, 1000 + 6 * kHour), Decision::deny);
  EXPECT_FALSE(s.refresh(1000 + 6 * kHour));
  EXPECT_EQ(rbac.authorize(s, "wos/a", Action::read, 999), Decision::deny);
}

TEST(Rbac, ResourcePatterns) {
  EXPECT_TRUE(resource_matches("wos/*", "wos/a"));
  EXPECT_TRUE(resource_matches("wos/*", "wos/a/b"));
  EXPECT_FALSE(resource_matches("wos/*", "wos"));
  EXPECT_FALSE(resource_matches("wos/*", "wosx/a"));
  EXPECT_TRUE(resource_matches("queue/production", "queue/production"));
  EXPECT_FALSE(resource_matches("queue/production", "queue/production2"));
  EXPECT_FALSE(resource_matches("wos*", "wosx"));
}

TEST(Rbac, AuditCsv) {
  Rbac rbac;
  rbac.add_role({"r", RoleKind::user, false});
  rbac.authorize("p", "r", "x", Action::write, 7);
  EXPECT_EQ(to_csv(rbac.audit_csv()), "at,principal,role,resource,action,decision\n7,p,r,x,write,deny\n");
}

TEST(Rbac, PolicyValidation) {
  Rbac rbac;
  EXPECT_THROW(rbac.add_policy({"ghost", "x", {Action::read}}), ConfigError);
  rbac.add_role({"r", RoleKind::user, false});
  EXPECT_THROW(rbac.add_policy({"r", "x", {}}), ConfigError);
}

}  // namespace
}  // namespace kotta
