#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kotta/autoscaler.hpp"
#include "kotta/csv.hpp"
#include "kotta/error.hpp"
#include "kotta/job_manager.hpp"
#include "kotta/market.hpp"
#include "kotta/rbac.hpp"
#include "kotta/sim_kernel.hpp"
#include "kotta/storage.hpp"
#include "kotta/workload.hpp"

namespace kotta {

struct ElasticConfig {
  std::vector<JobSpec> jobs;
  ScalingPolicy policy;
  PriceBook prices;
  std::string instance_type = "m4.xlarge";
  StagingModel staging;
  SimTime watcher_period = 60;
  std::uint64_t seed = 1;
  SimTime max_virtual_time = 30 * kDay;
  // Principal that submits every job, under each job's owner role.
  std::string principal = "analyst";
  std::string worker_role = "task-executor";
  std::vector<Role> roles;
  std::vector<Policy> policies;
  std::vector<DataObject> objects;
  // Job inputs missing from `objects` are created in STD, owned by the job's role.
  bool create_missing_inputs = true;
};

struct JobReport {
  JobId id = 0;
  SimTime submit = 0;
  SimTime wait = 0;
  SimTime staging_in = 0;
  SimTime running = 0;
  SimTime staging_out = 0;
  SimTime completion = 0;
  std::uint32_t attempts = 0;
};

struct InstanceReport {
  Instance instance;
  double cost_usd = 0;
  double on_demand_usd = 0;
};

struct PoolSample {
  SimTime at = 0;
  std::size_t provisioned = 0;
};

struct ElasticReport {
  std::vector<JobReport> jobs;
  std::vector<InstanceReport> instances;
  SimTime makespan = 0;
  double cost_usd = 0;
  double on_demand_cost_usd = 0;
  double average_wait_s = 0;
  SimTime peak_wait_s = 0;
  std::size_t peak_concurrency = 0;
  std::size_t peak_provisioned = 0;
  std::size_t revocations = 0;
  std::size_t failed_provisions = 0;
  std::size_t resubmissions = 0;
  std::size_t completed = 0;
  std::size_t audit_allow = 0;
  std::size_t audit_deny = 0;
  std::uint64_t broker_reads = 0;
  std::uint64_t broker_writes = 0;
  // Times an idle instance coexisted with a non-empty queue after dispatch.
  std::size_t conservation_violations = 0;
  std::vector<PoolSample> pool_samples;
  CsvTable job_events;
  CsvTable audit;

  CsvTable instances_csv() const {
    CsvTable t;
    t.header = {"instance_id", "market", "region", "az", "launch_s", "ready_s", "terminate_s", "final_state", "cost_usd",
                "on_demand_usd"};
    for (const auto& r : instances) {
      const auto& i = r.instance;
      t.rows.push_back({std::to_string(i.id), std::string(to_string(i.market)), i.location.region, i.location.az,
                        std::to_string(i.launch_time), std::to_string(i.ready_time),
                        std::to_string(i.terminate_time.value_or(0)), std::string(to_string(i.state)),
                        fixed(r.cost_usd, 4), fixed(r.on_demand_usd, 4)});
    }
    return t;
  }

  CsvTable jobs_csv() const {
    CsvTable t;
    t.header = {"job_id", "submit_s", "wait_s", "staging_in_s", "running_s", "staging_out_s", "completion_s", "attempts"};
    for (const auto& j : jobs) {
      t.rows.push_back({std::to_string(j.id), std::to_string(j.submit), std::to_string(j.wait),
                        std::to_string(j.staging_in), std::to_string(j.running), std::to_string(j.staging_out),
                        std::to_string(j.completion), std::to_string(j.attempts)});
    }
    return t;
  }
};

// Wires workload, job manager, market, autoscaler, storage and RBAC into one
// discrete-event run of an elastic-scaling experiment.
class ElasticSimulation {
 public:
  explicit ElasticSimulation(ElasticConfig config)
      : config_(std::move(config)),
        store_(config_.staging),
        jm_(rbac_, store_, JobManagerConfig{config_.worker_role, 5}),
        market_(config_.prices, RngStream(config_.seed, "provisioning")) {
    config_.policy.validate();
    if (config_.watcher_period <= 0) throw ConfigError("watcher period must be positive");
    for (const auto& r : config_.roles) rbac_.add_role(r);
    if (!rbac_.has_role(config_.worker_role)) throw ConfigError("worker role " + config_.worker_role + " is not defined");
    for (const auto& p : config_.policies) rbac_.add_policy(p);
    for (const auto& o : config_.objects) store_.add(o);
    if (config_.create_missing_inputs) {
      for (const auto& j : config_.jobs) {
        if (!j.input_object.empty() && !store_.contains(j.input_object)) {
          store_.add(DataObject{j.input_object, j.input_gb, Tier::standard, 0, j.owner_role, 0, std::nullopt});
        }
      }
    }
  }

  ElasticReport run() {
    if (ran_) throw Error("simulation already ran");
    ran_ = true;
    if (config_.policy.prewarm) {
      for (std::size_t i = 0; i < config_.policy.floor(); ++i) provision(0, true);
    }
    for (const auto& spec : config_.jobs) {
      engine_.schedule(spec.submit_time, EventKind::job_arrival, spec.id,
                       [this, spec](const Event& ev) { on_arrival(spec, ev.fire_at); });
    }
    engine_.schedule(0, EventKind::watcher_tick, 0, [this](const Event& ev) { on_watcher(ev.fire_at); });
    if (config_.jobs.empty()) {
      finish(0);
    } else {
      engine_.run_until(config_.max_virtual_time);
    }
    if (!finished_) {
      throw SimulationGuard("simulation exceeded " + std::to_string(config_.max_virtual_time) + " s of virtual time with " +
                            std::to_string(config_.jobs.size() - jm_.completed_count()) + " jobs unfinished");
    }
    return build_report();
  }

  const Engine& engine() const noexcept { return engine_; }
  const Rbac& rbac() const noexcept { return rbac_; }
  const JobManager& job_manager() const noexcept { return jm_; }
  const ObjectStore& store() const noexcept { return store_; }
  const std::map<InstanceId, Instance>& instances() const noexcept { return instances_; }

 private:
  void on_arrival(const JobSpec& spec, SimTime at) {
    auto res = jm_.submit(spec, config_.principal, spec.owner_role, at);
    if (res.retrieval && res.retrieval->started_retrieval) {
      std::string object = spec.input_object;
      engine_.schedule(res.retrieval->ready_at, EventKind::retrieval_done, spec.id, [this, object](const Event& ev) {
        jm_.retrieval_done(object, ev.fire_at);
        dispatch(ev.fire_at);
        autoscale(ev.fire_at);
      });
    }
    dispatch(at);
    autoscale(at);
  }

  void on_watcher(SimTime at) {
    if (finished_) return;
    resubmissions_ += jm_.watcher_tick(at).size();
    dispatch(at);
    autoscale(at);
    engine_.schedule(at + config_.watcher_period, EventKind::watcher_tick, 0,
                     [this](const Event& ev) { on_watcher(ev.fire_at); });
  }

  std::vector<Instance*> idle_instances() {
    std::vector<Instance*> idle;
    for (auto& [_, inst] : instances_) {
      if (inst.state == InstanceState::idle) idle.push_back(&inst);
    }
    std::sort(idle.begin(), idle.end(), [](const Instance* a, const Instance* b) {
      return a->idle_since != b->idle_since ? a->idle_since < b->idle_since : a->id < b->id;
    });
    return idle;
  }

  void dispatch(SimTime at) {
    const QueueKind pool = config_.policy.pool;
    for (Instance* inst : idle_instances()) {
      if (jm_.queue_depth(pool) == 0) break;
      auto job = jm_.worker_poll(inst->id, pool, at);
      if (job) start_job(*inst, *job, at);
    }
    if (jm_.queue_depth(pool) > 0 && !idle_instances().empty()) ++conservation_violations_;
  }

  bool current(JobId job, std::uint32_t attempt, InstanceId inst, JobState expected) const {
    const auto& rec = jm_.job(job);
    auto it = instances_.find(inst);
    return rec.attempts == attempt && rec.worker == inst && rec.history.current() == expected &&
           it != instances_.end() && it->second.state == InstanceState::busy;
  }

  void start_job(Instance& inst, JobId job, SimTime at) {
    inst.state = InstanceState::busy;
    busy_now_ += 1;
    peak_concurrency_ = std::max(peak_concurrency_, busy_now_);
    const SimTime stage = jm_.stage_in(job, at);
    const std::uint32_t attempt = jm_.job(job).attempts;
    const InstanceId id = inst.id;
    engine_.schedule(at + stage, EventKind::staging_done, job, [this, job, attempt, id](const Event& ev) {
      if (!current(job, attempt, id, JobState::staging_in)) return;
      jm_.start_running(job, ev.fire_at);
      engine_.schedule(ev.fire_at + jm_.job(job).spec.duration, EventKind::job_finished, job,
                       [this, job, attempt, id](const Event& e) { on_job_finished(job, attempt, id, e.fire_at); });
    });
  }

  void on_job_finished(JobId job, std::uint32_t attempt, InstanceId id, SimTime at) {
    if (!current(job, attempt, id, JobState::running)) return;
    const SimTime out = jm_.begin_stage_out(job, at);
    engine_.schedule(at + out, EventKind::staging_done, job, [this, job, attempt, id](const Event& ev) {
      if (!current(job, attempt, id, JobState::staging_out)) return;
      jm_.complete(job, ev.fire_at);
      Instance& inst = instances_.at(id);
      inst.state = InstanceState::idle;
      inst.idle_since = ev.fire_at;
      busy_now_ -= 1;
      if (jm_.completed_count() == config_.jobs.size()) {
        finish(ev.fire_at);
        return;
      }
      dispatch(ev.fire_at);
      autoscale(ev.fire_at);
    });
  }

  void on_ready(InstanceId id, SimTime at) {
    Instance& inst = instances_.at(id);
    if (inst.state != InstanceState::provisioning) return;
    inst.state = InstanceState::idle;
    inst.idle_since = at;
    dispatch(at);
    autoscale(at);
  }

  void on_revoked(InstanceId id, SimTime at) {
    if (finished_) return;
    Instance& inst = instances_.at(id);
    if (!inst.alive()) return;
    if (inst.state == InstanceState::busy) {
      jm_.report_worker_lost(id, at);
      busy_now_ -= 1;
    }
    inst.state = InstanceState::revoked;
    inst.terminate_time = at;
    ++revocations_;
    autoscale(at);
  }

  void provision(SimTime at, bool instant) {
    JobSpec any;
    Placement where = place(any, config_.policy, market_, config_.instance_type, at);
    auto res = market_.provision(where.market, where.location, config_.policy.bid, config_.instance_type, at, instant);
    if (res.price_exceeded) {
      ++failed_provisions_;
      return;
    }
    Instance inst = *res.instance;
    const InstanceId id = inst.id;
    if (instant) {
      inst.state = InstanceState::idle;
      inst.idle_since = at;
    }
    instances_.emplace(id, inst);
    if (!instant) {
      engine_.schedule(inst.ready_time, EventKind::instance_ready, id, [this, id](const Event& ev) { on_ready(id, ev.fire_at); });
    }
    if (inst.revoke_at) {
      engine_.schedule(*inst.revoke_at, EventKind::instance_revoked, id,
                       [this, id](const Event& ev) { on_revoked(id, ev.fire_at); });
    }
  }

  void autoscale(SimTime at) {
    if (finished_) return;
    PoolState pool;
    for (const auto& [id, inst] : instances_) {
      switch (inst.state) {
        case InstanceState::provisioning: ++pool.provisioning; break;
        case InstanceState::busy: ++pool.busy; break;
        case InstanceState::idle: pool.idle.push_back({id, inst.idle_since}); break;
        default: break;
      }
    }
    auto actions = react(config_.policy, jm_.queue_depth(config_.policy.pool), pool, at);
    for (const auto& a : actions) {
      if (a.kind == ScalingAction::Kind::provision) {
        provision(at, false);
      } else {
        Instance& inst = instances_.at(a.instance);
        inst.state = InstanceState::terminated;
        inst.terminate_time = at;
      }
    }
    std::size_t alive = 0;
    for (const auto& [_, inst] : instances_) alive += inst.alive() ? 1 : 0;
    peak_provisioned_ = std::max(peak_provisioned_, alive);
    pool_samples_.push_back({at, alive});
  }

  void finish(SimTime at) {
    finished_ = true;
    end_time_ = at;
    for (auto& [_, inst] : instances_) {
      if (inst.alive()) {
        inst.state = InstanceState::terminated;
        inst.terminate_time = at;
      }
    }
    engine_.stop();
  }

  ElasticReport build_report() const {
    ElasticReport r;
    SimTime first_submit = 0;
    SimTime last_completion = 0;
    bool any = false;
    SimTime total_wait = 0;
    for (const auto& [id, rec] : jm_.jobs()) {
      JobReport j;
      j.id = id;
      j.submit = rec.submit_time();
      j.completion = rec.completion_time();
      j.wait = rec.wait_time();
      j.staging_in = rec.history.time_in(JobState::staging_in);
      j.running = rec.history.time_in(JobState::running);
      j.staging_out = rec.history.time_in(JobState::staging_out);
      j.attempts = rec.attempts;
      r.jobs.push_back(j);
      first_submit = any ? std::min(first_submit, j.submit) : j.submit;
      last_completion = any ? std::max(last_completion, j.completion) : j.completion;
      any = true;
      total_wait += j.wait;
      r.peak_wait_s = std::max(r.peak_wait_s, j.wait);
      if (rec.history.current() == JobState::completed) ++r.completed;
    }
    r.makespan = any ? last_completion - first_submit : 0;
    r.average_wait_s = r.jobs.empty() ? 0 : static_cast<double>(total_wait) / static_cast<double>(r.jobs.size());
    for (const auto& [_, inst] : instances_) {
      SimTime until = inst.terminate_time.value_or(end_time_);
      InstanceReport ir{inst, market_.billing(inst, until), market_.on_demand_equivalent(inst, until)};
      r.cost_usd += ir.cost_usd;
      r.on_demand_cost_usd += ir.on_demand_usd;
      r.instances.push_back(std::move(ir));
    }
    r.peak_concurrency = peak_concurrency_;
    r.peak_provisioned = peak_provisioned_;
    r.revocations = revocations_;
    r.failed_provisions = failed_provisions_;
    r.resubmissions = resubmissions_;
    r.conservation_violations = conservation_violations_;
    r.pool_samples = pool_samples_;
    for (const auto& a : rbac_.audit()) (a.decision == Decision::allow ? r.audit_allow : r.audit_deny) += 1;
    r.broker_reads = jm_.broker_reads();
    r.broker_writes = jm_.broker_writes();
    r.job_events = jm_.event_log();
    r.audit = rbac_.audit_csv();
    return r;
  }

  ElasticConfig config_;
  Engine engine_;
  Rbac rbac_;
  ObjectStore store_;
  JobManager jm_;
  MarketModel market_;
  std::map<InstanceId, Instance> instances_;
  bool ran_ = false;
  bool finished_ = false;
  SimTime end_time_ = 0;
  std::size_t busy_now_ = 0;
  std::size_t peak_concurrency_ = 0;
  std::size_t peak_provisioned_ = 0;
  std::size_t revocations_ = 0;
  std::size_t failed_provisions_ = 0;
  std::size_t resubmissions_ = 0;
  std::size_t conservation_violations_ = 0;
  std::vector<PoolSample> pool_samples_;
};

}  // namespace kotta
