#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kotta/csv.hpp"
#include "kotta/error.hpp"
#include "kotta/market.hpp"
#include "kotta/rbac.hpp"
#include "kotta/sim_kernel.hpp"
#include "kotta/storage.hpp"
#include "kotta/workload.hpp"

namespace kotta {

inline std::string queue_resource(QueueKind q) { return "queue/" + std::string(to_string(q)); }

inline std::string worker_principal(InstanceId worker) { return "worker-" + std::to_string(worker); }

struct WorkerStats {
  double cpu_fraction = 0;
  double io_gb = 0;
  double ram_gb = 0;
};

struct StatusMarker {
  JobId job = 0;
  SimTime at = 0;
  JobState state = JobState::submitted;
  std::optional<WorkerStats> worker_stats;
};

struct JobRecord {
  JobSpec spec;
  JobHistory history;
  std::optional<InstanceId> worker;
  std::uint32_t attempts = 0;
  std::vector<StatusMarker> markers;

  SimTime submit_time() const { return history.changes().front().at; }
  bool done() const { return history.current() == JobState::completed || history.current() == JobState::failed; }
  SimTime completion_time() const { return history.changes().back().at; }

  // Time spent waiting: queued, awaiting retrieval, or pending resubmission.
  SimTime wait_time() const {
    return history.time_in(JobState::submitted) + history.time_in(JobState::queued) +
           history.time_in(JobState::waiting_for_retrieval) + history.time_in(JobState::resubmitted);
  }
};

struct JobManagerConfig {
  std::string worker_role = "task-executor";
  // Broker writes per completed task: submit, three status markers, completion.
  unsigned writes_per_task = 5;
};

struct SubmitResult {
  JobId id = 0;
  // Present when the input is in Glacier and the job waits in the deferred queue.
  std::optional<DeferredStaging> retrieval;
};

// Queue-based job management: development/production queues, a deferred
// queue for jobs awaiting Glacier retrieval, worker polling, status markers,
// and the queue watcher that resubmits jobs from lost workers.
class JobManager {
 public:
  JobManager(Rbac& rbac, ObjectStore& store, JobManagerConfig config = {})
      : rbac_(rbac), store_(store), config_(std::move(config)) {}

  const JobManagerConfig& config() const noexcept { return config_; }

  SubmitResult submit(JobSpec spec, const std::string& principal, const std::string& caller_role, SimTime at) {
    spec.validate();
    if (spec.id == 0) spec.id = next_id_;
    if (jobs_.count(spec.id)) throw ValidationError("duplicate job id " + std::to_string(spec.id));
    if (!spec.input_object.empty() && !store_.contains(spec.input_object)) {
      throw ValidationError("job " + std::to_string(spec.id) + " references unknown object " + spec.input_object);
    }
    if (rbac_.authorize(principal, caller_role, queue_resource(spec.queue), Action::submit, at) == Decision::deny) {
      throw AccessDenied("role " + caller_role + " may not submit to " + queue_resource(spec.queue));
    }
    spec.owner_role = caller_role;

    SubmitResult result;
    result.id = spec.id;
    if (!spec.input_object.empty()) {
      Tier tier = store_.get(spec.input_object).tier;
      if (tier == Tier::glacier || tier == Tier::retrieving) {
        AccessContext ctx{&rbac_, principal, caller_role, nullptr};
        auto plan = store_.request(spec.input_object, at, &ctx);
        result.retrieval = std::get<DeferredStaging>(plan);
      }
    }

    next_id_ = std::max(next_id_, spec.id + 1);
    JobRecord rec{spec, JobHistory(at), std::nullopt, 0, {}};
    auto [it, _] = jobs_.emplace(spec.id, std::move(rec));
    ++broker_writes_;
    log(spec.id, "submitted", at, "queue=" + std::string(to_string(spec.queue)) + ";role=" + caller_role);
    move_to(it->second, JobState::queued, at, "");
    if (result.retrieval) {
      move_to(it->second, JobState::waiting_for_retrieval, at, "object=" + spec.input_object);
      deferred_.push_back(spec.id);
    } else {
      queue_for(spec.queue).push_back(spec.id);
    }
    return result;
  }

  // Hands the head of the pool's queue to an idle worker.
  std::optional<JobId> worker_poll(InstanceId worker, QueueKind pool, SimTime at) {
    ++broker_reads_;
    auto& q = queue_for(pool);
    if (q.empty()) return std::nullopt;
    JobId id = q.front();
    q.pop_front();
    auto& rec = jobs_.at(id);
    rec.worker = worker;
    ++rec.attempts;
    move_to(rec, JobState::staging_in, at, "worker=" + std::to_string(worker) + ";attempt=" + std::to_string(rec.attempts));
    write_marker(rec, at);
    return id;
  }

  // Stages a job's input as the job owner's role and returns the transfer
  // time. The worker drops the assumed role before returning.
  SimTime stage_in(JobId id, SimTime at) {
    auto& rec = jobs_.at(id);
    if (rec.history.current() != JobState::staging_in || !rec.worker) {
      throw IllegalTransition("job " + std::to_string(id) + " is not staging in");
    }
    if (rec.spec.input_object.empty()) return 0;
    AssumedRole handle = rbac_.assume_role(worker_principal(*rec.worker), config_.worker_role, rec.spec.owner_role, at);
    AccessContext ctx{&rbac_, handle.principal(), handle.role(), &handle};
    auto plan = store_.request(rec.spec.input_object, at, &ctx);
    handle.release();
    if (auto* deferred = std::get_if<DeferredStaging>(&plan)) {
      throw IllegalTransition("input " + rec.spec.input_object + " went to archive while job " + std::to_string(id) +
                              " was queued (ready at " + std::to_string(deferred->ready_at) + ")");
    }
    return std::get<ImmediateStaging>(plan).duration;
  }

  void start_running(JobId id, SimTime at) {
    auto& rec = jobs_.at(id);
    move_to(rec, JobState::running, at, "");
    write_marker(rec, at);
  }

  // Returns the stage-out transfer time.
  SimTime begin_stage_out(JobId id, SimTime at, std::optional<WorkerStats> stats = std::nullopt) {
    auto& rec = jobs_.at(id);
    move_to(rec, JobState::staging_out, at, "");
    write_marker(rec, at, stats);
    return rec.spec.output_gb > 0 ? store_.staging().transfer_time(rec.spec.output_gb) : 0;
  }

  void complete(JobId id, SimTime at) {
    auto& rec = jobs_.at(id);
    move_to(rec, JobState::completed, at, "");
    ++broker_writes_;
    rec.worker.reset();
    ++completed_;
  }

  void fail(JobId id, SimTime at, const std::string& reason) {
    auto& rec = jobs_.at(id);
    move_to(rec, JobState::failed, at, reason);
    ++broker_writes_;
    rec.worker.reset();
  }

  // Records that a worker disappeared; its job is resubmitted on the next watcher tick.
  void report_worker_lost(InstanceId worker, SimTime at) {
    for (auto& [id, rec] : jobs_) {
      if (rec.worker != worker) continue;
      auto s = rec.history.current();
      if (s == JobState::staging_in || s == JobState::running || s == JobState::staging_out) {
        lost_.push_back(id);
        log(id, "worker-lost", at, "worker=" + std::to_string(worker));
      }
    }
  }

  std::vector<JobId> watcher_tick(SimTime at) {
    std::vector<JobId> out;
    for (JobId id : lost_) {
      auto& rec = jobs_.at(id);
      auto s = rec.history.current();
      if (s != JobState::staging_in && s != JobState::running && s != JobState::staging_out) continue;
      move_to(rec, JobState::resubmitted, at, "attempt=" + std::to_string(rec.attempts));
      move_to(rec, JobState::queued, at, "");
      rec.worker.reset();
      queue_for(rec.spec.queue).push_back(id);
      out.push_back(id);
    }
    lost_.clear();
    return out;
  }

  // Lands a retrieved object and releases the deferred jobs waiting on it.
  std::vector<JobId> retrieval_done(const std::string& object, SimTime at) {
    store_.complete_retrieval(object, at);
    std::vector<JobId> released;
    std::deque<JobId> still_waiting;
    for (JobId id : deferred_) {
      auto& rec = jobs_.at(id);
      if (rec.spec.input_object == object) {
        move_to(rec, JobState::queued, at, "object=" + object);
        queue_for(rec.spec.queue).push_back(id);
        released.push_back(id);
      } else {
        still_waiting.push_back(id);
      }
    }
    deferred_ = std::move(still_waiting);
    return released;
  }

  std::size_t queue_depth(QueueKind q) const { return q == QueueKind::development ? development_.size() : production_.size(); }
  const std::deque<JobId>& queue(QueueKind q) const { return q == QueueKind::development ? development_ : production_; }
  const std::deque<JobId>& deferred() const noexcept { return deferred_; }

  const JobRecord& job(JobId id) const { return jobs_.at(id); }
  const std::map<JobId, JobRecord>& jobs() const noexcept { return jobs_; }
  std::size_t completed_count() const noexcept { return completed_; }

  std::uint64_t broker_reads() const noexcept { return broker_reads_; }
  std::uint64_t broker_writes() const noexcept { return broker_writes_; }

  // Job-event log: job_id,event,at_seconds,detail
  const CsvTable& event_log() const noexcept { return events_; }

 private:
  std::deque<JobId>& queue_for(QueueKind q) { return q == QueueKind::development ? development_ : production_; }

  void move_to(JobRecord& rec, JobState to, SimTime at, const std::string& detail) {
    rec.history.transition(to, at);
    log(rec.spec.id, std::string(to_string(to)), at, detail);
  }

  void write_marker(JobRecord& rec, SimTime at, std::optional<WorkerStats> stats = std::nullopt) {
    rec.markers.push_back({rec.spec.id, at, rec.history.current(), stats});
    ++broker_writes_;
  }

  void log(JobId id, const std::string& event, SimTime at, const std::string& detail) {
    events_.rows.push_back({std::to_string(id), event, std::to_string(at), detail});
  }

  Rbac& rbac_;
  ObjectStore& store_;
  JobManagerConfig config_;
  std::map<JobId, JobRecord> jobs_;
  std::deque<JobId> development_;
  std::deque<JobId> production_;
  std::deque<JobId> deferred_;
  std::vector<JobId> lost_;
  JobId next_id_ = 1;
  std::size_t completed_ = 0;
  std::uint64_t broker_reads_ = 0;
  std::uint64_t broker_writes_ = 0;
  CsvTable events_{{"job_id", "event", "at_seconds", "detail"}, {}};
};

struct BrokerCapacity {
  double read_per_s = 100;
  double write_per_s = 400;

  void validate() const {
    if (!(read_per_s > 0) || !(write_per_s > 0)) throw ConfigError("broker capacity must be positive");
  }
};

// Tasks per second the broker can sustain when each task costs one read and
// `writes_per_task` writes.
inline double broker_task_limit(const BrokerCapacity& cap, unsigned writes_per_task) {
  cap.validate();
  return std::min(cap.read_per_s, cap.write_per_s / std::max(1u, writes_per_task));
}

inline double effective_throughput(std::size_t workers, double per_worker_rate, const BrokerCapacity& cap,
                                   unsigned writes_per_task = 5) {
  if (per_worker_rate < 0) throw ConfigError("negative per-worker rate");
  return std::min(static_cast<double>(workers) * per_worker_rate, broker_task_limit(cap, writes_per_task));
}

struct ThroughputRun {
  std::size_t workers = 0;
  std::size_t tasks = 0;
  SimTime completion_s = 0;
  double tasks_per_s = 0;
};

// Runs zero-length tasks through the job manager on `workers` pre-provisioned
// workers. Each second the workers may finish workers * per_worker_rate tasks
// and the broker may record broker_task_limit() tasks; fractional credit
// carries to the next second.
inline ThroughputRun simulate_throughput(const std::vector<JobSpec>& tasks, std::size_t workers, double per_worker_rate,
                                         const BrokerCapacity& cap, unsigned writes_per_task = 5) {
  if (workers == 0) throw ConfigError("throughput run needs at least one worker");
  if (!(per_worker_rate > 0)) throw ConfigError("per-worker rate must be positive");
  Rbac rbac;
  rbac.add_role({"task-executor", RoleKind::internal, true});
  rbac.add_role({"benchmark", RoleKind::user, false});
  rbac.add_policy({"benchmark", "queue/*", {Action::submit}});
  ObjectStore store;
  JobManager jm(rbac, store, JobManagerConfig{"task-executor", writes_per_task});
  for (const auto& t : tasks) jm.submit(t, "benchmark-user", "benchmark", 0);

  const double broker_limit = broker_task_limit(cap, writes_per_task);
  Engine engine(false);
  double worker_credit = 0;
  double broker_credit = 0;
  std::size_t next_worker = 0;
  ThroughputRun run{workers, tasks.size(), 0, 0};
  std::function<void(const Event&)> tick = [&](const Event& ev) {
    worker_credit += static_cast<double>(workers) * per_worker_rate;
    broker_credit = std::min(broker_credit + broker_limit, broker_limit + 1.0);
    auto allowed = static_cast<std::size_t>(std::floor(std::min(worker_credit, broker_credit) + 1e-9));
    std::size_t done = 0;
    // Completions during second [t-1, t) are stamped at t.
    while (done < allowed) {
      auto id = jm.worker_poll(static_cast<InstanceId>(next_worker + 1), QueueKind::production, ev.fire_at);
      if (!id) break;
      next_worker = (next_worker + 1) % workers;
      jm.stage_in(*id, ev.fire_at);
      jm.start_running(*id, ev.fire_at);
      jm.begin_stage_out(*id, ev.fire_at);
      jm.complete(*id, ev.fire_at);
      ++done;
    }
    worker_credit -= static_cast<double>(done);
    broker_credit -= static_cast<double>(done);
    if (jm.completed_count() == tasks.size()) {
      run.completion_s = ev.fire_at;
      return;
    }
    engine.schedule(ev.fire_at + 1, EventKind::job_finished, jm.completed_count(), tick);
  };
  if (!tasks.empty()) {
    engine.schedule(1, EventKind::job_finished, 0, tick);
    engine.run();
  }
  run.tasks_per_s = run.completion_s > 0 ? static_cast<double>(tasks.size()) / static_cast<double>(run.completion_s) : 0;
  return run;
}

}  // namespace kotta
