#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "kotta/error.hpp"
#include "kotta/sim_kernel.hpp"

namespace kotta {

using JobId = std::uint64_t;

enum class QueueKind { development, production };

inline std::string_view to_string(QueueKind q) {
  return q == QueueKind::development ? "development" : "production";
}

inline QueueKind parse_queue_kind(std::string_view s) {
  if (s == "development") return QueueKind::development;
  if (s == "production") return QueueKind::production;
  throw ConfigError("unknown queue '" + std::string(s) + "'");
}

struct JobSpec {
  JobId id = 0;
  SimTime submit_time = 0;
  SimTime duration = 0;  // nominal run time, seconds
  double input_gb = 0;
  double output_gb = 0;
  QueueKind queue = QueueKind::production;
  std::string owner_role;
  // Object staged in before the run; empty when the job has no input.
  std::string input_object;
  std::string executable;

  void validate() const {
    if (duration < 0) throw ValidationError("job " + std::to_string(id) + ": negative duration");
    if (input_gb < 0 || output_gb < 0) {
      throw ValidationError("job " + std::to_string(id) + ": negative data size");
    }
    if (submit_time < 0) throw ValidationError("job " + std::to_string(id) + ": negative submit time");
  }
};

struct DurationChoice {
  SimTime seconds = 0;
  double probability = 0;
};

struct WorkloadParams {
  std::size_t job_count = 0;
  double mean_inter_arrival_s = 0;
  std::vector<DurationChoice> duration_mix;
  double duration_jitter_fraction = 0;
  std::vector<double> input_size_choices_gb;
  double output_gb = 0;
  QueueKind queue = QueueKind::production;
  std::string owner_role;
  // Input objects are named input_prefix + "job-<id>".
  std::string input_prefix = "input/";
  std::string executable = "sleep";

  void validate() const {
    if (duration_mix.empty()) throw ConfigError("workload: duration mix is empty");
    double total = 0;
    for (const auto& c : duration_mix) {
      if (c.seconds <= 0) throw ConfigError("workload: duration mix entries must be positive");
      if (c.probability < 0) throw ConfigError("workload: negative duration probability");
      total += c.probability;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw ConfigError("workload: duration probabilities sum to " + std::to_string(total) + ", not 1");
    }
    if (duration_jitter_fraction < 0 || duration_jitter_fraction >= 1) {
      throw ConfigError("workload: jitter fraction must lie in [0, 1)");
    }
    if (mean_inter_arrival_s < 0) throw ConfigError("workload: negative mean inter-arrival time");
    for (double s : input_size_choices_gb) {
      if (s < 0) throw ConfigError("workload: negative input size choice");
    }
    if (output_gb < 0) throw ConfigError("workload: negative output size");
  }
};

// Draws a job stream: the first job arrives at t=0 and each later one after an
// exponential gap with the configured mean. Durations come from the mix and
// are scaled by a uniform factor in [1 - jitter, 1 + jitter].
inline std::vector<JobSpec> generate(const WorkloadParams& params, RngStream& arrivals,
                                     RngStream& durations, RngStream& sizes) {
  params.validate();
  std::vector<JobSpec> jobs;
  jobs.reserve(params.job_count);
  double clock = 0;
  for (std::size_t i = 0; i < params.job_count; ++i) {
    if (i > 0) clock += arrivals.exponential(params.mean_inter_arrival_s);

    double u = durations.uniform01();
    double acc = 0;
    SimTime nominal = params.duration_mix.back().seconds;
    for (const auto& c : params.duration_mix) {
      acc += c.probability;
      if (u < acc) {
        nominal = c.seconds;
        break;
      }
    }
    double factor = 1.0;
    if (params.duration_jitter_fraction > 0) {
      factor += durations.uniform(-params.duration_jitter_fraction, params.duration_jitter_fraction);
    }

    JobSpec spec;
    spec.id = i + 1;
    spec.submit_time = std::llround(clock);
    spec.duration = std::max<SimTime>(1, std::llround(static_cast<double>(nominal) * factor));
    spec.input_gb = params.input_size_choices_gb.empty()
                        ? 0.0
                        : params.input_size_choices_gb[sizes.index(params.input_size_choices_gb.size())];
    spec.output_gb = params.output_gb;
    spec.queue = params.queue;
    spec.owner_role = params.owner_role;
    if (spec.input_gb > 0) spec.input_object = params.input_prefix + "job-" + std::to_string(spec.id);
    spec.executable = params.executable;
    jobs.push_back(std::move(spec));
  }
  return jobs;
}

// Convenience overload drawing all three concerns from one seed.
inline std::vector<JobSpec> generate(const WorkloadParams& params, std::uint64_t seed) {
  RngStream arrivals(seed, "arrivals");
  RngStream durations(seed, "durations");
  RngStream sizes(seed, "data-sizes");
  return generate(params, arrivals, durations, sizes);
}

// Zero-duration, zero-data tasks all submitted at t=0.
inline std::vector<JobSpec> throughput_workload(std::size_t task_count) {
  if (task_count == 0) throw ConfigError("throughput workload needs at least one task");
  std::vector<JobSpec> jobs(task_count);
  for (std::size_t i = 0; i < task_count; ++i) {
    jobs[i].id = i + 1;
    jobs[i].executable = "sleep(0)";
  }
  return jobs;
}

enum class JobState {
  submitted,
  queued,
  waiting_for_retrieval,
  staging_in,
  running,
  staging_out,
  completed,
  failed,
  resubmitted,
};

inline std::string_view to_string(JobState s) {
  switch (s) {
    case JobState::submitted: return "submitted";
    case JobState::queued: return "queued";
    case JobState::waiting_for_retrieval: return "waiting-for-retrieval";
    case JobState::staging_in: return "staging-in";
    case JobState::running: return "running";
    case JobState::staging_out: return "staging-out";
    case JobState::completed: return "completed";
    case JobState::failed: return "failed";
    case JobState::resubmitted: return "resubmitted";
  }
  return "unknown";
}

// A worker can be lost during any phase it holds the job in, so the staging
// phases may also move to resubmitted.
inline bool is_legal_transition(JobState from, JobState to) {
  using S = JobState;
  switch (from) {
    case S::submitted: return to == S::queued;
    case S::queued: return to == S::staging_in || to == S::waiting_for_retrieval;
    case S::waiting_for_retrieval: return to == S::queued;
    case S::staging_in: return to == S::running || to == S::resubmitted;
    case S::running: return to == S::staging_out || to == S::resubmitted || to == S::failed;
    case S::resubmitted: return to == S::queued;
    case S::staging_out: return to == S::completed || to == S::resubmitted;
    case S::completed:
    case S::failed: return false;
  }
  return false;
}

struct StateChange {
  SimTime at = 0;
  JobState state = JobState::submitted;
};

// Timestamped state machine for one job.
class JobHistory {
 public:
  explicit JobHistory(SimTime submitted_at = 0) { changes_.push_back({submitted_at, JobState::submitted}); }

  JobState current() const noexcept { return changes_.back().state; }
  const std::vector<StateChange>& changes() const noexcept { return changes_; }

  void transition(JobState to, SimTime at) {
    if (!is_legal_transition(current(), to)) {
      throw IllegalTransition(std::string("illegal job transition ") + std::string(to_string(current())) +
                              " -> " + std::string(to_string(to)));
    }
    if (at < changes_.back().at) throw IllegalTransition("job transition goes back in time");
    changes_.push_back({at, to});
  }

  // Total time spent in `state`, up to `until` for the open interval.
  SimTime time_in(JobState state, SimTime until) const {
    SimTime total = 0;
    for (std::size_t i = 0; i < changes_.size(); ++i) {
      SimTime end = i + 1 < changes_.size() ? changes_[i + 1].at : until;
      if (changes_[i].state == state) total += end - changes_[i].at;
    }
    return total;
  }

  SimTime time_in(JobState state) const { return time_in(state, changes_.back().at); }

  std::size_t count(JobState state) const {
    return static_cast<std::size_t>(std::count_if(changes_.begin(), changes_.end(),
                                                  [state](const StateChange& c) { return c.state == state; }));
  }

 private:
  std::vector<StateChange> changes_;
};

}  // namespace kotta
