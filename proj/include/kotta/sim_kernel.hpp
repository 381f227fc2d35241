#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kotta/error.hpp"

namespace kotta {

// Virtual time in whole seconds.
using SimTime = std::int64_t;

inline constexpr SimTime kMinute = 60;
inline constexpr SimTime kHour = 3600;
inline constexpr SimTime kDay = 86400;

enum class EventKind {
  job_arrival,
  instance_ready,
  instance_revoked,
  job_finished,
  staging_done,
  lifecycle_tick,
  retrieval_done,
  watcher_tick,
};

inline std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::job_arrival: return "job-arrival";
    case EventKind::instance_ready: return "instance-ready";
    case EventKind::instance_revoked: return "instance-revoked";
    case EventKind::job_finished: return "job-finished";
    case EventKind::staging_done: return "staging-done";
    case EventKind::lifecycle_tick: return "lifecycle-tick";
    case EventKind::retrieval_done: return "retrieval-done";
    case EventKind::watcher_tick: return "watcher-tick";
  }
  return "unknown";
}

struct Event {
  SimTime fire_at = 0;
  std::uint64_t sequence = 0;
  EventKind kind = EventKind::job_arrival;
  // Identifier of whatever the event concerns (job, instance, object index).
  std::uint64_t subject = 0;
};

// Deterministic single-threaded discrete-event engine. Events at equal times
// fire in the order they were scheduled.
class Engine {
 public:
  using Handler = std::function<void(const Event&)>;

  explicit Engine(bool keep_log = true) : keep_log_(keep_log) {}

  SimTime now() const noexcept { return clock_; }

  std::uint64_t schedule(SimTime at, EventKind kind, std::uint64_t subject, Handler handler) {
    if (at < clock_) {
      throw ClockViolation("event scheduled at t=" + std::to_string(at) +
                           " but clock is already t=" + std::to_string(clock_));
    }
    Entry entry{Event{at, next_sequence_++, kind, subject}, std::move(handler)};
    queue_.push(std::move(entry));
    ++scheduled_;
    return next_sequence_ - 1;
  }

  // Processes every event with fire_at <= deadline, then parks the clock at
  // the deadline. Returns the number of events processed.
  std::size_t run_until(SimTime deadline) {
    std::size_t processed = 0;
    stop_requested_ = false;
    while (!queue_.empty() && queue_.top().event.fire_at <= deadline) {
      Entry entry = queue_.top();
      queue_.pop();
      clock_ = entry.event.fire_at;
      ++processed_;
      ++processed;
      if (keep_log_) log_.push_back(entry.event);
      if (entry.handler) entry.handler(entry.event);
      if (stop_requested_) return processed;
    }
    if (deadline > clock_) clock_ = deadline;
    return processed;
  }

  // Runs until the queue drains or stop() is called from a handler.
  std::size_t run() {
    std::size_t processed = 0;
    stop_requested_ = false;
    while (!queue_.empty()) {
      Entry entry = queue_.top();
      queue_.pop();
      clock_ = entry.event.fire_at;
      ++processed_;
      ++processed;
      if (keep_log_) log_.push_back(entry.event);
      if (entry.handler) entry.handler(entry.event);
      if (stop_requested_) break;
    }
    return processed;
  }

  // Halts run()/run_until() after the current handler returns.
  void stop() noexcept { stop_requested_ = true; }

  bool empty() const noexcept { return queue_.empty(); }
  std::size_t pending() const noexcept { return queue_.size(); }
  std::uint64_t scheduled_count() const noexcept { return scheduled_; }
  std::uint64_t processed_count() const noexcept { return processed_; }
  SimTime next_fire_time() const { return queue_.empty() ? clock_ : queue_.top().event.fire_at; }

  const std::vector<Event>& log() const noexcept { return log_; }

  std::string log_text() const {
    std::string out;
    for (const auto& e : log_) {
      out += std::to_string(e.fire_at);
      out += ' ';
      out += std::to_string(e.sequence);
      out += ' ';
      out += to_string(e.kind);
      out += ' ';
      out += std::to_string(e.subject);
      out += '\n';
    }
    return out;
  }

 private:
  struct Entry {
    Event event;
    Handler handler;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const noexcept {
      if (a.event.fire_at != b.event.fire_at) return a.event.fire_at > b.event.fire_at;
      return a.event.sequence > b.event.sequence;
    }
  };

  std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
  SimTime clock_ = 0;
  std::uint64_t next_sequence_ = 0;
  std::uint64_t scheduled_ = 0;
  std::uint64_t processed_ = 0;
  bool keep_log_;
  bool stop_requested_ = false;
  std::vector<Event> log_;
};

// A named random stream. The same (seed, label) pair always yields the same
// sequence: std::mt19937_64 output is fixed by the standard, and every
// distribution below is computed here rather than through <random>
// distributions, whose algorithms vary between standard libraries.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view label)
      : seed_(seed), label_(label), engine_(mix(seed ^ fnv1a(label))) {}

  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& label() const noexcept { return label_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of precision.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double exponential(double mean) { return -mean * std::log1p(-uniform01()); }

  // Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    auto i = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  bool bernoulli(double p) { return uniform01() < p; }

 private:
  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return h;
  }
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
  std::string label_;
  std::mt19937_64 engine_;
};

}  // namespace kotta
