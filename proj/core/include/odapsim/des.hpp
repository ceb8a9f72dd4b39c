#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <queue>
#include <string>
#include <vector>

#include "odapsim/errors.hpp"

namespace odapsim::des {

using Action = std::function<void()>;

// Shared flag; cancelling flips it and the engine skips the event on pop.
struct EventHandle {
  std::shared_ptr<bool> alive;
  bool valid() const { return static_cast<bool>(alive); }
};

// Exclusive (or counted) resource with a strictly FIFO wait queue.
class Resource {
public:
  Resource(std::string id, int capacity) : id_(std::move(id)), capacity_(capacity) {}

  const std::string& id() const { return id_; }
  int capacity() const { return capacity_; }
  int holders() const { return holders_; }
  int queue_length() const { return static_cast<int>(waiters_.size()); }
  int max_queue_length() const { return max_queue_; }
  double busy_integral() const { return busy_integral_; }

private:
  friend class Engine;
  std::string id_;
  int capacity_ = 1;
  int holders_ = 0;
  std::deque<Action> waiters_;
  int max_queue_ = 0;
  double busy_integral_ = 0.0; // sum over time of holders()
  double last_change_ = 0.0;

  void account(double now) {
    busy_integral_ += holders_ * (now - last_change_);
    last_change_ = now;
  }
};

struct RunStats {
  double end_time = 0.0;
  std::uint64_t events_processed = 0;
  bool stopped_by_predicate = false;
};

// Deterministic event calendar: events fire in (time, insertion sequence)
// order, so equal-time events run first-scheduled-first. A single engine is
// strictly single threaded; independent engines never share state.
class Engine {
public:
  Engine() = default;
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  double now() const { return now_; }

  EventHandle schedule_at(double fire_at, Action action);
  EventHandle schedule_in(double delay, Action action) {
    return schedule_at(now_ + delay, std::move(action));
  }
  void cancel(const EventHandle& handle);

  Resource& add_resource(const std::string& id, int capacity = 1);
  Resource& resource(const std::string& id);

  // Runs `on_granted` as soon as the resource has a free slot; strictly FIFO.
  void acquire(Resource& res, Action on_granted);
  void release(Resource& res);
  // acquire, keep for `duration`, release, then continue.
  void hold(Resource& res, double duration, Action on_done);
  // Sequential acquisition in the given order (callers pass a canonical order
  // to stay deadlock free); all slots held when `on_granted` runs.
  void acquire_all(std::vector<Resource*> resources, Action on_granted);
  void release_all(const std::vector<Resource*>& resources);

  void set_event_limit(std::uint64_t limit) { event_limit_ = limit; }

  // Processes events until the calendar empties. Throws EngineError when the
  // event limit trips (livelock guard).
  RunStats run();
  // Stops as soon as `stop` returns true; checked before the first event and
  // after each processed event.
  RunStats run_until(const std::function<bool()>& stop);

  double utilization(const Resource& res) const;
  std::uint64_t events_processed() const { return events_processed_; }

private:
  struct AcquireChain {
    std::vector<Resource*> resources;
    Action done;
    std::size_t next = 0;
  };
  void acquire_next(std::shared_ptr<AcquireChain> chain);

  struct Event {
    double fire_at;
    std::uint64_t seq;
    std::shared_ptr<bool> alive;
    Action action;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
      return a.seq > b.seq;
    }
  };

  RunStats run_impl(const std::function<bool()>* stop);

  double now_ = 0.0;
  std::uint64_t next_seq_ = 0;
  std::uint64_t events_processed_ = 0;
  std::uint64_t event_limit_ = 100'000'000;
  std::priority_queue<Event, std::vector<Event>, Later> calendar_;
  std::deque<Resource> resources_;
};

} // namespace odapsim::des
