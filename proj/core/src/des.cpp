#include "odapsim/des.hpp"

#include <algorithm>

namespace odapsim::des {

EventHandle Engine::schedule_at(double fire_at, Action action) {
  if (fire_at < now_) {
    throw EngineError("schedule_at(" + std::to_string(fire_at) +
                      ") is in the past (now=" + std::to_string(now_) + ")");
  }
  EventHandle handle{std::make_shared<bool>(true)};
  calendar_.push(Event{fire_at, next_seq_++, handle.alive, std::move(action)});
  return handle;
}

void Engine::cancel(const EventHandle& handle) {
  if (handle.alive) *handle.alive = false;
}

Resource& Engine::add_resource(const std::string& id, int capacity) {
  if (capacity < 1) throw EngineError("resource '" + id + "': capacity must be >= 1");
  for (const Resource& r : resources_) {
    if (r.id() == id) throw EngineError("resource '" + id + "' already exists");
  }
  resources_.emplace_back(id, capacity);
  return resources_.back();
}

Resource& Engine::resource(const std::string& id) {
  for (Resource& r : resources_) {
    if (r.id() == id) return r;
  }
  throw EngineError("unknown resource '" + id + "'");
}

void Engine::acquire(Resource& res, Action on_granted) {
  if (res.holders_ < res.capacity_ && res.waiters_.empty()) {
    res.account(now_);
    ++res.holders_;
    // Grant through the calendar so equal-time grants keep FIFO order with
    // everything else scheduled at this instant.
    schedule_at(now_, std::move(on_granted));
  } else {
    res.waiters_.push_back(std::move(on_granted));
    res.max_queue_ = std::max(res.max_queue_, static_cast<int>(res.waiters_.size()));
  }
}

void Engine::release(Resource& res) {
  if (res.holders_ <= 0) {
    throw EngineError("release of '" + res.id() + "' without a matching hold");
  }
  res.account(now_);
  --res.holders_;
  if (!res.waiters_.empty() && res.holders_ < res.capacity_) {
    Action next = std::move(res.waiters_.front());
    res.waiters_.pop_front();
    res.account(now_);
    ++res.holders_;
    schedule_at(now_, std::move(next));
  }
}

void Engine::hold(Resource& res, double duration, Action on_done) {
  acquire(res, [this, &res, duration, on_done = std::move(on_done)]() {
    schedule_in(duration, [this, &res, on_done = std::move(on_done)]() {
      release(res);
      on_done();
    });
  });
}

void Engine::acquire_all(std::vector<Resource*> resources, Action on_granted) {
  if (resources.empty()) {
    schedule_at(now_, std::move(on_granted));
    return;
  }
  acquire_next(std::make_shared<AcquireChain>(
      AcquireChain{std::move(resources), std::move(on_granted)}));
}

void Engine::acquire_next(std::shared_ptr<AcquireChain> chain) {
  if (chain->next == chain->resources.size()) {
    chain->done();
    return;
  }
  Resource& res = *chain->resources[chain->next++];
  acquire(res, [this, chain = std::move(chain)]() { acquire_next(chain); });
}

void Engine::release_all(const std::vector<Resource*>& resources) {
  for (Resource* r : resources) release(*r);
}

RunStats Engine::run() { return run_impl(nullptr); }

RunStats Engine::run_until(const std::function<bool()>& stop) { return run_impl(&stop); }

RunStats Engine::run_impl(const std::function<bool()>* stop) {
  RunStats stats;
  if (stop && (*stop)()) {
    stats.end_time = now_;
    stats.stopped_by_predicate = true;
    return stats;
  }
  while (!calendar_.empty()) {
    Event ev = calendar_.top();
    calendar_.pop();
    if (!*ev.alive) continue;
    now_ = ev.fire_at;
    ev.action();
    ++events_processed_;
    ++stats.events_processed;
    if (events_processed_ > event_limit_) {
      throw EngineError("event limit of " + std::to_string(event_limit_) +
                        " exceeded; simulation is not converging");
    }
    if (stop && (*stop)()) {
      stats.stopped_by_predicate = true;
      break;
    }
  }
  stats.end_time = now_;
  for (Resource& r : resources_) r.account(now_);
  return stats;
}

double Engine::utilization(const Resource& res) const {
  if (now_ <= 0.0) return 0.0;
  const double u = res.busy_integral() / (res.capacity() * now_);
  return std::clamp(u, 0.0, 1.0);
}

} // namespace odapsim::des
