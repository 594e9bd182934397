#include "mmv2v/event_queue.hpp"

#include <cmath>

namespace mmv2v {

SimTime SimTime::from_us_real(double us) { return SimTime{std::llround(us * 1e3)}; }

std::string SimTime::to_string() const { return std::to_string(ns_) + "ns"; }

EventId EventQueue::schedule(SimTime fire_at, Handler handler) {
  if (fire_at < now_) {
    throw SchedulingError("event scheduled in the past: " + fire_at.to_string() + " < " + now_.to_string());
  }
  const EventId id = handlers_.size();
  handlers_.push_back(std::move(handler));
  heap_.push(Entry{fire_at, id});
  ++live_;
  return id;
}

bool EventQueue::cancel(EventId id) {
  if (id >= handlers_.size() || !handlers_[id]) return false;
  handlers_[id] = nullptr;
  --live_;
  return true;
}

std::size_t EventQueue::run_until(SimTime t_end) {
  std::size_t dispatched = 0;
  while (!heap_.empty() && heap_.top().at <= t_end) {
    const Entry e = heap_.top();
    heap_.pop();
    Handler h = std::move(handlers_[e.seq]);
    handlers_[e.seq] = nullptr;
    if (!h) continue;  // cancelled
    --live_;
    now_ = e.at;
    h();
    ++dispatched;
  }
  if (t_end > now_) now_ = t_end;
  return dispatched;
}

}  // namespace mmv2v
