#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "mmv2v/sim_time.hpp"

namespace mmv2v {

using EventId = std::uint64_t;

class SchedulingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Single-threaded discrete-event scheduler. Events fire in lexicographic
/// (fire_at, seq) order where seq is the insertion counter, so equal-time
/// events run in the order they were scheduled.
class EventQueue {
 public:
  using Handler = std::function<void()>;

  /// Throws SchedulingError if `fire_at` is earlier than the current clock.
  EventId schedule(SimTime fire_at, Handler handler);
  EventId schedule_in(SimTime delay, Handler handler) { return schedule(now_ + delay, std::move(handler)); }

  /// Returns false if the event already fired, was cancelled, or never existed.
  bool cancel(EventId id);

  /// Dispatches every pending event with fire_at <= t_end and leaves the
  /// clock at t_end. Returns the number of handlers run.
  std::size_t run_until(SimTime t_end);

  SimTime now() const { return now_; }
  std::size_t pending() const { return live_; }

 private:
  struct Entry {
    SimTime at;
    EventId seq;
    bool operator>(const Entry& o) const { return at != o.at ? at > o.at : seq > o.seq; }
  };

  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap_;
  std::vector<Handler> handlers_;
  SimTime now_{};
  std::size_t live_ = 0;
};

}  // namespace mmv2v
