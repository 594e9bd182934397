#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace mmv2v {

/// Simulation clock value in integer nanoseconds. Used both for instants
/// (measured from snapshot start) and for durations.
class SimTime {
 public:
  constexpr SimTime() = default;

  static constexpr SimTime from_ns(std::int64_t ns) { return SimTime{ns}; }
  static constexpr SimTime from_us(std::int64_t us) { return SimTime{us * 1'000}; }
  static constexpr SimTime from_ms(std::int64_t ms) { return SimTime{ms * 1'000'000}; }
  static constexpr SimTime from_s(std::int64_t s) { return SimTime{s * 1'000'000'000}; }
  /// Rounds to the nearest nanosecond.
  static SimTime from_us_real(double us);

  constexpr std::int64_t ns() const { return ns_; }
  constexpr double us() const { return static_cast<double>(ns_) / 1e3; }
  constexpr double ms() const { return static_cast<double>(ns_) / 1e6; }
  constexpr double seconds() const { return static_cast<double>(ns_) / 1e9; }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime& operator+=(SimTime o) { ns_ += o.ns_; return *this; }
  constexpr SimTime& operator-=(SimTime o) { ns_ -= o.ns_; return *this; }
  friend constexpr SimTime operator+(SimTime a, SimTime b) { return SimTime{a.ns_ + b.ns_}; }
  friend constexpr SimTime operator-(SimTime a, SimTime b) { return SimTime{a.ns_ - b.ns_}; }
  friend constexpr SimTime operator*(SimTime a, std::int64_t k) { return SimTime{a.ns_ * k}; }
  friend constexpr SimTime operator*(std::int64_t k, SimTime a) { return SimTime{a.ns_ * k}; }

  std::string to_string() const;

 private:
  constexpr explicit SimTime(std::int64_t ns) : ns_(ns) {}
  std::int64_t ns_ = 0;
};

/// IEEE 802.11 time unit, 1024 us.
inline constexpr SimTime kTimeUnit = SimTime::from_us(1024);

constexpr SimTime time_units(std::int64_t n) { return kTimeUnit * n; }

}  // namespace mmv2v
