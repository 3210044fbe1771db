#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <string>

namespace linkemu {

// Simulation time and durations, in integer nanoseconds since run start.
struct SimTime {
  std::int64_t ticks = 0;

  static constexpr SimTime from_ns(std::int64_t ns) { return SimTime{ns}; }
  static constexpr SimTime from_us(std::int64_t us) { return SimTime{us * 1000}; }
  static constexpr SimTime from_ms_int(std::int64_t ms) { return SimTime{ms * 1000000}; }
  static SimTime from_seconds(double s);
  static SimTime from_millis(double ms);
  static constexpr SimTime max() { return SimTime{std::numeric_limits<std::int64_t>::max()}; }

  [[nodiscard]] double seconds() const { return static_cast<double>(ticks) / 1e9; }
  [[nodiscard]] double millis() const { return static_cast<double>(ticks) / 1e6; }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime& operator+=(SimTime d) {
    ticks += d.ticks;
    return *this;
  }
  constexpr SimTime& operator-=(SimTime d) {
    ticks -= d.ticks;
    return *this;
  }
  friend constexpr SimTime operator+(SimTime a, SimTime b) { return SimTime{a.ticks + b.ticks}; }
  friend constexpr SimTime operator-(SimTime a, SimTime b) { return SimTime{a.ticks - b.ticks}; }
};

// Wire time of `bytes` at `bandwidth_bps`, rounded up to the next tick.
SimTime transmission_time(std::int64_t bytes, std::int64_t bandwidth_bps);

// Seconds with nanosecond digits, e.g. "16.001000000".
std::string format_seconds(SimTime t);

}  // namespace linkemu
