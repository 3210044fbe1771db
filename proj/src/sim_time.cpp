#include "linkemu/sim_time.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace linkemu {
namespace {
__extension__ typedef __int128 wide_int;
}

SimTime SimTime::from_seconds(double s) { return SimTime{std::llround(s * 1e9)}; }

SimTime SimTime::from_millis(double ms) { return SimTime{std::llround(ms * 1e6)}; }

SimTime transmission_time(std::int64_t bytes, std::int64_t bandwidth_bps) {
  if (bandwidth_bps <= 0) {
    throw std::logic_error("transmission_time: bandwidth must be positive");
  }
  const auto bits = static_cast<wide_int>(bytes) * 8 * 1000000000;
  const auto ns = (bits + bandwidth_bps - 1) / bandwidth_bps;
  return SimTime{static_cast<std::int64_t>(ns)};
}

std::string format_seconds(SimTime t) {
  const std::int64_t whole = t.ticks / 1000000000;
  std::int64_t frac = t.ticks % 1000000000;
  const bool negative = t.ticks < 0;
  if (frac < 0) frac = -frac;
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%lld.%09lld", (negative && whole == 0) ? "-" : "",
                static_cast<long long>(whole), static_cast<long long>(frac));
  return buf;
}

}  // namespace linkemu
