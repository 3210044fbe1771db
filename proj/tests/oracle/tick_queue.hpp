#pragma once

// Brute-force rate queue advanced one microsecond at a time. Valid when every
// arrival lands on a whole microsecond; each tick drains bandwidth/1e6 bits.

#include <cstdint>
#include <deque>
#include <vector>

namespace oracle {

struct TickArrival {
  std::int64_t at_us = 0;
  std::int64_t frame_bytes = 0;
};

struct TickOutcome {
  bool accepted = false;
  std::int64_t finish_us = 0;
  std::int64_t delivery_us = 0;
};

inline std::vector<TickOutcome> simulate_ticks(const std::vector<TickArrival>& arrivals, std::int64_t bandwidth_bps,
                                               std::int64_t capacity_bytes, std::int64_t delay_us) {
  struct Slot {
    std::size_t index;
    std::int64_t bytes;
    std::int64_t bits_left;
  };
  std::vector<TickOutcome> out(arrivals.size());
  std::deque<Slot> queue;
  const std::int64_t bits_per_tick = bandwidth_bps / 1000000;
  std::size_t next = 0;
  std::int64_t backlog = 0;
  for (std::int64_t t = 0; next < arrivals.size() || !queue.empty(); ++t) {
    while (next < arrivals.size() && arrivals[next].at_us == t) {
      const auto& a = arrivals[next];
      if (backlog + a.frame_bytes <= capacity_bytes) {
        out[next].accepted = true;
        queue.push_back(Slot{next, a.frame_bytes, a.frame_bytes * 8});
        backlog += a.frame_bytes;
      }
      ++next;
    }
    std::int64_t budget = bits_per_tick;
    while (budget > 0 && !queue.empty()) {
      auto& head = queue.front();
      const auto used = head.bits_left < budget ? head.bits_left : budget;
      head.bits_left -= used;
      budget -= used;
      if (head.bits_left == 0) {
        // A packet whose last bit leaves during tick t is gone by t+1.
        out[head.index].finish_us = t + 1;
        out[head.index].delivery_us = t + 1 + delay_us;
        backlog -= head.bytes;
        queue.pop_front();
      }
    }
  }
  return out;
}

}  // namespace oracle
