#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "linkemu/error.hpp"
#include "linkemu/sim_time.hpp"

namespace linkemu {

enum class EventKind : std::uint8_t {
  packet_arrival,
  service_complete,
  delivery,
  reconfigure,
  dama_epoch,
  telemetry_flush,
  verify_runtime,
  end_of_run,
};

inline constexpr std::size_t kEventKindCount = 8;

constexpr const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::packet_arrival: return "packet-arrival";
    case EventKind::service_complete: return "service-complete";
    case EventKind::delivery: return "delivery";
    case EventKind::reconfigure: return "reconfigure";
    case EventKind::dama_epoch: return "dama-epoch";
    case EventKind::telemetry_flush: return "telemetry-flush";
    case EventKind::verify_runtime: return "verify-runtime";
    case EventKind::end_of_run: return "end-of-run";
  }
  return "?";
}

// Min-heap of events ordered by (at, seq). `seq` is assigned at schedule time, so events
// sharing a timestamp run in insertion order.
template <typename Payload>
class EventQueue {
 public:
  struct Event {
    SimTime at;
    std::uint64_t seq = 0;
    EventKind kind = EventKind::end_of_run;
    Payload payload;
  };

  // Throws ProgrammingError when `at` lies before the current time.
  std::uint64_t schedule(SimTime at, EventKind kind, Payload payload) {
    if (at < now_) throw ProgrammingError("EventQueue::schedule: event in the past");
    const auto seq = next_seq_++;
    heap_.push_back(Event{at, seq, kind, std::move(payload)});
    std::push_heap(heap_.begin(), heap_.end(), Later{});
    return seq;
  }

  [[nodiscard]] bool empty() const { return heap_.empty(); }
  [[nodiscard]] std::size_t size() const { return heap_.size(); }
  [[nodiscard]] const Event& top() const { return heap_.front(); }
  [[nodiscard]] SimTime now() const { return now_; }

  // Removes the earliest event and advances the clock to its time.
  Event pop() {
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    Event ev = std::move(heap_.back());
    heap_.pop_back();
    now_ = ev.at;
    return ev;
  }

  // Moves the clock forward without an event (e.g. to a run horizon).
  void advance_to(SimTime t) {
    if (t < now_) throw ProgrammingError("EventQueue::advance_to: time regression");
    now_ = t;
  }

  // Allocates a sequence number for an event executed inline rather than queued.
  std::uint64_t reserve_seq() { return next_seq_++; }

 private:
  struct Later {
    bool operator()(const Event& x, const Event& y) const {
      if (x.at != y.at) return x.at > y.at;
      return x.seq > y.seq;
    }
  };

  std::vector<Event> heap_;
  std::uint64_t next_seq_ = 0;
  SimTime now_;
};

}  // namespace linkemu
