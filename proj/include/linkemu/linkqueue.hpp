#pragma once

// One direction of an emulated link: a finite drop-tail rate queue drained at the configured
// bandwidth, followed by a delay line that holds each serviced packet for its propagation delay.
//
// Service is computed in closed form from virtual finish times:
//   start    = max(arrival, last_finish)
//   finish   = start + ceil(frame_bits / bandwidth)
//   delivery = max(finish + sampled_delay, last_delivery)    (clamp skipped if reordering allowed)
// A packet occupies the rate queue (counts toward capacity) until its finish time.

#include <cstdint>
#include <deque>
#include <string>

#include "linkemu/link_params.hpp"
#include "linkemu/rng.hpp"
#include "linkemu/sim_time.hpp"

namespace linkemu {

struct Packet {
  std::uint64_t seq = 0;
  std::string flow_id;
  std::string src;
  std::string dst;
  std::int32_t frame_bytes = 0;
  std::int32_t payload_bytes = 0;
  SimTime created_at;
  bool echo = false;
};

enum class DropReason { queue_full };

struct EnqueueOutcome {
  enum class Kind { accepted, dropped };

  Kind kind = Kind::dropped;
  SimTime service_start;
  SimTime service_finish;
  SimTime delivery;
  DropReason reason = DropReason::queue_full;

  [[nodiscard]] bool accepted() const { return kind == Kind::accepted; }

  static EnqueueOutcome accept(SimTime start, SimTime finish, SimTime delivery) {
    return EnqueueOutcome{Kind::accepted, start, finish, delivery, DropReason::queue_full};
  }
  static EnqueueOutcome drop(DropReason why) { return EnqueueOutcome{Kind::dropped, {}, {}, {}, why}; }
};

enum class ReconfigureStatus { applied, rejected_bounds, rejected_invalid };

const char* to_string(ReconfigureStatus status);

// Truncated-normal draws re-sample at most this many times before clamping to the floor.
inline constexpr int kMaxDelayRedraws = 64;

SimTime sample_delay(const DelayModel& model, RngStream& rng);

class LinkDirectionState {
 public:
  explicit LinkDirectionState(LinkDirectionParams params);

  // Admits `pkt` at `now` or drops it when it would overflow the rate queue.
  // Throws ProgrammingError if `now` precedes an earlier call.
  EnqueueOutcome enqueue(const Packet& pkt, SimTime now, RngStream& rng);

  // Applies new parameters to subsequent arrivals. Already admitted packets keep their
  // finish and delivery times. Rejected updates leave the state untouched.
  ReconfigureStatus reconfigure(const LinkDirectionParams& next, SimTime now);

  // The engine reports each delivery that left the delay line.
  void record_delivery() { ++delivered_; }

  [[nodiscard]] const LinkDirectionParams& params() const { return params_; }
  // Bytes admitted but not yet past their service finish, as of `now`.
  [[nodiscard]] std::int64_t backlog_bytes(SimTime now) const;
  [[nodiscard]] std::size_t rate_queue_packets(SimTime now) const;
  [[nodiscard]] SimTime last_finish() const { return last_finish_; }
  [[nodiscard]] SimTime last_delivery() const { return last_delivery_; }

  [[nodiscard]] std::uint64_t offered() const { return admitted_ + drops_; }
  [[nodiscard]] std::uint64_t admitted() const { return admitted_; }
  [[nodiscard]] std::uint64_t drops() const { return drops_; }
  [[nodiscard]] std::uint64_t delivered() const { return delivered_; }
  [[nodiscard]] std::uint64_t in_flight() const { return admitted_ - delivered_; }

 private:
  struct Admitted {
    SimTime finish;
    std::int32_t bytes;
  };

  void retire_served(SimTime now);

  LinkDirectionParams params_;
  std::deque<Admitted> rate_queue_;
  std::int64_t backlog_bytes_ = 0;
  SimTime last_finish_;
  SimTime last_delivery_;
  SimTime last_now_;
  std::uint64_t admitted_ = 0;
  std::uint64_t drops_ = 0;
  std::uint64_t delivered_ = 0;
};

}  // namespace linkemu
