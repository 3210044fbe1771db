#include "linkemu/linkqueue.hpp"

#include <algorithm>
#include <cmath>

#include "linkemu/error.hpp"

namespace linkemu {

const char* to_string(ReconfigureStatus status) {
  switch (status) {
    case ReconfigureStatus::applied: return "applied";
    case ReconfigureStatus::rejected_bounds: return "rejected-bounds";
    case ReconfigureStatus::rejected_invalid: return "rejected-invalid";
  }
  return "?";
}

SimTime sample_delay(const DelayModel& model, RngStream& rng) {
  if (model.kind == DelayKind::constant || model.std_ms <= 0.0) {
    return SimTime::from_millis(model.mean_ms);
  }
  for (int attempt = 0; attempt < kMaxDelayRedraws; ++attempt) {
    const double ms = rng.normal(model.mean_ms, model.std_ms);
    if (ms >= model.floor_ms) return SimTime::from_millis(ms);
  }
  return SimTime::from_millis(model.floor_ms);
}

LinkDirectionState::LinkDirectionState(LinkDirectionParams params) : params_(std::move(params)) {}

void LinkDirectionState::retire_served(SimTime now) {
  while (!rate_queue_.empty() && rate_queue_.front().finish <= now) {
    backlog_bytes_ -= rate_queue_.front().bytes;
    rate_queue_.pop_front();
  }
}

std::int64_t LinkDirectionState::backlog_bytes(SimTime now) const {
  std::int64_t bytes = backlog_bytes_;
  for (const auto& a : rate_queue_) {
    if (a.finish > now) break;
    bytes -= a.bytes;
  }
  return bytes;
}

std::size_t LinkDirectionState::rate_queue_packets(SimTime now) const {
  const auto served = std::find_if(rate_queue_.begin(), rate_queue_.end(),
                                   [now](const Admitted& a) { return a.finish > now; });
  return static_cast<std::size_t>(rate_queue_.end() - served);
}

EnqueueOutcome LinkDirectionState::enqueue(const Packet& pkt, SimTime now, RngStream& rng) {
  if (now < last_now_) {
    throw ProgrammingError("enqueue: time regression (" + format_seconds(now) + " < " +
                           format_seconds(last_now_) + ")");
  }
  if (pkt.frame_bytes <= 0 || pkt.payload_bytes > pkt.frame_bytes) {
    throw ProgrammingError("enqueue: malformed packet sizes");
  }
  last_now_ = now;
  retire_served(now);

  if (backlog_bytes_ + pkt.frame_bytes > params_.queue_capacity_bytes) {
    ++drops_;
    return EnqueueOutcome::drop(DropReason::queue_full);
  }

  const SimTime start = std::max(now, last_finish_);
  const SimTime finish = start + transmission_time(pkt.frame_bytes, params_.bandwidth_bps);
  SimTime delivery = finish + sample_delay(params_.delay, rng);
  if (!params_.allow_reordering) delivery = std::max(delivery, last_delivery_);

  rate_queue_.push_back(Admitted{finish, pkt.frame_bytes});
  backlog_bytes_ += pkt.frame_bytes;
  last_finish_ = finish;
  last_delivery_ = std::max(last_delivery_, delivery);
  ++admitted_;
  return EnqueueOutcome::accept(start, finish, delivery);
}

ReconfigureStatus LinkDirectionState::reconfigure(const LinkDirectionParams& next, SimTime now) {
  if (next.bandwidth_bps <= 0 || next.queue_capacity_bytes <= 0 ||
      !delay_model_violation(next.delay).empty()) {
    return ReconfigureStatus::rejected_invalid;
  }
  if (next.bandwidth_bps < next.min_bandwidth_bps || next.bandwidth_bps > next.max_bandwidth_bps) {
    return ReconfigureStatus::rejected_bounds;
  }
  params_ = next;
  last_finish_ = std::max(last_finish_, now);
  return ReconfigureStatus::applied;
}

}  // namespace linkemu
