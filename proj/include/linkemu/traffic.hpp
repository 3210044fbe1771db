#pragma once

#include <vector>

#include "linkemu/flow_spec.hpp"
#include "linkemu/linkqueue.hpp"

namespace linkemu {

struct ScheduledPacket {
  SimTime inject_at;
  Packet packet;
};

// Sorted by inject_at; per-flow seq strictly increasing.
using PacketSchedule = std::vector<ScheduledPacket>;

// Expands one flow over [start, min(stop, t_end)). CBR packet k is injected at
// start + floor(k * frame_bits / rate), so the offered rate never drifts.
PacketSchedule expand_flow(const FlowSpec& flow, SimTime t_end);

// Merges sorted schedules; same-time injections order by flow id, then seq.
PacketSchedule multiplex(const std::vector<PacketSchedule>& schedules);

}  // namespace linkemu
