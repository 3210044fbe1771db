#include "linkemu/traffic.hpp"

#include <algorithm>
#include <cmath>

namespace linkemu {

namespace {

__extension__ typedef __int128 wide_int;

// Offset of the k-th frame of a CBR stream from its first.
SimTime cbr_offset(std::int64_t k, std::int32_t frame_bytes, double rate_bps) {
  const std::int64_t bits = static_cast<std::int64_t>(frame_bytes) * 8;
  if (std::floor(rate_bps) == rate_bps && rate_bps < 9.0e18) {
    const auto num = static_cast<wide_int>(k) * bits * 1000000000;
    return SimTime{static_cast<std::int64_t>(num / static_cast<wide_int>(rate_bps))};
  }
  const long double ns = static_cast<long double>(k) * bits * 1.0e9L / static_cast<long double>(rate_bps);
  return SimTime{static_cast<std::int64_t>(std::floor(ns))};
}

Packet make_packet(const FlowSpec& flow, std::uint64_t seq, std::int32_t frame, std::int32_t payload, SimTime at) {
  Packet p;
  p.seq = seq;
  p.flow_id = flow.id;
  p.src = flow.src;
  p.dst = flow.dst;
  p.frame_bytes = frame;
  p.payload_bytes = payload;
  p.created_at = at;
  return p;
}

void emit_cbr(const FlowSpec& flow, const CbrPattern& cbr, SimTime from, SimTime until, std::uint64_t& seq,
              PacketSchedule& out) {
  for (std::int64_t k = 0;; ++k) {
    const SimTime at = from + cbr_offset(k, cbr.frame_bytes, cbr.rate_bps);
    if (at >= until) break;
    out.push_back({at, make_packet(flow, seq++, cbr.frame_bytes, cbr.payload_bytes, at)});
  }
}

}  // namespace

PacketSchedule expand_flow(const FlowSpec& flow, SimTime t_end) {
  PacketSchedule out;
  const SimTime end = std::min(flow.stop, t_end);
  std::uint64_t seq = 0;
  if (const auto* cbr = std::get_if<CbrPattern>(&flow.pattern)) {
    emit_cbr(flow, *cbr, flow.start, end, seq, out);
  } else if (const auto* onoff = std::get_if<OnOffPattern>(&flow.pattern)) {
    const double cycle = onoff->on_s + onoff->off_s;
    for (std::int64_t c = 0;; ++c) {
      const SimTime cycle_start = flow.start + SimTime::from_seconds(static_cast<double>(c) * cycle);
      if (cycle_start >= end) break;
      const SimTime on_end = std::min(end, cycle_start + SimTime::from_seconds(onoff->on_s));
      emit_cbr(flow, onoff->inner, cycle_start, on_end, seq, out);
      if (onoff->off_s <= 0 && on_end >= end) break;
    }
  } else {
    const auto& probe = std::get<ProbePattern>(flow.pattern);
    for (std::int64_t i = 0; i < probe.count; ++i) {
      const SimTime at = flow.start + SimTime::from_seconds(static_cast<double>(i) * probe.interval_s);
      if (at >= end) break;
      auto pkt = make_packet(flow, seq++, probe.frame_bytes, probe.payload_bytes, at);
      out.push_back({at, std::move(pkt)});
    }
  }
  return out;
}

PacketSchedule multiplex(const std::vector<PacketSchedule>& schedules) {
  PacketSchedule merged;
  std::size_t total = 0;
  for (const auto& s : schedules) total += s.size();
  merged.reserve(total);
  for (const auto& s : schedules) merged.insert(merged.end(), s.begin(), s.end());
  std::sort(merged.begin(), merged.end(), [](const ScheduledPacket& x, const ScheduledPacket& y) {
    if (x.inject_at != y.inject_at) return x.inject_at < y.inject_at;
    if (x.packet.flow_id != y.packet.flow_id) return x.packet.flow_id < y.packet.flow_id;
    return x.packet.seq < y.packet.seq;
  });
  return merged;
}

}  // namespace linkemu
