#include "linkemu/emulator.hpp"

#include <chrono>
#include <ostream>
#include <queue>
#include <thread>

namespace linkemu {

namespace {

constexpr std::size_t dir_index_of(std::size_t link, Direction dir) {
  return link * 2 + (dir == Direction::reverse ? 1 : 0);
}

constexpr Direction dir_of(std::size_t dir_index) {
  return dir_index % 2 == 0 ? Direction::forward : Direction::reverse;
}

std::vector<Direction> selected(DirectionSelector s) {
  switch (s) {
    case DirectionSelector::forward: return {Direction::forward};
    case DirectionSelector::reverse: return {Direction::reverse};
    case DirectionSelector::both: return {Direction::forward, Direction::reverse};
  }
  return {};
}

}  // namespace

RunError::RunError(const EventInfo& event, const std::string& cause)
    : std::runtime_error("event " + std::string(to_string(event.kind)) + " at tick " +
                         std::to_string(event.at.ticks) + " (" + event.entity + ") failed: " + cause),
      event_(event) {}

struct Emulator::Pacer {
  using Clock = std::chrono::steady_clock;
  double speed = 1.0;
  Clock::time_point start = Clock::now();
  double max_lateness_s = 0.0;
  std::uint64_t late = 0;

  void wait_for(SimTime at) {
    const auto target = start + std::chrono::duration_cast<Clock::duration>(
                                    std::chrono::duration<double>(at.seconds() / speed));
    auto now = Clock::now();
    if (now < target - std::chrono::microseconds(200)) {
      std::this_thread::sleep_until(target);
      now = Clock::now();
    }
    const double lateness = std::chrono::duration<double>(now - target).count();
    if (lateness > max_lateness_s) max_lateness_s = lateness;
    if (lateness > 0.010) ++late;
  }
};

Emulator::Emulator(NetworkDescription desc, EmulatorOptions options)
    : desc_(std::move(desc)), options_(std::move(options)) {
  horizon_ = options_.horizon.value_or(desc_.default_horizon());

  states_.reserve(desc_.links.size() * 2);
  delay_rngs_.reserve(desc_.links.size() * 2);
  for (const auto& l : desc_.links) {
    for (auto dir : {Direction::forward, Direction::reverse}) {
      states_.emplace_back(l.params(dir));
      delay_rngs_.emplace_back(options_.seed, "delay:" + l.id + ":" + to_string(dir));
      store_.add_rate_change(RateChangeRecord{SimTime{}, l.id, dir, l.params(dir).bandwidth_bps});
    }
  }
  epoch_offered_bits_.assign(states_.size(), 0);
  scripted_demand_.resize(states_.size());

  // Control events are queued ahead of traffic: at equal timestamps reconfigurations
  // and allocations precede packet arrivals.
  for (const auto& e : desc_.schedule) {
    const auto li = desc_.link_index(e.link);
    if (!li) throw ConfigError("schedule references unknown link " + e.link);
    for (auto dir : selected(e.dir)) {
      const auto di = dir_index_of(*li, dir);
      if (e.is_demand()) {
        scripted_demand_[di].emplace_back(e.at, *e.demand_bps);
      } else if (e.at <= horizon_) {
        queue_.schedule(e.at, EventKind::reconfigure,
                        ReconfigureEv{di, e.bandwidth_bps, e.delay, e.queue_capacity_bytes, "schedule"});
      }
    }
  }

  if (desc_.dama) {
    dama_.emplace(*desc_.dama);
    std::vector<DirectionRef> refs = desc_.dama->managed;
    if (refs.empty()) {
      for (const auto& l : desc_.links) {
        refs.push_back({l.id, Direction::forward});
        refs.push_back({l.id, Direction::reverse});
      }
    }
    for (const auto& ref : refs) {
      const auto li = desc_.link_index(ref.link);
      if (!li) throw ConfigError("dama manages unknown link " + ref.link);
      const auto di = dir_index_of(*li, ref.dir);
      managed_.push_back(ManagedDirection{ref, *li, desc_.links[*li].params(ref.dir), &states_[di]});
    }
    const SimTime epoch = SimTime::from_seconds(desc_.dama->epoch_s);
    for (std::int64_t k = 0; SimTime{k * epoch.ticks} < horizon_; ++k) {
      queue_.schedule(SimTime{k * epoch.ticks}, EventKind::dama_epoch, EpochEv{k});
    }
  }

  if (options_.verify_interval > SimTime{}) {
    for (SimTime t = options_.verify_interval; t < horizon_; t += options_.verify_interval) {
      queue_.schedule(t, EventKind::verify_runtime, MarkerEv{});
    }
  }
  if (options_.snapshots != nullptr && options_.flush_interval > SimTime{}) {
    for (SimTime t = options_.flush_interval; t <= horizon_; t += options_.flush_interval) {
      queue_.schedule(t, EventKind::telemetry_flush, MarkerEv{});
    }
  }

  std::vector<PacketSchedule> schedules;
  for (const auto& f : desc_.flows) {
    if (const auto* probe = std::get_if<ProbePattern>(&f.pattern)) echo_flows_[f.id] = probe->echo;
    route_for(f.src, f.dst);
    if (echo_flows_[f.id]) route_for(f.dst, f.src);
    schedules.push_back(expand_flow(f, horizon_));
  }
  for (auto& sp : multiplex(schedules)) {
    const auto route = route_for(sp.packet.src, sp.packet.dst);
    queue_.schedule(sp.inject_at, EventKind::packet_arrival, ArrivalEv{route, 0, std::move(sp.packet)});
    ++injected_;
  }
}

std::size_t Emulator::route_for(const std::string& src, const std::string& dst) {
  const auto key = std::make_pair(src, dst);
  if (const auto it = route_index_.find(key); it != route_index_.end()) return it->second;

  // Breadth-first search; neighbours are visited in link declaration order.
  std::map<std::string, std::vector<std::pair<std::string, std::size_t>>> adjacency;
  for (std::size_t i = 0; i < desc_.links.size(); ++i) {
    const auto& l = desc_.links[i];
    adjacency[l.a.node].emplace_back(l.b.node, dir_index_of(i, Direction::forward));
    adjacency[l.b.node].emplace_back(l.a.node, dir_index_of(i, Direction::reverse));
  }
  std::map<std::string, std::pair<std::string, std::size_t>> parent;
  std::queue<std::string> frontier;
  frontier.push(src);
  parent[src] = {src, 0};
  while (!frontier.empty() && !parent.contains(dst)) {
    const auto cur = frontier.front();
    frontier.pop();
    for (const auto& [next, di] : adjacency[cur]) {
      if (parent.contains(next)) continue;
      parent[next] = {cur, di};
      frontier.push(next);
    }
  }
  if (!parent.contains(dst)) throw ConfigError("no route from " + src + " to " + dst);

  std::vector<std::size_t> hops;
  for (std::string at = dst; at != src; at = parent[at].first) hops.push_back(parent[at].second);
  std::reverse(hops.begin(), hops.end());
  routes_.push_back(std::move(hops));
  route_index_[key] = routes_.size() - 1;
  return routes_.size() - 1;
}

const LinkDirectionState& Emulator::state(std::string_view link, Direction dir) const {
  const auto li = desc_.link_index(link);
  if (!li) throw std::out_of_range("unknown link " + std::string(link));
  return states_[dir_index_of(*li, dir)];
}

std::vector<DirectionView> Emulator::direction_views() const {
  std::vector<DirectionView> views;
  views.reserve(states_.size());
  for (std::size_t i = 0; i < states_.size(); ++i) views.push_back(DirectionView{i / 2, dir_of(i), &states_[i]});
  return views;
}

std::string Emulator::dir_label(std::size_t dir_index) const {
  return desc_.links[dir_index / 2].id + ":" + to_string(dir_of(dir_index));
}

RunSummary Emulator::run_until(SimTime t_end) { return drive(t_end, nullptr); }

RunSummary Emulator::realtime_drive(double speed, SimTime t_end) {
  if (!(speed > 0.0)) throw std::invalid_argument("realtime_drive: speed must be positive");
  Pacer pacer;
  pacer.speed = speed;
  const auto wall_start = Pacer::Clock::now();
  auto summary = drive(t_end, &pacer);
  summary.realtime = true;
  summary.speed = speed;
  summary.wall_seconds = std::chrono::duration<double>(Pacer::Clock::now() - wall_start).count();
  summary.max_lateness_s = pacer.max_lateness_s;
  summary.late_events = pacer.late;
  return summary;
}

RunSummary Emulator::drive(SimTime t_end, Pacer* pacer) {
  if (t_end < queue_.now()) throw ProgrammingError("run_until: t_end precedes current time");
  if (pacer != nullptr) pacer->start -= std::chrono::duration_cast<Pacer::Clock::duration>(
                            std::chrono::duration<double>(queue_.now().seconds() / pacer->speed));
  while (!queue_.empty() && queue_.top().at <= t_end) {
    if (pacer != nullptr) pacer->wait_for(queue_.top().at);
    const Event ev = queue_.pop();
    dispatch(ev);
  }
  queue_.advance_to(t_end);
  if (pacer != nullptr) pacer->wait_for(t_end);
  execute_inline(EventKind::end_of_run, MarkerEv{});

  RunSummary summary = tallies_;
  summary.final_time = queue_.now();
  summary.trace_hash = trace_hash_;
  summary.runtime_failures = runtime_failures_;
  return summary;
}

void Emulator::execute_inline(EventKind kind, Payload payload) {
  dispatch(Event{queue_.now(), queue_.reserve_seq(), kind, std::move(payload)});
}

void Emulator::dispatch(const Event& ev) {
  ++tallies_.events;
  ++tallies_.per_kind[static_cast<std::size_t>(ev.kind)];
  try {
    trace_event(ev);
    if (options_.observer) options_.observer(EventInfo{ev.at, ev.seq, ev.kind, entity_of(ev)});
    switch (ev.kind) {
      case EventKind::packet_arrival: on_arrival(std::get<ArrivalEv>(ev.payload)); break;
      case EventKind::service_complete: break;  // traced only: the packet enters the delay line
      case EventKind::delivery: on_delivery(std::get<DeliveryEv>(ev.payload)); break;
      case EventKind::reconfigure: on_reconfigure(std::get<ReconfigureEv>(ev.payload)); break;
      case EventKind::dama_epoch: on_epoch(std::get<EpochEv>(ev.payload)); break;
      case EventKind::telemetry_flush: on_flush(); break;
      case EventKind::verify_runtime: on_verify(); break;
      case EventKind::end_of_run: on_end_of_run(); break;
    }
  } catch (const RunError&) {
    throw;
  } catch (const std::exception& e) {
    throw RunError(EventInfo{ev.at, ev.seq, ev.kind, entity_of(ev)}, e.what());
  }
}

void Emulator::on_arrival(const ArrivalEv& ev) {
  const auto di = routes_[ev.route][ev.hop];
  auto& state = states_[di];
  const SimTime now = queue_.now();
  epoch_offered_bits_[di] += static_cast<std::int64_t>(ev.pkt.frame_bytes) * 8;

  const auto outcome = state.enqueue(ev.pkt, now, delay_rngs_[di]);
  if (!outcome.accepted()) {
    store_.add_drop(DropRecord{now, desc_.links[di / 2].id, dir_of(di), ev.pkt.flow_id, ev.pkt.seq,
                               ev.pkt.frame_bytes, ev.pkt.echo});
    return;
  }
  queue_.schedule(outcome.service_finish, EventKind::service_complete, ServiceEv{di, ev.pkt.seq, ev.pkt.flow_id});
  queue_.schedule(outcome.delivery, EventKind::delivery,
                  DeliveryEv{ev.route, ev.hop, ev.pkt, now, outcome.service_finish - outcome.service_start});
}

void Emulator::on_delivery(const DeliveryEv& ev) {
  const auto& route = routes_[ev.route];
  const auto di = route[ev.hop];
  const SimTime now = queue_.now();
  states_[di].record_delivery();
  const bool final_hop = ev.hop + 1 == route.size();

  DeliveryRecord rec;
  rec.time = now;
  rec.link = desc_.links[di / 2].id;
  rec.dir = dir_of(di);
  rec.flow = ev.pkt.flow_id;
  rec.seq = ev.pkt.seq;
  rec.frame_bytes = ev.pkt.frame_bytes;
  rec.payload_bytes = ev.pkt.payload_bytes;
  rec.one_way_delay = now - ev.link_arrival;
  rec.created_at = ev.pkt.created_at;
  rec.service_time = ev.service_time;
  rec.echo = ev.pkt.echo;
  rec.final_hop = final_hop;
  store_.add_delivery(std::move(rec));

  if (!final_hop) {
    queue_.schedule(now, EventKind::packet_arrival, ArrivalEv{ev.route, ev.hop + 1, ev.pkt});
    return;
  }
  if (!ev.pkt.echo) {
    const auto it = echo_flows_.find(ev.pkt.flow_id);
    if (it != echo_flows_.end() && it->second) {
      Packet reply = ev.pkt;
      std::swap(reply.src, reply.dst);
      reply.echo = true;
      reply.created_at = now;
      queue_.schedule(now, EventKind::packet_arrival, ArrivalEv{route_for(reply.src, reply.dst), 0, std::move(reply)});
      ++injected_;
    }
  }
}

void Emulator::on_reconfigure(const ReconfigureEv& ev) {
  auto& state = states_[ev.dir_index];
  auto next = state.params();
  if (ev.bandwidth_bps) next.bandwidth_bps = *ev.bandwidth_bps;
  if (ev.delay) next.delay = *ev.delay;
  if (ev.queue_capacity_bytes) next.queue_capacity_bytes = *ev.queue_capacity_bytes;

  const auto before = state.params().bandwidth_bps;
  const auto status = state.reconfigure(next, queue_.now());
  if (status != ReconfigureStatus::applied) {
    incidents_.push_back(ConstraintResult{
        "bandwidth-in-bounds", false,
        "link " + desc_.links[ev.dir_index / 2].id + " " + to_string(dir_of(ev.dir_index)) + ": " + ev.source +
            " reconfiguration at " + format_seconds(queue_.now()) + "s " + to_string(status) + " (" +
            link_params_violation(next) + ")"});
    return;
  }
  if (state.params().bandwidth_bps != before) {
    store_.add_rate_change(RateChangeRecord{queue_.now(), desc_.links[ev.dir_index / 2].id, dir_of(ev.dir_index),
                                            state.params().bandwidth_bps});
  }
}

void Emulator::on_epoch(const EpochEv& ev) {
  const SimTime now = queue_.now();
  const double epoch_s = desc_.dama->epoch_s;
  std::vector<DemandSample> samples;
  samples.reserve(managed_.size());
  for (const auto& m : managed_) {
    const auto di = dir_index_of(m.link_index, m.ref.dir);
    DemandSample s{m.ref, ev.index, static_cast<double>(epoch_offered_bits_[di]) / epoch_s, false};
    for (const auto& [at, demand] : scripted_demand_[di]) {
      if (at > now) break;
      s.demand_bps = demand;
      s.scripted = true;
    }
    samples.push_back(s);
  }
  std::fill(epoch_offered_bits_.begin(), epoch_offered_bits_.end(), 0);

  const auto result = dama_->epoch(ev.index, samples, managed_);
  for (const auto& d : result.decisions) {
    store_.add_allocation(AllocationRecord{d.epoch, d.target.link, d.target.dir, d.demand_bps, d.allocated_bps,
                                           dama_->config().policy});
    if (d.clamped) {
      incidents_.push_back(ConstraintResult{"allocation-within-cap", false,
                                            "link " + d.target.link + " " + to_string(d.target.dir) +
                                                ": dama allocation clamped to max_bandwidth at epoch " +
                                                std::to_string(d.epoch)});
    }
  }
  // Allocations take effect at the epoch instant, ahead of same-time arrivals.
  for (const auto& r : result.reconfigures) {
    execute_inline(EventKind::reconfigure,
                   ReconfigureEv{dir_index_of(r.link_index, r.dir), r.params.bandwidth_bps, std::nullopt,
                                 std::nullopt, "dama"});
  }
}

void Emulator::on_verify() {
  const auto views = direction_views();
  auto report = verify_runtime(desc_, views, queue_.now());
  for (auto& incident : incidents_) report.results.push_back(std::move(incident));
  incidents_.clear();
  runtime_failures_ += report.failures();
  reports_.push_back(std::move(report));
}

void Emulator::on_flush() {
  if (options_.snapshots == nullptr) return;
  TelemetrySnapshot snap;
  snap.at = queue_.now();
  for (std::size_t i = 0; i < states_.size(); ++i) {
    const auto& s = states_[i];
    snap.directions.push_back(DirectionSnapshot{desc_.links[i / 2].id, dir_of(i), s.params(),
                                                s.backlog_bytes(snap.at), s.offered(), s.delivered(), s.drops(),
                                                s.in_flight()});
  }
  options_.snapshots->push(std::move(snap));
}

void Emulator::on_end_of_run() {
  store_.set_horizon(queue_.now());
  on_verify();
}

std::string Emulator::entity_of(const Event& ev) const {
  return std::visit(
      [&](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ArrivalEv> || std::is_same_v<T, DeliveryEv>) {
          return dir_label(routes_[p.route][p.hop]);
        } else if constexpr (std::is_same_v<T, ServiceEv> || std::is_same_v<T, ReconfigureEv>) {
          return dir_label(p.dir_index);
        } else if constexpr (std::is_same_v<T, EpochEv>) {
          return "dama";
        } else {
          return "engine";
        }
      },
      ev.payload);
}

std::string Emulator::detail_of(const Event& ev) const {
  return std::visit(
      [&](const auto& p) -> std::string {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ArrivalEv> || std::is_same_v<T, DeliveryEv>) {
          return "flow=" + p.pkt.flow_id + (p.pkt.echo ? ".echo" : "") + " seq=" + std::to_string(p.pkt.seq);
        } else if constexpr (std::is_same_v<T, ServiceEv>) {
          return "flow=" + p.flow + " seq=" + std::to_string(p.seq);
        } else if constexpr (std::is_same_v<T, ReconfigureEv>) {
          std::string d = std::string("source=") + p.source;
          if (p.bandwidth_bps) d += " bandwidth=" + std::to_string(*p.bandwidth_bps);
          if (p.delay) d += " delay=" + std::string(to_string(p.delay->kind));
          if (p.queue_capacity_bytes) d += " queue_capacity=" + std::to_string(*p.queue_capacity_bytes);
          return d;
        } else if constexpr (std::is_same_v<T, EpochEv>) {
          return "epoch=" + std::to_string(p.index);
        } else {
          return "";
        }
      },
      ev.payload);
}

void Emulator::trace_event(const Event& ev) {
  std::string line = std::to_string(ev.at.ticks);
  line += ',';
  line += to_string(ev.kind);
  line += ',';
  line += entity_of(ev);
  line += ',';
  line += detail_of(ev);
  line += '\n';
  for (unsigned char c : line) {
    trace_hash_ ^= c;
    trace_hash_ *= 1099511628211ULL;
  }
  if (options_.trace != nullptr) *options_.trace << line;
}

}  // namespace linkemu
