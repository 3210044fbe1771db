#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "linkemu/dama.hpp"
#include "linkemu/event_queue.hpp"
#include "linkemu/linkqueue.hpp"
#include "linkemu/netdesc.hpp"
#include "linkemu/rng.hpp"
#include "linkemu/telemetry.hpp"
#include "linkemu/traffic.hpp"
#include "linkemu/verify.hpp"

namespace linkemu {

// What an observer sees of each executed event.
struct EventInfo {
  SimTime at;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::end_of_run;
  std::string entity;
};

struct EmulatorOptions {
  std::uint64_t seed = 0;
  // Run length used to expand traffic and place periodic events. Defaults to the
  // description's latest flow stop or schedule entry.
  std::optional<SimTime> horizon;
  // Receives one `tick,kind,entity,detail` line per event when set.
  std::ostream* trace = nullptr;
  // Receives a snapshot every `flush_interval` when set.
  SnapshotChannel* snapshots = nullptr;
  SimTime flush_interval = SimTime::from_ms_int(1000);
  SimTime verify_interval = SimTime::from_ms_int(1000);
  // Called before every event handler; an exception thrown here aborts the run like a handler failure.
  std::function<void(const EventInfo&)> observer;
};

struct RunSummary {
  std::uint64_t events = 0;
  SimTime final_time;
  std::array<std::uint64_t, kEventKindCount> per_kind{};
  std::uint64_t trace_hash = 0;
  std::size_t runtime_failures = 0;

  bool realtime = false;
  double speed = 0.0;
  double wall_seconds = 0.0;
  double max_lateness_s = 0.0;  // worst wall-clock overrun of an event's pacing target
  std::uint64_t late_events = 0;  // events dispatched more than 10 ms after their target

  [[nodiscard]] std::uint64_t count(EventKind kind) const { return per_kind[static_cast<std::size_t>(kind)]; }
};

// A handler failed; carries the offending event.
class RunError : public std::runtime_error {
 public:
  RunError(const EventInfo& event, const std::string& cause);
  [[nodiscard]] const EventInfo& event() const { return event_; }

 private:
  EventInfo event_;
};

// Discrete-event emulation of a NetworkDescription. Single-threaded; the only output
// crossing threads is the optional snapshot channel.
class Emulator {
 public:
  // Throws ConfigError when a flow has no route between its endpoints.
  explicit Emulator(NetworkDescription desc, EmulatorOptions options = {});

  // Executes every event with at <= t_end, then an end-of-run marker at t_end.
  RunSummary run_until(SimTime t_end);
  RunSummary run() { return run_until(horizon_); }

  // Same event order and virtual timestamps as run_until, paced so each event starts
  // near wall_start + at / speed. Pacing never alters results.
  RunSummary realtime_drive(double speed, SimTime t_end);
  RunSummary realtime_drive(double speed) { return realtime_drive(speed, horizon_); }

  [[nodiscard]] SimTime horizon() const { return horizon_; }
  [[nodiscard]] SimTime now() const { return queue_.now(); }
  [[nodiscard]] const NetworkDescription& description() const { return desc_; }
  [[nodiscard]] const MetricsStore& metrics() const { return store_; }
  [[nodiscard]] const LinkDirectionState& state(std::string_view link, Direction dir) const;
  [[nodiscard]] std::vector<DirectionView> direction_views() const;
  [[nodiscard]] const std::vector<VerificationReport>& runtime_reports() const { return reports_; }
  [[nodiscard]] std::size_t runtime_failures() const { return runtime_failures_; }
  [[nodiscard]] std::uint64_t trace_hash() const { return trace_hash_; }
  [[nodiscard]] std::uint64_t offered_packets() const { return injected_; }

 private:
  struct ArrivalEv {
    std::size_t route = 0;
    std::size_t hop = 0;
    Packet pkt;
  };
  struct ServiceEv {
    std::size_t dir_index = 0;
    std::uint64_t seq = 0;
    std::string flow;
  };
  struct DeliveryEv {
    std::size_t route = 0;
    std::size_t hop = 0;
    Packet pkt;
    SimTime link_arrival;
    SimTime service_time;
  };
  struct ReconfigureEv {
    std::size_t dir_index = 0;
    std::optional<std::int64_t> bandwidth_bps;
    std::optional<DelayModel> delay;
    std::optional<std::int64_t> queue_capacity_bytes;
    const char* source = "schedule";
  };
  struct EpochEv {
    std::int64_t index = 0;
  };
  struct MarkerEv {};
  using Payload = std::variant<ArrivalEv, ServiceEv, DeliveryEv, ReconfigureEv, EpochEv, MarkerEv>;
  using Queue = EventQueue<Payload>;
  using Event = Queue::Event;

  struct Pacer;

  RunSummary drive(SimTime t_end, Pacer* pacer);
  void dispatch(const Event& ev);
  void execute_inline(EventKind kind, Payload payload);

  void on_arrival(const ArrivalEv& ev);
  void on_delivery(const DeliveryEv& ev);
  void on_reconfigure(const ReconfigureEv& ev);
  void on_epoch(const EpochEv& ev);
  void on_verify();
  void on_flush();
  void on_end_of_run();

  std::size_t route_for(const std::string& src, const std::string& dst);
  std::string entity_of(const Event& ev) const;
  std::string detail_of(const Event& ev) const;
  std::string dir_label(std::size_t dir_index) const;
  void trace_event(const Event& ev);

  NetworkDescription desc_;
  EmulatorOptions options_;
  SimTime horizon_;
  Queue queue_;
  std::vector<LinkDirectionState> states_;
  std::vector<RngStream> delay_rngs_;
  std::vector<std::vector<std::size_t>> routes_;
  std::map<std::pair<std::string, std::string>, std::size_t> route_index_;
  std::map<std::string, bool> echo_flows_;
  MetricsStore store_;

  std::optional<DamaController> dama_;
  std::vector<ManagedDirection> managed_;
  std::vector<std::int64_t> epoch_offered_bits_;
  std::vector<std::vector<std::pair<SimTime, double>>> scripted_demand_;

  std::vector<VerificationReport> reports_;
  std::vector<ConstraintResult> incidents_;
  std::size_t runtime_failures_ = 0;

  RunSummary tallies_;
  std::uint64_t trace_hash_ = 14695981039346656037ULL;
  std::uint64_t injected_ = 0;
};

}  // namespace linkemu
