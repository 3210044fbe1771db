#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "linkemu/dama_config.hpp"
#include "linkemu/link_params.hpp"
#include "linkemu/sim_time.hpp"

namespace linkemu {

struct DeliveryRecord {
  SimTime time;
  std::string link;
  Direction dir = Direction::forward;
  std::string flow;
  std::uint64_t seq = 0;
  std::int32_t frame_bytes = 0;
  std::int32_t payload_bytes = 0;
  // From arrival on this link (injection, for the first hop) to delivery.
  SimTime one_way_delay;
  SimTime created_at;
  SimTime service_time;
  bool echo = false;
  bool final_hop = true;
};

struct DropRecord {
  SimTime time;
  std::string link;
  Direction dir = Direction::forward;
  std::string flow;
  std::uint64_t seq = 0;
  std::int32_t frame_bytes = 0;
  bool echo = false;
};

struct AllocationRecord {
  std::int64_t epoch = 0;
  std::string link;
  Direction dir = Direction::forward;
  double demand_bps = 0.0;
  double allocated_bps = 0.0;
  DamaPolicy policy = DamaPolicy::cap_clip;
};

struct RateChangeRecord {
  SimTime time;
  std::string link;
  Direction dir = Direction::forward;
  std::int64_t bandwidth_bps = 0;
};

// Append-only run record. Each stream rejects out-of-order timestamps.
class MetricsStore {
 public:
  void add_delivery(DeliveryRecord r);
  void add_drop(DropRecord r);
  void add_allocation(AllocationRecord r);
  void add_rate_change(RateChangeRecord r);
  void set_horizon(SimTime t) { horizon_ = t; }

  [[nodiscard]] std::span<const DeliveryRecord> deliveries() const { return deliveries_; }
  [[nodiscard]] std::span<const DropRecord> drops() const { return drops_; }
  [[nodiscard]] std::span<const AllocationRecord> allocations() const { return allocations_; }
  [[nodiscard]] std::span<const RateChangeRecord> rate_changes() const { return rate_changes_; }
  [[nodiscard]] SimTime horizon() const { return horizon_; }

 private:
  std::vector<DeliveryRecord> deliveries_;
  std::vector<DropRecord> drops_;
  std::vector<AllocationRecord> allocations_;
  std::vector<RateChangeRecord> rate_changes_;
  SimTime horizon_;
};

struct ThroughputPoint {
  SimTime window_start;
  double wire_mbps = 0.0;
  double payload_mbps = 0.0;
};

struct ThroughputSeries {
  double window_s = 1.0;
  std::vector<ThroughputPoint> points;
};

// Windows tile [0, horizon); a delivery exactly at the horizon counts in the last window.
ThroughputSeries throughput_series(const MetricsStore& store, std::string_view link, Direction dir,
                                   double window_s);

struct HistogramBin {
  double center_ms = 0.0;
  std::uint64_t count = 0;
};

struct DelayHistogram {
  double bin_width_ms = 10.0;
  std::vector<HistogramBin> bins;
  std::size_t samples = 0;
  double mean_ms = 0.0;
  double std_ms = 0.0;  // population
};

// Bins are (center - w/2, center + w/2] with centers on multiples of w; zero-count bins
// between the smallest and largest sample are kept. Throws std::invalid_argument on no samples.
DelayHistogram delay_histogram(std::span<const double> samples_ms, double bin_width_ms);
DelayHistogram delay_histogram(const MetricsStore& store, std::string_view link, Direction dir,
                               double bin_width_ms);

// One-way delays recorded on a link direction, optionally for one flow only.
std::vector<double> delay_samples_ms(const MetricsStore& store, std::string_view link, Direction dir,
                                     std::optional<std::string_view> flow = std::nullopt);

struct RttSample {
  std::uint64_t seq = 0;
  double rtt_ms = 0.0;
};

struct ProbeRttResult {
  std::vector<RttSample> rtts;  // seq order
  std::vector<std::uint64_t> lost;
};

// Matches each probe of `flow_id` with its echo by seq. A probe whose echo never arrived
// (either leg dropped or still in flight) is reported as lost.
ProbeRttResult probe_rtt(const MetricsStore& store, std::string_view flow_id);

struct Plateau {
  std::string link;
  Direction dir = Direction::forward;
  SimTime start;
  SimTime end;
  std::int64_t bandwidth_bps = 0;
  double payload_mbps = 0.0;  // mean over whole windows at least `settle_s` after start
  std::size_t windows = 0;
};

// Splits each direction's run into constant-bandwidth intervals and averages payload throughput.
std::vector<Plateau> plateau_means(const MetricsStore& store, double window_s, double settle_s);

inline constexpr const char* kThroughputCsvHeader = "window_start_s,link,dir,wire_mbps,payload_mbps";
inline constexpr const char* kDelaysCsvHeader = "time_s,link,dir,flow,delay_ms";
inline constexpr const char* kDropsCsvHeader = "time_s,link,dir,flow,frame_bytes";
inline constexpr const char* kAllocationsCsvHeader = "epoch,link,dir,demand_bps,allocated_bps,policy";

// Writes throughput.csv, delays.csv, drops.csv and allocations.csv into `dir`.
// Throughput rows cover every direction with at least one delivery or drop.
// Throws std::runtime_error naming the path on I/O failure.
void export_csv(const MetricsStore& store, const std::filesystem::path& dir, double window_s = 1.0);

// Snapshot of live link state, handed from the engine to other threads.
struct DirectionSnapshot {
  std::string link;
  Direction dir = Direction::forward;
  LinkDirectionParams params;
  std::int64_t backlog_bytes = 0;
  std::uint64_t offered = 0;
  std::uint64_t delivered = 0;
  std::uint64_t drops = 0;
  std::uint64_t in_flight = 0;
};

struct TelemetrySnapshot {
  SimTime at;
  std::vector<DirectionSnapshot> directions;
};

class SnapshotChannel {
 public:
  void push(TelemetrySnapshot snapshot);
  std::optional<TelemetrySnapshot> try_pop();
  // Blocks until a snapshot is available or the channel is closed and drained.
  std::optional<TelemetrySnapshot> pop_wait();
  void close();

 private:
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<TelemetrySnapshot> queue_;
  bool closed_ = false;
};

}  // namespace linkemu
