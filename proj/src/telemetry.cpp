#include "linkemu/telemetry.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include "linkemu/csv.hpp"
#include "linkemu/error.hpp"

namespace linkemu {

namespace {

template <typename Record>
void append_ordered(std::vector<Record>& records, Record r, const char* stream) {
  if (!records.empty() && r.time < records.back().time) {
    throw ProgrammingError(std::string("MetricsStore: out-of-order ") + stream + " record");
  }
  records.push_back(std::move(r));
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

void MetricsStore::add_delivery(DeliveryRecord r) { append_ordered(deliveries_, std::move(r), "delivery"); }
void MetricsStore::add_drop(DropRecord r) { append_ordered(drops_, std::move(r), "drop"); }
void MetricsStore::add_rate_change(RateChangeRecord r) { append_ordered(rate_changes_, std::move(r), "rate-change"); }

void MetricsStore::add_allocation(AllocationRecord r) {
  if (!allocations_.empty() && r.epoch < allocations_.back().epoch) {
    throw ProgrammingError("MetricsStore: out-of-order allocation record");
  }
  allocations_.push_back(std::move(r));
}

ThroughputSeries throughput_series(const MetricsStore& store, std::string_view link, Direction dir,
                                   double window_s) {
  if (!(window_s > 0.0)) throw std::invalid_argument("throughput_series: window must be positive");
  ThroughputSeries series;
  series.window_s = window_s;
  const SimTime window = SimTime::from_seconds(window_s);

  SimTime end = store.horizon();
  bool any = false;
  for (const auto& d : store.deliveries()) {
    if (d.link == link && d.dir == dir) {
      any = true;
      end = std::max(end, d.time);
    }
  }
  if (end == SimTime{} && !any) return series;

  auto windows = static_cast<std::size_t>((end.ticks + window.ticks - 1) / window.ticks);
  if (windows == 0) windows = 1;
  std::vector<std::int64_t> wire(windows, 0);
  std::vector<std::int64_t> payload(windows, 0);
  for (const auto& d : store.deliveries()) {
    if (d.link != link || d.dir != dir) continue;
    const auto idx = std::min(static_cast<std::size_t>(d.time.ticks / window.ticks), windows - 1);
    wire[idx] += d.frame_bytes;
    payload[idx] += d.payload_bytes;
  }
  series.points.reserve(windows);
  for (std::size_t k = 0; k < windows; ++k) {
    series.points.push_back(ThroughputPoint{SimTime{static_cast<std::int64_t>(k) * window.ticks},
                                            static_cast<double>(wire[k]) * 8.0 / window_s / 1e6,
                                            static_cast<double>(payload[k]) * 8.0 / window_s / 1e6});
  }
  return series;
}

DelayHistogram delay_histogram(std::span<const double> samples, double bin_width_ms) {
  if (samples.empty()) throw std::invalid_argument("delay_histogram: no delay samples");
  if (!(bin_width_ms > 0.0)) throw std::invalid_argument("delay_histogram: bin width must be positive");
  DelayHistogram h;
  h.bin_width_ms = bin_width_ms;
  h.samples = samples.size();

  double sum = 0.0;
  for (double s : samples) sum += s;
  h.mean_ms = sum / static_cast<double>(samples.size());
  double sq = 0.0;
  for (double s : samples) sq += (s - h.mean_ms) * (s - h.mean_ms);
  h.std_ms = std::sqrt(sq / static_cast<double>(samples.size()));

  const auto bin_of = [bin_width_ms](double x) {
    return static_cast<std::int64_t>(std::ceil(x / bin_width_ms - 0.5));
  };
  std::map<std::int64_t, std::uint64_t> counts;
  for (double s : samples) ++counts[bin_of(s)];
  const auto lo = counts.begin()->first;
  const auto hi = counts.rbegin()->first;
  for (auto b = lo; b <= hi; ++b) {
    const auto it = counts.find(b);
    h.bins.push_back(HistogramBin{static_cast<double>(b) * bin_width_ms, it == counts.end() ? 0 : it->second});
  }
  return h;
}

std::vector<double> delay_samples_ms(const MetricsStore& store, std::string_view link, Direction dir,
                                     std::optional<std::string_view> flow) {
  std::vector<double> out;
  for (const auto& d : store.deliveries()) {
    if (d.link == link && d.dir == dir && (!flow || d.flow == *flow)) out.push_back(d.one_way_delay.millis());
  }
  return out;
}

DelayHistogram delay_histogram(const MetricsStore& store, std::string_view link, Direction dir,
                               double bin_width_ms) {
  const auto samples = delay_samples_ms(store, link, dir);
  return delay_histogram(samples, bin_width_ms);
}

ProbeRttResult probe_rtt(const MetricsStore& store, std::string_view flow_id) {
  std::map<std::uint64_t, SimTime> sent;     // seq -> probe injection time
  std::map<std::uint64_t, SimTime> echoed;   // seq -> echo arrival back at the source
  for (const auto& d : store.deliveries()) {
    if (d.flow != flow_id || !d.final_hop) continue;
    if (d.echo) {
      echoed.emplace(d.seq, d.time);
    } else {
      sent.emplace(d.seq, d.created_at);
    }
  }
  std::set<std::uint64_t> seen;
  for (const auto& [seq, _] : sent) seen.insert(seq);
  for (const auto& d : store.drops()) {
    if (d.flow == flow_id && !d.echo) seen.insert(d.seq);
  }
  ProbeRttResult result;
  for (auto seq : seen) {
    const auto s = sent.find(seq);
    const auto e = echoed.find(seq);
    if (s == sent.end() || e == echoed.end()) {
      result.lost.push_back(seq);
    } else {
      result.rtts.push_back(RttSample{seq, (e->second - s->second).millis()});
    }
  }
  return result;
}

std::vector<Plateau> plateau_means(const MetricsStore& store, double window_s, double settle_s) {
  std::map<std::pair<std::string, Direction>, std::vector<RateChangeRecord>> changes;
  for (const auto& r : store.rate_changes()) changes[{r.link, r.dir}].push_back(r);

  std::vector<Plateau> out;
  const SimTime window = SimTime::from_seconds(window_s);
  const SimTime settle = SimTime::from_seconds(settle_s);
  for (const auto& [key, list] : changes) {
    const auto series = throughput_series(store, key.first, key.second, window_s);
    std::vector<Plateau> plateaus;
    for (const auto& r : list) {
      if (!plateaus.empty() && plateaus.back().start == r.time) plateaus.pop_back();
      if (!plateaus.empty() && plateaus.back().bandwidth_bps == r.bandwidth_bps) continue;
      if (!plateaus.empty()) plateaus.back().end = r.time;
      plateaus.push_back(Plateau{key.first, key.second, r.time, store.horizon(), r.bandwidth_bps, 0.0, 0});
    }
    for (auto& p : plateaus) {
      double sum = 0.0;
      for (const auto& pt : series.points) {
        if (pt.window_start >= p.start + settle && pt.window_start + window <= p.end) {
          sum += pt.payload_mbps;
          ++p.windows;
        }
      }
      p.payload_mbps = p.windows > 0 ? sum / static_cast<double>(p.windows) : 0.0;
      out.push_back(p);
    }
  }
  return out;
}

namespace {

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const char* header) : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open " + path_.string() + ": " + std::strerror(errno));
    out_ << header << '\n';
  }
  std::ofstream& stream() { return out_; }
  void close() {
    out_.close();
    if (!out_) throw std::runtime_error("failed writing " + path_.string() + ": " + std::strerror(errno));
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

}  // namespace

void export_csv(const MetricsStore& store, const std::filesystem::path& dir, double window_s) {
  std::set<std::pair<std::string, Direction>> directions;
  for (const auto& d : store.deliveries()) directions.insert({d.link, d.dir});
  for (const auto& d : store.drops()) directions.insert({d.link, d.dir});

  {
    CsvFile f(dir / "throughput.csv", kThroughputCsvHeader);
    for (const auto& [link, d] : directions) {
      for (const auto& pt : throughput_series(store, link, d, window_s).points) {
        f.stream() << format_seconds(pt.window_start) << ',' << csv::field(link) << ',' << to_string(d) << ','
                   << fixed(pt.wire_mbps, 6) << ',' << fixed(pt.payload_mbps, 6) << '\n';
      }
    }
    f.close();
  }
  {
    CsvFile f(dir / "delays.csv", kDelaysCsvHeader);
    for (const auto& d : store.deliveries()) {
      f.stream() << format_seconds(d.time) << ',' << csv::field(d.link) << ',' << to_string(d.dir) << ','
                 << csv::field(d.echo ? d.flow + ".echo" : d.flow) << ',' << fixed(d.one_way_delay.millis(), 6) << '\n';
    }
    f.close();
  }
  {
    CsvFile f(dir / "drops.csv", kDropsCsvHeader);
    for (const auto& d : store.drops()) {
      f.stream() << format_seconds(d.time) << ',' << csv::field(d.link) << ',' << to_string(d.dir) << ','
                 << csv::field(d.echo ? d.flow + ".echo" : d.flow) << ',' << d.frame_bytes << '\n';
    }
    f.close();
  }
  {
    CsvFile f(dir / "allocations.csv", kAllocationsCsvHeader);
    for (const auto& a : store.allocations()) {
      f.stream() << a.epoch << ',' << csv::field(a.link) << ',' << to_string(a.dir) << ',' << fixed(a.demand_bps, 3)
                 << ',' << fixed(a.allocated_bps, 3) << ',' << to_string(a.policy) << '\n';
    }
    f.close();
  }
}

void SnapshotChannel::push(TelemetrySnapshot snapshot) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    queue_.push_back(std::move(snapshot));
  }
  cv_.notify_one();
}

std::optional<TelemetrySnapshot> SnapshotChannel::try_pop() {
  std::lock_guard lock(mu_);
  if (queue_.empty()) return std::nullopt;
  auto s = std::move(queue_.front());
  queue_.pop_front();
  return s;
}

std::optional<TelemetrySnapshot> SnapshotChannel::pop_wait() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return closed_ || !queue_.empty(); });
  if (queue_.empty()) return std::nullopt;
  auto s = std::move(queue_.front());
  queue_.pop_front();
  return s;
}

void SnapshotChannel::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

}  // namespace linkemu
