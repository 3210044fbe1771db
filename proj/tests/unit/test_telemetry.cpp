#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "doctest.h"
#include "linkemu/error.hpp"
#include "linkemu/telemetry.hpp"

using namespace linkemu;

namespace {

DeliveryRecord delivery(double t_s, std::int32_t frame, double delay_ms = 10, std::string flow = "f") {
  DeliveryRecord r;
  r.time = SimTime::from_seconds(t_s);
  r.link = "l0";
  r.flow = std::move(flow);
  r.frame_bytes = frame;
  r.payload_bytes = frame - 100;
  r.one_way_delay = SimTime::from_millis(delay_ms);
  r.created_at = r.time - r.one_way_delay;
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("throughput windows") {
  MetricsStore store;
  for (int i = 0; i < 10; ++i) store.add_delivery(delivery(0.05 + 0.09 * i, 1500));
  store.add_delivery(delivery(2.5, 1500));
  store.set_horizon(SimTime::from_seconds(3));
  const auto s = throughput_series(store, "l0", Direction::forward, 1.0);
  REQUIRE(s.points.size() == 3);
  CHECK(s.points[0].wire_mbps == doctest::Approx(0.12));
  CHECK(s.points[0].payload_mbps == doctest::Approx(0.112));
  CHECK(s.points[1].wire_mbps == 0.0);
  CHECK(s.points[2].wire_mbps == doctest::Approx(0.012));
  CHECK(throughput_series(store, "l0", Direction::reverse, 1.0).points.size() == 3);
  CHECK(throughput_series(MetricsStore{}, "l0", Direction::forward, 1.0).points.empty());
}

TEST_CASE("a delivery at the horizon lands in the last window") {
  MetricsStore store;
  store.add_delivery(delivery(2.0, 1500));
  store.set_horizon(SimTime::from_seconds(2));
  const auto s = throughput_series(store, "l0", Direction::forward, 1.0);
  REQUIRE(s.points.size() == 2);
  CHECK(s.points[1].wire_mbps == doctest::Approx(0.012));
}

TEST_CASE("histogram bins") {
  const std::vector<double> xs{10, 20, 20, 35};
  const auto h = delay_histogram(xs, 10);
  REQUIRE(h.bins.size() == 3);
  CHECK(h.bins[0].center_ms == 10);
  CHECK(h.bins[0].count == 1);
  CHECK(h.bins[1].count == 2);
  CHECK(h.bins[2].center_ms == 30);
  CHECK(h.bins[2].count == 1);
  CHECK(h.mean_ms == doctest::Approx(21.25));

  const auto one = delay_histogram(std::vector<double>{42}, 10);
  CHECK(one.bins.size() == 1);
  CHECK(one.bins[0].count == 1);
  CHECK(one.std_ms == 0);
  CHECK_THROWS(delay_histogram(std::vector<double>{}, 10));
  CHECK_THROWS(delay_histogram(MetricsStore{}, "l0", Direction::forward, 10));
}

TEST_CASE("empty interior bins are kept") {
  const auto h = delay_histogram(std::vector<double>{5.5, 40}, 10);
  REQUIRE(h.bins.size() == 4);
  CHECK(h.bins[1].count == 0);
  CHECK(h.bins[2].count == 0);
}

TEST_CASE("records must arrive in time order") {
  MetricsStore store;
  store.add_delivery(delivery(2, 100));
  CHECK_THROWS_AS(store.add_delivery(delivery(1, 100)), ProgrammingError);
  store.add_allocation(AllocationRecord{3, "l0", Direction::forward, 1, 1, DamaPolicy::cap_clip});
  CHECK_THROWS_AS(store.add_allocation(AllocationRecord{2, "l0", Direction::forward, 1, 1, DamaPolicy::cap_clip}),
                  ProgrammingError);
}

TEST_CASE("probe round trips") {
  MetricsStore store;
  auto out1 = delivery(1.05, 64, 50, "p");
  out1.seq = 0;
  out1.created_at = SimTime::from_seconds(1);
  store.add_delivery(out1);
  auto back1 = delivery(1.12, 64, 50, "p");
  back1.seq = 0;
  back1.echo = true;
  back1.dir = Direction::reverse;
  store.add_delivery(back1);
  store.add_drop(DropRecord{SimTime::from_seconds(2), "l0", Direction::forward, "p", 1, 64, false});
  const auto r = probe_rtt(store, "p");
  REQUIRE(r.rtts.size() == 1);
  CHECK(r.rtts[0].rtt_ms == doctest::Approx(120));
  CHECK(r.lost == std::vector<std::uint64_t>{1});
}

TEST_CASE("CSV export") {
  const auto dir = std::filesystem::temp_directory_path() / ("linkemu-telemetry-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  MetricsStore store;
  store.add_delivery(delivery(0.5, 1500, 12.5));
  store.add_drop(DropRecord{SimTime::from_seconds(0.7), "l0", Direction::forward, "f", 3, 1500, false});
  store.add_allocation(AllocationRecord{0, "l0", Direction::forward, 2e6, 2e6, DamaPolicy::cap_clip});
  store.set_horizon(SimTime::from_seconds(1));
  export_csv(store, dir, 1.0);
  CHECK(slurp(dir / "throughput.csv") == "window_start_s,link,dir,wire_mbps,payload_mbps\n"
                                         "0.000000000,l0,forward,0.012000,0.011200\n");
  CHECK(slurp(dir / "delays.csv") == "time_s,link,dir,flow,delay_ms\n0.500000000,l0,forward,f,12.500000\n");
  CHECK(slurp(dir / "drops.csv") == "time_s,link,dir,flow,frame_bytes\n0.700000000,l0,forward,f,1500\n");
  CHECK(slurp(dir / "allocations.csv") ==
        "epoch,link,dir,demand_bps,allocated_bps,policy\n0,l0,forward,2000000.000,2000000.000,cap-clip\n");
  std::filesystem::remove_all(dir);
}

TEST_CASE("plateau means skip the settling period") {
  MetricsStore store;
  store.add_rate_change(RateChangeRecord{SimTime{}, "l0", Direction::forward, 1000000});
  store.add_rate_change(RateChangeRecord{SimTime{}, "l0", Direction::forward, 2000000});
  store.add_rate_change(RateChangeRecord{SimTime::from_seconds(5), "l0", Direction::forward, 4000000});
  for (int ms = 0; ms < 10000; ms += 10) store.add_delivery(delivery(ms / 1000.0, ms < 5000 ? 250 : 500));
  store.set_horizon(SimTime::from_seconds(10));
  const auto p = plateau_means(store, 1.0, 2.0);
  REQUIRE(p.size() == 2);
  CHECK(p[0].bandwidth_bps == 2000000);
  CHECK(p[0].windows == 3);
  CHECK(p[0].payload_mbps == doctest::Approx(0.12));
  CHECK(p[1].windows == 3);
  CHECK(p[1].payload_mbps == doctest::Approx(0.32));
}

TEST_CASE("snapshot channel hands over across threads") {
  SnapshotChannel ch;
  std::vector<SimTime> seen;
  std::thread consumer([&] {
    while (auto s = ch.pop_wait()) seen.push_back(s->at);
  });
  for (int i = 0; i < 100; ++i) ch.push(TelemetrySnapshot{SimTime::from_seconds(i), {}});
  ch.close();
  consumer.join();
  REQUIRE(seen.size() == 100);
  CHECK(seen.back() == SimTime::from_seconds(99));
  CHECK_FALSE(ch.try_pop());
}
