#include <algorithm>
#include <chrono>
#include <random>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "linkemu/emulator.hpp"
#include "linkemu/error.hpp"
#include "linkemu/event_queue.hpp"
#include "support/builders.hpp"

using namespace linkemu;

TEST_CASE("event queue tie-break and ordering") {
  EventQueue<int> q;
  q.schedule(SimTime::from_seconds(1), EventKind::delivery, 1);
  q.schedule(SimTime::from_seconds(1), EventKind::delivery, 2);
  q.schedule(SimTime{}, EventKind::delivery, 0);
  CHECK(q.pop().payload == 0);
  q.schedule(q.now(), EventKind::delivery, 9);  // at the current time, before later events
  CHECK(q.pop().payload == 9);
  CHECK(q.pop().payload == 1);
  CHECK(q.pop().payload == 2);
  CHECK(q.empty());
  CHECK_THROWS_AS(q.schedule(SimTime{}, EventKind::delivery, 3), ProgrammingError);
}

TEST_CASE("random events pop in sorted order") {
  std::mt19937_64 rng(3);
  EventQueue<std::size_t> q;
  std::vector<std::pair<std::int64_t, std::size_t>> log;
  for (std::size_t i = 0; i < 100000; ++i) {
    const auto t = std::uniform_int_distribution<std::int64_t>(0, 5000)(rng);
    q.schedule(SimTime{t}, EventKind::packet_arrival, i);
    log.emplace_back(t, i);
  }
  std::sort(log.begin(), log.end());
  for (const auto& [t, i] : log) {
    const auto ev = q.pop();
    REQUIRE(ev.at.ticks == t);
    REQUIRE(ev.payload == i);
  }
}

TEST_CASE("empty scenario returns at t_end") {
  Emulator emu(testkit::pair(testkit::direction(1000000, 1)));
  const auto s = emu.run_until(SimTime::from_seconds(5));
  CHECK(s.final_time == SimTime::from_seconds(5));
  CHECK(s.events == 1);
  CHECK(s.count(EventKind::end_of_run) == 1);
}

TEST_CASE("bandwidth-on-demand run executes six reconfigures") {
  Emulator emu(load_description(testkit::scenario_path("bandwidth_on_demand.json")), EmulatorOptions{.seed = 7});
  const auto s = emu.run_until(SimTime::from_seconds(120));
  CHECK(s.count(EventKind::reconfigure) == 6);
  CHECK(s.count(EventKind::dama_epoch) == 120);
  CHECK(emu.metrics().allocations().size() == 120);
  CHECK(emu.state("sat1", Direction::forward).params().bandwidth_bps == 20000000);
  CHECK(s.runtime_failures == 0);
}

namespace {

std::string traced(const NetworkDescription& d, std::uint64_t seed) {
  std::ostringstream trace;
  Emulator emu(d, EmulatorOptions{.seed = seed, .trace = &trace});
  emu.run();
  return trace.str();
}

NetworkDescription jittery() {
  auto p = testkit::direction(5000000, 0, 40000);
  p.delay = DelayModel::normal(30, 10, 5);
  auto d = testkit::pair(p);
  d.flows.push_back(testkit::cbr("c", "a", "b", 0, 3, 4e6));
  d.flows.push_back(testkit::probe("p", "b", "a", 0, 3, 30, 0.1, true));
  return d;
}

}  // namespace

TEST_CASE("trace is a function of the seed") {
  const auto d = jittery();
  const auto a = traced(d, 11);
  CHECK(a == traced(d, 11));
  CHECK(a != traced(d, 12));
  CHECK(a.rfind("0,", 0) == 0);
  CHECK(a.find(",end-of-run,engine,") != std::string::npos);
}

TEST_CASE("echo probes measure round trips") {
  auto d = testkit::pair(testkit::direction(10000000, 25), testkit::direction(10000000, 40));
  d.flows.push_back(testkit::probe("p", "a", "b", 1, 10, 5, 1.0, true));
  Emulator emu(d);
  emu.run();
  const auto r = probe_rtt(emu.metrics(), "p");
  REQUIRE(r.rtts.size() == 5);
  CHECK(r.lost.empty());
  for (const auto& s : r.rtts) CHECK(s.rtt_ms == doctest::Approx(65 + 2 * 0.0512));
}

TEST_CASE("multi-hop delivery") {
  auto d = testkit::chain(3, testkit::direction(8000000, 10));
  d.flows.push_back(testkit::probe("p", "n0", "n3", 0, 1, 1, 1.0));
  Emulator emu(d);
  emu.run_until(SimTime::from_seconds(1));
  const auto deliveries = emu.metrics().deliveries();
  REQUIRE(deliveries.size() == 3);
  CHECK(deliveries[0].link == "l0");
  CHECK(deliveries[2].link == "l2");
  CHECK(deliveries[2].final_hop);
  CHECK(deliveries[2].time == SimTime::from_us(3 * (10000 + 64)));
}

TEST_CASE("unroutable flow is a configuration error") {
  auto d = testkit::pair(testkit::direction(1000000, 1));
  d.nodes.push_back(testkit::host("island"));
  d.flows.push_back(testkit::cbr("f", "a", "island", 0, 1, 1e5));
  CHECK_THROWS_AS([&] { Emulator emu(d); }(), ConfigError);
}

TEST_CASE("handler failure names the event") {
  auto d = jittery();
  EmulatorOptions opts;
  opts.observer = [](const EventInfo& ev) {
    if (ev.kind == EventKind::delivery && ev.at > SimTime::from_seconds(1)) throw std::runtime_error("boom");
  };
  Emulator emu(d, opts);
  try {
    emu.run();
    FAIL("no error");
  } catch (const RunError& e) {
    CHECK(e.event().kind == EventKind::delivery);
    CHECK(e.event().entity.find("l0:") == 0);
    CHECK(std::string(e.what()).find("boom") != std::string::npos);
  }
}

TEST_CASE("rejected reconfigure becomes a runtime failure") {
  auto p = testkit::direction(2000000, 1);
  p.max_bandwidth_bps = 4000000;
  auto d = testkit::pair(p);
  d.constraints = {Constraint{"allocation-within-cap", ConstraintScope::runtime, Predicate::allocation_within_cap}};
  d.schedule.push_back(LinkEvent{SimTime::from_seconds(1), "l0", DirectionSelector::forward, {}, 9000000, {}, {}});
  d.flows.push_back(testkit::probe("p", "a", "b", 0, 3, 3, 1));
  Emulator emu(d);
  const auto s = emu.run();
  CHECK(s.runtime_failures >= 1);
  CHECK(emu.state("l0", Direction::forward).params().bandwidth_bps == 2000000);
}

TEST_CASE("telemetry snapshots reach a consumer thread") {
  SnapshotChannel ch;
  std::vector<TelemetrySnapshot> got;
  std::thread consumer([&] {
    while (auto s = ch.pop_wait()) got.push_back(std::move(*s));
  });
  EmulatorOptions opts;
  opts.snapshots = &ch;
  Emulator emu(jittery(), opts);
  emu.run();
  ch.close();
  consumer.join();
  REQUIRE(got.size() >= 3);
  CHECK(got[0].at == SimTime::from_seconds(1));
  CHECK(got[1].directions.size() == 2);
}

TEST_CASE("paced run keeps results and tracks wall time") {
  auto d = jittery();
  Emulator virt(d, EmulatorOptions{.seed = 4});
  virt.run();
  Emulator paced(d, EmulatorOptions{.seed = 4});
  const auto s = paced.realtime_drive(4.0);
  CHECK(s.realtime);
  CHECK(s.wall_seconds == doctest::Approx(0.75).epsilon(0.15));
  CHECK(paced.trace_hash() == virt.trace_hash());
  REQUIRE(paced.metrics().deliveries().size() == virt.metrics().deliveries().size());
}
