#include <algorithm>
#include <random>
#include <tuple>

#include "doctest.h"
#include "linkemu/traffic.hpp"
#include "support/builders.hpp"

using namespace linkemu;

TEST_CASE("CBR spacing") {
  const auto s = expand_flow(testkit::cbr("f", "a", "b", 0, 1.5, 2e6), SimTime::from_seconds(100));
  REQUIRE(s.size() == 250);
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(s[i].inject_at == SimTime::from_us(6000 * static_cast<std::int64_t>(i)));
    CHECK(s[i].packet.seq == i);
    CHECK(s[i].packet.created_at == s[i].inject_at);
  }
  CHECK(s[0].packet.frame_bytes == 1500);
  CHECK(s[0].packet.payload_bytes == 1400);
  CHECK(s[0].packet.src == "a");
}

TEST_CASE("horizon cuts a flow short") {
  const auto s = expand_flow(testkit::cbr("f", "a", "b", 0, 10, 2e6), SimTime::from_seconds(1.5));
  CHECK(s.size() == 250);
}

TEST_CASE("fractional CBR rates do not drift") {
  // 1e6/3 bps with 125-byte frames: one packet every 3 ms exactly
  const auto s = expand_flow(testkit::cbr("f", "a", "b", 0, 30, 1e6 / 3.0, 125, 100), SimTime::from_seconds(30));
  REQUIRE(s.size() == 10000);
  CHECK(s.back().inject_at.ticks == doctest::Approx(29.997e9).epsilon(1e-9));
}

TEST_CASE("probe train") {
  const auto s = expand_flow(testkit::probe("p", "a", "b", 10, 20, 3, 1.0), SimTime::from_seconds(100));
  REQUIRE(s.size() == 3);
  CHECK(s[0].inject_at == SimTime::from_seconds(10));
  CHECK(s[1].inject_at == SimTime::from_seconds(11));
  CHECK(s[2].inject_at == SimTime::from_seconds(12));
  CHECK(s[2].packet.frame_bytes == 64);
}

TEST_CASE("on-off bursts") {
  FlowSpec f{"o", "a", "b", SimTime{}, SimTime::from_seconds(3), OnOffPattern{0.5, 0.5, CbrPattern{1.2e6, 1500, 1500}}, "udp"};
  const auto s = expand_flow(f, SimTime::from_seconds(3));
  // 100 packets per second while on, three on periods of half a second
  REQUIRE(s.size() == 150);
  for (const auto& p : s) {
    const auto phase = p.inject_at.ticks % 1000000000;
    CHECK(phase < 500000000);
  }
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i].packet.seq == s[i - 1].packet.seq + 1);
}

TEST_CASE("multiplex") {
  const auto a = expand_flow(testkit::probe("a", "x", "y", 0, 10, 3, 1), SimTime::from_seconds(10));
  const auto b = expand_flow(testkit::probe("b", "x", "y", 5, 10, 3, 1), SimTime::from_seconds(10));
  auto m = multiplex({a, b});
  REQUIRE(m.size() == 6);
  for (std::size_t i = 0; i < 3; ++i) CHECK(m[i].packet.flow_id == "a");

  const auto c = expand_flow(testkit::probe("b", "x", "y", 0, 10, 1, 1), SimTime::from_seconds(10));
  const auto d = expand_flow(testkit::probe("a", "x", "y", 0, 10, 1, 1), SimTime::from_seconds(10));
  m = multiplex({c, d});
  CHECK(m[0].packet.flow_id == "a");
  CHECK(m[1].packet.flow_id == "b");
}

TEST_CASE("multiplex equals sorted concatenation") {
  std::mt19937_64 rng(50);
  std::vector<PacketSchedule> parts;
  PacketSchedule all;
  for (int i = 0; i < 50; ++i) {
    const double start = std::uniform_real_distribution<double>(0, 5)(rng);
    const double rate = std::uniform_int_distribution<int>(1, 40)(rng) * 1e5;
    auto s = expand_flow(testkit::cbr("f" + std::to_string(i), "a", "b", start, start + 3, rate, 500, 500),
                         SimTime::from_seconds(6));
    all.insert(all.end(), s.begin(), s.end());
    parts.push_back(std::move(s));
  }
  std::shuffle(parts.begin(), parts.end(), rng);
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
    return std::tie(x.inject_at, x.packet.flow_id, x.packet.seq) < std::tie(y.inject_at, y.packet.flow_id, y.packet.seq);
  });
  const auto m = multiplex(parts);
  REQUIRE(m.size() == all.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    REQUIRE(m[i].inject_at == all[i].inject_at);
    REQUIRE(m[i].packet.flow_id == all[i].packet.flow_id);
    REQUIRE(m[i].packet.seq == all[i].packet.seq);
  }
}
