#include <cmath>

#include "doctest.h"
#include "linkemu/rng.hpp"
#include "linkemu/sim_time.hpp"

using namespace linkemu;

TEST_CASE("streams are reproducible and independent") {
  RngStream a(42, "delay:l0:forward");
  RngStream b(42, "delay:l0:forward");
  RngStream c(42, "delay:l0:reverse");
  RngStream d(43, "delay:l0:forward");
  int same_c = 0;
  int same_d = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    same_c += x == c.next_u64();
    same_d += x == d.next_u64();
  }
  CHECK(same_c == 0);
  CHECK(same_d == 0);
}

TEST_CASE("drawing from one stream leaves another untouched") {
  RngStream x1(5, "x");
  RngStream y1(5, "y");
  RngStream y2(5, "y");
  for (int i = 0; i < 100; ++i) x1.normal(0, 1);
  for (int i = 0; i < 100; ++i) CHECK(y1.normal(0, 1) == y2.normal(0, 1));
}

TEST_CASE("hash constants") {
  CHECK(fnv1a64("") == 14695981039346656037ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
}

TEST_CASE("uniform range and rough moments") {
  RngStream r(1, "u");
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(std::fabs(sum / 100000 - 0.5) < 0.01);
}

TEST_CASE("time arithmetic") {
  CHECK(transmission_time(1500, 10000000) == SimTime::from_us(1200));
  CHECK(transmission_time(1, 3) == SimTime::from_ns(2666666667));  // rounds up
  CHECK(format_seconds(SimTime::from_ns(1500000000)) == "1.500000000");
  CHECK(SimTime::from_seconds(0.1) == SimTime::from_ms_int(100));
  CHECK(SimTime::from_millis(51.2) == SimTime::from_us(51200));
}
