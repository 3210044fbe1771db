#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "linkemu/linkqueue.hpp"
#include "linkemu/netdesc.hpp"
#include "linkemu/verify.hpp"
#include "support/builders.hpp"

using namespace linkemu;

namespace {

const ConstraintResult& result(const VerificationReport& r, const std::string& name) {
  for (const auto& c : r.results) {
    if (c.constraint == name) return c;
  }
  FAIL("constraint missing: " << name);
  static ConstraintResult none;
  return none;
}

}  // namespace

TEST_CASE("three-node chain passes") {
  auto d = testkit::chain(2, testkit::direction(10000000, 5));
  d.flows.push_back(testkit::cbr("f", "n0", "n2", 0, 5, 1e6));
  const auto r = verify_static(d);
  CHECK(r.all_passed());
  CHECK(r.results.size() == 4);
}

TEST_CASE("zero bandwidth names the link") {
  auto d = testkit::chain(2, testkit::direction(10000000, 5));
  d.links[1].forward.bandwidth_bps = 0;
  d.links[1].forward.max_bandwidth_bps = 0;
  const auto r = verify_static(d);
  const auto& c = result(r, "bandwidth-in-bounds");
  CHECK_FALSE(c.passed);
  CHECK(c.witness.find("l1") != std::string::npos);
  CHECK(c.witness.find("l0") == std::string::npos);
}

TEST_CASE("other static predicates") {
  auto d = testkit::pair(testkit::direction(10000000, 5, 1000));
  d.flows.push_back(testkit::cbr("f", "a", "zz", 0, 5, 1e6));
  d.links[0].reverse.delay = DelayModel::constant(-1);
  const auto r = verify_static(d);
  CHECK_FALSE(result(r, "endpoint-exists").passed);
  CHECK(result(r, "endpoint-exists").witness.find("zz") != std::string::npos);
  CHECK_FALSE(result(r, "delay-nonnegative").passed);
  CHECK_FALSE(result(r, "capacity-positive").passed);  // 1000 < 1500-byte frames
  CHECK(r.failures() == 3);
}

TEST_CASE("disconnected components are listed") {
  auto d = testkit::pair(testkit::direction(10000000, 5));
  d.nodes.push_back(testkit::host("c"));
  d.nodes.push_back(testkit::host("d"));
  d.links.push_back(testkit::link("l1", "c", "eth0", "d", "eth0", testkit::direction(1000000, 1),
                                  testkit::direction(1000000, 1)));
  d.constraints.push_back(Constraint{"graph-connected", ConstraintScope::static_scope, Predicate::graph_connected});
  const auto r = verify_static(d);
  const auto& c = result(r, "graph-connected");
  CHECK_FALSE(c.passed);
  CHECK(c.witness == "2 components: {a,b} {c,d}");
}

namespace {

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

TEST_CASE("components agree with union-find") {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 300; ++round) {
    const auto n = std::uniform_int_distribution<std::size_t>(1, 12)(rng);
    NetworkDescription d;
    std::vector<std::string> ifs;
    for (int i = 0; i < 12; ++i) ifs.push_back("i" + std::to_string(i));
    for (std::size_t i = 0; i < n; ++i) d.nodes.push_back(testkit::host("v" + std::to_string(i), ifs));
    UnionFind uf(n);
    std::vector<int> next_if(n, 0);
    const auto m = std::uniform_int_distribution<std::size_t>(0, n)(rng);
    for (std::size_t k = 0; k < m; ++k) {
      const auto a = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
      const auto b = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
      if (a == b || next_if[a] >= 12 || next_if[b] >= 12) continue;
      d.links.push_back(testkit::link("e" + std::to_string(k), d.nodes[a].id, "i" + std::to_string(next_if[a]++),
                                      d.nodes[b].id, "i" + std::to_string(next_if[b]++),
                                      testkit::direction(1000000, 1), testkit::direction(1000000, 1)));
      uf.unite(a, b);
    }
    std::map<std::size_t, std::set<std::string>> expect;
    for (std::size_t i = 0; i < n; ++i) expect[uf.find(i)].insert(d.nodes[i].id);
    std::set<std::set<std::string>> want;
    for (auto& [_, s] : expect) want.insert(s);
    std::set<std::set<std::string>> got;
    for (const auto& comp : connected_components(d)) got.insert(std::set<std::string>(comp.begin(), comp.end()));
    REQUIRE(got == want);
  }
}

TEST_CASE("runtime allocation bounds") {
  auto p = testkit::direction(16000000, 10);
  p.max_bandwidth_bps = 20000000;
  auto d = testkit::pair(p);
  d.constraints.push_back(
      Constraint{"allocation-within-cap", ConstraintScope::runtime, Predicate::allocation_within_cap});

  LinkDirectionState fwd(p);
  LinkDirectionState rev(p);
  std::vector<DirectionView> views{{0, Direction::forward, &fwd}, {0, Direction::reverse, &rev}};
  CHECK(verify_runtime(d, views, SimTime{}).all_passed());

  auto forced = p;
  forced.bandwidth_bps = 25000000;
  LinkDirectionState over(forced);
  views[0].state = &over;
  const auto r = verify_runtime(d, views, SimTime::from_seconds(3));
  CHECK_FALSE(r.all_passed());
  CHECK(r.timestamp == SimTime::from_seconds(3));
  CHECK(r.results[0].witness.find("link l0 forward") != std::string::npos);
}

TEST_CASE("report rendering") {
  VerificationReport r;
  r.timestamp = SimTime::from_ms_int(1500);
  r.results = {{"endpoint-exists", true, ""}, {"bandwidth-in-bounds", false, "l0:forward, x"}};
  std::ostringstream csv;
  render_csv_rows(r, csv);
  CHECK(csv.str() == "1.500000000,endpoint-exists,pass,\n1.500000000,bandwidth-in-bounds,fail,\"l0:forward, x\"\n");
  std::ostringstream text;
  render_text(r, text);
  CHECK(text.str().find("[FAIL] bandwidth-in-bounds: l0:forward, x") != std::string::npos);
}
