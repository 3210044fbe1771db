#include "linkemu/verify.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <queue>

#include "linkemu/csv.hpp"

namespace linkemu {

bool VerificationReport::all_passed() const { return failures() == 0; }

std::size_t VerificationReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(results.begin(), results.end(), [](const ConstraintResult& r) { return !r.passed; }));
}

namespace {

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) out += sep;
    out += parts[i];
  }
  return out;
}

ConstraintResult from_violations(const Constraint& c, const std::vector<std::string>& violations) {
  return ConstraintResult{c.name, violations.empty(), join(violations, "; ")};
}

std::string direction_label(const LinkSpec& l, Direction dir) { return "link " + l.id + " " + to_string(dir); }

template <typename Fn>
void for_each_direction(const NetworkDescription& d, Fn&& fn) {
  for (const auto& l : d.links) {
    fn(l, Direction::forward, l.forward);
    fn(l, Direction::reverse, l.reverse);
  }
}

std::vector<Direction> selected(DirectionSelector s) {
  switch (s) {
    case DirectionSelector::forward: return {Direction::forward};
    case DirectionSelector::reverse: return {Direction::reverse};
    case DirectionSelector::both: return {Direction::forward, Direction::reverse};
  }
  return {};
}

std::vector<std::string> endpoint_violations(const NetworkDescription& d) {
  std::vector<std::string> out;
  for (const auto& l : d.links) {
    for (const auto& [side, ep] : {std::pair{"a", l.a}, std::pair{"b", l.b}}) {
      const auto* node = d.find_node(ep.node);
      if (node == nullptr) {
        out.push_back("link " + l.id + " endpoint " + side + " references unknown node " + ep.node);
      } else if (std::find(node->interfaces.begin(), node->interfaces.end(), ep.interface) == node->interfaces.end()) {
        out.push_back("link " + l.id + " endpoint " + side + " references unknown interface " + ep.node + ":" +
                      ep.interface);
      }
    }
  }
  for (const auto& f : d.flows) {
    for (const auto& n : {f.src, f.dst}) {
      if (d.find_node(n) == nullptr) out.push_back("flow " + f.id + " references unknown node " + n);
    }
  }
  for (const auto& e : d.schedule) {
    if (d.find_link(e.link) == nullptr) out.push_back("schedule entry at " + format_seconds(e.at) + " references unknown link " + e.link);
  }
  if (d.dama) {
    for (const auto& m : d.dama->managed) {
      if (d.find_link(m.link) == nullptr) out.push_back("dama manages unknown link " + m.link);
    }
  }
  return out;
}

std::string bandwidth_violation(const LinkDirectionParams& p) {
  const auto bw = std::to_string(p.bandwidth_bps);
  if (p.bandwidth_bps <= 0) return "bandwidth must be positive (bandwidth=" + bw + ")";
  if (p.min_bandwidth_bps < 0) return "min_bandwidth is negative (" + std::to_string(p.min_bandwidth_bps) + ")";
  if (p.bandwidth_bps < p.min_bandwidth_bps) return "bandwidth " + bw + " below min_bandwidth " + std::to_string(p.min_bandwidth_bps);
  if (p.bandwidth_bps > p.max_bandwidth_bps) return "bandwidth " + bw + " above max_bandwidth " + std::to_string(p.max_bandwidth_bps);
  return {};
}

std::vector<std::string> bandwidth_violations(const NetworkDescription& d) {
  std::vector<std::string> out;
  for_each_direction(d, [&](const LinkSpec& l, Direction dir, const LinkDirectionParams& p) {
    if (auto v = bandwidth_violation(p); !v.empty()) out.push_back(direction_label(l, dir) + ": " + v);
  });
  for (const auto& e : d.schedule) {
    const auto* l = d.find_link(e.link);
    if (l == nullptr || !e.bandwidth_bps) continue;
    for (auto dir : selected(e.dir)) {
      auto p = l->params(dir);
      p.bandwidth_bps = *e.bandwidth_bps;
      if (auto v = bandwidth_violation(p); !v.empty()) {
        out.push_back("schedule entry at " + format_seconds(e.at) + " for " + direction_label(*l, dir) + ": " + v);
      }
    }
  }
  return out;
}

std::vector<std::string> delay_violations(const NetworkDescription& d) {
  std::vector<std::string> out;
  for_each_direction(d, [&](const LinkSpec& l, Direction dir, const LinkDirectionParams& p) {
    if (auto v = delay_model_violation(p.delay); !v.empty()) out.push_back(direction_label(l, dir) + ": " + v);
  });
  for (const auto& e : d.schedule) {
    if (!e.delay) continue;
    if (auto v = delay_model_violation(*e.delay); !v.empty()) {
      out.push_back("schedule entry at " + format_seconds(e.at) + " for link " + e.link + ": " + v);
    }
  }
  return out;
}

std::int32_t largest_frame(const NetworkDescription& d) {
  std::int32_t largest = 1;
  for (const auto& f : d.flows) {
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, OnOffPattern>) {
            largest = std::max(largest, p.inner.frame_bytes);
          } else {
            largest = std::max(largest, p.frame_bytes);
          }
        },
        f.pattern);
  }
  return largest;
}

std::vector<std::string> capacity_violations(const NetworkDescription& d) {
  std::vector<std::string> out;
  const auto frame = largest_frame(d);
  const auto check = [&](std::int64_t cap) -> std::string {
    if (cap <= 0) return "queue_capacity must be positive (queue_capacity=" + std::to_string(cap) + ")";
    if (cap < frame) return "queue_capacity " + std::to_string(cap) + " smaller than largest frame " + std::to_string(frame);
    return {};
  };
  for_each_direction(d, [&](const LinkSpec& l, Direction dir, const LinkDirectionParams& p) {
    if (auto v = check(p.queue_capacity_bytes); !v.empty()) out.push_back(direction_label(l, dir) + ": " + v);
  });
  for (const auto& e : d.schedule) {
    if (!e.queue_capacity_bytes) continue;
    if (auto v = check(*e.queue_capacity_bytes); !v.empty()) out.push_back("schedule entry at " + format_seconds(e.at) + " for link " + e.link + ": " + v);
  }
  return out;
}

}  // namespace

std::vector<std::vector<std::string>> connected_components(const NetworkDescription& d) {
  std::map<std::string, std::vector<std::string>> adjacency;
  for (const auto& n : d.nodes) adjacency[n.id];
  for (const auto& l : d.links) {
    if (!adjacency.contains(l.a.node) || !adjacency.contains(l.b.node)) continue;
    adjacency[l.a.node].push_back(l.b.node);
    adjacency[l.b.node].push_back(l.a.node);
  }
  std::map<std::string, bool> visited;
  std::vector<std::vector<std::string>> components;
  for (const auto& n : d.nodes) {
    if (visited[n.id]) continue;
    std::vector<std::string> comp;
    std::queue<std::string> frontier;
    frontier.push(n.id);
    visited[n.id] = true;
    while (!frontier.empty()) {
      auto cur = frontier.front();
      frontier.pop();
      comp.push_back(cur);
      for (const auto& next : adjacency[cur]) {
        if (!visited[next]) {
          visited[next] = true;
          frontier.push(next);
        }
      }
    }
    std::sort(comp.begin(), comp.end());
    components.push_back(std::move(comp));
  }
  return components;
}

VerificationReport verify_static(const NetworkDescription& desc) {
  VerificationReport report;
  for (const auto& c : desc.constraints) {
    if (c.scope != ConstraintScope::static_scope) continue;
    switch (c.predicate) {
      case Predicate::endpoint_exists: report.results.push_back(from_violations(c, endpoint_violations(desc))); break;
      case Predicate::bandwidth_in_bounds: report.results.push_back(from_violations(c, bandwidth_violations(desc))); break;
      case Predicate::delay_nonnegative: report.results.push_back(from_violations(c, delay_violations(desc))); break;
      case Predicate::capacity_positive: report.results.push_back(from_violations(c, capacity_violations(desc))); break;
      case Predicate::graph_connected: {
        const auto comps = connected_components(desc);
        std::vector<std::string> violations;
        if (comps.size() > 1) {
          std::vector<std::string> sets;
          for (const auto& comp : comps) sets.push_back("{" + join(comp, ",") + "}");
          violations.push_back(std::to_string(comps.size()) + " components: " + join(sets, " "));
        }
        report.results.push_back(from_violations(c, violations));
        break;
      }
      case Predicate::allocation_within_cap: break;
    }
  }
  return report;
}

VerificationReport verify_runtime(const NetworkDescription& desc, std::span<const DirectionView> states,
                                  SimTime now) {
  VerificationReport report;
  report.timestamp = now;
  for (const auto& c : desc.constraints) {
    if (c.predicate != Predicate::allocation_within_cap) continue;
    std::vector<std::string> violations;
    for (const auto& view : states) {
      if (view.state == nullptr || view.link_index >= desc.links.size()) continue;
      const auto& link = desc.links[view.link_index];
      const auto& bounds = link.params(view.dir);
      const auto bw = view.state->params().bandwidth_bps;
      if (bw <= 0 || bw < bounds.min_bandwidth_bps || bw > bounds.max_bandwidth_bps) {
        violations.push_back(direction_label(link, view.dir) + ": allocated " + std::to_string(bw) +
                             " bps outside [" + std::to_string(bounds.min_bandwidth_bps) + ", " +
                             std::to_string(bounds.max_bandwidth_bps) + "]");
      }
    }
    report.results.push_back(from_violations(c, violations));
  }
  return report;
}

void render_text(const VerificationReport& report, std::ostream& out) {
  out << "verification at t=" << format_seconds(report.timestamp) << "s: " << report.results.size()
      << " constraint(s), " << report.failures() << " failure(s)\n";
  for (const auto& r : report.results) {
    out << (r.passed ? "  [PASS] " : "  [FAIL] ") << r.constraint;
    if (!r.passed) out << ": " << r.witness;
    out << "\n";
  }
}

void render_csv_rows(const VerificationReport& report, std::ostream& out) {
  for (const auto& r : report.results) {
    out << format_seconds(report.timestamp) << ',' << csv::field(r.constraint) << ',' << (r.passed ? "pass" : "fail")
        << ',' << csv::field(r.witness) << '\n';
  }
}

}  // namespace linkemu
