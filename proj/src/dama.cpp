#include "linkemu/dama.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace linkemu {

double allocate_cap_clip(double demand_bps, double cap_bps) { return std::min(demand_bps, cap_bps); }

std::vector<double> allocate_maxmin(std::span<const double> demands, double pool) {
  std::vector<double> alloc(demands.size(), 0.0);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < demands.size(); ++i) {
    if (demands[i] > 0.0) active.push_back(i);
  }
  double remaining = pool;
  while (!active.empty() && remaining > 0.0) {
    const double share = remaining / static_cast<double>(active.size());
    std::vector<std::size_t> unsatisfied;
    bool any_satisfied = false;
    for (auto i : active) {
      if (demands[i] - alloc[i] <= share) {
        remaining -= demands[i] - alloc[i];
        alloc[i] = demands[i];
        any_satisfied = true;
      } else {
        unsatisfied.push_back(i);
      }
    }
    if (!any_satisfied) {
      for (auto i : unsatisfied) alloc[i] += share;
      break;
    }
    active = std::move(unsatisfied);
  }
  return alloc;
}

DamaController::DamaController(DamaConfig config) : config_(std::move(config)) {}

double DamaController::smoothed(const DirectionRef& ref, double raw) {
  auto& h = history_[ref];
  h.push_back(raw);
  while (h.size() > static_cast<std::size_t>(config_.smoothing)) h.pop_front();
  return std::accumulate(h.begin(), h.end(), 0.0) / static_cast<double>(h.size());
}

DamaEpochResult DamaController::epoch(std::int64_t index, std::span<const DemandSample> samples,
                                      std::span<const ManagedDirection> directions) {
  DamaEpochResult result;
  std::vector<double> demands;
  demands.reserve(directions.size());
  for (const auto& d : directions) {
    const auto it = std::find_if(samples.begin(), samples.end(),
                                 [&](const DemandSample& s) { return s.target == d.ref; });
    const double raw = it == samples.end() ? 0.0 : it->demand_bps;
    const bool scripted = it != samples.end() && it->scripted;
    const double value = smoothed(d.ref, raw);
    demands.push_back(scripted ? raw : value);
  }

  std::vector<double> allocations(directions.size());
  if (config_.policy == DamaPolicy::cap_clip) {
    for (std::size_t i = 0; i < directions.size(); ++i) {
      allocations[i] = allocate_cap_clip(demands[i], static_cast<double>(directions[i].bounds.max_bandwidth_bps));
    }
  } else {
    std::vector<double> capped(directions.size());
    for (std::size_t i = 0; i < directions.size(); ++i) {
      capped[i] = std::min(demands[i], static_cast<double>(directions[i].bounds.max_bandwidth_bps));
    }
    allocations = allocate_maxmin(capped, config_.pool_bps);
  }

  for (std::size_t i = 0; i < directions.size(); ++i) {
    const auto& d = directions[i];
    const double lo = static_cast<double>(d.bounds.min_bandwidth_bps);
    const double hi = static_cast<double>(d.bounds.max_bandwidth_bps);
    AllocationDecision decision{d.ref, index, demands[i], allocations[i], false};
    if (decision.allocated_bps > hi) {
      decision.allocated_bps = hi;
      decision.clamped = true;
    }
    decision.allocated_bps = std::max(decision.allocated_bps, lo);
    result.decisions.push_back(decision);

    const auto applied = static_cast<std::int64_t>(std::llround(decision.allocated_bps));
    if (applied <= 0 || d.state == nullptr || applied == d.state->params().bandwidth_bps) continue;
    ReconfigureRequest req{d.link_index, d.ref.dir, d.state->params()};
    req.params.bandwidth_bps = applied;
    result.reconfigures.push_back(req);
  }
  return result;
}

}  // namespace linkemu
