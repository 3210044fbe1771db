#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <span>
#include <vector>

#include "linkemu/dama_config.hpp"
#include "linkemu/linkqueue.hpp"

namespace linkemu {

// min(demand, cap).
double allocate_cap_clip(double demand_bps, double cap_bps);

// Max-min fair water-filling: each round splits the residual pool equally among the
// unsatisfied demands. The allocations sum to min(pool, sum(demands)).
std::vector<double> allocate_maxmin(std::span<const double> demands_bps, double pool_bps);

struct DemandSample {
  DirectionRef target;
  std::int64_t epoch = 0;
  double demand_bps = 0.0;
  // Scripted samples come from the run schedule and bypass smoothing.
  bool scripted = false;
};

struct AllocationDecision {
  DirectionRef target;
  std::int64_t epoch = 0;
  double demand_bps = 0.0;
  double allocated_bps = 0.0;
  // Set when the policy result exceeded the direction's max_bandwidth and was clamped.
  bool clamped = false;
};

struct ManagedDirection {
  DirectionRef ref;
  std::size_t link_index = 0;
  LinkDirectionParams bounds;  // declared min/max for the direction
  const LinkDirectionState* state = nullptr;
};

struct ReconfigureRequest {
  std::size_t link_index = 0;
  Direction dir = Direction::forward;
  LinkDirectionParams params;
};

struct DamaEpochResult {
  std::vector<AllocationDecision> decisions;
  std::vector<ReconfigureRequest> reconfigures;
};

// The demand-assigned allocation loop, called once per epoch by the engine.
class DamaController {
 public:
  explicit DamaController(DamaConfig config);

  // One decision per managed direction (missing samples mean zero demand). Reconfigure
  // requests are emitted only where the applied bandwidth changes. A zero allocation with
  // no min_bandwidth floor leaves the direction's current rate in place.
  DamaEpochResult epoch(std::int64_t index, std::span<const DemandSample> samples,
                        std::span<const ManagedDirection> directions);

  [[nodiscard]] const DamaConfig& config() const { return config_; }

 private:
  double smoothed(const DirectionRef& ref, double raw);

  DamaConfig config_;
  std::map<DirectionRef, std::deque<double>> history_;
};

}  // namespace linkemu
