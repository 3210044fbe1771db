#pragma once

#include <algorithm>
#include <vector>

namespace oracle {

// Hands out `step` bits/s at a time, round robin, to every link still short of its demand.
inline std::vector<double> water_fill(const std::vector<double>& demands, double pool, double step) {
  std::vector<double> alloc(demands.size(), 0.0);
  double left = pool;
  bool progress = true;
  while (left > 0 && progress) {
    progress = false;
    for (std::size_t i = 0; i < demands.size() && left > 0; ++i) {
      const double want = demands[i] - alloc[i];
      if (want <= 0) continue;
      const double give = std::min({step, want, left});
      alloc[i] += give;
      left -= give;
      progress = true;
    }
  }
  return alloc;
}

}  // namespace oracle
