#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "linkemu/link_params.hpp"

namespace linkemu {

enum class DamaPolicy { cap_clip, maxmin_pool };

const char* to_string(DamaPolicy policy);
std::optional<DamaPolicy> parse_dama_policy(std::string_view text);

struct DirectionRef {
  std::string link;
  Direction dir = Direction::forward;

  auto operator<=>(const DirectionRef&) const = default;
};

struct DamaConfig {
  double epoch_s = 1.0;
  DamaPolicy policy = DamaPolicy::cap_clip;
  double pool_bps = 0.0;
  int smoothing = 1;
  // Directions under DAMA control; empty means every link direction.
  std::vector<DirectionRef> managed;

  bool operator==(const DamaConfig&) const = default;
};

}  // namespace linkemu
