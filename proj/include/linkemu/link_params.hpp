#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace linkemu {

// forward = a -> b, reverse = b -> a.
enum class Direction { forward, reverse };

const char* to_string(Direction dir);
std::optional<Direction> parse_direction(std::string_view text);

enum class DelayKind { constant, normal };

const char* to_string(DelayKind kind);

// Per-packet propagation delay. Normal draws are truncated below at `floor_ms`.
struct DelayModel {
  DelayKind kind = DelayKind::constant;
  double mean_ms = 0.0;
  double std_ms = 0.0;
  double floor_ms = 0.0;

  static DelayModel constant(double ms) { return DelayModel{DelayKind::constant, ms, 0.0, 0.0}; }
  static DelayModel normal(double mean_ms, double std_ms, double floor_ms) {
    return DelayModel{DelayKind::normal, mean_ms, std_ms, floor_ms};
  }

  bool operator==(const DelayModel&) const = default;
};

// Returns an empty string when valid, otherwise a description of the first violation.
std::string delay_model_violation(const DelayModel& model);

struct LinkDirectionParams {
  std::int64_t bandwidth_bps = 0;
  DelayModel delay;
  std::int64_t queue_capacity_bytes = 0;
  std::int64_t min_bandwidth_bps = 0;
  std::int64_t max_bandwidth_bps = 0;
  // When false, per-packet delay samples are clamped so deliveries stay in admission order.
  bool allow_reordering = false;

  bool operator==(const LinkDirectionParams&) const = default;
};

// Empty when `params` satisfies bandwidth bounds, capacity and delay invariants.
std::string link_params_violation(const LinkDirectionParams& params);

}  // namespace linkemu
