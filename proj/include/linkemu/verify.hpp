#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "linkemu/linkqueue.hpp"
#include "linkemu/netdesc.hpp"

namespace linkemu {

struct ConstraintResult {
  std::string constraint;
  bool passed = true;
  std::string witness;  // names the offending entities when !passed

  bool operator==(const ConstraintResult&) const = default;
};

struct VerificationReport {
  SimTime timestamp;
  std::vector<ConstraintResult> results;

  [[nodiscard]] bool all_passed() const;
  [[nodiscard]] std::size_t failures() const;
  bool operator==(const VerificationReport&) const = default;
};

// Live state of one link direction as seen by runtime checks.
struct DirectionView {
  std::size_t link_index = 0;
  Direction dir = Direction::forward;
  const LinkDirectionState* state = nullptr;
};

// Evaluates every static-scope constraint of `desc`. Pure.
VerificationReport verify_static(const NetworkDescription& desc);

// Evaluates runtime-scope constraints against live link parameters. Bounds come from the
// description, so an out-of-range allocation forced on a state is reported, not masked.
VerificationReport verify_runtime(const NetworkDescription& desc, std::span<const DirectionView> states,
                                  SimTime now);

// Connected components of the node/link graph, each sorted, ordered by first node.
std::vector<std::vector<std::string>> connected_components(const NetworkDescription& desc);

void render_text(const VerificationReport& report, std::ostream& out);
// One `time,constraint,status,witness` row per result (no header).
void render_csv_rows(const VerificationReport& report, std::ostream& out);
inline constexpr const char* kVerificationCsvHeader = "time,constraint,status,witness";

}  // namespace linkemu
