#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "linkemu/dama_config.hpp"
#include "linkemu/error.hpp"
#include "linkemu/flow_spec.hpp"
#include "linkemu/link_params.hpp"
#include "linkemu/sim_time.hpp"

namespace linkemu {

enum class NodeRole { host, switch_node, router };

const char* to_string(NodeRole role);

struct NodeSpec {
  std::string id;
  NodeRole role = NodeRole::host;
  std::vector<std::string> interfaces;

  bool operator==(const NodeSpec&) const = default;
};

struct Endpoint {
  std::string node;
  std::string interface;

  auto operator<=>(const Endpoint&) const = default;
};

struct LinkSpec {
  std::string id;
  Endpoint a;
  Endpoint b;
  LinkDirectionParams forward;
  LinkDirectionParams reverse;

  [[nodiscard]] const LinkDirectionParams& params(Direction dir) const {
    return dir == Direction::forward ? forward : reverse;
  }
  LinkDirectionParams& params(Direction dir) { return dir == Direction::forward ? forward : reverse; }

  bool operator==(const LinkSpec&) const = default;
};

enum class DirectionSelector { forward, reverse, both };

// A timed entry of the run schedule. An entry either scripts the DAMA demand for a
// direction (`demand_bps`) or reconfigures it directly (any of bandwidth/delay/capacity).
struct LinkEvent {
  SimTime at;
  std::string link;
  DirectionSelector dir = DirectionSelector::forward;
  std::optional<double> demand_bps;
  std::optional<std::int64_t> bandwidth_bps;
  std::optional<DelayModel> delay;
  std::optional<std::int64_t> queue_capacity_bytes;

  [[nodiscard]] bool is_demand() const { return demand_bps.has_value(); }
  bool operator==(const LinkEvent&) const = default;
};

enum class ConstraintScope { static_scope, runtime };

enum class Predicate {
  endpoint_exists,
  bandwidth_in_bounds,
  delay_nonnegative,
  capacity_positive,
  graph_connected,
  allocation_within_cap,
};

const char* to_string(Predicate predicate);
std::optional<Predicate> parse_predicate(std::string_view text);
ConstraintScope scope_of(Predicate predicate);

struct Constraint {
  std::string name;
  ConstraintScope scope = ConstraintScope::static_scope;
  Predicate predicate = Predicate::endpoint_exists;

  bool operator==(const Constraint&) const = default;
};

// The catalog applied when a document has no `constraints` key (everything but graph-connected).
std::vector<Constraint> default_constraints();

struct NetworkDescription {
  std::string version = "1";
  std::vector<NodeSpec> nodes;
  std::vector<LinkSpec> links;
  std::vector<FlowSpec> flows;
  std::optional<DamaConfig> dama;
  std::vector<LinkEvent> schedule;
  std::vector<Constraint> constraints = default_constraints();

  [[nodiscard]] const NodeSpec* find_node(std::string_view id) const;
  [[nodiscard]] const LinkSpec* find_link(std::string_view id) const;
  [[nodiscard]] std::optional<std::size_t> link_index(std::string_view id) const;

  // Default run length: the latest flow stop or schedule entry.
  [[nodiscard]] SimTime default_horizon() const;

  bool operator==(const NetworkDescription&) const = default;
};

struct ParseOptions {
  // When set, dangling node/link references are parse errors (missing_reference). When
  // cleared they survive parsing and are reported by the endpoint-exists constraint.
  bool resolve_references = true;
};

// Parses a JSON scenario document. Throws ParseError; never returns a partial description.
NetworkDescription parse_description(std::string_view text, const ParseOptions& options = {});

// Emits a document that parse_description maps back to an equal description.
std::string serialize_description(const NetworkDescription& desc);

// Reads and parses a scenario file; I/O failures are reported as ParseError{syntax}.
NetworkDescription load_description(const std::string& path, const ParseOptions& options = {});

// Valid identifiers: 1..64 characters from [A-Za-z0-9_-].
bool is_valid_identifier(std::string_view id);

}  // namespace linkemu
