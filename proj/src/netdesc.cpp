#include "linkemu/netdesc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace linkemu {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Enum names

const char* to_string(Direction dir) { return dir == Direction::forward ? "forward" : "reverse"; }

std::optional<Direction> parse_direction(std::string_view text) {
  if (text == "forward") return Direction::forward;
  if (text == "reverse") return Direction::reverse;
  return std::nullopt;
}

const char* to_string(DelayKind kind) { return kind == DelayKind::constant ? "constant" : "normal"; }

const char* to_string(DamaPolicy policy) {
  return policy == DamaPolicy::cap_clip ? "cap-clip" : "maxmin-pool";
}

std::optional<DamaPolicy> parse_dama_policy(std::string_view text) {
  if (text == "cap-clip") return DamaPolicy::cap_clip;
  if (text == "maxmin-pool") return DamaPolicy::maxmin_pool;
  return std::nullopt;
}

const char* to_string(NodeRole role) {
  switch (role) {
    case NodeRole::host: return "host";
    case NodeRole::switch_node: return "switch";
    case NodeRole::router: return "router";
  }
  return "?";
}

const char* to_string(Predicate predicate) {
  switch (predicate) {
    case Predicate::endpoint_exists: return "endpoint-exists";
    case Predicate::bandwidth_in_bounds: return "bandwidth-in-bounds";
    case Predicate::delay_nonnegative: return "delay-nonnegative";
    case Predicate::capacity_positive: return "capacity-positive";
    case Predicate::graph_connected: return "graph-connected";
    case Predicate::allocation_within_cap: return "allocation-within-cap";
  }
  return "?";
}

std::optional<Predicate> parse_predicate(std::string_view text) {
  for (auto p : {Predicate::endpoint_exists, Predicate::bandwidth_in_bounds, Predicate::delay_nonnegative,
                 Predicate::capacity_positive, Predicate::graph_connected, Predicate::allocation_within_cap}) {
    if (text == to_string(p)) return p;
  }
  return std::nullopt;
}

ConstraintScope scope_of(Predicate predicate) {
  return predicate == Predicate::allocation_within_cap ? ConstraintScope::runtime
                                                       : ConstraintScope::static_scope;
}

std::vector<Constraint> default_constraints() {
  std::vector<Constraint> out;
  for (auto p : {Predicate::endpoint_exists, Predicate::bandwidth_in_bounds, Predicate::delay_nonnegative,
                 Predicate::capacity_positive, Predicate::allocation_within_cap}) {
    out.push_back(Constraint{to_string(p), scope_of(p), p});
  }
  return out;
}

const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::syntax: return "syntax error";
    case ParseErrorKind::unknown_key: return "unknown key";
    case ParseErrorKind::missing_field: return "missing required field";
    case ParseErrorKind::type_mismatch: return "type mismatch";
    case ParseErrorKind::invalid_value: return "invalid value";
    case ParseErrorKind::duplicate_id: return "duplicate identifier";
    case ParseErrorKind::missing_reference: return "missing reference";
  }
  return "?";
}

ParseError::ParseError(ParseErrorKind kind, std::string where, const std::string& message, int line,
                       int column)
    : std::runtime_error(std::string(to_string(kind)) + " at " + where + ": " + message),
      kind_(kind),
      where_(std::move(where)),
      line_(line),
      column_(column) {}

// ---------------------------------------------------------------------------
// Parameter invariants

std::string delay_model_violation(const DelayModel& model) {
  if (model.floor_ms < 0.0) return "delay floor is negative";
  if (model.std_ms < 0.0) return "delay std is negative";
  if (model.mean_ms < 0.0) return "delay mean is negative";
  if (model.mean_ms < model.floor_ms) return "delay mean is below its floor";
  if (model.kind == DelayKind::constant && model.std_ms != 0.0) return "constant delay with non-zero std";
  return {};
}

std::string link_params_violation(const LinkDirectionParams& p) {
  if (p.bandwidth_bps <= 0) return "bandwidth must be positive";
  if (p.min_bandwidth_bps < 0) return "min_bandwidth is negative";
  if (p.bandwidth_bps < p.min_bandwidth_bps) return "bandwidth below min_bandwidth";
  if (p.bandwidth_bps > p.max_bandwidth_bps) return "bandwidth above max_bandwidth";
  if (p.queue_capacity_bytes <= 0) return "queue_capacity must be positive";
  return delay_model_violation(p.delay);
}

bool is_valid_identifier(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '-';
  });
}

// ---------------------------------------------------------------------------
// Lookup helpers

const NodeSpec* NetworkDescription::find_node(std::string_view id) const {
  for (const auto& n : nodes) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

const LinkSpec* NetworkDescription::find_link(std::string_view id) const {
  const auto idx = link_index(id);
  return idx ? &links[*idx] : nullptr;
}

std::optional<std::size_t> NetworkDescription::link_index(std::string_view id) const {
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (links[i].id == id) return i;
  }
  return std::nullopt;
}

SimTime NetworkDescription::default_horizon() const {
  SimTime end{};
  for (const auto& f : flows) end = std::max(end, f.stop);
  for (const auto& e : schedule) end = std::max(end, e.at);
  return end;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

[[noreturn]] void fail(ParseErrorKind kind, const std::string& path, const std::string& message) {
  throw ParseError(kind, path.empty() ? std::string("document root") : path, message);
}

const char* json_type(const json& j) { return j.type_name(); }

// Walks one JSON object, consuming keys; `finish` rejects keys that were never read.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(ParseErrorKind::type_mismatch, path_, std::string("expected object, got ") + json_type(j_));
  }

  const json* optional(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& required(const std::string& key) {
    const json* v = optional(key);
    if (v == nullptr) fail(ParseErrorKind::missing_field, path_, "missing '" + key + "'");
    return *v;
  }

  [[nodiscard]] std::string at(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  [[nodiscard]] const std::string& path() const { return path_; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.contains(it.key())) fail(ParseErrorKind::unknown_key, path_, "unknown key '" + it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(ParseErrorKind::type_mismatch, path, std::string("expected string, got ") + json_type(j));
  return j.get<std::string>();
}

std::string as_identifier(const json& j, const std::string& path) {
  auto s = as_string(j, path);
  if (!is_valid_identifier(s)) {
    fail(ParseErrorKind::invalid_value, path, "invalid identifier '" + s + "' (1-64 chars of [A-Za-z0-9_-])");
  }
  return s;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(ParseErrorKind::type_mismatch, path, std::string("expected number, got ") + json_type(j));
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(ParseErrorKind::invalid_value, path, "number is not finite");
  return v;
}

std::int64_t as_int64(const json& j, const std::string& path) {
  if (j.is_number_integer()) return j.get<std::int64_t>();
  const double v = as_number(j, path);
  if (std::floor(v) != v || std::fabs(v) > 9.0e18) fail(ParseErrorKind::invalid_value, path, "expected an integer");
  return static_cast<std::int64_t>(v);
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(ParseErrorKind::type_mismatch, path, std::string("expected boolean, got ") + json_type(j));
  return j.get<bool>();
}

const json& as_array(const json& j, const std::string& path) {
  if (!j.is_array()) fail(ParseErrorKind::type_mismatch, path, std::string("expected array, got ") + json_type(j));
  return j;
}

std::string index_path(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

SimTime as_seconds(const json& j, const std::string& path) { return SimTime::from_seconds(as_number(j, path)); }

DelayModel parse_delay(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  DelayModel d;
  const auto kind = as_string(r.required("kind"), r.at("kind"));
  if (kind == "constant") {
    d.kind = DelayKind::constant;
  } else if (kind == "normal") {
    d.kind = DelayKind::normal;
  } else {
    fail(ParseErrorKind::invalid_value, r.at("kind"), "expected 'constant' or 'normal'");
  }
  d.mean_ms = as_number(r.required("mean"), r.at("mean"));
  if (const auto* v = r.optional("std")) d.std_ms = as_number(*v, r.at("std"));
  if (const auto* v = r.optional("floor")) d.floor_ms = as_number(*v, r.at("floor"));
  r.finish();
  return d;
}

LinkDirectionParams parse_direction_params(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  LinkDirectionParams p;
  p.bandwidth_bps = as_int64(r.required("bandwidth"), r.at("bandwidth"));
  p.queue_capacity_bytes = as_int64(r.required("queue_capacity"), r.at("queue_capacity"));
  if (const auto* v = r.optional("delay")) p.delay = parse_delay(*v, r.at("delay"));
  p.min_bandwidth_bps = 0;
  if (const auto* v = r.optional("min_bandwidth")) p.min_bandwidth_bps = as_int64(*v, r.at("min_bandwidth"));
  p.max_bandwidth_bps = p.bandwidth_bps;
  if (const auto* v = r.optional("max_bandwidth")) p.max_bandwidth_bps = as_int64(*v, r.at("max_bandwidth"));
  if (const auto* v = r.optional("allow_reordering")) p.allow_reordering = as_bool(*v, r.at("allow_reordering"));
  r.finish();
  return p;
}

NodeSpec parse_node(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  NodeSpec n;
  n.id = as_identifier(r.required("id"), r.at("id"));
  const auto role = as_string(r.required("role"), r.at("role"));
  if (role == "host") {
    n.role = NodeRole::host;
  } else if (role == "switch") {
    n.role = NodeRole::switch_node;
  } else if (role == "router") {
    n.role = NodeRole::router;
  } else {
    fail(ParseErrorKind::invalid_value, r.at("role"), "expected host, switch or router");
  }
  const auto& ifs = as_array(r.required("interfaces"), r.at("interfaces"));
  std::set<std::string> unique;
  for (std::size_t i = 0; i < ifs.size(); ++i) {
    const auto p = index_path(r.at("interfaces"), i);
    auto name = as_identifier(ifs[i], p);
    if (!unique.insert(name).second) fail(ParseErrorKind::duplicate_id, p, "interface '" + name + "' repeated");
    n.interfaces.push_back(std::move(name));
  }
  if (n.interfaces.empty()) fail(ParseErrorKind::invalid_value, r.at("interfaces"), "node needs at least one interface");
  r.finish();
  return n;
}

Endpoint parse_endpoint(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  Endpoint e;
  e.node = as_identifier(r.required("node"), r.at("node"));
  e.interface = as_identifier(r.required("interface"), r.at("interface"));
  r.finish();
  return e;
}

LinkSpec parse_link(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  LinkSpec l;
  l.id = as_identifier(r.required("id"), r.at("id"));
  l.a = parse_endpoint(r.required("a"), r.at("a"));
  l.b = parse_endpoint(r.required("b"), r.at("b"));
  if (l.a == l.b) fail(ParseErrorKind::invalid_value, path, "link endpoints a and b are identical");
  l.forward = parse_direction_params(r.required("forward"), r.at("forward"));
  if (const auto* v = r.optional("reverse")) {
    l.reverse = parse_direction_params(*v, r.at("reverse"));
  } else {
    l.reverse = l.forward;
  }
  r.finish();
  return l;
}

CbrPattern parse_cbr_fields(ObjectReader& r) {
  CbrPattern c;
  c.rate_bps = as_number(r.required("rate"), r.at("rate"));
  if (const auto* v = r.optional("frame_bytes")) c.frame_bytes = static_cast<std::int32_t>(as_int64(*v, r.at("frame_bytes")));
  if (const auto* v = r.optional("payload_bytes")) {
    c.payload_bytes = static_cast<std::int32_t>(as_int64(*v, r.at("payload_bytes")));
  } else {
    c.payload_bytes = c.frame_bytes;
  }
  if (c.rate_bps <= 0) fail(ParseErrorKind::invalid_value, r.at("rate"), "rate must be positive");
  if (c.frame_bytes <= 0 || c.frame_bytes > 65535) fail(ParseErrorKind::invalid_value, r.at("frame_bytes"), "frame_bytes must be in 1..65535");
  if (c.payload_bytes < 0 || c.payload_bytes > c.frame_bytes) {
    fail(ParseErrorKind::invalid_value, r.at("payload_bytes"), "payload_bytes must be in 0..frame_bytes");
  }
  return c;
}

FlowPattern parse_pattern(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  const auto type = as_string(r.required("type"), r.at("type"));
  if (type == "cbr") {
    auto c = parse_cbr_fields(r);
    r.finish();
    return c;
  }
  if (type == "onoff") {
    OnOffPattern o;
    o.on_s = as_number(r.required("on_s"), r.at("on_s"));
    o.off_s = as_number(r.required("off_s"), r.at("off_s"));
    if (o.on_s <= 0) fail(ParseErrorKind::invalid_value, r.at("on_s"), "on_s must be positive");
    if (o.off_s < 0) fail(ParseErrorKind::invalid_value, r.at("off_s"), "off_s must be non-negative");
    ObjectReader inner(r.required("inner"), r.at("inner"));
    o.inner = parse_cbr_fields(inner);
    inner.finish();
    r.finish();
    return o;
  }
  if (type == "probe") {
    ProbePattern p;
    p.count = as_int64(r.required("count"), r.at("count"));
    p.interval_s = as_number(r.required("interval_s"), r.at("interval_s"));
    if (const auto* v = r.optional("frame_bytes")) p.frame_bytes = static_cast<std::int32_t>(as_int64(*v, r.at("frame_bytes")));
    if (const auto* v = r.optional("payload_bytes")) {
      p.payload_bytes = static_cast<std::int32_t>(as_int64(*v, r.at("payload_bytes")));
    } else {
      p.payload_bytes = p.frame_bytes;
    }
    if (const auto* v = r.optional("echo")) p.echo = as_bool(*v, r.at("echo"));
    if (p.count < 1) fail(ParseErrorKind::invalid_value, r.at("count"), "probe count must be at least 1");
    if (p.interval_s <= 0) fail(ParseErrorKind::invalid_value, r.at("interval_s"), "interval_s must be positive");
    if (p.frame_bytes <= 0 || p.frame_bytes > 65535) fail(ParseErrorKind::invalid_value, r.at("frame_bytes"), "frame_bytes must be in 1..65535");
    if (p.payload_bytes < 0 || p.payload_bytes > p.frame_bytes) {
      fail(ParseErrorKind::invalid_value, r.at("payload_bytes"), "payload_bytes must be in 0..frame_bytes");
    }
    r.finish();
    return p;
  }
  fail(ParseErrorKind::invalid_value, r.at("type"), "expected cbr, onoff or probe");
}

FlowSpec parse_flow(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  FlowSpec f;
  f.id = as_identifier(r.required("id"), r.at("id"));
  f.src = as_identifier(r.required("src"), r.at("src"));
  f.dst = as_identifier(r.required("dst"), r.at("dst"));
  f.start = as_seconds(r.required("start"), r.at("start"));
  f.stop = as_seconds(r.required("stop"), r.at("stop"));
  f.pattern = parse_pattern(r.required("pattern"), r.at("pattern"));
  if (const auto* v = r.optional("proto_label")) f.proto_label = as_string(*v, r.at("proto_label"));
  if (f.start < SimTime{}) fail(ParseErrorKind::invalid_value, r.at("start"), "start must be non-negative");
  if (!(f.start < f.stop)) fail(ParseErrorKind::invalid_value, path, "flow start must precede stop");
  if (f.src == f.dst) fail(ParseErrorKind::invalid_value, path, "flow src and dst are the same node");
  r.finish();
  return f;
}

DirectionRef parse_direction_ref(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  DirectionRef d;
  d.link = as_identifier(r.required("link"), r.at("link"));
  const auto dir = parse_direction(as_string(r.required("dir"), r.at("dir")));
  if (!dir) fail(ParseErrorKind::invalid_value, r.at("dir"), "expected forward or reverse");
  d.dir = *dir;
  r.finish();
  return d;
}

DamaConfig parse_dama(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  DamaConfig c;
  if (const auto* v = r.optional("epoch_s")) c.epoch_s = as_number(*v, r.at("epoch_s"));
  const auto policy = parse_dama_policy(as_string(r.required("policy"), r.at("policy")));
  if (!policy) fail(ParseErrorKind::invalid_value, r.at("policy"), "expected cap-clip or maxmin-pool");
  c.policy = *policy;
  if (const auto* v = r.optional("pool_bps")) c.pool_bps = as_number(*v, r.at("pool_bps"));
  if (const auto* v = r.optional("smoothing")) c.smoothing = static_cast<int>(as_int64(*v, r.at("smoothing")));
  if (const auto* v = r.optional("managed")) {
    const auto& arr = as_array(*v, r.at("managed"));
    for (std::size_t i = 0; i < arr.size(); ++i) c.managed.push_back(parse_direction_ref(arr[i], index_path(r.at("managed"), i)));
  }
  if (c.epoch_s <= 0) fail(ParseErrorKind::invalid_value, r.at("epoch_s"), "epoch_s must be positive");
  if (c.policy == DamaPolicy::maxmin_pool && c.pool_bps <= 0) {
    fail(ParseErrorKind::invalid_value, r.at("pool_bps"), "maxmin-pool needs a positive pool_bps");
  }
  if (c.smoothing < 1) fail(ParseErrorKind::invalid_value, r.at("smoothing"), "smoothing must be at least 1");
  r.finish();
  return c;
}

LinkEvent parse_link_event(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  LinkEvent e;
  e.at = as_seconds(r.required("at"), r.at("at"));
  e.link = as_identifier(r.required("link"), r.at("link"));
  const auto dir = as_string(r.required("dir"), r.at("dir"));
  if (dir == "forward") {
    e.dir = DirectionSelector::forward;
  } else if (dir == "reverse") {
    e.dir = DirectionSelector::reverse;
  } else if (dir == "both") {
    e.dir = DirectionSelector::both;
  } else {
    fail(ParseErrorKind::invalid_value, r.at("dir"), "expected forward, reverse or both");
  }
  if (const auto* v = r.optional("demand")) e.demand_bps = as_number(*v, r.at("demand"));
  if (const auto* v = r.optional("bandwidth")) e.bandwidth_bps = as_int64(*v, r.at("bandwidth"));
  if (const auto* v = r.optional("delay")) e.delay = parse_delay(*v, r.at("delay"));
  if (const auto* v = r.optional("queue_capacity")) e.queue_capacity_bytes = as_int64(*v, r.at("queue_capacity"));
  r.finish();
  const bool sets = e.bandwidth_bps || e.delay || e.queue_capacity_bytes;
  if (e.at < SimTime{}) fail(ParseErrorKind::invalid_value, r.at("at"), "schedule time must be non-negative");
  if (e.demand_bps && sets) fail(ParseErrorKind::invalid_value, path, "an entry scripts demand or sets parameters, not both");
  if (!e.demand_bps && !sets) fail(ParseErrorKind::missing_field, path, "entry needs 'demand' or a parameter to set");
  if (e.demand_bps && *e.demand_bps < 0) fail(ParseErrorKind::invalid_value, r.at("demand"), "demand must be non-negative");
  return e;
}

Constraint parse_constraint(const json& j, const std::string& path) {
  Constraint c;
  if (j.is_string()) {
    const auto p = parse_predicate(j.get<std::string>());
    if (!p) fail(ParseErrorKind::invalid_value, path, "unknown predicate '" + j.get<std::string>() + "'");
    c.name = to_string(*p);
    c.predicate = *p;
  } else {
    ObjectReader r(j, path);
    c.name = as_identifier(r.required("name"), r.at("name"));
    const auto pred_text = as_string(r.required("predicate"), r.at("predicate"));
    const auto p = parse_predicate(pred_text);
    if (!p) fail(ParseErrorKind::invalid_value, r.at("predicate"), "unknown predicate '" + pred_text + "'");
    c.predicate = *p;
    if (const auto* v = r.optional("scope")) {
      const auto scope = as_string(*v, r.at("scope"));
      const auto expected = scope_of(*p) == ConstraintScope::runtime ? "runtime" : "static";
      if (scope != expected) fail(ParseErrorKind::invalid_value, r.at("scope"), std::string("predicate is ") + expected + "-scoped");
    }
    r.finish();
  }
  c.scope = scope_of(c.predicate);
  return c;
}

void check_unique_ids(const NetworkDescription& d) {
  std::set<std::string> seen;
  for (std::size_t i = 0; i < d.nodes.size(); ++i) {
    if (!seen.insert(d.nodes[i].id).second) fail(ParseErrorKind::duplicate_id, index_path("nodes", i), "node id '" + d.nodes[i].id + "' repeated");
  }
  seen.clear();
  std::set<Endpoint> endpoints;
  for (std::size_t i = 0; i < d.links.size(); ++i) {
    const auto& l = d.links[i];
    if (!seen.insert(l.id).second) fail(ParseErrorKind::duplicate_id, index_path("links", i), "link id '" + l.id + "' repeated");
    for (const auto& ep : {l.a, l.b}) {
      if (!endpoints.insert(ep).second) {
        fail(ParseErrorKind::duplicate_id, index_path("links", i), "endpoint " + ep.node + ":" + ep.interface + " already used by another link");
      }
    }
  }
  seen.clear();
  for (std::size_t i = 0; i < d.flows.size(); ++i) {
    if (!seen.insert(d.flows[i].id).second) fail(ParseErrorKind::duplicate_id, index_path("flows", i), "flow id '" + d.flows[i].id + "' repeated");
  }
}

void check_references(const NetworkDescription& d) {
  for (std::size_t i = 0; i < d.links.size(); ++i) {
    const auto& l = d.links[i];
    for (const auto& [side, ep] : {std::pair{"a", l.a}, std::pair{"b", l.b}}) {
      const auto path = index_path("links", i) + "." + side;
      const auto* node = d.find_node(ep.node);
      if (node == nullptr) fail(ParseErrorKind::missing_reference, path, "link '" + l.id + "' references unknown node '" + ep.node + "'");
      if (std::find(node->interfaces.begin(), node->interfaces.end(), ep.interface) == node->interfaces.end()) {
        fail(ParseErrorKind::missing_reference, path, "node '" + ep.node + "' has no interface '" + ep.interface + "'");
      }
    }
  }
  for (std::size_t i = 0; i < d.flows.size(); ++i) {
    const auto& f = d.flows[i];
    for (const auto& n : {f.src, f.dst}) {
      if (d.find_node(n) == nullptr) fail(ParseErrorKind::missing_reference, index_path("flows", i), "flow '" + f.id + "' references unknown node '" + n + "'");
    }
  }
  for (std::size_t i = 0; i < d.schedule.size(); ++i) {
    if (d.find_link(d.schedule[i].link) == nullptr) {
      fail(ParseErrorKind::missing_reference, index_path("schedule", i), "unknown link '" + d.schedule[i].link + "'");
    }
  }
  if (d.dama) {
    for (std::size_t i = 0; i < d.dama->managed.size(); ++i) {
      if (d.find_link(d.dama->managed[i].link) == nullptr) {
        fail(ParseErrorKind::missing_reference, index_path("dama.managed", i), "unknown link '" + d.dama->managed[i].link + "'");
      }
    }
  }
}

std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
  int line = 1;
  int column = 1;
  const std::size_t end = std::min(byte, text.size());
  for (std::size_t i = 0; i < end; ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

NetworkDescription parse_description(std::string_view text, const ParseOptions& options) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // nlohmann reports the 1-based byte index following the offending character.
    const auto [line, column] = line_column(text, e.byte > 0 ? e.byte - 1 : 0);
    std::string msg = e.what();
    if (const auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ParseError(ParseErrorKind::syntax, "line " + std::to_string(line) + ", column " + std::to_string(column),
                     msg, line, column);
  }

  ObjectReader root(doc, "");
  NetworkDescription d;
  d.version = as_string(root.required("version"), "version");
  const auto& nodes = as_array(root.required("nodes"), "nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) d.nodes.push_back(parse_node(nodes[i], index_path("nodes", i)));
  const auto& links = as_array(root.required("links"), "links");
  for (std::size_t i = 0; i < links.size(); ++i) d.links.push_back(parse_link(links[i], index_path("links", i)));
  if (const auto* v = root.optional("flows")) {
    const auto& flows = as_array(*v, "flows");
    for (std::size_t i = 0; i < flows.size(); ++i) d.flows.push_back(parse_flow(flows[i], index_path("flows", i)));
  }
  if (const auto* v = root.optional("dama"); v != nullptr && !v->is_null()) d.dama = parse_dama(*v, "dama");
  if (const auto* v = root.optional("schedule")) {
    const auto& sched = as_array(*v, "schedule");
    for (std::size_t i = 0; i < sched.size(); ++i) d.schedule.push_back(parse_link_event(sched[i], index_path("schedule", i)));
  }
  if (const auto* v = root.optional("constraints")) {
    const auto& arr = as_array(*v, "constraints");
    d.constraints.clear();
    for (std::size_t i = 0; i < arr.size(); ++i) d.constraints.push_back(parse_constraint(arr[i], index_path("constraints", i)));
  }
  root.finish();

  for (std::size_t i = 0; i < d.schedule.size(); ++i) {
    if (d.schedule[i].is_demand() && !d.dama) {
      fail(ParseErrorKind::invalid_value, index_path("schedule", i), "demand entries need a 'dama' block");
    }
  }
  std::stable_sort(d.schedule.begin(), d.schedule.end(),
                   [](const LinkEvent& x, const LinkEvent& y) { return x.at < y.at; });

  check_unique_ids(d);
  if (options.resolve_references) check_references(d);
  return d;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

ordered_json delay_json(const DelayModel& d) {
  ordered_json j;
  j["kind"] = to_string(d.kind);
  j["mean"] = d.mean_ms;
  j["std"] = d.std_ms;
  j["floor"] = d.floor_ms;
  return j;
}

ordered_json params_json(const LinkDirectionParams& p) {
  ordered_json j;
  j["bandwidth"] = p.bandwidth_bps;
  j["delay"] = delay_json(p.delay);
  j["queue_capacity"] = p.queue_capacity_bytes;
  j["min_bandwidth"] = p.min_bandwidth_bps;
  j["max_bandwidth"] = p.max_bandwidth_bps;
  j["allow_reordering"] = p.allow_reordering;
  return j;
}

void cbr_fields(ordered_json& j, const CbrPattern& c) {
  j["rate"] = c.rate_bps;
  j["frame_bytes"] = c.frame_bytes;
  j["payload_bytes"] = c.payload_bytes;
}

ordered_json pattern_json(const FlowPattern& pattern) {
  ordered_json j;
  if (const auto* c = std::get_if<CbrPattern>(&pattern)) {
    j["type"] = "cbr";
    cbr_fields(j, *c);
  } else if (const auto* o = std::get_if<OnOffPattern>(&pattern)) {
    j["type"] = "onoff";
    j["on_s"] = o->on_s;
    j["off_s"] = o->off_s;
    ordered_json inner;
    cbr_fields(inner, o->inner);
    j["inner"] = inner;
  } else {
    const auto& p = std::get<ProbePattern>(pattern);
    j["type"] = "probe";
    j["count"] = p.count;
    j["interval_s"] = p.interval_s;
    j["frame_bytes"] = p.frame_bytes;
    j["payload_bytes"] = p.payload_bytes;
    j["echo"] = p.echo;
  }
  return j;
}

const char* selector_name(DirectionSelector s) {
  switch (s) {
    case DirectionSelector::forward: return "forward";
    case DirectionSelector::reverse: return "reverse";
    case DirectionSelector::both: return "both";
  }
  return "?";
}

}  // namespace

std::string serialize_description(const NetworkDescription& d) {
  ordered_json doc;
  doc["version"] = d.version;
  doc["nodes"] = ordered_json::array();
  for (const auto& n : d.nodes) {
    ordered_json j;
    j["id"] = n.id;
    j["role"] = to_string(n.role);
    j["interfaces"] = n.interfaces;
    doc["nodes"].push_back(j);
  }
  doc["links"] = ordered_json::array();
  for (const auto& l : d.links) {
    ordered_json j;
    j["id"] = l.id;
    j["a"] = {{"node", l.a.node}, {"interface", l.a.interface}};
    j["b"] = {{"node", l.b.node}, {"interface", l.b.interface}};
    j["forward"] = params_json(l.forward);
    j["reverse"] = params_json(l.reverse);
    doc["links"].push_back(j);
  }
  doc["flows"] = ordered_json::array();
  for (const auto& f : d.flows) {
    ordered_json j;
    j["id"] = f.id;
    j["src"] = f.src;
    j["dst"] = f.dst;
    j["start"] = f.start.seconds();
    j["stop"] = f.stop.seconds();
    j["pattern"] = pattern_json(f.pattern);
    j["proto_label"] = f.proto_label;
    doc["flows"].push_back(j);
  }
  if (d.dama) {
    ordered_json j;
    j["epoch_s"] = d.dama->epoch_s;
    j["policy"] = to_string(d.dama->policy);
    j["pool_bps"] = d.dama->pool_bps;
    j["smoothing"] = d.dama->smoothing;
    j["managed"] = ordered_json::array();
    for (const auto& m : d.dama->managed) j["managed"].push_back({{"link", m.link}, {"dir", to_string(m.dir)}});
    doc["dama"] = j;
  }
  doc["schedule"] = ordered_json::array();
  for (const auto& e : d.schedule) {
    ordered_json j;
    j["at"] = e.at.seconds();
    j["link"] = e.link;
    j["dir"] = selector_name(e.dir);
    if (e.demand_bps) j["demand"] = *e.demand_bps;
    if (e.bandwidth_bps) j["bandwidth"] = *e.bandwidth_bps;
    if (e.delay) j["delay"] = delay_json(*e.delay);
    if (e.queue_capacity_bytes) j["queue_capacity"] = *e.queue_capacity_bytes;
    doc["schedule"].push_back(j);
  }
  doc["constraints"] = ordered_json::array();
  for (const auto& c : d.constraints) {
    doc["constraints"].push_back({{"name", c.name},
                                  {"predicate", to_string(c.predicate)},
                                  {"scope", c.scope == ConstraintScope::runtime ? "runtime" : "static"}});
  }
  return doc.dump(2) + "\n";
}

NetworkDescription load_description(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(ParseErrorKind::syntax, path, "cannot read scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_description(buf.str(), options);
}

}  // namespace linkemu
