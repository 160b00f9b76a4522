#include "routediag/instance.h"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "routediag/errors.h"

namespace routediag {

namespace {

constexpr std::array<std::string_view, 7> kFamilyNames = {
    "Capacity",   "DistanceLimit", "TimeWindows",  "PickupDelivery",
    "SameVehicle", "Priority",     "DynamicDemand"};

constexpr std::uint8_t bit(Flag f) { return static_cast<std::uint8_t>(f); }

bool is_catalog_member(std::uint8_t flags, bool dynamic) {
  if (dynamic) {
    return flags == bit(Flag::C) || flags == (bit(Flag::C) | bit(Flag::L));
  }
  // Capacity is never combined with pickup-and-delivery in the catalog.
  return !((flags & bit(Flag::C)) && (flags & bit(Flag::PD)));
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) pos = text.size();
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::optional<double> to_number(std::string_view s) {
  std::string buf(s);
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(buf.c_str(), &end);
  if (buf.empty() || end != buf.c_str() + buf.size() || errno == ERANGE ||
      !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

double parse_number(std::string_view s, std::string_view key) {
  auto v = to_number(trim(s));
  if (!v) throw ConfigError(fmt::format("override {}: '{}' is not a number", key, s));
  return *v;
}

int parse_int(std::string_view s, std::string_view key) {
  double v = parse_number(s, key);
  if (v != std::floor(v)) {
    throw ConfigError(fmt::format("override {}: '{}' is not an integer", key, s));
  }
  return static_cast<int>(v);
}

std::string join_ids(const std::vector<int>& ids) {
  return fmt::format("{}", fmt::join(ids, ", "));
}

bool is_mod_ranking(const std::vector<int>& rank, int modulus) {
  for (std::size_t i = 1; i < rank.size(); ++i) {
    if (rank[i] != static_cast<int>(i) % modulus) return false;
  }
  return true;
}

}  // namespace

std::string_view family_name(Family family) {
  return kFamilyNames[static_cast<std::size_t>(family)];
}

std::optional<Family> family_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kFamilyNames.size(); ++i) {
    if (kFamilyNames[i] == name) return static_cast<Family>(i);
  }
  return std::nullopt;
}

void validate_constraint(const ConstraintSpec& spec, std::size_t node_count) {
  const auto check_node = [&](int id, std::string_view what) {
    if (id < 0 || static_cast<std::size_t>(id) >= node_count) {
      throw StructuralError(fmt::format("{}: {} references unknown node {}",
                                        family_name(spec.family()), what, id));
    }
  };
  const auto check_finite = [&](double v, std::string_view what) {
    if (!std::isfinite(v)) {
      throw StructuralError(
          fmt::format("{}: {} must be finite", family_name(spec.family()), what));
    }
  };

  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, CapacityParams>) {
          check_finite(p.capacity, "Q");
        } else if constexpr (std::is_same_v<T, DistanceLimitParams>) {
          check_finite(p.max_length, "Lmax");
        } else if constexpr (std::is_same_v<T, TimeWindowsParams>) {
          if (p.windows.size() != node_count) {
            throw StructuralError(fmt::format("TimeWindows: {} windows for {} nodes",
                                              p.windows.size(), node_count));
          }
          for (std::size_t i = 0; i < p.windows.size(); ++i) {
            if (p.windows[i].node != static_cast<int>(i)) {
              throw StructuralError(
                  fmt::format("TimeWindows: window {} belongs to node {}", i, p.windows[i].node));
            }
          }
          for (const auto& w : p.windows) {
            check_node(w.node, "window");
            check_finite(w.ready, "ready");
            check_finite(w.due, "due");
            if (w.ready > w.due) {
              throw StructuralError(fmt::format(
                  "TimeWindows: node {} has ready {} > due {}", w.node, w.ready, w.due));
            }
          }
        } else if constexpr (std::is_same_v<T, PickupDeliveryParams>) {
          for (const auto& pair : p.pairs) {
            check_node(pair.pickup, "pair");
            check_node(pair.delivery, "pair");
            if (pair.pickup == pair.delivery) {
              throw StructuralError(fmt::format(
                  "PickupDelivery: pickup equals delivery ({})", pair.pickup));
            }
            if (pair.pickup == 0 || pair.delivery == 0) {
              throw StructuralError("PickupDelivery: depot cannot be in a pair");
            }
          }
        } else if constexpr (std::is_same_v<T, SameVehicleParams>) {
          for (const auto& group : p.groups) {
            for (int id : group) {
              check_node(id, "group");
              if (id == 0) throw StructuralError("SameVehicle: depot cannot be grouped");
            }
          }
        } else if constexpr (std::is_same_v<T, PriorityParams>) {
          if (p.rank.size() != node_count) {
            throw StructuralError(fmt::format(
                "Priority: {} ranks for {} nodes", p.rank.size(), node_count));
          }
          for (const auto& [a, b] : p.exempt) {
            check_node(a, "exemption");
            check_node(b, "exemption");
          }
        } else if constexpr (std::is_same_v<T, DynamicDemandParams>) {
          check_node(p.node, "node");
          check_node(p.depot, "depot");
          check_finite(p.coefficient, "k");
        }
      },
      spec.params);
}

// ---------------------------------------------------------------------------
// Variant catalog

std::string variant_name(std::uint8_t flags, bool dynamic) {
  const auto has = [flags](Flag f) { return (flags & bit(f)) != 0; };
  std::string name;
  if (has(Flag::P)) name += "P";
  if (dynamic) name += "D";
  if (has(Flag::C)) name += "C";
  name += "VRP";
  if (has(Flag::PD)) name += "PD";
  if (has(Flag::L)) name += dynamic ? "-L" : "L";
  if (has(Flag::S)) name += "S";
  if (has(Flag::TW)) name += "TW";
  return name;
}

VariantDescriptor::VariantDescriptor(std::uint8_t flags, bool dynamic)
    : _flags(flags), _dynamic(dynamic), _name(variant_name(flags, dynamic)) {
  if (flags >= (1u << 6) || !is_catalog_member(flags, dynamic)) {
    throw ConfigError(fmt::format("flag set {} is not a catalog variant", _name));
  }
}

const std::vector<VariantDescriptor>& VariantDescriptor::catalog() {
  static const std::vector<VariantDescriptor> all = [] {
    std::vector<VariantDescriptor> out;
    for (int c = 0; c < 2; ++c) {
      for (int l = 0; l < 2; ++l) {
        for (int tw = 0; tw < 2; ++tw) {
          for (int pd = 0; pd < 2; ++pd) {
            for (int s = 0; s < 2; ++s) {
              for (int p = 0; p < 2; ++p) {
                std::uint8_t flags = 0;
                if (c) flags |= bit(Flag::C);
                if (l) flags |= bit(Flag::L);
                if (tw) flags |= bit(Flag::TW);
                if (pd) flags |= bit(Flag::PD);
                if (s) flags |= bit(Flag::S);
                if (p) flags |= bit(Flag::P);
                if (is_catalog_member(flags, false)) out.emplace_back(flags, false);
              }
            }
          }
        }
      }
    }
    out.emplace_back(bit(Flag::C), true);
    out.emplace_back(bit(Flag::C) | bit(Flag::L), true);
    return out;
  }();
  return all;
}

std::optional<VariantDescriptor> VariantDescriptor::from_name(std::string_view name) {
  if (name == "CVRP-L") name = "CVRPL";
  for (const auto& d : catalog()) {
    if (d.name() == name) return d;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Distances

DistanceMatrix::DistanceMatrix(std::span<const Node> nodes)
    : _n(nodes.size()), _d(nodes.size() * nodes.size(), 0.0) {
  for (std::size_t i = 0; i < _n; ++i) {
    for (std::size_t j = i + 1; j < _n; ++j) {
      const double dx = nodes[i].x - nodes[j].x;
      const double dy = nodes[i].y - nodes[j].y;
      const double d = std::sqrt(dx * dx + dy * dy);
      _d[i * _n + j] = d;
      _d[j * _n + i] = d;
    }
  }
}

DistanceMatrix distance_matrix(std::span<const Node> nodes) {
  return DistanceMatrix(nodes);
}

// ---------------------------------------------------------------------------
// Instance

ProblemInstance::ProblemInstance(std::vector<Node> nodes,
                                 std::vector<ConstraintSpec> constraints,
                                 VariantDescriptor descriptor,
                                 std::string description)
    : _nodes(std::move(nodes)),
      _constraints(std::move(constraints)),
      _descriptor(std::move(descriptor)),
      _description(std::move(description)),
      _distance(_nodes) {
  if (_nodes.empty()) throw StructuralError("instance has no nodes");
  for (std::size_t i = 0; i < _nodes.size(); ++i) {
    const Node& n = _nodes[i];
    if (n.id != static_cast<int>(i)) {
      throw StructuralError(
          fmt::format("node at position {} has id {}; ids must be dense", i, n.id));
    }
    if (n.ready > n.due) {
      throw StructuralError(fmt::format("node {} has ready > due", n.id));
    }
    if (n.demand < 0) throw StructuralError(fmt::format("node {} has negative demand", n.id));
  }
  if (_nodes[0].demand != 0) throw StructuralError("depot demand must be 0");
  for (const auto& c : _constraints) validate_constraint(c, _nodes.size());

  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < _nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < _nodes.size(); ++j) {
      if (_distance(i, j) > 0) {
        sum += _distance(i, j);
        ++count;
      }
    }
  }
  _structural_penalty = count > 0 ? sum / static_cast<double>(count) : 1.0;
}

const ConstraintSpec* ProblemInstance::find(Family family) const {
  for (const auto& c : _constraints) {
    if (c.family() == family) return &c;
  }
  return nullptr;
}

ProblemInstance ProblemInstance::with_constraints(
    std::vector<ConstraintSpec> constraints) const {
  return ProblemInstance(_nodes, std::move(constraints), _descriptor, _description);
}

// ---------------------------------------------------------------------------
// Solomon reader

SolomonData parse_solomon(std::string_view text) {
  SolomonData out;
  enum class Section { Preamble, Vehicle, Customer } section = Section::Preamble;
  bool have_vehicle = false;
  std::size_t line_no = 0;

  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    auto tok = fields(line);
    if (tok.empty()) continue;

    if (tok[0] == "VEHICLE") {
      section = Section::Vehicle;
      continue;
    }
    if (tok[0] == "CUSTOMER") {
      section = Section::Customer;
      continue;
    }
    if (!to_number(tok[0])) {
      // Column headers, or the instance name before any section.
      if (section == Section::Preamble && out.name.empty()) out.name = std::string(tok[0]);
      continue;
    }

    if (section == Section::Vehicle) {
      if (have_vehicle || tok.size() != 2) {
        throw ParseError("expected 'NUMBER CAPACITY' vehicle row", line_no);
      }
      auto number = to_number(tok[0]);
      auto capacity = to_number(tok[1]);
      if (!number || !capacity) throw ParseError("non-numeric vehicle row", line_no);
      out.vehicle_count = static_cast<int>(*number);
      out.capacity = *capacity;
      have_vehicle = true;
    } else if (section == Section::Customer) {
      if (tok.size() != 7) {
        throw ParseError(
            fmt::format("customer row has {} fields, expected 7", tok.size()), line_no);
      }
      std::array<double, 7> v{};
      for (std::size_t k = 0; k < 7; ++k) {
        auto num = to_number(tok[k]);
        if (!num) throw ParseError(fmt::format("field '{}' is not numeric", tok[k]), line_no);
        v[k] = *num;
      }
      Node node{static_cast<int>(v[0]), v[1], v[2], v[3], v[4], v[5], v[6]};
      if (node.id != static_cast<int>(out.nodes.size())) {
        if (out.nodes.empty()) {
          throw StructuralError(
              fmt::format("line {}: first customer row must be the depot (id 0)", line_no));
        }
        throw ParseError(fmt::format("expected id {}, found {}", out.nodes.size(), node.id),
                         line_no);
      }
      if (node.ready > node.due) throw ParseError("ready time after due date", line_no);
      out.nodes.push_back(node);
    } else {
      throw ParseError("numeric row outside VEHICLE/CUSTOMER sections", line_no);
    }
  }

  if (!have_vehicle) throw StructuralError("missing VEHICLE section");
  if (out.nodes.empty()) throw StructuralError("missing depot row");
  return out;
}

SolomonData read_solomon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw StructuralError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_solomon(buf.str());
}

std::vector<Node> truncate(std::span<const Node> nodes, std::size_t count) {
  if (count < 1) throw BoundsError("customer count must be at least 1");
  if (nodes.empty() || nodes.size() - 1 < count) {
    throw BoundsError(fmt::format("requested {} customers, only {} available", count,
                                  nodes.empty() ? 0 : nodes.size() - 1));
  }
  return {nodes.begin(), nodes.begin() + static_cast<std::ptrdiff_t>(count + 1)};
}

std::vector<Node> scale_time_windows(std::span<const Node> nodes, double divisor) {
  if (!(divisor > 0) || !std::isfinite(divisor)) {
    throw DomainError(fmt::format("time-window divisor must be positive, got {}", divisor));
  }
  std::vector<Node> out(nodes.begin(), nodes.end());
  for (auto& n : out) {
    if (n.id == 0) continue;
    n.ready /= divisor;
    n.due /= divisor;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Variant construction

VariantOverrides VariantOverrides::parse(std::string_view text) {
  VariantOverrides o;
  text = trim(text);
  if (text.empty()) return o;
  for (auto item : split(text, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("override '{}' is not key=value", item));
    }
    auto key = trim(item.substr(0, eq));
    auto value = trim(item.substr(eq + 1));
    if (key == "Q") {
      o.capacity = parse_number(value, key);
    } else if (key == "Lmax") {
      o.max_length = parse_number(value, key);
    } else if (key == "tw_div") {
      o.time_window_divisor = parse_number(value, key);
    } else if (key == "dyn_node") {
      o.dynamic_node = parse_int(value, key);
    } else if (key == "dyn_k") {
      o.dynamic_coefficient = parse_number(value, key);
    } else if (key == "pd") {
      std::vector<PickupDeliveryPair> pairs;
      for (auto p : split(value, '/')) {
        auto ids = split(p, ':');
        if (ids.size() != 2) throw ConfigError(fmt::format("pd pair '{}' must be a:b", p));
        pairs.push_back({parse_int(ids[0], key), parse_int(ids[1], key)});
      }
      o.pickup_delivery = std::move(pairs);
    } else if (key == "s") {
      std::vector<std::vector<int>> groups;
      for (auto g : split(value, '/')) {
        std::vector<int> ids;
        for (auto id : split(g, ':')) ids.push_back(parse_int(id, key));
        groups.push_back(std::move(ids));
      }
      o.same_vehicle = std::move(groups);
    } else if (key == "p") {
      std::vector<int> ranks;
      for (auto r : split(value, ':')) ranks.push_back(parse_int(r, key));
      o.priority_rank = std::move(ranks);
    } else {
      throw ConfigError(fmt::format("unknown override key '{}'", key));
    }
  }
  return o;
}

std::string describe_constraints(const std::vector<ConstraintSpec>& constraints) {
  const auto find = [&](Family f) -> const ConstraintSpec* {
    for (const auto& c : constraints) {
      if (c.family() == f) return &c;
    }
    return nullptr;
  };

  std::vector<std::string> sentences;
  if (auto c = find(Family::Capacity)) {
    sentences.push_back(fmt::format(
        "I need to make sure the total load on each route stays within {} units.",
        c->as<CapacityParams>().capacity));
  }
  if (auto c = find(Family::DynamicDemand)) {
    const auto& p = c->as<DynamicDemandParams>();
    sentences.push_back(fmt::format(
        "Specifically, for node [{}], its base demand is augmented by {} times the square "
        "root of the accumulated travel distance from the depot [{}] to that node.",
        p.node, p.coefficient, p.depot));
  }
  if (auto c = find(Family::DistanceLimit)) {
    sentences.push_back(fmt::format("I need to make sure each route is no longer than {} units.",
                                    c->as<DistanceLimitParams>().max_length));
  }
  if (find(Family::TimeWindows)) {
    sentences.push_back(
        "I need to make sure each customer is served within its time window.");
  }
  if (auto c = find(Family::PickupDelivery)) {
    const auto& pairs = c->as<PickupDeliveryParams>().pairs;
    std::vector<std::string> text;
    for (const auto& p : pairs) text.push_back(fmt::format("[{}, {}]", p.pickup, p.delivery));
    sentences.push_back(fmt::format(
        "I need to make sure each pickup node is visited before its paired delivery node on "
        "the same route, for pickup-delivery pairs {}.",
        fmt::join(text, ", ")));
  }
  if (auto c = find(Family::SameVehicle)) {
    for (const auto& group : c->as<SameVehicleParams>().groups) {
      sentences.push_back(fmt::format(
          "I need to make sure nodes [{}] are served by the same vehicle.", join_ids(group)));
    }
  }
  if (auto c = find(Family::Priority)) {
    const auto& rank = c->as<PriorityParams>().rank;
    std::string ranking;
    if (is_mod_ranking(rank, 3)) {
      ranking = "the rank of each node is its index mod 3";
    } else {
      std::vector<std::string> items;
      for (std::size_t i = 1; i < rank.size(); ++i) {
        items.push_back(fmt::format("{}: {}", i, rank[i]));
      }
      ranking = fmt::format("node ranks are [{}]", fmt::join(items, ", "));
    }
    sentences.push_back(fmt::format(
        "I need to make sure that within each route, nodes with a smaller priority rank are "
        "visited first, where {}.",
        ranking));
  }
  return fmt::format("{}", fmt::join(sentences, " "));
}

ProblemInstance build_variant(std::span<const Node> base,
                              const VariantDescriptor& descriptor,
                              const VariantOverrides& overrides) {
  if (base.size() < 2) throw StructuralError("variant needs a depot and at least one customer");

  const auto reject = [&](bool present, Flag flag, std::string_view key) {
    if (present && !descriptor.has(flag)) {
      throw ConfigError(fmt::format("override {} given but {} has no {} constraint", key,
                                    descriptor.name(), key));
    }
  };
  reject(overrides.capacity.has_value(), Flag::C, "Q");
  reject(overrides.max_length.has_value(), Flag::L, "Lmax");
  reject(overrides.time_window_divisor.has_value(), Flag::TW, "tw_div");
  reject(overrides.pickup_delivery.has_value(), Flag::PD, "pd");
  reject(overrides.same_vehicle.has_value(), Flag::S, "s");
  reject(overrides.priority_rank.has_value(), Flag::P, "p");
  if ((overrides.dynamic_node || overrides.dynamic_coefficient) && !descriptor.dynamic()) {
    throw ConfigError(
        fmt::format("dynamic-demand override given but {} is not dynamic", descriptor.name()));
  }

  std::vector<Node> nodes(base.begin(), base.end());
  const int n = static_cast<int>(nodes.size()) - 1;
  std::vector<ConstraintSpec> constraints;

  if (descriptor.has(Flag::C)) {
    constraints.push_back({CapacityParams{overrides.capacity.value_or(0.0)}});
  }
  if (descriptor.has(Flag::L)) {
    constraints.push_back({DistanceLimitParams{overrides.max_length.value_or(0.0)}});
  }
  if (descriptor.has(Flag::TW)) {
    nodes = scale_time_windows(nodes, overrides.time_window_divisor.value_or(10.0));
    TimeWindowsParams tw;
    for (const auto& node : nodes) {
      tw.windows.push_back({node.id, node.ready, node.due, node.service});
    }
    constraints.push_back({std::move(tw)});
  }
  if (descriptor.has(Flag::PD)) {
    PickupDeliveryParams pd;
    if (overrides.pickup_delivery) {
      pd.pairs = *overrides.pickup_delivery;
    } else {
      for (int k = 1; 2 * k <= n; ++k) pd.pairs.push_back({2 * k - 1, 2 * k});
    }
    constraints.push_back({std::move(pd)});
  }
  if (descriptor.has(Flag::S)) {
    SameVehicleParams sv;
    if (overrides.same_vehicle) {
      sv.groups = *overrides.same_vehicle;
    } else {
      std::vector<int> group;
      for (int id = 1; id <= std::min(n, 3); ++id) group.push_back(id);
      sv.groups.push_back(std::move(group));
    }
    constraints.push_back({std::move(sv)});
  }
  if (descriptor.has(Flag::P)) {
    PriorityParams pr;
    if (overrides.priority_rank) {
      pr.rank = *overrides.priority_rank;
      // Allow the depot's rank to be omitted.
      if (pr.rank.size() + 1 == nodes.size()) pr.rank.insert(pr.rank.begin(), 0);
    } else {
      pr.rank.resize(nodes.size());
      for (std::size_t i = 0; i < nodes.size(); ++i) pr.rank[i] = static_cast<int>(i % 3);
    }
    constraints.push_back({std::move(pr)});
  }
  if (descriptor.dynamic()) {
    DynamicDemandParams dd{overrides.dynamic_node.value_or(19),
                           overrides.dynamic_coefficient.value_or(5.0), 0};
    constraints.push_back({dd});
  }

  for (const auto& c : constraints) validate_constraint(c, nodes.size());
  std::string description = describe_constraints(constraints);
  return ProblemInstance(std::move(nodes), std::move(constraints), descriptor,
                         std::move(description));
}

}  // namespace routediag
