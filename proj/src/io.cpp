#include "routediag/io.h"

#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "routediag/errors.h"

namespace routediag {

namespace {

// Field-path aware accessors for schema validation.
class Reader {
 public:
  Reader(const Json& doc, std::string path) : _doc(doc), _path(std::move(path)) {}

  const Json& json() const { return _doc; }
  const std::string& path() const { return _path; }

  Reader field(const std::string& key) const {
    require_object();
    const auto it = _doc.find(key);
    if (it == _doc.end()) throw SchemaError(child(key), "missing field");
    return Reader(*it, child(key));
  }

  bool has(const std::string& key) const { return _doc.is_object() && _doc.contains(key); }

  Reader at(std::size_t i) const {
    return Reader(_doc[i], fmt::format("{}[{}]", _path, i));
  }

  std::size_t size() const {
    if (!_doc.is_array()) throw SchemaError(_path, "expected an array");
    return _doc.size();
  }

  double number() const {
    if (!_doc.is_number()) throw SchemaError(_path, "expected a number");
    return _doc.get<double>();
  }

  int integer() const {
    if (!_doc.is_number_integer()) throw SchemaError(_path, "expected an integer");
    return _doc.get<int>();
  }

  std::string string() const {
    if (!_doc.is_string()) throw SchemaError(_path, "expected a string");
    return _doc.get<std::string>();
  }

  std::vector<int> int_list() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(at(i).integer());
    return out;
  }

  void require_object() const {
    if (!_doc.is_object()) throw SchemaError(_path.empty() ? "$" : _path, "expected an object");
  }

 private:
  std::string child(const std::string& key) const {
    return _path.empty() ? key : _path + "." + key;
  }

  const Json& _doc;
  std::string _path;
};

}  // namespace

Json constraint_to_json(const ConstraintSpec& spec) {
  Json j;
  j["family"] = std::string(family_name(spec.family()));
  switch (spec.family()) {
    case Family::Capacity:
      j["Q"] = spec.as<CapacityParams>().capacity;
      break;
    case Family::DistanceLimit:
      j["Lmax"] = spec.as<DistanceLimitParams>().max_length;
      break;
    case Family::TimeWindows: {
      Json windows = Json::array();
      for (const auto& w : spec.as<TimeWindowsParams>().windows) {
        windows.push_back({{"node", w.node}, {"ready", w.ready}, {"due", w.due},
                           {"service", w.service}});
      }
      j["windows"] = std::move(windows);
      break;
    }
    case Family::PickupDelivery: {
      Json pairs = Json::array();
      for (const auto& p : spec.as<PickupDeliveryParams>().pairs) {
        pairs.push_back({p.pickup, p.delivery});
      }
      j["pairs"] = std::move(pairs);
      break;
    }
    case Family::SameVehicle:
      j["groups"] = spec.as<SameVehicleParams>().groups;
      break;
    case Family::Priority: {
      const auto& p = spec.as<PriorityParams>();
      j["rank"] = p.rank;
      Json exempt = Json::array();
      for (const auto& [a, b] : p.exempt) exempt.push_back({a, b});
      j["exempt"] = std::move(exempt);
      break;
    }
    case Family::DynamicDemand: {
      const auto& p = spec.as<DynamicDemandParams>();
      j["node"] = p.node;
      j["k"] = p.coefficient;
      j["depot"] = p.depot;
      break;
    }
  }
  return j;
}

namespace {

ConstraintSpec constraint_from_reader(const Reader& r) {
  r.require_object();
  const std::string name = r.field("family").string();
  const auto family = family_from_name(name);
  if (!family) throw SchemaError(r.path() + ".family", fmt::format("unknown family '{}'", name));
  switch (*family) {
    case Family::Capacity:
      return {CapacityParams{r.field("Q").number()}};
    case Family::DistanceLimit:
      return {DistanceLimitParams{r.field("Lmax").number()}};
    case Family::TimeWindows: {
      TimeWindowsParams p;
      const Reader windows = r.field("windows");
      for (std::size_t i = 0; i < windows.size(); ++i) {
        const Reader w = windows.at(i);
        p.windows.push_back({w.field("node").integer(), w.field("ready").number(),
                             w.field("due").number(), w.field("service").number()});
      }
      return {std::move(p)};
    }
    case Family::PickupDelivery: {
      PickupDeliveryParams p;
      const Reader pairs = r.field("pairs");
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto ids = pairs.at(i).int_list();
        if (ids.size() != 2) throw SchemaError(pairs.at(i).path(), "expected [pickup, delivery]");
        p.pairs.push_back({ids[0], ids[1]});
      }
      return {std::move(p)};
    }
    case Family::SameVehicle: {
      SameVehicleParams p;
      const Reader groups = r.field("groups");
      for (std::size_t i = 0; i < groups.size(); ++i) p.groups.push_back(groups.at(i).int_list());
      return {std::move(p)};
    }
    case Family::Priority: {
      PriorityParams p;
      p.rank = r.field("rank").int_list();
      if (r.has("exempt")) {
        const Reader exempt = r.field("exempt");
        for (std::size_t i = 0; i < exempt.size(); ++i) {
          const auto ids = exempt.at(i).int_list();
          if (ids.size() != 2) throw SchemaError(exempt.at(i).path(), "expected [before, after]");
          p.exempt.emplace_back(ids[0], ids[1]);
        }
      }
      return {std::move(p)};
    }
    case Family::DynamicDemand:
      return {DynamicDemandParams{r.field("node").integer(), r.field("k").number(),
                                  r.has("depot") ? r.field("depot").integer() : 0}};
  }
  throw SchemaError(r.path(), "unsupported family");
}

}  // namespace

ConstraintSpec constraint_from_json(const Json& doc, const std::string& path) {
  return constraint_from_reader(Reader(doc, path));
}

namespace {

std::uint8_t flag_of(Family family) {
  switch (family) {
    case Family::Capacity: return static_cast<std::uint8_t>(Flag::C);
    case Family::DistanceLimit: return static_cast<std::uint8_t>(Flag::L);
    case Family::TimeWindows: return static_cast<std::uint8_t>(Flag::TW);
    case Family::PickupDelivery: return static_cast<std::uint8_t>(Flag::PD);
    case Family::SameVehicle: return static_cast<std::uint8_t>(Flag::S);
    case Family::Priority: return static_cast<std::uint8_t>(Flag::P);
    case Family::DynamicDemand: return 0;
  }
  return 0;
}

}  // namespace

Json instance_to_json(const ProblemInstance& inst) {
  Json j;
  j["name"] = inst.name();
  Json nodes = Json::array();
  for (const auto& n : inst.nodes()) {
    nodes.push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}, {"demand", n.demand},
                     {"ready", n.ready}, {"due", n.due}, {"service", n.service}});
  }
  j["nodes"] = std::move(nodes);
  Json constraints = Json::array();
  for (const auto& c : inst.constraints()) constraints.push_back(constraint_to_json(c));
  j["constraints"] = std::move(constraints);
  j["description"] = inst.description();
  return j;
}

ProblemInstance instance_from_json(const Json& doc) {
  const Reader root(doc, "");
  root.require_object();
  const Reader name_field = root.field("name");
  const std::string name = name_field.string();
  const auto descriptor = VariantDescriptor::from_name(name);
  if (!descriptor) throw SchemaError("name", fmt::format("unknown variant '{}'", name));

  std::vector<Node> nodes;
  const Reader node_list = root.field("nodes");
  for (std::size_t i = 0; i < node_list.size(); ++i) {
    const Reader n = node_list.at(i);
    nodes.push_back({n.field("id").integer(), n.field("x").number(), n.field("y").number(),
                     n.field("demand").number(), n.field("ready").number(),
                     n.field("due").number(), n.field("service").number()});
  }

  std::vector<ConstraintSpec> constraints;
  std::uint8_t flags = 0;
  bool dynamic = false;
  const Reader list = root.field("constraints");
  for (std::size_t i = 0; i < list.size(); ++i) {
    constraints.push_back(constraint_from_reader(list.at(i)));
    flags |= flag_of(constraints.back().family());
    dynamic = dynamic || constraints.back().family() == Family::DynamicDemand;
  }
  if (flags != descriptor->flags() || dynamic != descriptor->dynamic()) {
    throw SchemaError("constraints",
                      fmt::format("constraint families do not match variant {}", name));
  }
  std::string description = root.has("description") ? root.field("description").string() : "";

  try {
    return ProblemInstance(std::move(nodes), std::move(constraints), *descriptor,
                           std::move(description));
  } catch (const StructuralError& e) {
    throw SchemaError("$", e.what());
  }
}

Json solution_to_json(const RoutePlan& plan, const ProblemInstance& inst) {
  const Evaluation ev = evaluate(plan, inst);
  Json j;
  j["routes"] = plan.routes;
  j["cost"] = ev.objectives.cost;
  j["violation"] = ev.objectives.violation;
  Json breakdown = Json::array();
  for (const auto& e : ev.breakdown.entries) {
    breakdown.push_back({{"family", std::string(family_name(e.family))},
                         {"subject", e.subject},
                         {"excess", e.excess}});
  }
  j["breakdown"] = std::move(breakdown);
  return j;
}

Json front_to_json(std::span<const Solution> front, const ProblemInstance& inst) {
  Json j = Json::array();
  for (const auto& s : front) j.push_back(solution_to_json(s.plan, inst));
  return j;
}

std::vector<RoutePlan> front_from_json(const Json& doc) {
  const Reader root(doc, "front");
  std::vector<RoutePlan> plans;
  for (std::size_t i = 0; i < root.size(); ++i) {
    const Reader routes = root.at(i).field("routes");
    RoutePlan plan;
    for (std::size_t r = 0; r < routes.size(); ++r) plan.routes.push_back(routes.at(r).int_list());
    plans.push_back(std::move(plan));
  }
  return plans;
}

Json trace_to_json(std::span<const TraceEntry> trace, bool timing) {
  Json j = Json::array();
  for (const auto& t : trace) {
    Json e;
    e["iter"] = t.iteration;
    e["archive_size"] = t.archive_size;
    e["archive_hv"] = t.archive_hv;
    e["elapsed_ms"] = timing ? Json(t.elapsed_ms) : Json(nullptr);
    e["population_hash"] = fmt::format("{:016x}", t.population_hash);
    j.push_back(std::move(e));
  }
  return j;
}

Json report_to_json(const SuggestionReport& report) {
  Json j;
  j["solution_index"] = report.solution_index;
  j["strategy"] = std::string(strategy_name(report.strategy));
  Json adjustments = Json::array();
  for (const auto& a : report.adjustments) {
    Json e;
    e["family"] = std::string(family_name(a.family));
    e["path"] = a.path();
    e["old"] = a.old_value;
    e["new"] = a.new_value;
    if (a.conflict) e["conflict"] = true;
    adjustments.push_back(std::move(e));
  }
  j["adjustments"] = std::move(adjustments);
  j["residual_violation"] = report.residual_violation;
  j["text"] = report.text;
  return j;
}

Json points_to_json(std::span<const ObjectiveVector> points) {
  Json j = Json::array();
  for (const auto& p : points) j.push_back({{"cost", p.cost}, {"violation", p.violation}});
  return j;
}

std::string dump(const Json& doc) { return doc.dump(2) + "\n"; }

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StructuralError(fmt::format("cannot read {}", path));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StructuralError(fmt::format("cannot write {}", path));
  out << content;
  if (!out) throw StructuralError(fmt::format("failed writing {}", path));
}

Json read_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ParseError(fmt::format("{}: {}", path, e.what()));
  }
}

}  // namespace routediag
