#include "routediag/diagnosis.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <tuple>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "routediag/errors.h"

namespace routediag {

namespace {

constexpr std::string_view kParameterNames[] = {
    "capacity", "max_length", "due", "due_shift", "pickup_delivery_waiver",
    "same_vehicle_waiver", "priority_waiver",
};

Adjustment make(Family family, std::string name, std::vector<int> indices, double old_value,
                double new_value, double weight = 1.0) {
  return Adjustment{family, std::move(name), std::move(indices), old_value, new_value, weight,
                    false};
}

Adjustment waiver(Family family, std::vector<int> indices) {
  return make(family, "exempt", std::move(indices), 0.0, 1.0);
}

// Parameter that an adjustment changes, for whitelist checks.
Parameter parameter_of(const Adjustment& a) {
  switch (a.family) {
    case Family::Capacity: return Parameter::capacity;
    case Family::DistanceLimit: return Parameter::max_length;
    case Family::TimeWindows: return a.name == "due_shift" ? Parameter::due_shift : Parameter::due;
    case Family::PickupDelivery: return Parameter::pickup_delivery_waiver;
    case Family::SameVehicle: return Parameter::same_vehicle_waiver;
    case Family::Priority: return Parameter::priority_waiver;
    case Family::DynamicDemand: break;
  }
  throw UnsupportedConstraintError(
      fmt::format("no adjustable parameter for {}", family_name(a.family)));
}

struct Lateness {
  int node;
  double due;
  double arrival;
};

std::vector<Lateness> late_nodes(const RoutePlan& plan, const ProblemInstance& inst,
                                 const TimeWindowsParams& tw) {
  std::vector<Lateness> out;
  for (const auto& route : plan.routes) {
    const auto arrival = route_arrivals(route, inst);
    for (std::size_t p = 0; p < route.size(); ++p) {
      const int id = route[p];
      if (arrival[p] > tw.windows[id].due) out.push_back({id, tw.windows[id].due, arrival[p]});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.node < b.node; });
  return out;
}

double max_route_load(const RoutePlan& plan, const ProblemInstance& inst) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& r : plan.routes) worst = std::max(worst, route_load(r, inst));
  return worst;
}

double max_route_length(const RoutePlan& plan, const ProblemInstance& inst) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& r : plan.routes) worst = std::max(worst, route_length(r, inst.distance()));
  return worst;
}

// Structural waivers shared by both strategies.
void structural_waivers(const RoutePlan& plan, const ProblemInstance& inst,
                        const ConstraintSpec& spec, std::vector<Adjustment>& out) {
  std::vector<int> route_of(inst.nodes().size(), -1);
  std::vector<int> pos_of(inst.nodes().size(), -1);
  for (std::size_t r = 0; r < plan.routes.size(); ++r) {
    for (std::size_t p = 0; p < plan.routes[r].size(); ++p) {
      route_of[plan.routes[r][p]] = static_cast<int>(r);
      pos_of[plan.routes[r][p]] = static_cast<int>(p);
    }
  }
  switch (spec.family()) {
    case Family::PickupDelivery:
      for (const auto& pair : spec.as<PickupDeliveryParams>().pairs) {
        const int rp = route_of[pair.pickup];
        const int rd = route_of[pair.delivery];
        if (rp < 0 || rd < 0) continue;
        if (rp != rd || pos_of[pair.delivery] < pos_of[pair.pickup]) {
          out.push_back(waiver(Family::PickupDelivery, {pair.pickup, pair.delivery}));
        }
      }
      break;
    case Family::SameVehicle: {
      const auto& groups = spec.as<SameVehicleParams>().groups;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        int first = -1;
        bool split = false;
        for (int id : groups[g]) {
          const int r = route_of[id];
          if (r < 0) continue;
          if (first < 0) first = r;
          split = split || r != first;
        }
        if (split) out.push_back(waiver(Family::SameVehicle, {static_cast<int>(g)}));
      }
      break;
    }
    case Family::Priority: {
      const auto& params = spec.as<PriorityParams>();
      for (const auto& route : plan.routes) {
        for (std::size_t a = 0; a < route.size(); ++a) {
          for (std::size_t b = a + 1; b < route.size(); ++b) {
            const std::pair<int, int> key{route[a], route[b]};
            if (params.rank[key.first] > params.rank[key.second] &&
                std::find(params.exempt.begin(), params.exempt.end(), key) ==
                    params.exempt.end()) {
              out.push_back(waiver(Family::Priority, {key.first, key.second}));
            }
          }
        }
      }
      break;
    }
    default:
      break;
  }
}

// Smallest s >= s0 with due + s >= arrival in floating point for every
// node in `late`.
double cover_shift(const std::vector<Lateness>& late, double s) {
  for (const auto& l : late) {
    while (l.due + s < l.arrival) s = std::nextafter(s, std::numeric_limits<double>::infinity());
  }
  return s;
}

// Weighted L_p^p cost of a common shift s plus per-node top-ups.
double shift_cost(const std::vector<Lateness>& late, double m, double s, double p) {
  double total = m * std::pow(s, p);
  for (const auto& l : late) {
    const double rest = (l.arrival - l.due) - s;
    if (rest > 0) total += std::pow(rest, p);
  }
  return total;
}

// Optimal common shift when both the shift and per-node dues may move.
double best_shift(const std::vector<Lateness>& late, double m, double p) {
  if (late.empty()) return 0.0;
  double hi = 0.0;
  for (const auto& l : late) hi = std::max(hi, l.arrival - l.due);
  if (p == 1.0) {
    // Piecewise linear and convex: some breakpoint is optimal.
    std::vector<double> candidates{0.0};
    for (const auto& l : late) candidates.push_back(l.arrival - l.due);
    std::sort(candidates.begin(), candidates.end());
    double best = 0.0;
    double best_cost = shift_cost(late, m, 0.0, p);
    for (double s : candidates) {
      const double c = shift_cost(late, m, s, p);
      if (c < best_cost) {
        best_cost = c;
        best = s;
      }
    }
    return best;
  }
  double lo = 0.0;
  const double phi = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double a = hi - phi * (hi - lo);
    const double b = lo + phi * (hi - lo);
    if (shift_cost(late, m, a, p) <= shift_cost(late, m, b, p)) {
      hi = b;
    } else {
      lo = a;
    }
  }
  const double s = (lo + hi) / 2;
  return shift_cost(late, m, 0.0, p) <= shift_cost(late, m, s, p) ? 0.0 : s;
}

void ecp_time_windows(const std::vector<Lateness>& late, const ProblemInstance& inst,
                      const DiagnosisConfig& cfg, std::vector<Adjustment>& out) {
  const bool per_node = cfg.allows(Parameter::due);
  const bool shift = cfg.allows(Parameter::due_shift);
  const double m = static_cast<double>(inst.customer_count());
  double s = 0.0;
  if (shift && !per_node) {
    for (const auto& l : late) s = std::max(s, l.arrival - l.due);
  } else if (shift) {
    s = best_shift(late, m, cfg.p);
  }
  if (s > 0) {
    if (!per_node) s = cover_shift(late, s);
    out.push_back(make(Family::TimeWindows, "due_shift", {}, 0.0, s, m));
  }
  for (const auto& l : late) {
    if (l.due + s >= l.arrival) continue;
    // Final due is new + s; pick new so that the sum covers the arrival.
    double target = l.arrival - s;
    while (target + s < l.arrival) {
      target = std::nextafter(target, std::numeric_limits<double>::infinity());
    }
    out.push_back(make(Family::TimeWindows, "due", {l.node}, l.due, target));
  }
}

std::string join_indices(const std::vector<int>& indices) {
  return fmt::format("{}", fmt::join(indices, ","));
}

std::vector<int> parse_indices(std::string_view text) {
  std::vector<int> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto part = text.substr(0, comma);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc() || ptr != part.data() + part.size()) {
      throw StructuralError(fmt::format("bad index '{}' in parameter path", part));
    }
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

void finish(SuggestionReport& report, const RoutePlan& plan, const ProblemInstance& inst) {
  report.adjustments = aggregate(std::move(report.adjustments));
  report.residual_violation =
      objectives(plan, apply_adjustments(inst, report.adjustments)).violation;
  report.text = render_text(report, inst);
}

}  // namespace

std::string_view strategy_name(Strategy strategy) {
  return strategy == Strategy::dcr ? "DCR" : "ECP";
}

std::optional<Strategy> strategy_from_name(std::string_view name) {
  if (name == "DCR" || name == "dcr") return Strategy::dcr;
  if (name == "ECP" || name == "ecp") return Strategy::ecp;
  return std::nullopt;
}

std::string_view parameter_name(Parameter p) { return kParameterNames[static_cast<int>(p)]; }

std::optional<Parameter> parameter_from_name(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kParameterNames); ++i) {
    if (kParameterNames[i] == name) return static_cast<Parameter>(i);
  }
  return std::nullopt;
}

const std::vector<Parameter>& all_parameters() {
  static const std::vector<Parameter> all{
      Parameter::capacity,           Parameter::max_length,
      Parameter::due,                Parameter::due_shift,
      Parameter::pickup_delivery_waiver, Parameter::same_vehicle_waiver,
      Parameter::priority_waiver,
  };
  return all;
}

std::string Adjustment::path() const {
  std::string out = fmt::format("{}.{}", family_name(family), name);
  if (!indices.empty()) out += fmt::format("[{}]", join_indices(indices));
  return out;
}

Adjustment parse_path(std::string_view path) {
  const auto dot = path.find('.');
  if (dot == std::string_view::npos) {
    throw StructuralError(fmt::format("parameter path '{}' has no family", path));
  }
  const auto family = family_from_name(path.substr(0, dot));
  if (!family) throw StructuralError(fmt::format("unknown family in path '{}'", path));
  Adjustment a;
  a.family = *family;
  auto rest = path.substr(dot + 1);
  const auto open = rest.find('[');
  if (open != std::string_view::npos) {
    if (rest.back() != ']') throw StructuralError(fmt::format("malformed path '{}'", path));
    a.indices = parse_indices(rest.substr(open + 1, rest.size() - open - 2));
    rest = rest.substr(0, open);
  }
  a.name = std::string(rest);
  return a;
}

double SuggestionReport::total_l1() const { return norm(1.0); }

double SuggestionReport::norm(double p) const {
  double sum = 0.0;
  for (const auto& a : adjustments) sum += a.weight * std::pow(std::abs(a.delta()), p);
  return p == 1.0 ? sum : std::pow(sum, 1.0 / p);
}

void DiagnosisConfig::validate() const {
  if (!(p >= 1.0)) throw ConfigError("norm p must be at least 1");
  if (whitelist.empty()) throw ConfigError("parameter whitelist is empty");
}

bool DiagnosisConfig::allows(Parameter parameter) const {
  return std::find(whitelist.begin(), whitelist.end(), parameter) != whitelist.end();
}

std::vector<Adjustment> dcr_adjustments(const RoutePlan& plan, const ProblemInstance& inst) {
  std::vector<Adjustment> out;
  for (const auto& spec : inst.constraints()) {
    switch (spec.family()) {
      case Family::Capacity: {
        const double q = spec.as<CapacityParams>().capacity;
        for (const auto& route : plan.routes) {
          const double load = route_load(route, inst);
          if (load > q) out.push_back(make(Family::Capacity, "Q", {}, q, load));
        }
        break;
      }
      case Family::DistanceLimit: {
        const double lmax = spec.as<DistanceLimitParams>().max_length;
        for (const auto& route : plan.routes) {
          const double length = route_length(route, inst.distance());
          if (length > lmax) out.push_back(make(Family::DistanceLimit, "Lmax", {}, lmax, length));
        }
        break;
      }
      case Family::TimeWindows:
        for (const auto& l : late_nodes(plan, inst, spec.as<TimeWindowsParams>())) {
          out.push_back(make(Family::TimeWindows, "due", {l.node}, l.due, l.arrival));
        }
        break;
      case Family::PickupDelivery:
      case Family::SameVehicle:
      case Family::Priority:
        structural_waivers(plan, inst, spec, out);
        break;
      case Family::DynamicDemand:
        break;
      default:
        throw UnsupportedConstraintError("unsupported constraint family");
    }
  }
  return out;
}

SuggestionReport diagnose_dcr(const RoutePlan& plan, const ProblemInstance& inst,
                              std::size_t solution_index) {
  SuggestionReport report;
  report.solution_index = solution_index;
  report.strategy = Strategy::dcr;
  report.adjustments = dcr_adjustments(plan, inst);
  finish(report, plan, inst);
  return report;
}

SuggestionReport diagnose_ecp(const RoutePlan& plan, const ProblemInstance& inst,
                              const DiagnosisConfig& cfg, std::size_t solution_index) {
  cfg.validate();
  SuggestionReport report;
  report.solution_index = solution_index;
  report.strategy = Strategy::ecp;
  auto& out = report.adjustments;
  const auto require = [&](Family family, std::initializer_list<Parameter> options) {
    for (Parameter p : options) {
      if (cfg.allows(p)) return;
    }
    throw InfeasibleDiagnosisError(fmt::format(
        "no whitelisted parameter can repair the violated {} constraint", family_name(family)));
  };

  for (const auto& spec : inst.constraints()) {
    switch (spec.family()) {
      case Family::Capacity: {
        const double q = spec.as<CapacityParams>().capacity;
        const double load = max_route_load(plan, inst);
        if (load > q) {
          require(Family::Capacity, {Parameter::capacity});
          out.push_back(make(Family::Capacity, "Q", {}, q, load));
        }
        break;
      }
      case Family::DistanceLimit: {
        const double lmax = spec.as<DistanceLimitParams>().max_length;
        const double length = max_route_length(plan, inst);
        if (length > lmax) {
          require(Family::DistanceLimit, {Parameter::max_length});
          out.push_back(make(Family::DistanceLimit, "Lmax", {}, lmax, length));
        }
        break;
      }
      case Family::TimeWindows: {
        const auto late = late_nodes(plan, inst, spec.as<TimeWindowsParams>());
        if (late.empty()) break;
        require(Family::TimeWindows, {Parameter::due, Parameter::due_shift});
        ecp_time_windows(late, inst, cfg, out);
        break;
      }
      case Family::PickupDelivery:
      case Family::SameVehicle:
      case Family::Priority: {
        const std::size_t before = out.size();
        structural_waivers(plan, inst, spec, out);
        if (out.size() != before) {
          require(spec.family(), {parameter_of(out.back())});
        }
        break;
      }
      case Family::DynamicDemand:
        break;
      default:
        throw UnsupportedConstraintError("unsupported constraint family");
    }
  }
  finish(report, plan, inst);
  return report;
}

SuggestionReport diagnose(const RoutePlan& plan, const ProblemInstance& inst,
                          const DiagnosisConfig& cfg, std::size_t solution_index) {
  return cfg.strategy == Strategy::dcr ? diagnose_dcr(plan, inst, solution_index)
                                       : diagnose_ecp(plan, inst, cfg, solution_index);
}

std::vector<Adjustment> aggregate(std::vector<Adjustment> adjustments) {
  using Key = std::tuple<Family, std::string, std::vector<int>>;
  struct Extremes {
    std::optional<Adjustment> up;
    std::optional<Adjustment> down;
  };
  std::map<Key, Extremes> groups;
  for (auto& a : adjustments) {
    auto& g = groups[Key{a.family, a.name, a.indices}];
    a.conflict = false;
    if (a.delta() >= 0) {
      if (!g.up || a.new_value > g.up->new_value) g.up = a;
    } else {
      if (!g.down || a.new_value < g.down->new_value) g.down = a;
    }
  }
  std::vector<Adjustment> out;
  for (auto& [key, g] : groups) {
    const bool conflict = g.up && g.down;
    for (auto* a : {&g.up, &g.down}) {
      if (!*a) continue;
      (*a)->conflict = conflict;
      out.push_back(std::move(**a));
    }
  }
  return out;
}

ProblemInstance apply_adjustments(const ProblemInstance& inst,
                                  const std::vector<Adjustment>& adjustments) {
  if (adjustments.empty()) return inst;
  auto constraints = inst.constraints();
  const auto find = [&](const Adjustment& a) -> ConstraintSpec& {
    for (auto& spec : constraints) {
      if (spec.family() == a.family) return spec;
    }
    throw StructuralError(
        fmt::format("parameter path {} not found: no {} constraint", a.path(),
                    family_name(a.family)));
  };
  const auto missing = [](const Adjustment& a) {
    return StructuralError(fmt::format("parameter path {} not found", a.path()));
  };

  double shift = 0.0;
  std::vector<int> dropped_groups;
  std::vector<PickupDeliveryPair> dropped_pairs;
  for (const auto& a : adjustments) {
    auto& spec = find(a);
    switch (a.family) {
      case Family::Capacity:
        if (a.name != "Q" || !a.indices.empty()) throw missing(a);
        spec.as<CapacityParams>().capacity = a.new_value;
        break;
      case Family::DistanceLimit:
        if (a.name != "Lmax" || !a.indices.empty()) throw missing(a);
        spec.as<DistanceLimitParams>().max_length = a.new_value;
        break;
      case Family::TimeWindows: {
        auto& windows = spec.as<TimeWindowsParams>().windows;
        if (a.name == "due_shift" && a.indices.empty()) {
          shift += a.delta();
        } else if (a.name == "due" && a.indices.size() == 1 && a.indices[0] > 0 &&
                   static_cast<std::size_t>(a.indices[0]) < windows.size()) {
          windows[a.indices[0]].due = a.new_value;
        } else {
          throw missing(a);
        }
        break;
      }
      case Family::PickupDelivery: {
        const auto& pairs = spec.as<PickupDeliveryParams>().pairs;
        if (a.name != "exempt" || a.indices.size() != 2) throw missing(a);
        const PickupDeliveryPair pair{a.indices[0], a.indices[1]};
        if (std::find(pairs.begin(), pairs.end(), pair) == pairs.end()) throw missing(a);
        if (a.new_value != 0) dropped_pairs.push_back(pair);
        break;
      }
      case Family::SameVehicle: {
        const auto& groups = spec.as<SameVehicleParams>().groups;
        if (a.name != "exempt" || a.indices.size() != 1 || a.indices[0] < 0 ||
            static_cast<std::size_t>(a.indices[0]) >= groups.size()) {
          throw missing(a);
        }
        if (a.new_value != 0) dropped_groups.push_back(a.indices[0]);
        break;
      }
      case Family::Priority: {
        auto& params = spec.as<PriorityParams>();
        if (a.name != "exempt" || a.indices.size() != 2) throw missing(a);
        for (int id : a.indices) {
          if (id < 0 || static_cast<std::size_t>(id) >= params.rank.size()) throw missing(a);
        }
        const std::pair<int, int> key{a.indices[0], a.indices[1]};
        if (a.new_value != 0 &&
            std::find(params.exempt.begin(), params.exempt.end(), key) == params.exempt.end()) {
          params.exempt.push_back(key);
        }
        break;
      }
      case Family::DynamicDemand:
        throw missing(a);
    }
  }

  for (auto& spec : constraints) {
    switch (spec.family()) {
      case Family::TimeWindows:
        if (shift != 0) {
          auto& windows = spec.as<TimeWindowsParams>().windows;
          for (std::size_t i = 1; i < windows.size(); ++i) windows[i].due += shift;
        }
        break;
      case Family::PickupDelivery:
        std::erase_if(spec.as<PickupDeliveryParams>().pairs, [&](const auto& pair) {
          return std::find(dropped_pairs.begin(), dropped_pairs.end(), pair) !=
                 dropped_pairs.end();
        });
        break;
      case Family::SameVehicle: {
        auto& groups = spec.as<SameVehicleParams>().groups;
        std::sort(dropped_groups.begin(), dropped_groups.end(), std::greater<>());
        dropped_groups.erase(std::unique(dropped_groups.begin(), dropped_groups.end()),
                             dropped_groups.end());
        for (int g : dropped_groups) groups.erase(groups.begin() + g);
        break;
      }
      default:
        break;
    }
  }
  return inst.with_constraints(std::move(constraints));
}

std::string format_number(double value) {
  std::string s = fmt::format("{:.2f}", value);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  if (s == "-0") s = "0";
  return s;
}

std::string render_sentence(const Adjustment& a, const ProblemInstance& inst) {
  const std::string path = a.path();
  const std::string from = format_number(a.old_value);
  const std::string to = format_number(a.new_value);
  std::string text;
  switch (a.family) {
    case Family::Capacity:
      text = fmt::format("Relax the vehicle capacity ({}) from {} to {} units.", path, from, to);
      break;
    case Family::DistanceLimit:
      text = fmt::format("Relax the maximum route length ({}) from {} to {} units.", path, from,
                         to);
      break;
    case Family::TimeWindows:
      if (a.name == "due_shift") {
        text = fmt::format("Shift every customer due time ({}) later by {} units.", path,
                           format_number(a.delta()));
      } else {
        text = fmt::format("Extend the due time of node {} ({}) from {} to {}.", a.indices[0],
                           path, from, to);
      }
      break;
    case Family::PickupDelivery:
      text = fmt::format(
          "Waive the pickup-delivery requirement ({}) for pickup {} and delivery {}.", path,
          a.indices[0], a.indices[1]);
      break;
    case Family::SameVehicle: {
      std::string members;
      if (const auto* spec = inst.find(Family::SameVehicle)) {
        const auto& groups = spec->as<SameVehicleParams>().groups;
        const auto g = static_cast<std::size_t>(a.indices[0]);
        if (g < groups.size()) members = fmt::format(" [{}]", fmt::join(groups[g], ", "));
      }
      text = fmt::format("Allow the nodes{} ({}) to be served by different vehicles.", members,
                         path);
      break;
    }
    case Family::Priority:
      text = fmt::format("Allow node {} to be visited before node {} ({}).", a.indices[0],
                         a.indices[1], path);
      break;
    case Family::DynamicDemand:
      text = fmt::format("Adjust {} from {} to {}.", path, from, to);
      break;
  }
  if (a.conflict) text.insert(text.size() - 1, " (conflicts with another requirement)");
  return text;
}

std::string render_text(const SuggestionReport& report, const ProblemInstance& inst) {
  std::string text = inst.description();
  for (const auto& a : report.adjustments) {
    if (!text.empty()) text += ' ';
    text += render_sentence(a, inst);
  }
  return text;
}

}  // namespace routediag
