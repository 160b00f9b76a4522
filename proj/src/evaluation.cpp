#include "routediag/evaluation.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "routediag/errors.h"

namespace routediag {

namespace {

// Route index and position of every node in a (possibly partial) plan.
struct Locator {
  std::vector<int> route_of;
  std::vector<int> pos_of;

  void build(const RoutePlan& plan, std::size_t node_count) {
    route_of.assign(node_count, -1);
    pos_of.assign(node_count, -1);
    for (std::size_t r = 0; r < plan.routes.size(); ++r) {
      const auto& route = plan.routes[r];
      for (std::size_t p = 0; p < route.size(); ++p) {
        const int id = route[p];
        if (id <= 0 || static_cast<std::size_t>(id) >= node_count) {
          throw EvaluationError(fmt::format("route {} contains invalid node id {}", r, id));
        }
        route_of[id] = static_cast<int>(r);
        pos_of[id] = static_cast<int>(p);
      }
    }
  }
};

bool is_exempt(const PriorityParams& p, int before, int after) {
  return std::find(p.exempt.begin(), p.exempt.end(), std::pair{before, after}) !=
         p.exempt.end();
}

int priority_inversions(const std::vector<int>& route, const PriorityParams& p) {
  int count = 0;
  for (std::size_t a = 0; a < route.size(); ++a) {
    for (std::size_t b = a + 1; b < route.size(); ++b) {
      if (p.rank[route[a]] > p.rank[route[b]] && !is_exempt(p, route[a], route[b])) {
        ++count;
      }
    }
  }
  return count;
}

int distinct_routes(const std::vector<int>& group, const Locator& loc) {
  int count = 0;
  for (std::size_t i = 0; i < group.size(); ++i) {
    const int r = loc.route_of[group[i]];
    if (r < 0) continue;
    bool seen = false;
    for (std::size_t j = 0; j < i; ++j) seen = seen || loc.route_of[group[j]] == r;
    if (!seen) ++count;
  }
  return count;
}

bool pair_violated(const PickupDeliveryPair& pair, const Locator& loc) {
  const int rp = loc.route_of[pair.pickup];
  const int rd = loc.route_of[pair.delivery];
  if (rp < 0 || rd < 0) return false;
  return rp != rd || loc.pos_of[pair.delivery] < loc.pos_of[pair.pickup];
}

// Single scoring pass. `sink(family, subject_fn, excess)` sees every
// positive contribution in emission order.
template <typename Sink>
double score(const RoutePlan& plan, const ProblemInstance& inst, Sink&& sink) {
  thread_local Locator loc;
  loc.build(plan, inst.nodes().size());

  double total = 0.0;
  const auto emit = [&](Family family, auto&& subject, double excess) {
    if (excess > 0) {
      total += excess;
      sink(family, subject, excess);
    }
  };
  const double penalty = inst.structural_penalty();

  for (const auto& spec : inst.constraints()) {
    switch (spec.family()) {
      case Family::Capacity: {
        const double q = spec.as<CapacityParams>().capacity;
        double worst = 0.0;
        std::size_t worst_route = 0;
        for (std::size_t r = 0; r < plan.routes.size(); ++r) {
          const double excess = route_load(plan.routes[r], inst) - q;
          if (excess > worst) {
            worst = excess;
            worst_route = r;
          }
        }
        emit(Family::Capacity, [&] { return fmt::format("route {}", worst_route); }, worst);
        break;
      }
      case Family::DistanceLimit: {
        const double lmax = spec.as<DistanceLimitParams>().max_length;
        double worst = 0.0;
        std::size_t worst_route = 0;
        for (std::size_t r = 0; r < plan.routes.size(); ++r) {
          const double excess = route_length(plan.routes[r], inst.distance()) - lmax;
          if (excess > worst) {
            worst = excess;
            worst_route = r;
          }
        }
        emit(Family::DistanceLimit, [&] { return fmt::format("route {}", worst_route); },
             worst);
        break;
      }
      case Family::TimeWindows: {
        const auto& windows = spec.as<TimeWindowsParams>().windows;
        const auto& dist = inst.distance();
        for (const auto& route : plan.routes) {
          // Same recurrence as route_arrivals, without the allocation.
          double departure = 0.0;
          int prev = 0;
          for (const int id : route) {
            const double arrival = departure + dist(prev, id);
            departure = std::max(arrival, windows[id].ready) + windows[id].service;
            prev = id;
            emit(Family::TimeWindows, [&] { return fmt::format("node {}", id); },
                 arrival - windows[id].due);
          }
        }
        break;
      }
      case Family::PickupDelivery: {
        for (const auto& pair : spec.as<PickupDeliveryParams>().pairs) {
          if (pair_violated(pair, loc)) {
            emit(Family::PickupDelivery,
                 [&] { return fmt::format("pair ({}, {})", pair.pickup, pair.delivery); },
                 penalty);
          }
        }
        break;
      }
      case Family::SameVehicle: {
        const auto& groups = spec.as<SameVehicleParams>().groups;
        for (std::size_t g = 0; g < groups.size(); ++g) {
          const int routes = distinct_routes(groups[g], loc);
          if (routes > 1) {
            emit(Family::SameVehicle, [&] { return fmt::format("group {}", g); },
                 penalty * (routes - 1));
          }
        }
        break;
      }
      case Family::Priority: {
        const auto& params = spec.as<PriorityParams>();
        for (std::size_t r = 0; r < plan.routes.size(); ++r) {
          const int inversions = priority_inversions(plan.routes[r], params);
          if (inversions > 0) {
            emit(Family::Priority, [&] { return fmt::format("route {}", r); },
                 penalty * inversions);
          }
        }
        break;
      }
      case Family::DynamicDemand:
        // Folded into the capacity load.
        break;
    }
  }
  return total;
}

}  // namespace

std::size_t RoutePlan::customer_count() const {
  std::size_t n = 0;
  for (const auto& r : routes) n += r.size();
  return n;
}

void validate_plan(const RoutePlan& plan, std::size_t customer_count) {
  std::vector<int> seen(customer_count + 1, 0);
  for (std::size_t r = 0; r < plan.routes.size(); ++r) {
    const auto& route = plan.routes[r];
    if (route.empty()) throw EvaluationError(fmt::format("route {} is empty", r));
    for (int id : route) {
      if (id == 0) throw EvaluationError(fmt::format("route {} contains the depot", r));
      if (id < 0 || static_cast<std::size_t>(id) > customer_count) {
        throw EvaluationError(fmt::format("route {} contains unknown node {}", r, id));
      }
      if (seen[id]++) throw EvaluationError(fmt::format("customer {} visited twice", id));
    }
  }
  for (std::size_t id = 1; id <= customer_count; ++id) {
    if (!seen[id]) throw EvaluationError(fmt::format("customer {} is not visited", id));
  }
}

double ViolationBreakdown::total() const {
  double sum = 0.0;
  for (const auto& e : entries) sum += e.excess;
  return sum;
}

double route_length(const std::vector<int>& route, const DistanceMatrix& dist) {
  if (route.empty()) return 0.0;
  const std::size_t n = dist.size();
  double length = 0.0;
  int prev = 0;
  for (int id : route) {
    if (id < 0 || static_cast<std::size_t>(id) >= n) {
      throw EvaluationError(fmt::format("unknown node id {}", id));
    }
    length += dist(prev, id);
    prev = id;
  }
  return length + dist(prev, 0);
}

double route_cost(const RoutePlan& plan, const DistanceMatrix& dist) {
  double total = 0.0;
  for (const auto& route : plan.routes) total += route_length(route, dist);
  return total;
}

double route_load(const std::vector<int>& route, const ProblemInstance& inst) {
  const auto& nodes = inst.nodes();
  const ConstraintSpec* dyn = inst.find(Family::DynamicDemand);
  double load = 0.0;
  if (dyn == nullptr) {
    for (int id : route) load += nodes[id].demand;
    return load;
  }
  const auto& p = dyn->as<DynamicDemandParams>();
  const auto& dist = inst.distance();
  double travelled = 0.0;
  int prev = p.depot;
  for (int id : route) {
    travelled += dist(prev, id);
    prev = id;
    double demand = nodes[id].demand;
    if (id == p.node) demand += p.coefficient * std::sqrt(travelled);
    load += demand;
  }
  return load;
}

std::vector<double> route_arrivals(const std::vector<int>& route,
                                   const ProblemInstance& inst) {
  const ConstraintSpec* tw = inst.find(Family::TimeWindows);
  if (tw == nullptr) return {};
  const auto& windows = tw->as<TimeWindowsParams>().windows;
  const auto& dist = inst.distance();
  std::vector<double> arrival(route.size());
  double departure = 0.0;
  int prev = 0;
  for (std::size_t p = 0; p < route.size(); ++p) {
    const int id = route[p];
    arrival[p] = departure + dist(prev, id);
    departure = std::max(arrival[p], windows[id].ready) + windows[id].service;
    prev = id;
  }
  return arrival;
}

std::vector<RouteStats> route_stats(const RoutePlan& plan, const ProblemInstance& inst) {
  std::vector<RouteStats> out;
  out.reserve(plan.routes.size());
  for (const auto& route : plan.routes) {
    out.push_back({route_length(route, inst.distance()), route_load(route, inst),
                   route_arrivals(route, inst)});
  }
  return out;
}

Evaluation evaluate(const RoutePlan& plan, const ProblemInstance& inst) {
  Evaluation ev;
  ev.objectives.cost = route_cost(plan, inst.distance());
  ev.objectives.violation =
      score(plan, inst, [&](Family family, auto&& subject, double excess) {
        ev.breakdown.entries.push_back({family, subject(), excess});
      });
  return ev;
}

ObjectiveVector objectives(const RoutePlan& plan, const ProblemInstance& inst) {
  return {route_cost(plan, inst.distance()),
          score(plan, inst, [](Family, auto&&, double) {})};
}

bool satisfies(const RoutePlan& plan, const ProblemInstance& inst,
               const ConstraintSpec& spec) {
  switch (spec.family()) {
    case Family::Capacity: {
      const double q = spec.as<CapacityParams>().capacity;
      return std::all_of(plan.routes.begin(), plan.routes.end(),
                         [&](const auto& r) { return route_load(r, inst) <= q; });
    }
    case Family::DistanceLimit: {
      const double lmax = spec.as<DistanceLimitParams>().max_length;
      return std::all_of(plan.routes.begin(), plan.routes.end(), [&](const auto& r) {
        return route_length(r, inst.distance()) <= lmax;
      });
    }
    case Family::TimeWindows: {
      const auto& windows = spec.as<TimeWindowsParams>().windows;
      for (const auto& route : plan.routes) {
        const auto arrival = route_arrivals(route, inst);
        for (std::size_t p = 0; p < route.size(); ++p) {
          if (arrival[p] > windows[route[p]].due) return false;
        }
      }
      return true;
    }
    case Family::PickupDelivery: {
      Locator loc;
      loc.build(plan, inst.nodes().size());
      const auto& pairs = spec.as<PickupDeliveryParams>().pairs;
      return std::none_of(pairs.begin(), pairs.end(),
                          [&](const auto& pair) { return pair_violated(pair, loc); });
    }
    case Family::SameVehicle: {
      Locator loc;
      loc.build(plan, inst.nodes().size());
      const auto& groups = spec.as<SameVehicleParams>().groups;
      return std::all_of(groups.begin(), groups.end(),
                         [&](const auto& g) { return distinct_routes(g, loc) <= 1; });
    }
    case Family::Priority: {
      const auto& params = spec.as<PriorityParams>();
      return std::all_of(plan.routes.begin(), plan.routes.end(), [&](const auto& r) {
        return priority_inversions(r, params) == 0;
      });
    }
    case Family::DynamicDemand:
      return true;
  }
  return true;
}

bool is_feasible(const RoutePlan& plan, const ProblemInstance& inst) {
  return std::all_of(inst.constraints().begin(), inst.constraints().end(),
                     [&](const auto& spec) { return satisfies(plan, inst, spec); });
}

}  // namespace routediag
