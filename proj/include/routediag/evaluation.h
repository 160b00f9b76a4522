#pragma once

#include <string>
#include <vector>

#include "routediag/instance.h"

namespace routediag {

// Depot-anchored routes over customer ids. The depot is implicit at both
// ends of every route.
struct RoutePlan {
  std::vector<std::vector<int>> routes;

  std::size_t customer_count() const;
  friend bool operator==(const RoutePlan&, const RoutePlan&) = default;
};

// Throws EvaluationError unless every customer 1..customer_count appears
// exactly once, no route contains the depot and no route is empty.
void validate_plan(const RoutePlan& plan, std::size_t customer_count);

struct ObjectiveVector {
  double cost = 0.0;
  double violation = 0.0;
  friend bool operator==(const ObjectiveVector&, const ObjectiveVector&) = default;
};

struct ViolationEntry {
  Family family;
  std::string subject;
  double excess;
};

struct ViolationBreakdown {
  std::vector<ViolationEntry> entries;
  double total() const;
};

struct Evaluation {
  ObjectiveVector objectives;
  ViolationBreakdown breakdown;
};

// Per-route quantities shared by the scorer, the boolean checker and the
// diagnosis strategies. Values are computed in one fixed arithmetic order
// so all three agree bit for bit.
struct RouteStats {
  double length = 0.0;
  // Load including any dynamic-demand augmentation.
  double load = 0.0;
  // Arrival time at each position of the route (time-window semantics:
  // leave the depot at 0, wait when early, serve, drive).
  std::vector<double> arrival;
};

double route_length(const std::vector<int>& route, const DistanceMatrix& dist);
double route_cost(const RoutePlan& plan, const DistanceMatrix& dist);

std::vector<RouteStats> route_stats(const RoutePlan& plan, const ProblemInstance& inst);

// Load of a single route, honouring the instance's DynamicDemand spec.
double route_load(const std::vector<int>& route, const ProblemInstance& inst);

// Arrival times along a route under the instance's TimeWindows spec.
// Empty when the instance has no time windows.
std::vector<double> route_arrivals(const std::vector<int>& route,
                                   const ProblemInstance& inst);

// Full evaluation with an itemized breakdown. Scoring per family:
//   Capacity       max over routes of (load - Q), floored at 0
//   DistanceLimit  max over routes of (length - Lmax), floored at 0
//   TimeWindows    sum over customers of (arrival - due), floored at 0
//   PickupDelivery penalty per pair split across routes or out of order
//   SameVehicle    penalty * (distinct routes serving the group - 1)
//   Priority       penalty * inverted (higher rank first) pairs per route
// where penalty = inst.structural_penalty(). Customers missing from a
// partial plan are ignored by the structural families.
Evaluation evaluate(const RoutePlan& plan, const ProblemInstance& inst);

// Same numbers as evaluate().objectives without building the breakdown.
ObjectiveVector objectives(const RoutePlan& plan, const ProblemInstance& inst);

// Boolean check of one constraint, independent of the scorer's
// aggregation.
bool satisfies(const RoutePlan& plan, const ProblemInstance& inst,
               const ConstraintSpec& spec);
bool is_feasible(const RoutePlan& plan, const ProblemInstance& inst);

}  // namespace routediag
