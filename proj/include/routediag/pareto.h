#pragma once

#include <span>
#include <vector>

#include "routediag/evaluation.h"

namespace routediag {

// Minimization dominance: u is no worse everywhere and strictly better
// somewhere.
bool dominates(const ObjectiveVector& u, const ObjectiveVector& v);

// Fronts of index lists; front 0 is the non-dominated set. Indices inside
// a front are ascending.
std::vector<std::vector<std::size_t>> non_dominated_sort(
    std::span<const ObjectiveVector> points);

// NSGA-II crowding distance of each point of a front. The first and last
// point along every objective (ties broken by position in `front`) get
// +infinity; an objective whose range is zero adds nothing to interior
// points.
std::vector<double> crowding_distance(std::span<const ObjectiveVector> front);

}  // namespace routediag
