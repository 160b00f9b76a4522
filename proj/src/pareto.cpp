#include "routediag/pareto.h"

#include <algorithm>
#include <limits>
#include <numeric>

namespace routediag {

bool dominates(const ObjectiveVector& u, const ObjectiveVector& v) {
  return u.cost <= v.cost && u.violation <= v.violation &&
         (u.cost < v.cost || u.violation < v.violation);
}

std::vector<std::vector<std::size_t>> non_dominated_sort(
    std::span<const ObjectiveVector> points) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> dominator_count(n, 0);
  std::vector<std::vector<std::size_t>> fronts;

  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dominates(points[i], points[j])) {
        dominated[i].push_back(j);
        ++dominator_count[j];
      } else if (dominates(points[j], points[i])) {
        dominated[j].push_back(i);
        ++dominator_count[i];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (dominator_count[i] == 0) current.push_back(i);
  }
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t i : current) {
      for (std::size_t j : dominated[i]) {
        if (--dominator_count[j] == 0) next.push_back(j);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

std::vector<double> crowding_distance(std::span<const ObjectiveVector> front) {
  const std::size_t n = front.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> distance(n, 0.0);
  if (n <= 2) {
    std::fill(distance.begin(), distance.end(), inf);
    return distance;
  }

  std::vector<std::size_t> order(n);
  for (auto key : {&ObjectiveVector::cost, &ObjectiveVector::violation}) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return front[a].*key < front[b].*key;
    });
    distance[order.front()] = inf;
    distance[order.back()] = inf;
    const double range = front[order.back()].*key - front[order.front()].*key;
    if (range <= 0) continue;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      distance[order[k]] += (front[order[k + 1]].*key - front[order[k - 1]].*key) / range;
    }
  }
  return distance;
}

}  // namespace routediag
