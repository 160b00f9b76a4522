#include "routediag/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "routediag/errors.h"
#include "routediag/pareto.h"

namespace routediag {

NormalizationBounds NormalizationBounds::from_fronts(
    std::span<const std::vector<ObjectiveVector>> fronts) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  NormalizationBounds b;
  b.ideal = {inf, inf};
  b.nadir = {-inf, -inf};
  for (const auto& front : fronts) {
    for (const auto& p : front) {
      b.ideal.cost = std::min(b.ideal.cost, p.cost);
      b.ideal.violation = std::min(b.ideal.violation, p.violation);
      b.nadir.cost = std::max(b.nadir.cost, p.cost);
      b.nadir.violation = std::max(b.nadir.violation, p.violation);
    }
  }
  if (b.ideal.cost > b.nadir.cost) throw DomainError("no points to derive bounds from");
  return b;
}

NormalizedPoints normalize(std::span<const ObjectiveVector> points,
                           const NormalizationBounds& bounds) {
  NormalizedPoints out;
  const double rc = bounds.nadir.cost - bounds.ideal.cost;
  const double rv = bounds.nadir.violation - bounds.ideal.violation;
  out.degenerate = !(rc > 0) || !(rv > 0);
  out.points.reserve(points.size());
  for (const auto& p : points) {
    out.points.push_back({rc > 0 ? (p.cost - bounds.ideal.cost) / rc : 0.0,
                          rv > 0 ? (p.violation - bounds.ideal.violation) / rv : 0.0});
  }
  return out;
}

double hypervolume_2d(std::span<const ObjectiveVector> points, const ObjectiveVector& reference) {
  std::vector<ObjectiveVector> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.cost != b.cost ? a.cost < b.cost : a.violation < b.violation;
  });
  double area = 0.0;
  double ceiling = reference.violation;
  for (const auto& p : sorted) {
    if (p.cost >= reference.cost) break;
    if (p.violation >= ceiling) continue;
    area += (reference.cost - p.cost) * (ceiling - p.violation);
    ceiling = p.violation;
  }
  return area;
}

double igd(std::span<const ObjectiveVector> approx,
           std::span<const ObjectiveVector> reference_set) {
  if (reference_set.empty()) throw DomainError("IGD needs a non-empty reference set");
  if (approx.empty()) return std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const auto& r : reference_set) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& a : approx) {
      nearest = std::min(nearest, std::hypot(a.cost - r.cost, a.violation - r.violation));
    }
    sum += nearest;
  }
  return sum / static_cast<double>(reference_set.size());
}

std::vector<ObjectiveVector> build_reference_set(
    std::span<const std::vector<ObjectiveVector>> fronts) {
  std::vector<ObjectiveVector> all;
  for (const auto& f : fronts) all.insert(all.end(), f.begin(), f.end());
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.cost != b.cost ? a.cost < b.cost : a.violation < b.violation;
  });
  all.erase(std::unique(all.begin(), all.end()), all.end());
  std::vector<ObjectiveVector> out;
  if (all.empty()) return out;
  const auto fronts_of_all = non_dominated_sort(all);
  for (std::size_t idx : fronts_of_all.front()) out.push_back(all[idx]);
  return out;
}

std::optional<double> asr(std::span<const SuggestionReport> reports) {
  if (reports.empty()) return std::nullopt;
  const auto ok = std::count_if(reports.begin(), reports.end(),
                                [](const auto& r) { return r.residual_violation == 0; });
  return static_cast<double>(ok) / static_cast<double>(reports.size());
}

}  // namespace routediag
