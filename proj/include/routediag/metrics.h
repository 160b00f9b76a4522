#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "routediag/diagnosis.h"
#include "routediag/evaluation.h"

namespace routediag {

struct NormalizationBounds {
  ObjectiveVector ideal;
  ObjectiveVector nadir;
  ObjectiveVector reference{1.1, 1.1};

  // Componentwise min and max over every point of every front.
  static NormalizationBounds from_fronts(std::span<const std::vector<ObjectiveVector>> fronts);
};

struct NormalizedPoints {
  std::vector<ObjectiveVector> points;
  // Set when an objective had zero range and was mapped to 0.
  bool degenerate = false;
};

// f' = (f - ideal) / (nadir - ideal) per objective.
NormalizedPoints normalize(std::span<const ObjectiveVector> points,
                           const NormalizationBounds& bounds);

// Area dominated by the points and bounded by `reference`.
double hypervolume_2d(std::span<const ObjectiveVector> points, const ObjectiveVector& reference);

// Mean distance from each reference point to its nearest approximation
// point; +infinity for an empty approximation. Throws DomainError on an
// empty reference set.
double igd(std::span<const ObjectiveVector> approx,
           std::span<const ObjectiveVector> reference_set);

// Non-dominated subset of the union without duplicates, sorted by cost.
std::vector<ObjectiveVector> build_reference_set(
    std::span<const std::vector<ObjectiveVector>> fronts);

// Share of reports with zero residual violation; nothing for no reports.
std::optional<double> asr(std::span<const SuggestionReport> reports);

struct MetricRow {
  std::string variant;
  std::string method;
  std::uint64_t seed = 0;
  double hv = 0.0;
  double igd = 0.0;
  // Absent when timing is disabled.
  std::optional<double> runtime_s;
  std::size_t front_size = 0;
};

}  // namespace routediag
