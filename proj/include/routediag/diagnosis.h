#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "routediag/evaluation.h"
#include "routediag/instance.h"

namespace routediag {

enum class Strategy { dcr, ecp };

std::string_view strategy_name(Strategy strategy);
std::optional<Strategy> strategy_from_name(std::string_view name);

// Adjustable constraint parameters. `due` stands for every per-node due
// time; `due_shift` is a common later shift of all customer due times.
// The three waivers exempt one structural subject (a pair or group).
enum class Parameter {
  capacity,
  max_length,
  due,
  due_shift,
  pickup_delivery_waiver,
  same_vehicle_waiver,
  priority_waiver,
};

std::string_view parameter_name(Parameter p);
std::optional<Parameter> parameter_from_name(std::string_view name);
const std::vector<Parameter>& all_parameters();

// One parameter change. `name` and `indices` form the parameter path,
// e.g. ("due", {7}) -> "TimeWindows.due[7]". `weight` is the number of
// scalar parameters the change touches (the shift moves every customer
// window), used by the norms.
struct Adjustment {
  Family family;
  std::string name;
  std::vector<int> indices;
  double old_value = 0.0;
  double new_value = 0.0;
  double weight = 1.0;
  bool conflict = false;

  double delta() const { return new_value - old_value; }
  std::string path() const;

  friend bool operator==(const Adjustment&, const Adjustment&) = default;
};

// Inverse of Adjustment::path(): fills family, name and indices. Throws
// StructuralError on a malformed path.
Adjustment parse_path(std::string_view path);

struct SuggestionReport {
  std::size_t solution_index = 0;
  Strategy strategy = Strategy::dcr;
  std::vector<Adjustment> adjustments;
  std::string text;
  double residual_violation = 0.0;

  // Weighted L1 size of the adjustment set.
  double total_l1() const;
  double norm(double p) const;
};

struct DiagnosisConfig {
  Strategy strategy = Strategy::ecp;
  double p = 1.0;
  std::vector<Parameter> whitelist = all_parameters();

  // Throws ConfigError when p < 1 or the whitelist is empty.
  void validate() const;
  bool allows(Parameter parameter) const;
};

// Raw per-subject boundary values; not aggregated.
std::vector<Adjustment> dcr_adjustments(const RoutePlan& plan, const ProblemInstance& inst);

SuggestionReport diagnose_dcr(const RoutePlan& plan, const ProblemInstance& inst,
                              std::size_t solution_index = 0);

// Throws InfeasibleDiagnosisError when a violated family has no
// whitelisted parameter.
SuggestionReport diagnose_ecp(const RoutePlan& plan, const ProblemInstance& inst,
                              const DiagnosisConfig& cfg, std::size_t solution_index = 0);

SuggestionReport diagnose(const RoutePlan& plan, const ProblemInstance& inst,
                          const DiagnosisConfig& cfg, std::size_t solution_index = 0);

// Keeps the most demanding value per path (largest increase, smallest
// decrease). A path pulled in both directions keeps one of each, both
// flagged as conflicting. Output is sorted by family, name and indices.
std::vector<Adjustment> aggregate(std::vector<Adjustment> adjustments);

// Throws StructuralError when a path does not exist in the instance.
ProblemInstance apply_adjustments(const ProblemInstance& inst,
                                  const std::vector<Adjustment>& adjustments);

// Original description followed by one template sentence per adjustment.
std::string render_text(const SuggestionReport& report, const ProblemInstance& inst);

// Template sentence for one adjustment.
std::string render_sentence(const Adjustment& adjustment, const ProblemInstance& inst);

// Fixed-point rendering with at most two decimals and no trailing zeros.
std::string format_number(double value);

}  // namespace routediag
