#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "routediag/evaluation.h"
#include "routediag/instance.h"

namespace routediag {

enum class SolverMode { multi_objective, baseline };

// Which dominating neighbour replaces the current plan in the Pareto
// local search when several qualify.
enum class DominatorChoice { min_crowding, max_crowding };

// Insertion criterion of the greedy repair.
enum class RepairRule {
  // Cheapest insertion by added route length.
  min_cost,
  // Lowest resulting violation, then cheapest.
  feasibility_first,
};

struct SolverConfig {
  std::size_t population = 10;
  std::size_t iterations = 100;
  // Wall-clock cap of one local-search call, seconds.
  double spls_timeout = 1.0;
  std::uint64_t seed = 0;
  SolverMode mode = SolverMode::multi_objective;
  double destroy_lo = 0.1;
  double destroy_hi = 0.3;
  double roulette_decay = 0.2;
  double weight_floor = 0.05;
  std::size_t string_cap = 6;
  DominatorChoice dominator_choice = DominatorChoice::min_crowding;
  RepairRule repair_rule = RepairRule::feasibility_first;

  // Throws ConfigError on an out-of-range field.
  void validate() const;
};

using Rng = std::mt19937_64;

// Independent stream per (seed, member, iteration).
Rng make_rng(std::uint64_t seed, std::uint64_t member, std::uint64_t iteration);

struct Solution {
  RoutePlan plan;
  ObjectiveVector objectives;
};

enum class DestroyOperator : std::size_t { random = 0, string = 1 };
inline constexpr std::size_t kDestroyOperatorCount = 2;

// Roulette-wheel statistics of the destroy operators.
class OperatorStats {
 public:
  OperatorStats();
  explicit OperatorStats(std::array<double, kDestroyOperatorCount> weights);

  DestroyOperator select(Rng& rng);
  // w <- (1 - decay) * w + decay * reward, floored at `floor`.
  void update(DestroyOperator op, bool success, double decay, double floor);

  double weight(DestroyOperator op) const { return _weights[index(op)]; }
  double probability(DestroyOperator op) const;
  std::size_t usage(DestroyOperator op) const { return _usage[index(op)]; }
  std::size_t successes(DestroyOperator op) const { return _success[index(op)]; }

 private:
  static std::size_t index(DestroyOperator op) { return static_cast<std::size_t>(op); }

  std::array<double, kDestroyOperatorCount> _weights;
  std::array<std::size_t, kDestroyOperatorCount> _usage{};
  std::array<std::size_t, kDestroyOperatorCount> _success{};
};

struct Population {
  std::vector<Solution> members;
  std::size_t generation = 0;
};

// Non-dominated set of everything offered to it, kept sorted by cost
// (violation therefore strictly decreasing). Points equal in objective
// space to a stored entry are rejected.
class Archive {
 public:
  // Returns true when the point was stored.
  bool offer(const ObjectiveVector& objectives, const RoutePlan& plan);

  const std::vector<Solution>& entries() const { return _entries; }
  std::size_t size() const { return _entries.size(); }
  double hypervolume(const ObjectiveVector& reference) const;

  // From here on every stored point adds its exclusive area w.r.t.
  // `reference` to tracked_hypervolume(), so the tracked value never
  // decreases.
  void track_hypervolume(const ObjectiveVector& reference);
  double tracked_hypervolume() const { return _tracked; }

 private:
  double exclusive_area(const ObjectiveVector& point) const;

  std::vector<Solution> _entries;
  std::optional<ObjectiveVector> _reference;
  double _tracked = 0.0;
};

Population initialize_population(const ProblemInstance& inst, const SolverConfig& cfg);

struct Removal {
  RoutePlan partial;
  std::vector<int> removed;
};

// Number of customers a destroy operator removes from an n-customer plan.
std::size_t removal_count(std::size_t customers, const SolverConfig& cfg, Rng& rng);

Removal destroy_random(const RoutePlan& plan, const SolverConfig& cfg, Rng& rng);
Removal destroy_string(const RoutePlan& plan, const ProblemInstance& inst,
                       const SolverConfig& cfg, Rng& rng);

// Removes `length` consecutive customers of the route holding `customer`,
// starting `offset` positions before it. Deterministic building block of
// destroy_string.
Removal remove_string(const RoutePlan& plan, int customer, std::size_t length,
                      std::size_t offset);

RoutePlan repair_greedy(RoutePlan partial, const std::vector<int>& removed,
                        const ProblemInstance& inst, RepairRule rule = RepairRule::min_cost);

// Preference of the single-objective baseline: feasible beats infeasible,
// feasible pairs compare by cost, infeasible pairs by violation then cost.
bool baseline_prefers(const ObjectiveVector& candidate, const ObjectiveVector& incumbent);

using Clock = std::chrono::steady_clock;

// One round of single-point Pareto local search: builds the 2-OPT, SWAP
// and SHIFT neighbours of every customer position and returns the
// selected dominating neighbour, or nothing when none dominates.
std::optional<Solution> spls_step(const Solution& current, const ProblemInstance& inst,
                                  const SolverConfig& cfg, Archive* archive = nullptr);

// Repeats spls_step until no neighbour dominates or the timeout expires.
Solution spls(Solution current, const ProblemInstance& inst, const SolverConfig& cfg,
              Archive* archive = nullptr);

// NSGA-II environmental selection. Returns `count` pool indices: whole
// fronts in rank order, the last front truncated by descending crowding
// distance, ties by pool index.
std::vector<std::size_t> nsga2_select(std::span<const ObjectiveVector> pool,
                                      std::size_t count);

Population population_update(const Population& parents, std::span<const Solution> children);

struct TraceEntry {
  std::size_t iteration = 0;
  std::size_t archive_size = 0;
  double archive_hv = 0.0;
  double elapsed_ms = 0.0;
  std::uint64_t population_hash = 0;
};

struct RunResult {
  std::vector<Solution> archive;
  Population final_population;
  std::vector<TraceEntry> trace;
  // Frozen at iteration 0: (2 * best initial cost, worst initial violation).
  ObjectiveVector hv_reference;
  OperatorStats operators;
};

RunResult run(const ProblemInstance& inst, const SolverConfig& cfg);

struct BaselineResult {
  Solution best;
  std::vector<TraceEntry> trace;
  ObjectiveVector hv_reference;
};

BaselineResult run_baseline(const ProblemInstance& inst, const SolverConfig& cfg);

std::uint64_t hash_solutions(std::span<const Solution> solutions);

}  // namespace routediag
