#include "routediag/solver.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "routediag/errors.h"
#include "routediag/pareto.h"

namespace routediag {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void compact(RoutePlan& plan) {
  std::erase_if(plan.routes, [](const auto& r) { return r.empty(); });
}

// Index of the best entry by NSGA-II crowded comparison: lowest front,
// then the crowding preference, then index.
std::size_t pick_ranked(std::span<const ObjectiveVector> points, bool prefer_max_crowding) {
  const auto fronts = non_dominated_sort(points);
  const auto& front = fronts.front();
  std::vector<ObjectiveVector> members;
  members.reserve(front.size());
  for (std::size_t i : front) members.push_back(points[i]);
  const auto crowding = crowding_distance(members);
  std::size_t best = 0;
  for (std::size_t k = 1; k < front.size(); ++k) {
    const bool better = prefer_max_crowding ? crowding[k] > crowding[best]
                                            : crowding[k] < crowding[best];
    if (better) best = k;
  }
  return front[best];
}

struct Locations {
  std::vector<int> route_of;
  std::vector<int> pos_of;

  explicit Locations(const RoutePlan& plan, std::size_t nodes)
      : route_of(nodes, -1), pos_of(nodes, -1) {
    for (std::size_t r = 0; r < plan.routes.size(); ++r) {
      for (std::size_t p = 0; p < plan.routes[r].size(); ++p) {
        route_of[plan.routes[r][p]] = static_cast<int>(r);
        pos_of[plan.routes[r][p]] = static_cast<int>(p);
      }
    }
  }
};

Removal remove_ids(const RoutePlan& plan, std::vector<int> removed) {
  std::vector<char> gone;
  for (int id : removed) {
    if (static_cast<std::size_t>(id) >= gone.size()) gone.resize(id + 1, 0);
    gone[id] = 1;
  }
  Removal out;
  out.removed = std::move(removed);
  for (const auto& route : plan.routes) {
    std::vector<int> kept;
    for (int id : route) {
      if (static_cast<std::size_t>(id) >= gone.size() || !gone[id]) kept.push_back(id);
    }
    if (!kept.empty()) out.partial.routes.push_back(std::move(kept));
  }
  return out;
}

// Neighbourhood move applied in place on a working plan and undone after
// evaluation. Empty routes may appear transiently.
struct Move {
  enum Kind { two_opt, swap, shift } kind;
  std::size_t r1, p1, r2, p2;
  double delta;
};

void apply(RoutePlan& plan, const Move& m) {
  switch (m.kind) {
    case Move::two_opt: {
      auto& route = plan.routes[m.r1];
      std::reverse(route.begin() + m.p1, route.begin() + m.p2 + 1);
      break;
    }
    case Move::swap:
      std::swap(plan.routes[m.r1][m.p1], plan.routes[m.r2][m.p2]);
      break;
    case Move::shift: {
      const int id = plan.routes[m.r1][m.p1];
      plan.routes[m.r1].erase(plan.routes[m.r1].begin() + m.p1);
      if (m.r2 == plan.routes.size()) {
        plan.routes.push_back({id});
      } else {
        plan.routes[m.r2].insert(plan.routes[m.r2].begin() + m.p2, id);
      }
      break;
    }
  }
}

void undo(RoutePlan& plan, const Move& m, bool new_route) {
  switch (m.kind) {
    case Move::two_opt:
    case Move::swap:
      apply(plan, m);
      break;
    case Move::shift: {
      int id;
      if (new_route) {
        id = plan.routes.back().front();
        plan.routes.pop_back();
      } else {
        id = plan.routes[m.r2][m.p2];
        plan.routes[m.r2].erase(plan.routes[m.r2].begin() + m.p2);
      }
      plan.routes[m.r1].insert(plan.routes[m.r1].begin() + m.p1, id);
      break;
    }
  }
}

// Calls visit(move) for every 2-OPT, SWAP and SHIFT variant of the node at
// (r, p), grouped by operator. `group_end(op)` closes each group.
template <typename Visit, typename End>
void neighbours(const RoutePlan& plan, const DistanceMatrix& d, std::size_t r, std::size_t p,
                Visit&& visit, End&& group_end) {
  const auto& route = plan.routes[r];
  const std::size_t len = route.size();
  const int a = route[p];
  const int prev = p == 0 ? 0 : route[p - 1];
  const int next = p + 1 == len ? 0 : route[p + 1];

  for (std::size_t q = p + 1; q < len; ++q) {
    const int after = q + 1 == len ? 0 : route[q + 1];
    const double delta = d(prev, route[q]) + d(a, after) - d(prev, a) - d(route[q], after);
    visit(Move{Move::two_opt, r, p, r, q, delta});
  }
  group_end(Move::two_opt);

  const double out_a = d(prev, a) + d(a, next);
  for (std::size_t r2 = 0; r2 < plan.routes.size(); ++r2) {
    if (r2 == r) continue;
    const auto& other = plan.routes[r2];
    for (std::size_t p2 = 0; p2 < other.size(); ++p2) {
      const int b = other[p2];
      const int bprev = p2 == 0 ? 0 : other[p2 - 1];
      const int bnext = p2 + 1 == other.size() ? 0 : other[p2 + 1];
      const double delta = d(prev, b) + d(b, next) - out_a + d(bprev, a) + d(a, bnext) -
                           d(bprev, b) - d(b, bnext);
      visit(Move{Move::swap, r, p, r2, p2, delta});
    }
  }
  group_end(Move::swap);

  const double removal = d(prev, next) - out_a;
  for (std::size_t r2 = 0; r2 < plan.routes.size(); ++r2) {
    const auto& other = plan.routes[r2];
    if (r2 == r) {
      // Insertion positions in the route with `a` taken out.
      const std::size_t reduced = len - 1;
      const auto at = [&](std::size_t i) { return i < p ? route[i] : route[i + 1]; };
      for (std::size_t j = 0; j <= reduced; ++j) {
        if (j == p) continue;
        const int u = j == 0 ? 0 : at(j - 1);
        const int v = j == reduced ? 0 : at(j);
        visit(Move{Move::shift, r, p, r2, j, removal + d(u, a) + d(a, v) - d(u, v)});
      }
      continue;
    }
    for (std::size_t j = 0; j <= other.size(); ++j) {
      const int u = j == 0 ? 0 : other[j - 1];
      const int v = j == other.size() ? 0 : other[j];
      visit(Move{Move::shift, r, p, r2, j, removal + d(u, a) + d(a, v) - d(u, v)});
    }
  }
  if (len > 1) {
    visit(Move{Move::shift, r, p, plan.routes.size(), 0, removal + 2 * d(0, a)});
  }
  group_end(Move::shift);
}

// Runs fn(move, objectives) over every neighbour evaluated on `work`.
// When `prune` is set, moves whose cost delta rules out dominance of
// `current` are skipped before evaluation.
template <typename Fn, typename End>
void scan(RoutePlan& work, const ProblemInstance& inst, const ObjectiveVector& current,
          bool prune, Archive* archive, Fn&& fn, End&& group_end) {
  const auto& d = inst.distance();
  const double slack = 1e-9 * std::max(1.0, current.cost);
  const RoutePlan snapshot = work;
  for (std::size_t r = 0; r < snapshot.routes.size(); ++r) {
    for (std::size_t p = 0; p < snapshot.routes[r].size(); ++p) {
      neighbours(
          snapshot, d, r, p,
          [&](const Move& m) {
            if (prune && m.delta > slack) return;
            const bool new_route = m.kind == Move::shift && m.r2 == work.routes.size();
            apply(work, m);
            const ObjectiveVector obj = objectives(work, inst);
            if (archive != nullptr) archive->offer(obj, work);
            fn(m, obj, work);
            undo(work, m, new_route);
          },
          group_end);
    }
  }
}

}  // namespace

void SolverConfig::validate() const {
  if (population < 2) throw ConfigError("population must be at least 2");
  if (!(spls_timeout > 0)) throw ConfigError("spls_timeout must be positive");
  if (!(destroy_lo > 0 && destroy_lo <= destroy_hi && destroy_hi <= 1)) {
    throw ConfigError("destroy bounds must satisfy 0 < lo <= hi <= 1");
  }
  if (!(roulette_decay > 0 && roulette_decay < 1)) {
    throw ConfigError("roulette decay must lie in (0, 1)");
  }
  if (!(weight_floor > 0 && weight_floor <= 1)) {
    throw ConfigError("weight floor must lie in (0, 1]");
  }
  if (string_cap < 1) throw ConfigError("string cap must be at least 1");
}

Rng make_rng(std::uint64_t seed, std::uint64_t member, std::uint64_t iteration) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(member), static_cast<std::uint32_t>(iteration)};
  return Rng(seq);
}

OperatorStats::OperatorStats() { _weights.fill(1.0); }

OperatorStats::OperatorStats(std::array<double, kDestroyOperatorCount> weights)
    : _weights(weights) {
  for (double w : _weights) {
    if (!(w > 0)) throw ConfigError("operator weights must be positive");
  }
}

DestroyOperator OperatorStats::select(Rng& rng) {
  const double total = std::accumulate(_weights.begin(), _weights.end(), 0.0);
  const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  double acc = 0.0;
  std::size_t chosen = kDestroyOperatorCount - 1;
  for (std::size_t i = 0; i < kDestroyOperatorCount; ++i) {
    acc += _weights[i];
    if (u < acc) {
      chosen = i;
      break;
    }
  }
  ++_usage[chosen];
  return static_cast<DestroyOperator>(chosen);
}

void OperatorStats::update(DestroyOperator op, bool success, double decay, double floor) {
  auto& w = _weights[index(op)];
  w = std::max(floor, (1 - decay) * w + decay * (success ? 1.0 : 0.0));
  if (success) ++_success[index(op)];
}

double OperatorStats::probability(DestroyOperator op) const {
  return _weights[index(op)] / std::accumulate(_weights.begin(), _weights.end(), 0.0);
}

bool Archive::offer(const ObjectiveVector& obj, const RoutePlan& plan) {
  const auto by_cost = [](const Solution& s, double c) { return s.objectives.cost < c; };
  const auto upper = std::upper_bound(
      _entries.begin(), _entries.end(), obj.cost,
      [](double c, const Solution& s) { return c < s.objectives.cost; });
  if (upper != _entries.begin() && std::prev(upper)->objectives.violation <= obj.violation) {
    return false;
  }
  if (_reference) _tracked += exclusive_area(obj);
  auto first = std::lower_bound(_entries.begin(), _entries.end(), obj.cost, by_cost);
  auto last = first;
  while (last != _entries.end() && last->objectives.violation >= obj.violation) ++last;
  first = _entries.erase(first, last);
  Solution s{plan, obj};
  compact(s.plan);
  _entries.insert(first, std::move(s));
  return true;
}

void Archive::track_hypervolume(const ObjectiveVector& reference) {
  _reference = reference;
  _tracked = hypervolume(reference);
}

// Area dominated by `p` inside the reference box and by no stored entry.
double Archive::exclusive_area(const ObjectiveVector& p) const {
  const auto& ref = *_reference;
  if (p.cost >= ref.cost || p.violation >= ref.violation) return 0.0;
  double ceiling = ref.violation;
  auto it = _entries.begin();
  for (; it != _entries.end() && it->objectives.cost <= p.cost; ++it) {
    ceiling = std::min(ceiling, it->objectives.violation);
  }
  double area = 0.0;
  double x = p.cost;
  for (; it != _entries.end() && ceiling > p.violation; ++it) {
    const auto& o = it->objectives;
    if (o.cost >= ref.cost) break;
    area += (o.cost - x) * (ceiling - p.violation);
    x = o.cost;
    ceiling = std::min(ceiling, o.violation);
  }
  if (ceiling > p.violation) area += (ref.cost - x) * (ceiling - p.violation);
  return area;
}

double Archive::hypervolume(const ObjectiveVector& ref) const {
  double area = 0.0;
  double ceiling = ref.violation;
  for (const auto& e : _entries) {
    const auto& o = e.objectives;
    if (o.cost >= ref.cost) break;
    if (o.violation >= ceiling) continue;
    area += (ref.cost - o.cost) * (ceiling - o.violation);
    ceiling = o.violation;
  }
  return area;
}

Population initialize_population(const ProblemInstance& inst, const SolverConfig& cfg) {
  cfg.validate();
  const int n = static_cast<int>(inst.customer_count());
  Population pop;
  for (std::size_t i = 0; i < cfg.population; ++i) {
    Rng rng = make_rng(cfg.seed, i, 0);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 1);
    std::shuffle(perm.begin(), perm.end(), rng);

    Solution s;
    if (n > 0) {
      const int max_routes = (n + 4) / 5;
      const int k = std::uniform_int_distribution<int>(1, max_routes)(rng);
      std::vector<int> cuts(n - 1);
      std::iota(cuts.begin(), cuts.end(), 1);
      std::shuffle(cuts.begin(), cuts.end(), rng);
      cuts.resize(k - 1);
      std::sort(cuts.begin(), cuts.end());
      cuts.push_back(n);
      int start = 0;
      for (int cut : cuts) {
        s.plan.routes.emplace_back(perm.begin() + start, perm.begin() + cut);
        start = cut;
      }
    }
    s.objectives = objectives(s.plan, inst);
    pop.members.push_back(std::move(s));
  }
  return pop;
}

std::size_t removal_count(std::size_t customers, const SolverConfig& cfg, Rng& rng) {
  if (customers == 0) return 0;
  const auto bound = [&](double fraction) {
    const auto k = static_cast<std::size_t>(std::ceil(fraction * customers));
    return std::clamp<std::size_t>(k, 1, customers);
  };
  return std::uniform_int_distribution<std::size_t>(bound(cfg.destroy_lo),
                                                    bound(cfg.destroy_hi))(rng);
}

Removal destroy_random(const RoutePlan& plan, const SolverConfig& cfg, Rng& rng) {
  std::vector<int> ids;
  for (const auto& route : plan.routes) ids.insert(ids.end(), route.begin(), route.end());
  const std::size_t k = removal_count(ids.size(), cfg, rng);
  // Partial Fisher-Yates: the first k slots are a uniform sample.
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = std::uniform_int_distribution<std::size_t>(i, ids.size() - 1)(rng);
    std::swap(ids[i], ids[j]);
  }
  ids.resize(k);
  return remove_ids(plan, std::move(ids));
}

Removal remove_string(const RoutePlan& plan, int customer, std::size_t length,
                      std::size_t offset) {
  for (const auto& route : plan.routes) {
    const auto it = std::find(route.begin(), route.end(), customer);
    if (it == route.end()) continue;
    const auto pos = static_cast<std::size_t>(it - route.begin());
    if (length == 0 || offset >= length || offset > pos || pos - offset + length > route.size()) {
      throw BoundsError(fmt::format("string of length {} at offset {} does not fit route", length,
                                    offset));
    }
    const auto first = route.begin() + static_cast<std::ptrdiff_t>(pos - offset);
    return remove_ids(plan, std::vector<int>(first, first + static_cast<std::ptrdiff_t>(length)));
  }
  throw BoundsError(fmt::format("customer {} is not routed", customer));
}

Removal destroy_string(const RoutePlan& plan, const ProblemInstance& inst,
                       const SolverConfig& cfg, Rng& rng) {
  const std::size_t n = plan.customer_count();
  const std::size_t k = removal_count(n, cfg, rng);
  if (k == 0) return {plan, {}};

  const Locations loc(plan, inst.nodes().size());
  std::vector<int> ids;
  for (const auto& route : plan.routes) ids.insert(ids.end(), route.begin(), route.end());
  const int seed = ids[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)];

  // Candidate anchors by distance from the seed customer, ties by id.
  std::sort(ids.begin(), ids.end());
  const auto& d = inst.distance();
  std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) { return d(seed, a) < d(seed, b); });

  std::vector<char> ruined(plan.routes.size(), 0);
  std::vector<int> removed;
  for (int anchor : ids) {
    if (removed.size() >= k) break;
    const auto r = static_cast<std::size_t>(loc.route_of[anchor]);
    if (ruined[r]) continue;
    ruined[r] = 1;
    const auto& route = plan.routes[r];
    const std::size_t pos = loc.pos_of[anchor];
    const std::size_t cap = std::min({cfg.string_cap, route.size(), k - removed.size()});
    const std::size_t len = std::uniform_int_distribution<std::size_t>(1, cap)(rng);
    const std::size_t lo_start = pos + 1 >= len ? pos + 1 - len : 0;
    const std::size_t hi_start = std::min(pos, route.size() - len);
    const std::size_t start = std::uniform_int_distribution<std::size_t>(lo_start, hi_start)(rng);
    removed.insert(removed.end(), route.begin() + static_cast<std::ptrdiff_t>(start),
                   route.begin() + static_cast<std::ptrdiff_t>(start + len));
  }
  return remove_ids(plan, std::move(removed));
}

RoutePlan repair_greedy(RoutePlan plan, const std::vector<int>& removed,
                        const ProblemInstance& inst, RepairRule rule) {
  const auto& d = inst.distance();
  for (int c : removed) {
    // Best so far: (violation, delta) compared lexicographically; violation
    // stays 0 under min_cost.
    double best_violation = kInf;
    double best_delta = kInf;
    std::size_t best_route = plan.routes.size();
    std::size_t best_pos = 0;
    const auto consider = [&](std::size_t r, std::size_t p, double delta) {
      double violation = 0.0;
      if (rule == RepairRule::feasibility_first) {
        if (r == plan.routes.size()) {
          plan.routes.push_back({c});
          violation = objectives(plan, inst).violation;
          plan.routes.pop_back();
        } else {
          auto& route = plan.routes[r];
          route.insert(route.begin() + static_cast<std::ptrdiff_t>(p), c);
          violation = objectives(plan, inst).violation;
          route.erase(route.begin() + static_cast<std::ptrdiff_t>(p));
        }
      }
      if (violation < best_violation || (violation == best_violation && delta < best_delta)) {
        best_violation = violation;
        best_delta = delta;
        best_route = r;
        best_pos = p;
      }
    };
    for (std::size_t r = 0; r < plan.routes.size(); ++r) {
      const auto& route = plan.routes[r];
      for (std::size_t p = 0; p <= route.size(); ++p) {
        const int u = p == 0 ? 0 : route[p - 1];
        const int v = p == route.size() ? 0 : route[p];
        consider(r, p, d(u, c) + d(c, v) - d(u, v));
      }
    }
    consider(plan.routes.size(), 0, 2 * d(0, c));
    if (best_route == plan.routes.size()) {
      plan.routes.push_back({c});
    } else {
      auto& route = plan.routes[best_route];
      route.insert(route.begin() + static_cast<std::ptrdiff_t>(best_pos), c);
    }
  }
  return plan;
}

bool baseline_prefers(const ObjectiveVector& candidate, const ObjectiveVector& incumbent) {
  const bool cf = candidate.violation == 0;
  const bool inf = incumbent.violation == 0;
  if (cf != inf) return cf;
  if (cf) return candidate.cost < incumbent.cost;
  if (candidate.violation != incumbent.violation) return candidate.violation < incumbent.violation;
  return candidate.cost < incumbent.cost;
}

std::optional<Solution> spls_step(const Solution& current, const ProblemInstance& inst,
                                  const SolverConfig& cfg, Archive* archive) {
  RoutePlan work = current.plan;
  const bool prefer_max = cfg.dominator_choice == DominatorChoice::max_crowding;

  // Dominating variants of the (operator, node) group being scanned.
  std::vector<ObjectiveVector> group_obj;
  std::vector<RoutePlan> group_plan;
  // One representative per group that produced a dominator.
  std::vector<ObjectiveVector> rep_obj{current.objectives};
  std::vector<RoutePlan> rep_plan{current.plan};

  scan(
      work, inst, current.objectives, true, archive,
      [&](const Move&, const ObjectiveVector& obj, const RoutePlan& plan) {
        if (!dominates(obj, current.objectives)) return;
        group_obj.push_back(obj);
        group_plan.push_back(plan);
      },
      [&](Move::Kind) {
        if (group_obj.empty()) return;
        const std::size_t i = pick_ranked(group_obj, true);
        rep_obj.push_back(group_obj[i]);
        rep_plan.push_back(std::move(group_plan[i]));
        group_obj.clear();
        group_plan.clear();
      });
  if (rep_obj.size() == 1) return std::nullopt;

  // The current plan takes part in the ranking of the candidate set but
  // only dominating candidates may replace it.
  const auto fronts = non_dominated_sort(rep_obj);
  for (const auto& front : fronts) {
    std::vector<ObjectiveVector> members;
    for (std::size_t i : front) members.push_back(rep_obj[i]);
    const auto crowding = crowding_distance(members);
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < front.size(); ++k) {
      if (front[k] == 0) continue;
      if (!best || (prefer_max ? crowding[k] > crowding[*best] : crowding[k] < crowding[*best])) {
        best = k;
      }
    }
    if (best) {
      Solution out{std::move(rep_plan[front[*best]]), rep_obj[front[*best]]};
      compact(out.plan);
      return out;
    }
  }
  return std::nullopt;
}

namespace {

std::optional<Solution> baseline_step(const Solution& current, const ProblemInstance& inst,
                                      Archive* archive) {
  RoutePlan work = current.plan;
  std::optional<Solution> best;
  scan(
      work, inst, current.objectives, current.objectives.violation == 0, archive,
      [&](const Move&, const ObjectiveVector& obj, const RoutePlan& plan) {
        const ObjectiveVector& bar = best ? best->objectives : current.objectives;
        if (baseline_prefers(obj, bar)) best = Solution{plan, obj};
      },
      [](Move::Kind) {});
  if (best) compact(best->plan);
  return best;
}

template <typename Step>
Solution local_search(Solution current, const SolverConfig& cfg, Step&& step) {
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(
                         std::chrono::duration<double>(cfg.spls_timeout));
  while (Clock::now() < deadline) {
    auto next = step(current);
    if (!next) break;
    current = std::move(*next);
  }
  return current;
}

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

Solution make_child(const Solution& parent, const ProblemInstance& inst, const SolverConfig& cfg,
                    DestroyOperator op, Rng& rng) {
  Removal removal = op == DestroyOperator::random ? destroy_random(parent.plan, cfg, rng)
                                                  : destroy_string(parent.plan, inst, cfg, rng);
  Solution child;
  child.plan = repair_greedy(std::move(removal.partial), removal.removed, inst, cfg.repair_rule);
  child.objectives = objectives(child.plan, inst);
  return child;
}

}  // namespace

Solution spls(Solution current, const ProblemInstance& inst, const SolverConfig& cfg,
              Archive* archive) {
  return local_search(std::move(current), cfg,
                      [&](const Solution& s) { return spls_step(s, inst, cfg, archive); });
}

std::vector<std::size_t> nsga2_select(std::span<const ObjectiveVector> pool, std::size_t count) {
  std::vector<std::size_t> chosen;
  for (const auto& front : non_dominated_sort(pool)) {
    if (chosen.size() >= count) break;
    if (chosen.size() + front.size() <= count) {
      chosen.insert(chosen.end(), front.begin(), front.end());
      continue;
    }
    std::vector<ObjectiveVector> members;
    for (std::size_t i : front) members.push_back(pool[i]);
    const auto crowding = crowding_distance(members);
    std::vector<std::size_t> order(front.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return crowding[a] > crowding[b]; });
    for (std::size_t k = 0; chosen.size() < count; ++k) chosen.push_back(front[order[k]]);
  }
  return chosen;
}

Population population_update(const Population& parents, std::span<const Solution> children) {
  std::vector<const Solution*> pool;
  std::vector<ObjectiveVector> objs;
  for (const auto& s : parents.members) pool.push_back(&s);
  for (const auto& s : children) pool.push_back(&s);
  for (const auto* s : pool) objs.push_back(s->objectives);
  Population next;
  next.generation = parents.generation + 1;
  for (std::size_t i : nsga2_select(objs, parents.members.size())) {
    next.members.push_back(*pool[i]);
  }
  return next;
}

std::uint64_t hash_solutions(std::span<const Solution> solutions) {
  std::uint64_t h = 1469598103934665603ull;
  const auto mix = [&](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  for (const auto& s : solutions) {
    mix(std::bit_cast<std::uint64_t>(s.objectives.cost));
    mix(std::bit_cast<std::uint64_t>(s.objectives.violation));
    for (const auto& route : s.plan.routes) {
      mix(route.size());
      for (int id : route) mix(static_cast<std::uint64_t>(id));
    }
  }
  return h;
}

RunResult run(const ProblemInstance& inst, const SolverConfig& cfg) {
  const auto start = Clock::now();
  RunResult result;
  Population pop = initialize_population(inst, cfg);
  Archive archive;
  double best_cost = kInf;
  double worst_violation = 0.0;
  for (const auto& m : pop.members) {
    archive.offer(m.objectives, m.plan);
    best_cost = std::min(best_cost, m.objectives.cost);
    worst_violation = std::max(worst_violation, m.objectives.violation);
  }
  result.hv_reference = {2 * best_cost, worst_violation};
  archive.track_hypervolume(result.hv_reference);
  const auto record = [&](std::size_t iter) {
    result.trace.push_back({iter, archive.size(), archive.tracked_hypervolume(),
                            elapsed_ms(start), hash_solutions(pop.members)});
  };
  record(0);

  OperatorStats& stats = result.operators;
  for (std::size_t t = 1; t <= cfg.iterations; ++t) {
    std::vector<Solution> children;
    std::vector<DestroyOperator> used;
    for (std::size_t i = 0; i < pop.members.size(); ++i) {
      Rng rng = make_rng(cfg.seed, i, t);
      const DestroyOperator op = stats.select(rng);
      Solution child = make_child(pop.members[i], inst, cfg, op, rng);
      archive.offer(child.objectives, child.plan);
      children.push_back(spls(std::move(child), inst, cfg, &archive));
      used.push_back(op);
    }

    std::vector<ObjectiveVector> objs;
    for (const auto& m : pop.members) objs.push_back(m.objectives);
    for (const auto& c : children) objs.push_back(c.objectives);
    const auto first = non_dominated_sort(objs).front();
    for (std::size_t i = 0; i < children.size(); ++i) {
      const bool success =
          std::binary_search(first.begin(), first.end(), pop.members.size() + i);
      stats.update(used[i], success, cfg.roulette_decay, cfg.weight_floor);
    }
    pop = population_update(pop, children);
    record(t);
  }
  result.archive = archive.entries();
  result.final_population = std::move(pop);
  return result;
}

BaselineResult run_baseline(const ProblemInstance& inst, const SolverConfig& cfg) {
  const auto start = Clock::now();
  Population pop = initialize_population(inst, cfg);
  BaselineResult result;
  Solution incumbent = std::move(pop.members.front());
  result.hv_reference = {2 * incumbent.objectives.cost, incumbent.objectives.violation};
  // Incumbents seen so far; its hypervolume is what the trace reports.
  Archive history;
  history.offer(incumbent.objectives, incumbent.plan);
  history.track_hypervolume(result.hv_reference);
  const auto record = [&](std::size_t iter) {
    result.trace.push_back({iter, history.size(), history.tracked_hypervolume(),
                            elapsed_ms(start), hash_solutions(std::span(&incumbent, 1))});
  };
  record(0);

  OperatorStats stats;
  for (std::size_t t = 1; t <= cfg.iterations; ++t) {
    // Same offspring budget per iteration as the population solver.
    std::optional<Solution> best;
    std::vector<std::pair<DestroyOperator, ObjectiveVector>> used;
    for (std::size_t i = 0; i < cfg.population; ++i) {
      Rng rng = make_rng(cfg.seed, i, t);
      const DestroyOperator op = stats.select(rng);
      Solution child = make_child(incumbent, inst, cfg, op, rng);
      child = local_search(std::move(child), cfg,
                           [&](const Solution& s) { return baseline_step(s, inst, nullptr); });
      used.emplace_back(op, child.objectives);
      if (!best || baseline_prefers(child.objectives, best->objectives)) best = std::move(child);
    }
    const bool accepted = baseline_prefers(best->objectives, incumbent.objectives);
    for (const auto& [op, obj] : used) {
      stats.update(op, accepted && obj == best->objectives, cfg.roulette_decay,
                   cfg.weight_floor);
    }
    if (accepted) {
      incumbent = std::move(*best);
      history.offer(incumbent.objectives, incumbent.plan);
    }
    record(t);
  }
  result.best = std::move(incumbent);
  return result;
}

}  // namespace routediag
