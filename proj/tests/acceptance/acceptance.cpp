// Prints one PASS/FAIL line per acceptance criterion; exits non-zero when
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "../support/fixtures.h"
#include "../support/oracles.h"
#include "../support/scenarios.h"
#include "routediag/bench.h"
#include "routediag/cli.h"
#include "routediag/diagnosis.h"
#include "routediag/io.h"
#include "routediag/metrics.h"
#include "routediag/pareto.h"
#include "routediag/solver.h"

using namespace routediag;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void verdict(int id, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::cout << fmt::format("{} criterion {}: {}", ok ? "PASS" : "FAIL", id, detail) << std::endl;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<oracle::Pt> to_pts(std::span<const ObjectiveVector> v) {
  std::vector<oracle::Pt> out;
  for (const auto& p : v) out.push_back({p.cost, p.violation});
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

bool monotone(const std::vector<TraceEntry>& trace) {
  for (std::size_t i = 1; i < trace.size(); ++i) {
    if (trace[i].archive_hv < trace[i - 1].archive_hv) return false;
  }
  return true;
}

void criterion_pareto() {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> size(1, 64);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::uniform_int_distribution<int> grid(0, 9);
  int mismatches = 0;
  const auto t0 = Clock::now();
  for (int trial = 0; trial < 200; ++trial) {
    const int n = size(rng);
    std::vector<ObjectiveVector> pts;
    for (int i = 0; i < n; ++i) {
      if (trial % 2) pts.push_back({u(rng), u(rng)});
      else pts.push_back({double(grid(rng)), double(grid(rng))});
    }
    const auto p = to_pts(pts);
    if (non_dominated_sort(pts) != oracle::fronts(p)) ++mismatches;

    const std::size_t cut = static_cast<std::size_t>(n) / 2;
    const std::vector<std::vector<ObjectiveVector>> sets{
        {pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(cut)},
        {pts.begin() + static_cast<std::ptrdiff_t>(cut), pts.end()}};
    const auto got = to_pts(build_reference_set(sets));
    const auto want = oracle::reference_set({to_pts(sets[0]), to_pts(sets[1])});
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i) {
      same = got[i].f1 == want[i].f1 && got[i].f2 == want[i].f2;
    }
    if (!same) ++mismatches;
  }
  const double elapsed = seconds_since(t0);
  verdict(1, mismatches == 0 && elapsed < 5.0,
          fmt::format("200 populations, {} mismatches, {:.2f} s", mismatches, elapsed));
}

void criterion_metrics() {
  const ObjectiveVector ref{1.1, 1.1};
  const std::vector<ObjectiveVector> one{{0, 0}};
  const std::vector<ObjectiveVector> two{{0, 1}, {1, 0}};
  const double hv1 = hypervolume_2d(one, ref);
  const double hv2 = hypervolume_2d(two, ref);
  // Inclusion-exclusion computed in the same floating-point order.
  const double hand1 = 1.1 * 1.1;
  const double hand2 = (1.1 - 0.0) * (1.1 - 1.0) + (1.1 - 1.0) * (1.1 - 0.0) -
                       (1.1 - 1.0) * (1.1 - 1.0);
  const bool hand_ok = std::abs(hv1 - hand1) <= 1e-12 && std::abs(hv2 - hand2) <= 1e-12 &&
                       std::abs(hv1 - 1.21) <= 1e-12 && std::abs(hv2 - 0.21) <= 1e-12;

  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0.0, 1.2);
  std::uniform_int_distribution<int> size(1, 15);
  int outside = 0;
  double worst_z = 0.0;
  for (int f = 0; f < 50; ++f) {
    std::vector<ObjectiveVector> pts;
    const int n = size(rng);
    for (int i = 0; i < n; ++i) pts.push_back({u(rng), u(rng)});
    const auto est = oracle::hv_monte_carlo(to_pts(pts), {ref.cost, ref.violation}, 1000000, rng);
    const double gap = std::abs(hypervolume_2d(pts, ref) - est.value);
    if (est.standard_error > 0) worst_z = std::max(worst_z, gap / est.standard_error);
    if (gap > 3 * est.standard_error + 1e-12) ++outside;
  }

  const std::vector<ObjectiveVector> origin{{0, 0}};
  const std::vector<ObjectiveVector> far{{3, 4}};
  const std::vector<ObjectiveVector> diag{{0, 0}, {1, 1}};
  const bool igd_ok = igd(diag, diag) == 0 && std::abs(igd(far, origin) - 5.0) <= 1e-12 &&
                      std::abs(igd(origin, diag) - std::sqrt(2.0) / 2) <= 1e-12;
  int igd_bad = 0;
  for (int t = 0; t < 50; ++t) {
    std::vector<ObjectiveVector> a, r;
    for (int i = 0; i < 5; ++i) a.push_back({u(rng), u(rng)});
    for (int i = 0; i < 7; ++i) r.push_back({u(rng), u(rng)});
    if (std::abs(igd(a, r) - oracle::igd(to_pts(a), to_pts(r))) > 1e-12) ++igd_bad;
  }

  verdict(2, hand_ok && outside == 0 && igd_ok && igd_bad == 0,
          fmt::format("HV hand values {:.17g} and {:.17g}; Monte Carlo {} of 50 outside 3 SE "
                      "(max {:.2f} SE); IGD hand values {}, {} random mismatches",
                      hv1, hv2, outside, worst_z, igd_ok ? "exact" : "wrong", igd_bad));
}

const std::vector<std::string> kFeatured{"CVRP", "CVRP-L", "DCVRP", "DCVRP-L"};

void criteria_ordering_and_convergence(std::vector<std::vector<TraceEntry>>& traces) {
  BenchOptions options;
  options.variants = kFeatured;
  options.runs = 3;
  options.seed = 0;
  options.base_path = fixture::c103_path();
  options.timing = true;
  options.diagnose = false;
  const BenchResult result = run_bench(options);

  bool ok = result.failures.empty();
  std::string detail;
  for (const auto& v : kFeatured) {
    const std::string canonical = VariantDescriptor::from_name(v)->name();
    std::vector<double> hv_m, hv_b, igd_m, igd_b;
    for (const auto& r : result.rows) {
      if (r.variant != canonical) continue;
      (r.method == "moid" ? hv_m : hv_b).push_back(r.hv);
      (r.method == "moid" ? igd_m : igd_b).push_back(r.igd);
    }
    if (hv_m.size() != 3 || hv_b.size() != 3) {
      ok = false;
      detail += fmt::format(" {}: missing runs;", v);
      continue;
    }
    const double gap = median(hv_m) - median(hv_b);
    const bool v_ok = gap >= 0.1 && median(igd_m) < median(igd_b);
    ok = ok && v_ok;
    detail += fmt::format(" {} HV {:.3f} vs {:.3f}, IGD {:.3f} vs {:.3f};", v, median(hv_m),
                          median(hv_b), median(igd_m), median(igd_b));
  }

  std::map<std::pair<std::string, std::uint64_t>, double> per_run;
  for (const auto& run : result.runs) per_run[{run.variant, run.seed}] += run.runtime_s.value_or(0);
  double slowest = 0.0;
  for (const auto& [key, s] : per_run) slowest = std::max(slowest, s);
  ok = ok && slowest <= 120.0;
  verdict(3, ok, fmt::format("medians moid vs baseline:{} slowest run {:.2f} s", detail, slowest));

  // Convergence at iteration 20 is reported only.
  int reached = 0, total = 0;
  for (const auto& run : result.runs) {
    traces.push_back(run.trace);
    if (run.method != "moid" || run.trace.size() <= 20) continue;
    ++total;
    const double final_hv = run.trace.back().archive_hv;
    if (run.trace[20].archive_hv >= 0.9 * final_hv) ++reached;
  }
  std::cout << fmt::format("INFO criterion 4: {} of {} featured moid runs reach 90% of final "
                           "archive HV by iteration 20",
                           reached, total)
            << std::endl;
}

struct BenchFiles {
  fs::path dir;
  int code = -1;
  double seconds = 0.0;
};

BenchFiles bench_all(const std::string& name) {
  BenchFiles f;
  f.dir = fixture::temp_dir(name);
  std::ostringstream out, err;
  const auto t0 = Clock::now();
  f.code = run_cli({"bench", "--variants", "all", "--runs", "1", "--seed", "7", "--base",
                    fixture::c103_path(), "--out", (f.dir / "results.csv").string()},
                   out, err);
  f.seconds = seconds_since(t0);
  if (f.code != kExitOk) std::cout << err.str();
  return f;
}

void criterion_monotone(const std::vector<std::vector<TraceEntry>>& featured,
                        const fs::path& bench_dir) {
  int runs = 0, broken = 0;
  for (const auto& t : featured) {
    ++runs;
    if (!monotone(t)) ++broken;
  }
  const auto doc = read_json_file((bench_dir / "traces.json").string());
  for (const auto& entry : doc) {
    ++runs;
    double prev = -1.0;
    for (const auto& point : entry["trace"]) {
      const double hv = point["archive_hv"].get<double>();
      if (hv < prev) {
        ++broken;
        break;
      }
      prev = hv;
    }
  }
  verdict(4, broken == 0 && runs > 0,
          fmt::format("{} runs checked, {} with a decreasing archive HV", runs, broken));
}

DiagnosisConfig one_per_family() {
  DiagnosisConfig cfg;
  cfg.whitelist = {Parameter::capacity, Parameter::max_length, Parameter::due,
                   Parameter::pickup_delivery_waiver, Parameter::same_vehicle_waiver,
                   Parameter::priority_waiver};
  return cfg;
}

void criterion_soundness(const fs::path& bench_dir) {
  const auto fronts = read_json_file((bench_dir / "front.json").string());
  std::map<std::string, ProblemInstance> instances;
  std::set<std::string> variants;
  std::size_t solutions = 0, dcr_ok = 0, ecp_ok = 0, l1_bad = 0, eq_bad = 0, errors = 0;
  for (const auto& entry : fronts) {
    const std::string name = entry["variant"].get<std::string>();
    variants.insert(name);
    auto it = instances.find(name);
    if (it == instances.end()) it = instances.emplace(name, fixture::variant(name)).first;
    const auto& inst = it->second;
    const auto& list = entry["front"];
    for (std::size_t i = 0; i < list.size(); ++i) {
      RoutePlan plan{list[i]["routes"].get<std::vector<std::vector<int>>>()};
      ++solutions;
      try {
        const auto dcr = diagnose_dcr(plan, inst, i);
        const auto ecp = diagnose_ecp(plan, inst, DiagnosisConfig{}, i);
        const auto ecp1 = diagnose_ecp(plan, inst, one_per_family(), i);
        const auto residual = [&](const SuggestionReport& r) {
          return objectives(plan, apply_adjustments(inst, r.adjustments)).violation;
        };
        if (residual(dcr) == 0) ++dcr_ok;
        if (residual(ecp) == 0 && residual(ecp1) == 0) ++ecp_ok;
        if (ecp.total_l1() > dcr.total_l1() + 1e-9) ++l1_bad;
        if (std::abs(ecp1.total_l1() - dcr.total_l1()) > 1e-9 * std::max(1.0, dcr.total_l1())) {
          ++eq_bad;
        }
      } catch (const std::exception& e) {
        ++errors;
        std::cout << fmt::format("  {} solution {}: {}\n", name, i, e.what());
      }
    }
  }
  const double dcr_asr = solutions ? double(dcr_ok) / double(solutions) : 0.0;
  const double ecp_asr = solutions ? double(ecp_ok) / double(solutions) : 0.0;
  verdict(5,
          variants.size() == 50 && solutions > 0 && dcr_asr == 1.0 && ecp_asr == 1.0 &&
              l1_bad == 0 && eq_bad == 0 && errors == 0,
          fmt::format("{} variants, {} solutions: DCR ASR {}, ECP ASR {}, {} with ECP L1 > DCR, "
                      "{} unequal with one parameter per family, {} errors",
                      variants.size(), solutions, dcr_asr, ecp_asr, l1_bad, eq_bad, errors));
}

void criterion_ecp_oracle() {
  std::mt19937_64 rng(606);
  int bad = 0;
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const auto sc = oracle::random_ecp_scenario(rng);
    const double got = diagnose_ecp(sc.plan, sc.inst, sc.cfg).total_l1();
    const double lp = oracle::ecp_l1_oracle(sc);
    const double enumerated = oracle::ecp_l1_enumerated(sc);
    const double gap = std::max(std::abs(got - lp), std::abs(got - enumerated));
    worst = std::max(worst, gap);
    if (gap > 1e-6) ++bad;
  }
  verdict(6, bad == 0,
          fmt::format("50 scenarios, {} off by more than 1e-6, largest gap {:.3g}", bad, worst));
}

void criterion_determinism(const BenchFiles& a, const BenchFiles& b) {
  bool ok = a.code == kExitOk && b.code == kExitOk;
  std::string detail;
  for (const char* f : {"results.csv", "front.json", "report.json"}) {
    const auto x = read_text_file((a.dir / f).string());
    const auto y = read_text_file((b.dir / f).string());
    const bool same = x == y;
    ok = ok && same;
    detail += fmt::format(" {} {} ({} bytes);", f, same ? "identical" : "differs", x.size());
  }
  verdict(7, ok, fmt::format("two bench runs ({:.0f} s, {:.0f} s):{}", a.seconds, b.seconds, detail));
}

void criterion_diversity() {
  const auto inst = fixture::variant("CVRP-L");
  SolverConfig cfg;
  const auto result = run(inst, cfg);
  std::vector<ObjectiveVector> pts;
  std::set<double> violations;
  for (const auto& s : result.archive) {
    pts.push_back(s.objectives);
    violations.insert(s.objectives.violation);
  }
  bool mutual = true;
  for (const auto& a : pts) {
    for (const auto& b : pts) mutual = mutual && !dominates(a, b);
  }
  double min_violation = std::numeric_limits<double>::infinity();
  for (const auto& p : pts) min_violation = std::min(min_violation, p.violation);

  const auto base = run_baseline(inst, cfg);
  const double bv = base.best.objectives.violation;
  const bool base_ok = bv <= min_violation + 1e-9 || bv <= 1.05 * min_violation;
  verdict(8, pts.size() >= 3 && violations.size() >= 3 && mutual && base_ok,
          fmt::format("archive {} entries, {} distinct violations, mutually non-dominated {}; "
                      "baseline violation {} vs archive minimum {}",
                      pts.size(), violations.size(), mutual ? "yes" : "no", bv, min_violation));
}

}  // namespace

int main() {
  criterion_pareto();
  criterion_metrics();
  std::vector<std::vector<TraceEntry>> featured;
  criteria_ordering_and_convergence(featured);
  const auto first = bench_all("acceptance_bench_a");
  criterion_monotone(featured, first.dir);
  criterion_soundness(first.dir);
  criterion_ecp_oracle();
  const auto second = bench_all("acceptance_bench_b");
  criterion_determinism(first, second);
  criterion_diversity();
  std::cout << (failures == 0 ? "all criteria passed" : fmt::format("{} criteria failed", failures))
            << std::endl;
  return failures == 0 ? 0 : 1;
}
