#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"

#include "../support/fixtures.h"
#include "../support/scenarios.h"
#include "routediag/diagnosis.h"
#include "routediag/errors.h"
#include "routediag/solver.h"

using namespace routediag;

namespace {

// Customer 1: demand 50, out-and-back length 120.5. Customer 2: demand 30,
// length 80.
ProblemInstance loads_instance(const char* variant, double q, double lmax) {
  std::vector<Node> nodes{{0, 0, 0, 0, 0, 1000, 0},
                          {1, 60.25, 0, 50, 0, 1000, 0},
                          {2, 0, 40, 30, 0, 1000, 0}};
  std::vector<ConstraintSpec> cs{{CapacityParams{q}}};
  if (lmax >= 0) cs.push_back({DistanceLimitParams{lmax}});
  auto desc = describe_constraints(cs);
  return ProblemInstance(nodes, cs, *VariantDescriptor::from_name(variant), desc);
}

const RoutePlan kTwoRoutes{{{1}, {2}}};

Adjustment adj(Family f, std::string name, std::vector<int> idx, double o, double n) {
  Adjustment a;
  a.family = f;
  a.name = std::move(name);
  a.indices = std::move(idx);
  a.old_value = o;
  a.new_value = n;
  return a;
}

DiagnosisConfig one_per_family() {
  DiagnosisConfig cfg;
  cfg.whitelist = {Parameter::capacity, Parameter::max_length, Parameter::due,
                   Parameter::pickup_delivery_waiver, Parameter::same_vehicle_waiver,
                   Parameter::priority_waiver};
  return cfg;
}

}  // namespace

TEST_CASE("DCR moves capacity to the largest load") {
  const auto inst = loads_instance("CVRP", 0, -1);
  const auto r = diagnose_dcr(kTwoRoutes, inst);
  REQUIRE(r.adjustments.size() == 1);
  CHECK(r.adjustments[0].path() == "Capacity.Q");
  CHECK(r.adjustments[0].old_value == 0);
  CHECK(r.adjustments[0].new_value == 50);
  CHECK(r.residual_violation == 0);
  CHECK(r.strategy == Strategy::dcr);
}

TEST_CASE("DCR on a feasible plan changes nothing") {
  const auto inst = loads_instance("CVRP", 100, -1);
  const auto r = diagnose_dcr(kTwoRoutes, inst);
  CHECK(r.adjustments.empty());
  CHECK(r.text == inst.description());
  const auto e = diagnose_ecp(kTwoRoutes, inst, DiagnosisConfig{});
  CHECK(e.adjustments.empty());
  CHECK(e.total_l1() == 0);
}

TEST_CASE("DCR relaxes capacity and length together") {
  const auto inst = loads_instance("CVRP-L", 0, 0);
  const auto r = diagnose_dcr(kTwoRoutes, inst);
  REQUIRE(r.adjustments.size() == 2);
  CHECK(r.adjustments[0].path() == "Capacity.Q");
  CHECK(r.adjustments[0].new_value == 50);
  CHECK(r.adjustments[1].path() == "DistanceLimit.Lmax");
  CHECK(r.adjustments[1].new_value == doctest::Approx(120.5).epsilon(1e-12));
  CHECK(r.residual_violation == 0);

  const auto cap = r.text.find("Relax the vehicle capacity (Capacity.Q) from 0 to 50 units.");
  const auto len = r.text.find("Relax the maximum route length (DistanceLimit.Lmax) from 0 to");
  REQUIRE(cap != std::string::npos);
  REQUIRE(len != std::string::npos);
  CHECK(cap < len);
  CHECK(r.text.rfind(inst.description(), 0) == 0);
}

TEST_CASE("ECP with a single capacity parameter equals DCR") {
  const auto inst = loads_instance("CVRP", 0, -1);
  DiagnosisConfig cfg;
  cfg.whitelist = {Parameter::capacity};
  const auto e = diagnose_ecp(kTwoRoutes, inst, cfg);
  REQUIRE(e.adjustments.size() == 1);
  CHECK(e.adjustments[0].delta() == doctest::Approx(50));
  CHECK(e.total_l1() == doctest::Approx(diagnose_dcr(kTwoRoutes, inst).total_l1()));
}

TEST_CASE("ECP prefers per-node due extensions over a global shift") {
  // 25 customers on their own routes; customer 3 arrives 5 late, customer
  // 9 arrives 2 late.
  std::vector<Node> nodes{{0, 0, 0, 0, 0, 1000, 0}};
  for (int i = 1; i <= 25; ++i) nodes.push_back({i, double(i), 0, 1, 0, 1000, 0});
  nodes[3].x = 100;
  nodes[3].due = 95;
  nodes[9].x = 50;
  nodes[9].due = 48;
  TimeWindowsParams tw;
  for (const auto& n : nodes) tw.windows.push_back({n.id, n.ready, n.due, n.service});
  const ProblemInstance inst(nodes, {{tw}}, *VariantDescriptor::from_name("VRPTW"), "");
  RoutePlan plan;
  for (int i = 1; i <= 25; ++i) plan.routes.push_back({i});

  DiagnosisConfig cfg;
  cfg.whitelist = {Parameter::due, Parameter::due_shift};
  const auto e = diagnose_ecp(plan, inst, cfg);
  CHECK(e.total_l1() == doctest::Approx(7));
  for (const auto& a : e.adjustments) CHECK(a.name == "due");
  CHECK(e.residual_violation == 0);

  // Shift only: every customer window moves by 5.
  cfg.whitelist = {Parameter::due_shift};
  const auto s = diagnose_ecp(plan, inst, cfg);
  REQUIRE(s.adjustments.size() == 1);
  CHECK(s.adjustments[0].path() == "TimeWindows.due_shift");
  CHECK(s.total_l1() == doctest::Approx(125));
  CHECK(s.residual_violation == 0);
  CHECK(s.text.find("Shift every customer due time (TimeWindows.due_shift) later by 5 units.") !=
        std::string::npos);

  cfg.whitelist = {Parameter::capacity};
  CHECK_THROWS_AS(diagnose_ecp(plan, inst, cfg), InfeasibleDiagnosisError);
}

TEST_CASE("ECP matches the LP oracle on random scenarios") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto sc = oracle::random_ecp_scenario(rng);
    const auto e = diagnose_ecp(sc.plan, sc.inst, sc.cfg);
    CHECK(e.residual_violation == 0);
    CHECK(e.total_l1() == doctest::Approx(oracle::ecp_l1_oracle(sc)).epsilon(1e-9));
    CHECK(oracle::ecp_l1_enumerated(sc) == doctest::Approx(oracle::ecp_l1_oracle(sc)).epsilon(1e-9));
  }
}

TEST_CASE("aggregate keeps the most demanding value per path") {
  const auto q50 = adj(Family::Capacity, "Q", {}, 0, 50);
  const auto q30 = adj(Family::Capacity, "Q", {}, 0, 30);
  auto out = aggregate({q50, q30});
  REQUIRE(out.size() == 1);
  CHECK(out[0].new_value == 50);
  CHECK(aggregate({}).empty());

  const auto d1 = adj(Family::TimeWindows, "due", {3}, 9, 9.5);
  const auto d2 = adj(Family::TimeWindows, "due", {3}, 9, 12.1);
  const auto l = adj(Family::DistanceLimit, "Lmax", {}, 0, 120.5);
  out = aggregate({d1, d2, l});
  REQUIRE(out.size() == 2);
  CHECK(out[0].path() == "DistanceLimit.Lmax");
  CHECK(out[0].new_value == 120.5);
  CHECK(out[1].path() == "TimeWindows.due[3]");
  CHECK(out[1].new_value == 12.1);

  std::vector<Adjustment> mix{d1, q30, l, d2, q50};
  const auto once = aggregate(mix);
  CHECK(aggregate(once) == once);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10; ++i) {
    std::shuffle(mix.begin(), mix.end(), rng);
    CHECK(aggregate(mix) == once);
  }

  const auto down = adj(Family::Capacity, "Q", {}, 100, 40);
  const auto both = aggregate({q50, down});
  REQUIRE(both.size() == 2);
  CHECK(both[0].conflict);
  CHECK(both[1].conflict);
}

TEST_CASE("parameter paths round-trip") {
  for (const auto& a : {adj(Family::Capacity, "Q", {}, 0, 1),
                        adj(Family::DistanceLimit, "Lmax", {}, 0, 1),
                        adj(Family::TimeWindows, "due", {7}, 0, 1),
                        adj(Family::TimeWindows, "due_shift", {}, 0, 1),
                        adj(Family::PickupDelivery, "exempt", {1, 2}, 0, 1),
                        adj(Family::SameVehicle, "exempt", {0}, 0, 1),
                        adj(Family::Priority, "exempt", {4, 2}, 0, 1)}) {
    const auto p = parse_path(a.path());
    CHECK(p.family == a.family);
    CHECK(p.name == a.name);
    CHECK(p.indices == a.indices);
  }
  CHECK(adj(Family::TimeWindows, "due", {7}, 0, 1).path() == "TimeWindows.due[7]");
  CHECK_THROWS_AS(parse_path("Capacity"), StructuralError);
  CHECK_THROWS_AS(parse_path("Nope.Q"), StructuralError);
}

TEST_CASE("apply_adjustments") {
  const auto inst = loads_instance("CVRP-L", 0, 0);
  CHECK(apply_adjustments(inst, {}) == inst);

  const auto relaxed = apply_adjustments(inst, {adj(Family::Capacity, "Q", {}, 0, 50)});
  for (const auto& e : evaluate(kTwoRoutes, relaxed).breakdown.entries) {
    CHECK(e.family != Family::Capacity);
  }
  CHECK(evaluate(kTwoRoutes, relaxed).objectives.violation > 0);

  const auto report = diagnose_dcr(kTwoRoutes, inst);
  const auto fixed = apply_adjustments(inst, report.adjustments);
  CHECK(diagnose_dcr(kTwoRoutes, fixed).adjustments.empty());
  CHECK(diagnose_ecp(kTwoRoutes, fixed, DiagnosisConfig{}).adjustments.empty());

  CHECK_THROWS_AS(apply_adjustments(inst, {adj(Family::TimeWindows, "due", {1}, 0, 5)}),
                  StructuralError);
}

TEST_CASE("render_text") {
  const auto inst = loads_instance("CVRP", 0, -1);
  SuggestionReport r;
  r.adjustments = {adj(Family::Capacity, "Q", {}, 0, 50)};
  const auto text = render_text(r, inst);
  CHECK(text.find(" 0 ") != std::string::npos);
  CHECK(text.find("50") != std::string::npos);
  CHECK(text.find("Capacity") != std::string::npos);
  r.adjustments.clear();
  CHECK(render_text(r, inst) == inst.description());
  CHECK(format_number(120.5) == "120.5");
  CHECK(format_number(50) == "50");
  CHECK(format_number(1.0 / 3) == "0.33");
}

TEST_CASE("soundness, tightness and L1 ordering on solver fronts") {
  SolverConfig cfg;
  cfg.iterations = 10;
  for (const auto& d : VariantDescriptor::catalog()) {
    const auto inst = fixture::variant(d.name());
    const auto front = run(inst, cfg).archive;
    for (std::size_t i = 0; i < front.size(); ++i) {
      const auto& plan = front[i].plan;
      const auto dcr = diagnose_dcr(plan, inst, i);
      const auto ecp = diagnose_ecp(plan, inst, DiagnosisConfig{}, i);
      const auto ecp1 = diagnose_ecp(plan, inst, one_per_family(), i);
      CHECK(dcr.residual_violation == 0);
      CHECK(ecp.residual_violation == 0);
      CHECK(ecp1.residual_violation == 0);
      CHECK(ecp.total_l1() <= dcr.total_l1() + 1e-9);
      CHECK(ecp1.total_l1() == doctest::Approx(dcr.total_l1()).epsilon(1e-9));

      // Backing any numeric relaxation off by a little breaks feasibility.
      for (std::size_t k = 0; k < dcr.adjustments.size(); ++k) {
        const auto& a = dcr.adjustments[k];
        if (a.family != Family::Capacity && a.family != Family::DistanceLimit &&
            a.family != Family::TimeWindows) {
          continue;
        }
        auto shrunk = dcr.adjustments;
        shrunk[k].new_value -= 1e-6;
        CHECK(objectives(plan, apply_adjustments(inst, shrunk)).violation > 0);
      }
    }
  }
}

TEST_CASE("ECP with p = 2 stays sound") {
  std::mt19937_64 rng(23);
  DiagnosisConfig cfg;
  cfg.p = 2;
  for (const char* name : {"VRPTW", "CVRPLTW", "PCVRPLSTW"}) {
    const auto inst = fixture::variant(name);
    for (int trial = 0; trial < 5; ++trial) {
      const auto plan = fixture::random_plan(25, rng);
      const auto e = diagnose_ecp(plan, inst, cfg);
      CHECK(e.residual_violation == 0);
      CHECK(e.norm(2) <= diagnose_dcr(plan, inst).norm(2) + 1e-9);
    }
  }
  cfg.p = 0.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
