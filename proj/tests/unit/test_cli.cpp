#include <filesystem>
#include <sstream>

#include "doctest.h"

#include "../support/fixtures.h"
#include "routediag/bench.h"
#include "routediag/cli.h"
#include "routediag/errors.h"
#include "routediag/io.h"

using namespace routediag;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run_cli(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::string path(const fs::path& dir, const char* name) { return (dir / name).string(); }

std::string gen(const fs::path& dir, const char* variant, const char* n = "25") {
  const auto file = path(dir, (std::string(variant) + ".json").c_str());
  const auto r = cli({"gen", "--base", fixture::c103_path(), "--n", n, "--variant", variant,
                      "--out", file});
  REQUIRE(r.code == kExitOk);
  return file;
}

const char* kResults =
    "variant,method,seed,hv,igd,runtime_s,front_size\n"
    "CVRP,moid,0,1.0,0.1,NA,5\n"
    "CVRP,moid,1,0.8,0.3,NA,4\n"
    "CVRP,baseline,0,0.5,0.6,NA,1\n"
    "CVRP,baseline,1,0.5,0.6,NA,1\n";

}  // namespace

TEST_CASE("gen builds catalog variants") {
  const auto dir = fixture::temp_dir("cli_gen");
  const auto cvrp = instance_from_json(read_json_file(gen(dir, "CVRP")));
  CHECK(cvrp.find(Family::Capacity)->as<CapacityParams>().capacity == 0);
  CHECK(cvrp.nodes().size() == 26);

  const auto d = instance_from_json(read_json_file(gen(dir, "DCVRP-L")));
  CHECK(d.find(Family::DynamicDemand) != nullptr);
  CHECK(d.find(Family::DistanceLimit) != nullptr);

  const auto bad = cli({"gen", "--variant", "BOGUS", "--out", path(dir, "x.json")});
  CHECK(bad.code == kExitUsage);
  CHECK(bad.err.find("unknown variant 'BOGUS'") != std::string::npos);
  CHECK(bad.err.find("PCVRPLSTW") != std::string::npos);

  const auto over = cli({"gen", "--base", fixture::c103_path(), "--variant", "CVRP", "--params",
                         "Q=70", "--out", path(dir, "q.json")});
  CHECK(over.code == kExitOk);
  CHECK(instance_from_json(read_json_file(path(dir, "q.json")))
            .find(Family::Capacity)
            ->as<CapacityParams>()
            .capacity == 70);
}

TEST_CASE("solve writes a front, a trace and the population") {
  const auto dir = fixture::temp_dir("cli_solve");
  const auto inst = gen(dir, "CVRP-L");
  const auto a = cli({"solve", "--instance", inst, "--iters", "20", "--seed", "3", "--out",
                      path(dir, "a")});
  REQUIRE(a.code == kExitOk);
  CHECK(read_json_file(path(dir, "a/front.json")).size() >= 3);
  CHECK(read_json_file(path(dir, "a/trace.json")).size() == 21);
  CHECK(read_json_file(path(dir, "a/population.json")).size() == 10);
  CHECK(a.out.find("front entries") != std::string::npos);

  const auto b = cli({"solve", "--instance", inst, "--iters", "20", "--seed", "3", "--out",
                      path(dir, "b")});
  REQUIRE(b.code == kExitOk);
  for (const char* f : {"front.json", "trace.json", "population.json"}) {
    CHECK(read_text_file((dir / "a" / f).string()) == read_text_file((dir / "b" / f).string()));
  }

  const auto base = cli({"solve", "--instance", inst, "--mode", "baseline", "--iters", "20",
                         "--out", path(dir, "c")});
  REQUIRE(base.code == kExitOk);
  CHECK(read_json_file(path(dir, "c/front.json")).size() == 1);

  CHECK(cli({"solve", "--instance", inst, "--mode", "greedy", "--out", path(dir, "d")}).code ==
        kExitUsage);
  CHECK(cli({"solve", "--instance", inst, "--pop", "0", "--out", path(dir, "d")}).code ==
        kExitUsage);

  write_text_file(path(dir, "broken.json"), R"({"nodes": []})");
  const auto broken = cli({"solve", "--instance", path(dir, "broken.json"), "--out",
                           path(dir, "e")});
  CHECK(broken.code == kExitUsage);
  CHECK(broken.err.find("schema error at name") != std::string::npos);
}

TEST_CASE("diagnose over a front") {
  const auto dir = fixture::temp_dir("cli_diagnose");
  const auto inst = gen(dir, "CVRP-L");
  REQUIRE(cli({"solve", "--instance", inst, "--iters", "10", "--out", path(dir, "s")}).code ==
          kExitOk);
  const auto front = path(dir, "s/front.json");
  const auto entries = read_json_file(front).size();

  const auto dcr = cli({"diagnose", "--instance", inst, "--front", front, "--strategy", "dcr",
                        "--out", path(dir, "dcr.json")});
  CHECK(dcr.code == kExitOk);
  CHECK(dcr.out.find("ASR 1") != std::string::npos);
  const auto reports = read_json_file(path(dir, "dcr.json"));
  CHECK(reports.size() == entries);
  CHECK(reports[0]["strategy"] == "DCR");

  const auto ecp = cli({"diagnose", "--instance", inst, "--front", front, "--out",
                        path(dir, "ecp.json")});
  CHECK(ecp.code == kExitOk);
  CHECK(ecp.out.find("with ECP, 0 errors, ASR 1") != std::string::npos);

  const auto excluded = cli({"diagnose", "--instance", inst, "--front", front, "--whitelist",
                             "priority_waiver", "--out", path(dir, "x.json")});
  CHECK(excluded.code == kExitDomain);
  const auto errors = read_json_file(path(dir, "x.json"));
  CHECK(errors[0]["error"].get<std::string>().find("Capacity") != std::string::npos);

  write_text_file(path(dir, "empty.json"), "[]\n");
  const auto empty = cli({"diagnose", "--instance", inst, "--front", path(dir, "empty.json"),
                          "--out", path(dir, "e.json")});
  CHECK(empty.code == kExitOk);
  CHECK(read_json_file(path(dir, "e.json")).empty());

  CHECK(cli({"diagnose", "--instance", inst, "--front", front, "--whitelist", "nope", "--out",
             path(dir, "y.json")})
            .code == kExitUsage);
}

TEST_CASE("bench rows and determinism") {
  const auto dir = fixture::temp_dir("cli_bench");
  const std::vector<std::string> args{"bench", "--variants", "CVRP,CVRP-L,DCVRP,DCVRP-L",
                                      "--runs", "3", "--iters", "5", "--n", "20",
                                      "--base", fixture::c103_path()};
  auto first = args;
  first.insert(first.end(), {"--out", path(dir, "a/results.csv")});
  auto second = args;
  second.insert(second.end(), {"--out", path(dir, "b/results.csv")});
  REQUIRE(cli(first).code == kExitOk);
  REQUIRE(cli(second).code == kExitOk);

  const auto rows = parse_results_csv(read_text_file(path(dir, "a/results.csv")));
  CHECK(rows.size() == 24);
  for (const auto& r : rows) CHECK_FALSE(r.runtime_s.has_value());
  for (const char* f : {"results.csv", "front.json", "report.json", "reference_set.json",
                        "traces.json"}) {
    CHECK_MESSAGE(read_text_file((dir / "a" / f).string()) ==
                      read_text_file((dir / "b" / f).string()),
                  f);
  }

  const auto bad = cli({"bench", "--variants", "CVRP,NOPE", "--out", path(dir, "c.csv")});
  CHECK(bad.code == kExitUsage);
  CHECK(bad.err.find("unknown variant 'NOPE'") != std::string::npos);
}

TEST_CASE("report aggregates with population std") {
  const auto dir = fixture::temp_dir("cli_report");
  write_text_file(path(dir, "results.csv"), kResults);
  const auto csv = cli({"report", "--results", path(dir, "results.csv")});
  REQUIRE(csv.code == kExitOk);
  CHECK(csv.out ==
        "# std: population (denominator n)\n"
        "variant,method,runs,hv_mean,hv_std,igd_mean,igd_std,runtime_mean,runtime_std\n"
        "CVRP,moid,2,0.9000,0.1000,0.2000,0.1000,NA,NA\n"
        "CVRP,baseline,2,0.5000,0.0000,0.6000,0.0000,NA,NA\n");

  const auto md = cli({"report", "--results", path(dir, "results.csv"), "--format", "md"});
  REQUIRE(md.code == kExitOk);
  CHECK(md.out ==
        "Mean ± std per variant and method; std uses the population convention "
        "(denominator n).\n\n"
        "| Variant | Method | Runs | HV | IGD | Runtime (s) |\n"
        "|---|---|---|---|---|---|\n"
        "| CVRP | moid | 2 | **0.9000** ± 0.1000 | **0.2000** ± 0.1000 | NA |\n"
        "| CVRP | baseline | 2 | 0.5000 ± 0.0000 | 0.6000 ± 0.0000 | NA |\n");

  write_text_file(path(dir, "single.csv"),
                  "variant,method,seed,hv,igd,runtime_s,front_size\nVRP,moid,0,0.7,0.2,1.5,3\n");
  const auto single = cli({"report", "--results", path(dir, "single.csv")});
  CHECK(single.out.find("VRP,moid,1,0.7000,0.0000,0.2000,0.0000,1.5000,0.0000") !=
        std::string::npos);

  write_text_file(path(dir, "nohv.csv"), "variant,method,seed,igd,runtime_s,front_size\n");
  const auto missing = cli({"report", "--results", path(dir, "nohv.csv")});
  CHECK(missing.code == kExitUsage);
  CHECK(missing.err.find("hv") != std::string::npos);
}

TEST_CASE("config files feed subcommand options") {
  const auto dir = fixture::temp_dir("cli_config");
  const auto inst = gen(dir, "CVRP");
  write_text_file(path(dir, "cfg.json"), R"({"iters": 4, "seed": 2})");
  const auto r = cli({"--config", path(dir, "cfg.json"), "solve", "--instance", inst, "--out",
                      path(dir, "s")});
  REQUIRE(r.code == kExitOk);
  CHECK(read_json_file(path(dir, "s/trace.json")).size() == 5);

  const auto flag = cli({"--config", path(dir, "cfg.json"), "solve", "--instance", inst,
                         "--iters", "6", "--out", path(dir, "t")});
  REQUIRE(flag.code == kExitOk);
  CHECK(read_json_file(path(dir, "t/trace.json")).size() == 7);

  write_text_file(path(dir, "typo.json"), R"({"iterz": 4})");
  CHECK(cli({"--config", path(dir, "typo.json"), "solve", "--instance", inst, "--out",
             path(dir, "u")})
            .code == kExitUsage);

  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"--help"}).code == kExitOk);
}
