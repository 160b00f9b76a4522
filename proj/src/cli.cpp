#include "routediag/cli.h"

#include <algorithm>
#include <filesystem>
#include <istream>
#include <memory>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"

#include "routediag/bench.h"
#include "routediag/errors.h"
#include "routediag/io.h"
#include "routediag/llm_bridge.h"
#include "routediag/metrics.h"

#ifndef ROUTEDIAG_DEFAULT_BASE
#define ROUTEDIAG_DEFAULT_BASE "data/C103.txt"
#endif

namespace routediag {

namespace {

namespace fs = std::filesystem;

// Reads --config files: a flat JSON object whose keys are long flag
// names of the active subcommand without dashes, e.g.
// {"iters": 50, "variants": "CVRP,DCVRP"}.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : _root(root) {}

  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    Json doc = Json::object();
    for (const CLI::Option* opt : app->get_options()) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string name = opt->get_lnames().front();
      if (opt->count() > 0) {
        doc[name] = opt->as<std::string>();
      } else if (default_also && !opt->get_default_str().empty()) {
        doc[name] = opt->get_default_str();
      }
    }
    return doc.dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    Json doc;
    try {
      doc = Json::parse(input);
    } catch (const Json::parse_error& e) {
      throw CLI::ConversionError(fmt::format("config: {}", e.what()));
    }
    if (!doc.is_object()) throw CLI::ConversionError("config: top level must be an object");
    std::vector<std::string> parents;
    for (const CLI::App* sub : _root->get_subcommands()) parents.push_back(sub->get_name());
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : doc.items()) {
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  const CLI::App* _root;

  static std::string scalar(const Json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError(fmt::format("config: unsupported value {}", v.dump()));
  }
};

// The option lives on the root app; subcommands fall through to it.
void add_config(CLI::App* app) {
  app->set_config("--config", "", "JSON file with flag values for the subcommand");
  app->config_formatter(std::make_shared<JsonConfig>(app));
  app->allow_config_extras(CLI::config_extras_mode::error);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string catalog_listing() {
  std::string out = "valid variants:";
  for (const auto& d : VariantDescriptor::catalog()) out += " " + d.name();
  return out;
}

// Usage and input-shape problems exit 2; everything else the library
// raises is a domain failure.
int exit_code(const Error& e) {
  if (dynamic_cast<const SchemaError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const StructuralError*>(&e)) {
    return kExitUsage;
  }
  return kExitDomain;
}

void ensure_parent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

void write_file(const std::string& path, const std::string& content) {
  ensure_parent(path);
  write_text_file(path, content);
}

ProblemInstance load_instance(const std::string& path) {
  return instance_from_json(read_json_file(path));
}

struct GenArgs {
  std::string base = ROUTEDIAG_DEFAULT_BASE;
  std::size_t n = 25;
  std::string variant;
  std::string params;
  std::string out;
};

int do_gen(const GenArgs& a, std::ostream& out, std::ostream& err) {
  const auto descriptor = VariantDescriptor::from_name(a.variant);
  if (!descriptor) {
    err << fmt::format("unknown variant '{}'\n{}\n", a.variant, catalog_listing());
    return kExitUsage;
  }
  const auto overrides = VariantOverrides::parse(a.params);
  const SolomonData data = read_solomon_file(a.base);
  const ProblemInstance inst = build_variant(truncate(data.nodes, a.n), *descriptor, overrides);
  write_file(a.out, dump(instance_to_json(inst)));
  out << inst.description() << "\n";
  return kExitOk;
}

struct SolveArgs {
  std::string instance;
  std::string mode = "moid";
  std::size_t iters = 100;
  std::size_t pop = 10;
  std::uint64_t seed = 0;
  std::string out;
  std::string timing = "off";
  std::string repair = "feasibility_first";
  std::string dominator = "min_crowding";
  double timeout = 1.0;
};

int do_solve(const SolveArgs& a, std::ostream& out) {
  const ProblemInstance inst = load_instance(a.instance);
  SolverConfig cfg;
  cfg.iterations = a.iters;
  cfg.population = a.pop;
  cfg.seed = a.seed;
  cfg.spls_timeout = a.timeout;
  cfg.repair_rule =
      a.repair == "min_cost" ? RepairRule::min_cost : RepairRule::feasibility_first;
  cfg.dominator_choice = a.dominator == "max_crowding" ? DominatorChoice::max_crowding
                                                       : DominatorChoice::min_crowding;
  cfg.mode = a.mode == "baseline" ? SolverMode::baseline : SolverMode::multi_objective;
  cfg.validate();
  const bool timing = a.timing == "wall";

  std::vector<Solution> front;
  std::vector<Solution> population;
  std::vector<TraceEntry> trace;
  if (cfg.mode == SolverMode::baseline) {
    BaselineResult r = run_baseline(inst, cfg);
    front = {r.best};
    population = {std::move(r.best)};
    trace = std::move(r.trace);
  } else {
    RunResult r = run(inst, cfg);
    front = std::move(r.archive);
    population = std::move(r.final_population.members);
    trace = std::move(r.trace);
  }
  fs::create_directories(a.out);
  const fs::path dir(a.out);
  write_text_file((dir / "front.json").string(), dump(front_to_json(front, inst)));
  write_text_file((dir / "trace.json").string(), dump(trace_to_json(trace, timing)));
  write_text_file((dir / "population.json").string(), dump(front_to_json(population, inst)));
  out << fmt::format("{}: {} front entries, final archive HV {}\n", inst.name(), front.size(),
                     trace.empty() ? 0.0 : trace.back().archive_hv);
  return kExitOk;
}

struct LlmArgs {
  bool enabled = false;
  std::string endpoint = ChatClientConfig{}.endpoint;
  std::string model = ChatClientConfig{}.model;
  double timeout = ChatClientConfig{}.timeout_s;
};

struct DiagnoseArgs {
  std::string instance;
  std::string front;
  std::string strategy = "ecp";
  double p = 1.0;
  std::string whitelist;
  std::string out;
  LlmArgs llm;
};

int do_diagnose(const DiagnoseArgs& a, std::ostream& out, std::ostream& err) {
  const ProblemInstance inst = load_instance(a.instance);
  const auto plans = front_from_json(read_json_file(a.front));
  DiagnosisConfig cfg;
  cfg.strategy = *strategy_from_name(a.strategy);
  cfg.p = a.p;
  if (!a.whitelist.empty()) {
    cfg.whitelist.clear();
    for (const auto& name : split_list(a.whitelist)) {
      const auto param = parameter_from_name(name);
      if (!param) throw ConfigError(fmt::format("unknown parameter '{}'", name));
      cfg.whitelist.push_back(*param);
    }
  }
  cfg.validate();

  ChatClientConfig chat;
  chat.enabled = a.llm.enabled;
  chat.endpoint = a.llm.endpoint;
  chat.model = a.llm.model;
  chat.timeout_s = a.llm.timeout;
  chat.validate();

  HttpChatTransport http;
  Json doc = Json::array();
  std::vector<SuggestionReport> reports;
  std::size_t failures = 0;
  for (std::size_t i = 0; i < plans.size(); ++i) {
    try {
      SuggestionReport report = diagnose(plans[i], inst, cfg, i);
      if (chat.enabled) {
        RephraseOutcome phrased = rephrase(report, chat, &http);
        for (const auto& w : phrased.warnings) err << fmt::format("solution {}: {}\n", i, w);
        report.text = std::move(phrased.text);
      }
      doc.push_back(report_to_json(report));
      reports.push_back(std::move(report));
    } catch (const Error& e) {
      ++failures;
      doc.push_back({{"solution_index", i}, {"error", e.what()}});
      err << fmt::format("solution {}: {}\n", i, e.what());
    }
  }
  write_file(a.out, dump(doc));
  const auto rate = asr(reports);
  out << fmt::format("diagnosed {} solutions with {}, {} errors, ASR {}\n", plans.size(),
                     strategy_name(cfg.strategy), failures,
                     rate ? format_number(*rate) : std::string("n/a"));
  return failures > 0 ? kExitDomain : kExitOk;
}

struct BenchArgs {
  std::string variants = "all";
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  std::size_t iters = 100;
  std::size_t pop = 10;
  double timeout = 1.0;
  std::string base = ROUTEDIAG_DEFAULT_BASE;
  std::size_t n = 25;
  std::string timing = "off";
  bool no_diagnose = false;
  std::string out;
};

int do_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  BenchOptions options;
  if (a.variants != "all") {
    options.variants = split_list(a.variants);
    for (const auto& name : options.variants) {
      if (!VariantDescriptor::from_name(name)) {
        err << fmt::format("unknown variant '{}'\n{}\n", name, catalog_listing());
        return kExitUsage;
      }
    }
  }
  if (a.runs == 0) throw ConfigError("--runs must be positive");
  options.runs = a.runs;
  options.seed = a.seed;
  options.base_path = a.base;
  options.customers = a.n;
  options.solver.iterations = a.iters;
  options.solver.population = a.pop;
  options.solver.spls_timeout = a.timeout;
  options.timing = a.timing == "wall";
  options.diagnose = !a.no_diagnose;

  const BenchResult result = run_bench(options);
  const fs::path csv(a.out);
  const fs::path dir = csv.parent_path();
  write_file(a.out, results_csv(result.rows));
  write_text_file((dir / "front.json").string(), dump(bench_fronts_json(result)));
  write_text_file((dir / "report.json").string(), dump(bench_reports_json(result)));
  write_text_file((dir / "reference_set.json").string(), dump(result.reference_sets));
  write_text_file((dir / "traces.json").string(), dump(bench_traces_json(result)));
  for (const auto& f : result.failures) err << "failed: " << f << "\n";
  out << fmt::format("{} rows written to {}\n", result.rows.size(), a.out);
  return result.failures.empty() ? kExitOk : kExitDomain;
}

struct ReportArgs {
  std::string results;
  std::string format = "csv";
  std::string out;
};

int do_report(const ReportArgs& a, std::ostream& out) {
  const auto rows = parse_results_csv(read_text_file(a.results));
  const auto summary = summarize(rows);
  const std::string text =
      a.format == "md" ? render_summary_markdown(summary) : render_summary_csv(summary);
  if (a.out.empty()) {
    out << text;
  } else {
    write_file(a.out, text);
  }
  return kExitOk;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Constraint diagnosis for vehicle routing variants", "routediag"};
  app.require_subcommand(1);
  app.fallthrough();
  add_config(&app);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Build a variant instance from a Solomon file");
  gen_cmd->allow_config_extras(CLI::config_extras_mode::error);
  gen_cmd->add_option("--base", gen.base, "Solomon instance file")->capture_default_str();
  gen_cmd->add_option("--n", gen.n, "Customers kept from the base file")->capture_default_str();
  gen_cmd->add_option("--variant", gen.variant, "Catalog variant name")->required();
  gen_cmd->add_option("--params", gen.params, "Overrides, e.g. Q=50,Lmax=200,tw_div=10");
  gen_cmd->add_option("--out", gen.out, "instance.json path")->required();

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Optimise a plan for an instance");
  solve_cmd->allow_config_extras(CLI::config_extras_mode::error);
  solve_cmd->add_option("--instance", solve.instance, "instance.json")->required();
  solve_cmd->add_option("--mode", solve.mode)
      ->check(CLI::IsMember({"moid", "baseline"}))
      ->capture_default_str();
  solve_cmd->add_option("--iters", solve.iters, "Iterations T")->capture_default_str();
  solve_cmd->add_option("--pop", solve.pop, "Population size N")->capture_default_str();
  solve_cmd->add_option("--seed", solve.seed)->capture_default_str();
  solve_cmd->add_option("--out", solve.out, "Output directory")->required();
  solve_cmd->add_option("--timing", solve.timing)
      ->check(CLI::IsMember({"off", "wall"}))
      ->capture_default_str();
  solve_cmd->add_option("--repair", solve.repair)
      ->check(CLI::IsMember({"min_cost", "feasibility_first"}))
      ->capture_default_str();
  solve_cmd->add_option("--dominator", solve.dominator)
      ->check(CLI::IsMember({"min_crowding", "max_crowding"}))
      ->capture_default_str();
  solve_cmd->add_option("--timeout", solve.timeout, "Local search cap, seconds")
      ->capture_default_str();

  DiagnoseArgs diag;
  auto* diag_cmd = app.add_subcommand("diagnose", "Suggest parameter adjustments per solution");
  diag_cmd->allow_config_extras(CLI::config_extras_mode::error);
  diag_cmd->add_option("--instance", diag.instance)->required();
  diag_cmd->add_option("--front", diag.front, "front.json")->required();
  diag_cmd->add_option("--strategy", diag.strategy)
      ->check(CLI::IsMember({"dcr", "ecp", "DCR", "ECP"}))
      ->capture_default_str();
  diag_cmd->add_option("--p", diag.p, "Norm of the ECP objective")->capture_default_str();
  diag_cmd->add_option("--whitelist", diag.whitelist,
                       "Adjustable parameters, e.g. capacity,due_shift");
  diag_cmd->add_option("--out", diag.out, "report.json path")->required();
  diag_cmd->add_flag("--llm", diag.llm.enabled, "Rephrase suggestions through the chat endpoint");
  diag_cmd->add_option("--llm-endpoint", diag.llm.endpoint)->capture_default_str();
  diag_cmd->add_option("--llm-model", diag.llm.model)->capture_default_str();
  diag_cmd->add_option("--llm-timeout", diag.llm.timeout)->capture_default_str();

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run both methods over variants and seeds");
  bench_cmd->allow_config_extras(CLI::config_extras_mode::error);
  bench_cmd->add_option("--variants", bench.variants, "all or comma-separated names")
      ->capture_default_str();
  bench_cmd->add_option("--runs", bench.runs, "Seeds per variant")->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "First seed")->capture_default_str();
  bench_cmd->add_option("--iters", bench.iters)->capture_default_str();
  bench_cmd->add_option("--pop", bench.pop)->capture_default_str();
  bench_cmd->add_option("--timeout", bench.timeout)->capture_default_str();
  bench_cmd->add_option("--base", bench.base)->capture_default_str();
  bench_cmd->add_option("--n", bench.n)->capture_default_str();
  bench_cmd->add_option("--timing", bench.timing)
      ->check(CLI::IsMember({"off", "wall"}))
      ->capture_default_str();
  bench_cmd->add_flag("--no-diagnose", bench.no_diagnose, "Skip report.json diagnosis");
  bench_cmd->add_option("--out", bench.out, "results.csv path")->required();

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Aggregate results.csv per variant and method");
  report_cmd->allow_config_extras(CLI::config_extras_mode::error);
  report_cmd->add_option("--results", report.results)->required();
  report_cmd->add_option("--format", report.format)
      ->check(CLI::IsMember({"csv", "md"}))
      ->capture_default_str();
  report_cmd->add_option("--out", report.out, "Write here instead of stdout");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen_cmd) return do_gen(gen, out, err);
    if (*solve_cmd) return do_solve(solve, out);
    if (*diag_cmd) {
      std::transform(diag.strategy.begin(), diag.strategy.end(), diag.strategy.begin(),
                     [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
      return do_diagnose(diag, out, err);
    }
    if (*bench_cmd) return do_bench(bench, out, err);
    if (*report_cmd) return do_report(report, out);
  } catch (const SchemaError& e) {
    err << "schema error at " << e.path() << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e);
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace routediag
