#include "routediag/bench.h"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "routediag/errors.h"

namespace routediag {

namespace {

std::vector<ObjectiveVector> images(const std::vector<Solution>& front) {
  std::vector<ObjectiveVector> out;
  out.reserve(front.size());
  for (const auto& s : front) out.push_back(s.objectives);
  return out;
}

std::vector<SuggestionReport> diagnose_front(const std::vector<Solution>& front,
                                             const ProblemInstance& inst, Strategy strategy) {
  DiagnosisConfig cfg;
  cfg.strategy = strategy;
  std::vector<SuggestionReport> out;
  for (std::size_t i = 0; i < front.size(); ++i) {
    out.push_back(diagnose(front[i].plan, inst, cfg, i));
  }
  return out;
}

Json reports_json(const std::vector<SuggestionReport>& reports) {
  Json j = Json::array();
  for (const auto& r : reports) j.push_back(report_to_json(r));
  return j;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& text, std::size_t line) {
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    throw ParseError(fmt::format("bad number '{}'", text), line);
  }
  return value;
}

std::string cell(double value) { return fmt::format("{:.4f}", value); }

}  // namespace

ProblemInstance featured_instance(const std::string& base_path, std::size_t customers,
                                  const std::string& variant) {
  const auto descriptor = VariantDescriptor::from_name(variant);
  if (!descriptor) throw ConfigError(fmt::format("unknown variant '{}'", variant));
  const SolomonData data = read_solomon_file(base_path);
  return build_variant(truncate(data.nodes, customers), *descriptor);
}

BenchResult run_bench(const BenchOptions& options) {
  options.solver.validate();
  std::vector<std::string> names = options.variants;
  if (names.empty()) {
    for (const auto& d : VariantDescriptor::catalog()) names.push_back(d.name());
  }
  const SolomonData data = read_solomon_file(options.base_path);
  const auto base = truncate(data.nodes, options.customers);

  BenchResult result;
  for (const auto& name : names) {
    std::vector<BenchRun> runs;
    try {
      const auto descriptor = VariantDescriptor::from_name(name);
      if (!descriptor) throw ConfigError(fmt::format("unknown variant '{}'", name));
      const ProblemInstance inst = build_variant(base, *descriptor);
      for (std::size_t k = 0; k < options.runs; ++k) {
        SolverConfig cfg = options.solver;
        cfg.seed = options.seed + k;
        for (const char* method : {"moid", "baseline"}) {
          BenchRun run;
          run.variant = descriptor->name();
          run.method = method;
          run.seed = cfg.seed;
          const auto start = std::chrono::steady_clock::now();
          if (run.method == "moid") {
            cfg.mode = SolverMode::multi_objective;
            RunResult r = routediag::run(inst, cfg);
            run.front = std::move(r.archive);
            run.trace = std::move(r.trace);
          } else {
            cfg.mode = SolverMode::baseline;
            BaselineResult r = run_baseline(inst, cfg);
            run.front = {std::move(r.best)};
            run.trace = std::move(r.trace);
          }
          if (options.timing) {
            run.runtime_s =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
          }
          if (options.diagnose) {
            run.dcr = diagnose_front(run.front, inst, Strategy::dcr);
            run.ecp = diagnose_front(run.front, inst, Strategy::ecp);
          }
          runs.push_back(std::move(run));
        }
      }
    } catch (const Error& e) {
      result.failures.push_back(fmt::format("{}: {}", name, e.what()));
      continue;
    }

    // Shared normalization over every method and seed of this variant.
    std::vector<std::vector<ObjectiveVector>> fronts;
    for (const auto& r : runs) fronts.push_back(images(r.front));
    const auto bounds = NormalizationBounds::from_fronts(fronts);
    std::vector<std::vector<ObjectiveVector>> normalized;
    bool degenerate = false;
    for (const auto& f : fronts) {
      auto n = normalize(f, bounds);
      degenerate = degenerate || n.degenerate;
      normalized.push_back(std::move(n.points));
    }
    const auto reference = build_reference_set(normalized);
    result.reference_sets.push_back({
        {"variant", runs.front().variant},
        {"ideal", {{"cost", bounds.ideal.cost}, {"violation", bounds.ideal.violation}}},
        {"nadir", {{"cost", bounds.nadir.cost}, {"violation", bounds.nadir.violation}}},
        {"degenerate", degenerate},
        {"reference_set", points_to_json(reference)},
    });
    for (std::size_t i = 0; i < runs.size(); ++i) {
      MetricRow row;
      row.variant = runs[i].variant;
      row.method = runs[i].method;
      row.seed = runs[i].seed;
      row.hv = hypervolume_2d(normalized[i], bounds.reference);
      row.igd = igd(normalized[i], reference);
      row.runtime_s = runs[i].runtime_s;
      row.front_size = runs[i].front.size();
      result.rows.push_back(std::move(row));
      result.runs.push_back(std::move(runs[i]));
    }
  }
  return result;
}

std::string results_csv(const std::vector<MetricRow>& rows) {
  std::string out = "variant,method,seed,hv,igd,runtime_s,front_size\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{}\n", r.variant, r.method, r.seed, r.hv, r.igd,
                       r.runtime_s ? fmt::format("{:.3f}", *r.runtime_s) : "NA", r.front_size);
  }
  return out;
}

std::vector<MetricRow> parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("header", "empty results file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line, ',');
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < header.size(); ++i) column[header[i]] = i;
  for (const char* name : {"variant", "method", "seed", "hv", "igd", "runtime_s", "front_size"}) {
    if (!column.count(name)) throw SchemaError(name, "missing column");
  }
  std::vector<MetricRow> rows;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != header.size()) {
      throw ParseError(fmt::format("expected {} fields, got {}", header.size(), fields.size()),
                       number);
    }
    const auto at = [&](const char* name) -> const std::string& { return fields[column[name]]; };
    MetricRow row;
    row.variant = at("variant");
    row.method = at("method");
    row.seed = static_cast<std::uint64_t>(to_double(at("seed"), number));
    row.hv = to_double(at("hv"), number);
    row.igd = to_double(at("igd"), number);
    if (at("runtime_s") != "NA") row.runtime_s = to_double(at("runtime_s"), number);
    row.front_size = static_cast<std::size_t>(to_double(at("front_size"), number));
    rows.push_back(std::move(row));
  }
  return rows;
}

Moments moments(const std::vector<double>& values) {
  Moments m;
  if (values.empty()) return m;
  double sum = 0.0;
  for (double v : values) sum += v;
  m.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - m.mean) * (v - m.mean);
  m.std = std::sqrt(sq / static_cast<double>(values.size()));
  return m;
}

std::vector<SummaryRow> summarize(const std::vector<MetricRow>& rows) {
  std::vector<std::pair<std::string, std::string>> order;
  std::map<std::pair<std::string, std::string>, std::vector<const MetricRow*>> groups;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.variant, r.method);
    if (!groups.count(key)) order.push_back(key);
    groups[key].push_back(&r);
  }
  std::vector<SummaryRow> out;
  for (const auto& key : order) {
    const auto& group = groups[key];
    std::vector<double> hv, ig, rt;
    for (const auto* r : group) {
      hv.push_back(r->hv);
      ig.push_back(r->igd);
      if (r->runtime_s) rt.push_back(*r->runtime_s);
    }
    SummaryRow s;
    s.variant = key.first;
    s.method = key.second;
    s.runs = group.size();
    s.hv = moments(hv);
    s.igd = moments(ig);
    if (rt.size() == group.size()) s.runtime_s = moments(rt);
    out.push_back(std::move(s));
  }
  return out;
}

std::string render_summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "# std: population (denominator n)\n";
  out += "variant,method,runs,hv_mean,hv_std,igd_mean,igd_std,runtime_mean,runtime_std\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.variant, r.method, r.runs, cell(r.hv.mean),
                       cell(r.hv.std), cell(r.igd.mean), cell(r.igd.std),
                       r.runtime_s ? cell(r.runtime_s->mean) : "NA",
                       r.runtime_s ? cell(r.runtime_s->std) : "NA");
  }
  return out;
}

std::string render_summary_markdown(const std::vector<SummaryRow>& rows) {
  std::map<std::string, std::vector<const SummaryRow*>> by_variant;
  for (const auto& r : rows) by_variant[r.variant].push_back(&r);
  const auto bold = [](std::string text, bool on) { return on ? "**" + text + "**" : text; };

  std::string out = "Mean ± std per variant and method; std uses the population convention "
                    "(denominator n).\n\n";
  out += "| Variant | Method | Runs | HV | IGD | Runtime (s) |\n";
  out += "|---|---|---|---|---|---|\n";
  for (const auto& r : rows) {
    const auto& peers = by_variant[r.variant];
    bool best_hv = peers.size() > 1;
    bool best_igd = peers.size() > 1;
    for (const auto* p : peers) {
      if (p->hv.mean > r.hv.mean) best_hv = false;
      if (p->igd.mean < r.igd.mean) best_igd = false;
    }
    const std::string runtime =
        r.runtime_s ? fmt::format("{} ± {}", cell(r.runtime_s->mean), cell(r.runtime_s->std))
                    : "NA";
    out += fmt::format("| {} | {} | {} | {} ± {} | {} ± {} | {} |\n", r.variant, r.method, r.runs,
                       bold(cell(r.hv.mean), best_hv), cell(r.hv.std),
                       bold(cell(r.igd.mean), best_igd), cell(r.igd.std), runtime);
  }
  return out;
}

Json bench_fronts_json(const BenchResult& result) {
  Json j = Json::array();
  for (const auto& run : result.runs) {
    Json front = Json::array();
    for (const auto& s : run.front) {
      Json e;
      e["routes"] = s.plan.routes;
      e["cost"] = s.objectives.cost;
      e["violation"] = s.objectives.violation;
      front.push_back(std::move(e));
    }
    j.push_back({{"variant", run.variant},
                 {"method", run.method},
                 {"seed", run.seed},
                 {"front", std::move(front)}});
  }
  return j;
}

Json bench_reports_json(const BenchResult& result) {
  Json j = Json::array();
  for (const auto& run : result.runs) {
    for (const auto* reports : {&run.dcr, &run.ecp}) {
      if (reports->empty()) continue;
      const auto rate = asr(*reports);
      j.push_back({{"variant", run.variant},
                   {"method", run.method},
                   {"seed", run.seed},
                   {"strategy", std::string(strategy_name(reports->front().strategy))},
                   {"asr", rate ? Json(*rate) : Json(nullptr)},
                   {"reports", reports_json(*reports)}});
    }
  }
  return j;
}

Json bench_traces_json(const BenchResult& result) {
  Json j = Json::array();
  for (const auto& run : result.runs) {
    j.push_back({{"variant", run.variant},
                 {"method", run.method},
                 {"seed", run.seed},
                 {"trace", trace_to_json(run.trace, run.runtime_s.has_value())}});
  }
  return j;
}

}  // namespace routediag
