#pragma once

#include <optional>
#include <string>
#include <vector>

#include "routediag/io.h"
#include "routediag/metrics.h"
#include "routediag/solver.h"

namespace routediag {

struct BenchOptions {
  // Catalog names; empty means every variant.
  std::vector<std::string> variants;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
  std::string base_path;
  std::size_t customers = 25;
  SolverConfig solver;
  // Measure wall-clock runtime per run. Off keeps every output
  // byte-identical across executions.
  bool timing = false;
  // Diagnose every front entry with DCR and ECP.
  bool diagnose = true;
};

struct BenchRun {
  std::string variant;
  std::string method;
  std::uint64_t seed = 0;
  std::vector<Solution> front;
  std::vector<TraceEntry> trace;
  std::optional<double> runtime_s;
  std::vector<SuggestionReport> dcr;
  std::vector<SuggestionReport> ecp;
};

struct BenchResult {
  std::vector<MetricRow> rows;
  std::vector<BenchRun> runs;
  // Per variant: normalization bounds and the normalized reference set.
  Json reference_sets = Json::array();
  std::vector<std::string> failures;
};

// Runs both methods over every requested variant and seed. A failing
// variant is recorded in `failures` and the rest proceed.
BenchResult run_bench(const BenchOptions& options);

std::string results_csv(const std::vector<MetricRow>& rows);

// front.json: [{variant, method, seed, front:[entries]}]
Json bench_fronts_json(const BenchResult& result);
// report.json: [{variant, method, seed, strategy, asr, reports:[...]}]
Json bench_reports_json(const BenchResult& result);
// trace.json: [{variant, method, seed, trace:[...]}]
Json bench_traces_json(const BenchResult& result);

// Parses results.csv. Throws SchemaError when a required column is
// missing and ParseError on a bad value. "NA" runtimes stay absent.
std::vector<MetricRow> parse_results_csv(const std::string& text);

// Mean and population standard deviation (denominator n).
struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

struct SummaryRow {
  std::string variant;
  std::string method;
  std::size_t runs = 0;
  Moments hv;
  Moments igd;
  // Absent unless every row of the group has a runtime.
  std::optional<Moments> runtime_s;
};

Moments moments(const std::vector<double>& values);

// One row per (variant, method) in order of first appearance.
std::vector<SummaryRow> summarize(const std::vector<MetricRow>& rows);

std::string render_summary_csv(const std::vector<SummaryRow>& rows);
// Markdown table; per variant the higher HV mean and the lower IGD mean
// are bolded when more than one method is present.
std::string render_summary_markdown(const std::vector<SummaryRow>& rows);

// Instance of a catalog variant built from the base file with default
// parameters.
ProblemInstance featured_instance(const std::string& base_path, std::size_t customers,
                                  const std::string& variant);

}  // namespace routediag
