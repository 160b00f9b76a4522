#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "routediag/diagnosis.h"
#include "routediag/evaluation.h"
#include "routediag/instance.h"
#include "routediag/solver.h"

namespace routediag {

using Json = nlohmann::ordered_json;

// instance.json:
//   {name, nodes:[{id,x,y,demand,ready,due,service}],
//    constraints:[{family, ...params}], description}
// Parameters per family: Capacity {Q}; DistanceLimit {Lmax};
// TimeWindows {windows:[{node,ready,due,service}]}; PickupDelivery
// {pairs:[[p,d]]}; SameVehicle {groups:[[ids]]}; Priority {rank:[...],
// exempt:[[i,j]]}; DynamicDemand {node,k,depot}.
Json instance_to_json(const ProblemInstance& inst);

// Throws SchemaError naming the offending field.
ProblemInstance instance_from_json(const Json& doc);

// Single constraint object of the instance schema. `path` prefixes
// SchemaError field paths.
Json constraint_to_json(const ConstraintSpec& spec);
ConstraintSpec constraint_from_json(const Json& doc, const std::string& path);

// One front.json entry: {routes, cost, violation, breakdown:[{family,
// subject, excess}]}.
Json solution_to_json(const RoutePlan& plan, const ProblemInstance& inst);
Json front_to_json(std::span<const Solution> front, const ProblemInstance& inst);

// Reads the routes of every entry of a front.json array.
std::vector<RoutePlan> front_from_json(const Json& doc);

// trace.json: [{iter, archive_size, archive_hv, elapsed_ms,
// population_hash}]. elapsed_ms is null unless `timing` is set.
Json trace_to_json(std::span<const TraceEntry> trace, bool timing);

// {solution_index, strategy, adjustments:[{family, path, old, new}],
//  residual_violation, text}
Json report_to_json(const SuggestionReport& report);

Json points_to_json(std::span<const ObjectiveVector> points);

// Pretty-printed with a trailing newline.
std::string dump(const Json& doc);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

// Parses a file as JSON; throws ParseError with the file name on bad
// syntax.
Json read_json_file(const std::string& path);

}  // namespace routediag
