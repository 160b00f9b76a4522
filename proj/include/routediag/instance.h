#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace routediag {

// A depot or customer location. Ids are dense: node i sits at index i of
// every node list, the depot is node 0.
struct Node {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  double demand = 0.0;
  double ready = 0.0;
  double due = 0.0;
  double service = 0.0;

  friend bool operator==(const Node&, const Node&) = default;
};

// Constraint families, in rendering order.
enum class Family {
  Capacity,
  DistanceLimit,
  TimeWindows,
  PickupDelivery,
  SameVehicle,
  Priority,
  DynamicDemand,
};

std::string_view family_name(Family family);
std::optional<Family> family_from_name(std::string_view name);

struct CapacityParams {
  double capacity = 0.0;
  friend bool operator==(const CapacityParams&, const CapacityParams&) = default;
};

struct DistanceLimitParams {
  double max_length = 0.0;
  friend bool operator==(const DistanceLimitParams&,
                         const DistanceLimitParams&) = default;
};

struct TimeWindow {
  int node = 0;
  double ready = 0.0;
  double due = 0.0;
  double service = 0.0;
  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

// One window per node, depot included. The depot window is carried for
// completeness but never enforced.
struct TimeWindowsParams {
  std::vector<TimeWindow> windows;
  friend bool operator==(const TimeWindowsParams&,
                         const TimeWindowsParams&) = default;
};

struct PickupDeliveryPair {
  int pickup = 0;
  int delivery = 0;
  friend bool operator==(const PickupDeliveryPair&,
                         const PickupDeliveryPair&) = default;
};

struct PickupDeliveryParams {
  std::vector<PickupDeliveryPair> pairs;
  friend bool operator==(const PickupDeliveryParams&,
                         const PickupDeliveryParams&) = default;
};

struct SameVehicleParams {
  std::vector<std::vector<int>> groups;
  friend bool operator==(const SameVehicleParams&,
                         const SameVehicleParams&) = default;
};

// rank[i] is the priority rank of node i (smaller = more urgent). Ordered
// pairs in `exempt` are excused from the visiting-order requirement.
struct PriorityParams {
  std::vector<int> rank;
  std::vector<std::pair<int, int>> exempt;
  friend bool operator==(const PriorityParams&, const PriorityParams&) = default;
};

// Effective demand of `node` = base demand + coefficient * sqrt(distance
// travelled from `depot` to the node along its route).
struct DynamicDemandParams {
  int node = 0;
  double coefficient = 0.0;
  int depot = 0;
  friend bool operator==(const DynamicDemandParams&,
                         const DynamicDemandParams&) = default;
};

using ConstraintParams =
    std::variant<CapacityParams, DistanceLimitParams, TimeWindowsParams,
                 PickupDeliveryParams, SameVehicleParams, PriorityParams,
                 DynamicDemandParams>;

struct ConstraintSpec {
  ConstraintParams params;

  Family family() const { return static_cast<Family>(params.index()); }

  template <typename T>
  const T& as() const {
    return std::get<T>(params);
  }
  template <typename T>
  T& as() {
    return std::get<T>(params);
  }

  friend bool operator==(const ConstraintSpec&, const ConstraintSpec&) = default;
};

// Throws StructuralError when the spec references a node outside
// [0, node_count) or breaks a family-specific invariant.
void validate_constraint(const ConstraintSpec& spec, std::size_t node_count);

// Flag bits of the variant catalog.
enum class Flag : std::uint8_t {
  C = 1 << 0,
  L = 1 << 1,
  TW = 1 << 2,
  PD = 1 << 3,
  S = 1 << 4,
  P = 1 << 5,
};

class VariantDescriptor {
 public:
  // Throws ConfigError unless (flags, dynamic) is one of the 50 catalog
  // variants.
  VariantDescriptor(std::uint8_t flags, bool dynamic);

  // Accepts catalog names plus the hyphenated alias "CVRP-L".
  static std::optional<VariantDescriptor> from_name(std::string_view name);

  // All 50 variants in catalog order.
  static const std::vector<VariantDescriptor>& catalog();

  bool has(Flag f) const { return (_flags & static_cast<std::uint8_t>(f)) != 0; }
  std::uint8_t flags() const { return _flags; }
  bool dynamic() const { return _dynamic; }
  const std::string& name() const { return _name; }

  friend bool operator==(const VariantDescriptor& a, const VariantDescriptor& b) {
    return a._flags == b._flags && a._dynamic == b._dynamic;
  }

 private:
  std::uint8_t _flags;
  bool _dynamic;
  std::string _name;
};

// Canonical name for a flag combination, e.g. "PCVRPLSTW", "DCVRP-L".
std::string variant_name(std::uint8_t flags, bool dynamic);

// Dense symmetric matrix of planar Euclidean distances.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::span<const Node> nodes);

  std::size_t size() const { return _n; }
  double operator()(std::size_t i, std::size_t j) const {
    return _d[i * _n + j];
  }

  friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;

 private:
  std::size_t _n = 0;
  std::vector<double> _d;
};

DistanceMatrix distance_matrix(std::span<const Node> nodes);

class ProblemInstance {
 public:
  ProblemInstance(std::vector<Node> nodes,
                  std::vector<ConstraintSpec> constraints,
                  VariantDescriptor descriptor, std::string description);

  const std::string& name() const { return _descriptor.name(); }
  const std::vector<Node>& nodes() const { return _nodes; }
  const std::vector<ConstraintSpec>& constraints() const { return _constraints; }
  const DistanceMatrix& distance() const { return _distance; }
  const VariantDescriptor& descriptor() const { return _descriptor; }
  const std::string& description() const { return _description; }

  std::size_t customer_count() const { return _nodes.size() - 1; }

  // Mean of all nonzero pairwise distances. Scales the structural
  // families (pickup-delivery, same-vehicle, priority) so that their
  // violation is commensurate with route length.
  double structural_penalty() const { return _structural_penalty; }

  const ConstraintSpec* find(Family family) const;

  ProblemInstance with_constraints(std::vector<ConstraintSpec> constraints) const;

  friend bool operator==(const ProblemInstance& a, const ProblemInstance& b) {
    return a._nodes == b._nodes && a._constraints == b._constraints &&
           a._descriptor == b._descriptor && a._description == b._description;
  }

 private:
  std::vector<Node> _nodes;
  std::vector<ConstraintSpec> _constraints;
  VariantDescriptor _descriptor;
  std::string _description;
  DistanceMatrix _distance;
  double _structural_penalty = 0.0;
};

struct SolomonData {
  std::string name;
  std::vector<Node> nodes;
  int vehicle_count = 0;
  double capacity = 0.0;
};

SolomonData parse_solomon(std::string_view text);
SolomonData read_solomon_file(const std::string& path);

// Depot plus the first `count` customers in file order.
std::vector<Node> truncate(std::span<const Node> nodes, std::size_t count);

// Divides every customer's ready and due time by `divisor`. Depot window
// and all service times are left alone.
std::vector<Node> scale_time_windows(std::span<const Node> nodes, double divisor);

// Raw parameter overrides for build_variant. Unset fields take the
// defaults that make the catalog variants infeasible (zero capacity,
// zero length limit, time windows divided by 10, ...).
struct VariantOverrides {
  std::optional<double> capacity;
  std::optional<double> max_length;
  std::optional<double> time_window_divisor;
  std::optional<std::vector<PickupDeliveryPair>> pickup_delivery;
  std::optional<std::vector<std::vector<int>>> same_vehicle;
  std::optional<std::vector<int>> priority_rank;
  std::optional<int> dynamic_node;
  std::optional<double> dynamic_coefficient;

  // Parses "Q=0,Lmax=0,tw_div=10,pd=1:2/3:4,s=1:2:3,p=0:1:2,dyn_node=19,
  // dyn_k=5". Throws ConfigError on an unknown key or bad value.
  static VariantOverrides parse(std::string_view text);
};

ProblemInstance build_variant(std::span<const Node> base,
                              const VariantDescriptor& descriptor,
                              const VariantOverrides& overrides = {});

// Description sentences generated for a constraint list, in the order
// used by build_variant.
std::string describe_constraints(const std::vector<ConstraintSpec>& constraints);

}  // namespace routediag
