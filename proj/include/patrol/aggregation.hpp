#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "patrol/chain.hpp"
#include "patrol/strategy.hpp"

namespace patrol {

enum class AggregationRule { kSum, kMax, kAverage };
enum class DisplayMode { kStrategy, kPathPreference };

std::string_view to_string(AggregationRule rule) noexcept;
std::string_view to_string(DisplayMode mode) noexcept;
/// Throws InvalidArgument for unknown names.
AggregationRule parse_rule(std::string_view name);
DisplayMode parse_display_mode(std::string_view name);

struct ViewState {
  std::set<LocationIndex> open_locations;
  AggregationRule rule = AggregationRule::kAverage;
  double threshold = 0.0;  // in [0, 1)
  DisplayMode display_mode = DisplayMode::kStrategy;
};

/// Throws InvalidArgument when threshold is outside [0, 1).
void validate_threshold(double threshold);

enum class ElementKind { kLocation, kNode };

struct ViewElement {
  ElementKind kind = ElementKind::kLocation;
  LocationIndex location = 0;
  NodeIndex node = 0;                 // meaningful for kNode
  std::vector<NodeIndex> members;     // nodes the element stands for
};

struct ViewEdge {
  std::size_t from = 0;  // element indices
  std::size_t to = 0;
  double weight = 0.0;   // per aggregation rule
  // Sum of absolute stationary flows of the underlying edges; set when the
  // view was built with a stationary distribution.
  double flow = 0.0;
  double relative_flow = 0.0;
  // Edge internal to a closed location, shown as a self-connection.
  bool internal = false;
  std::vector<std::size_t> provenance;  // indices into Strategy::edges()
};

// Directed location-to-location weight as if both locations were closed.
struct LocationLink {
  LocationIndex from = 0;
  LocationIndex to = 0;
  double weight = 0.0;
};

struct ViewGraph {
  AggregationRule rule = AggregationRule::kAverage;
  bool has_flows = false;
  std::vector<ViewElement> elements;
  std::vector<ViewEdge> edges;  // sorted by (from, to)
  std::vector<std::size_t> node_element;        // node -> element
  std::vector<NodeIndex> node_location;          // node -> location
  std::vector<std::vector<NodeIndex>> location_members;
  std::vector<bool> location_open;
  std::vector<LocationLink> location_links;      // excludes self links

  /// The weight drawn for the given mode: the rule weight, or the relative
  /// stationary flow in path-preference mode.
  double display_weight(const ViewEdge& edge, DisplayMode mode) const;
};

/// Collapses closed locations into single elements and aggregates parallel
/// edges by the rule. Average divides the summed probabilities by the
/// source element's member count, which keeps every row stochastic. With a
/// stationary distribution the edges also carry aggregated flows.
ViewGraph build_view(const Strategy& strategy, const ViewState& view,
                     const StationaryDistribution* pi = nullptr);

/// Per-element time share: closed locations sum their members' mass.
std::vector<double> aggregate_stationary(const StationaryDistribution& pi,
                                         const ViewState& view,
                                         const Strategy& strategy);

}  // namespace patrol
