#include "patrol/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "patrol/error.hpp"

namespace patrol {

std::string_view to_string(AggregationRule rule) noexcept {
  switch (rule) {
    case AggregationRule::kSum: return "sum";
    case AggregationRule::kMax: return "max";
    case AggregationRule::kAverage: return "average";
  }
  return "average";
}

std::string_view to_string(DisplayMode mode) noexcept {
  return mode == DisplayMode::kStrategy ? "strategy" : "path_preference";
}

AggregationRule parse_rule(std::string_view name) {
  if (name == "sum") return AggregationRule::kSum;
  if (name == "max") return AggregationRule::kMax;
  if (name == "average") return AggregationRule::kAverage;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown aggregation rule '" + std::string(name) + "'");
}

DisplayMode parse_display_mode(std::string_view name) {
  if (name == "strategy") return DisplayMode::kStrategy;
  if (name == "path_preference") return DisplayMode::kPathPreference;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown display mode '" + std::string(name) + "'");
}

void validate_threshold(double threshold) {
  if (!(threshold >= 0.0 && threshold < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "threshold must lie in [0, 1)",
                {}, threshold, true);
  }
}

double ViewGraph::display_weight(const ViewEdge& edge, DisplayMode mode) const {
  if (mode == DisplayMode::kStrategy) return edge.weight;
  if (!has_flows) {
    throw Error(ErrorCode::kInvalidArgument,
                "path preference requires a stationary distribution");
  }
  return edge.relative_flow;
}

namespace {

struct Accumulator {
  double sum = 0.0;
  double max = 0.0;
  double flow = 0.0;
  std::vector<std::size_t> provenance;
};

double aggregate(AggregationRule rule, const Accumulator& acc,
                 std::size_t source_members) {
  switch (rule) {
    case AggregationRule::kSum: return acc.sum;
    case AggregationRule::kMax: return acc.max;
    case AggregationRule::kAverage:
      return acc.sum / static_cast<double>(source_members);
  }
  return acc.sum;
}

}  // namespace

ViewGraph build_view(const Strategy& strategy, const ViewState& view,
                     const StationaryDistribution* pi) {
  for (LocationIndex loc : view.open_locations) {
    if (loc >= strategy.location_count()) {
      throw Error(ErrorCode::kUnknownReference,
                  "open location index " + std::to_string(loc) + " out of range");
    }
  }
  if (pi && pi->mass.size() != strategy.node_count()) {
    throw Error(ErrorCode::kOrderMismatch,
                "stationary distribution does not match the strategy's nodes");
  }

  ViewGraph graph;
  graph.rule = view.rule;
  graph.has_flows = pi != nullptr;
  graph.node_element.resize(strategy.node_count());
  graph.node_location.resize(strategy.node_count());
  graph.location_open.resize(strategy.location_count(), false);

  for (LocationIndex loc = 0; loc < strategy.location_count(); ++loc) {
    const auto& members = strategy.locations()[loc].member_nodes;
    graph.location_members.push_back(members);
    for (NodeIndex v : members) graph.node_location[v] = loc;
    if (view.open_locations.contains(loc)) {
      graph.location_open[loc] = true;
      for (NodeIndex v : members) {
        graph.node_element[v] = graph.elements.size();
        graph.elements.push_back(ViewElement{ElementKind::kNode, loc, v, {v}});
      }
    } else {
      for (NodeIndex v : members) graph.node_element[v] = graph.elements.size();
      graph.elements.push_back(ViewElement{ElementKind::kLocation, loc, members.front(), members});
    }
  }

  std::map<std::pair<std::size_t, std::size_t>, Accumulator> grouped;
  std::map<std::pair<LocationIndex, LocationIndex>, Accumulator> by_location;
  const auto edges = strategy.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const Edge& edge = edges[e];
    const double flow = pi ? pi->mass[edge.from] * edge.p : 0.0;
    auto& acc = grouped[{graph.node_element[edge.from], graph.node_element[edge.to]}];
    acc.sum += edge.p;
    acc.max = std::max(acc.max, edge.p);
    acc.flow += flow;
    acc.provenance.push_back(e);

    const LocationIndex from_loc = graph.node_location[edge.from];
    const LocationIndex to_loc = graph.node_location[edge.to];
    if (from_loc != to_loc) {
      auto& link = by_location[{from_loc, to_loc}];
      link.sum += edge.p;
      link.max = std::max(link.max, edge.p);
    }
  }

  double max_flow = 0.0;
  graph.edges.reserve(grouped.size());
  for (auto& [key, acc] : grouped) {
    const ViewElement& source = graph.elements[key.first];
    ViewEdge edge;
    edge.from = key.first;
    edge.to = key.second;
    edge.weight = aggregate(view.rule, acc, source.members.size());
    edge.flow = acc.flow;
    edge.internal = key.first == key.second && source.kind == ElementKind::kLocation &&
                    source.members.size() > 1;
    edge.provenance = std::move(acc.provenance);
    max_flow = std::max(max_flow, edge.flow);
    graph.edges.push_back(std::move(edge));
  }
  if (pi) {
    for (auto& edge : graph.edges) {
      edge.relative_flow = max_flow > 0.0 ? edge.flow / max_flow : 0.0;
    }
  }

  for (const auto& [key, acc] : by_location) {
    const std::size_t members = graph.location_members[key.first].size();
    graph.location_links.push_back({key.first, key.second, aggregate(view.rule, acc, members)});
  }
  return graph;
}

std::vector<double> aggregate_stationary(const StationaryDistribution& pi,
                                         const ViewState& view,
                                         const Strategy& strategy) {
  if (pi.mass.size() != strategy.node_count()) {
    throw Error(ErrorCode::kOrderMismatch,
                "stationary distribution does not match the strategy's nodes");
  }
  std::vector<double> mass;
  for (LocationIndex loc = 0; loc < strategy.location_count(); ++loc) {
    const auto& members = strategy.locations()[loc].member_nodes;
    if (view.open_locations.contains(loc)) {
      for (NodeIndex v : members) mass.push_back(pi.mass[v]);
    } else {
      double total = 0.0;
      for (NodeIndex v : members) total += pi.mass[v];
      mass.push_back(total);
    }
  }
  return mass;
}

}  // namespace patrol
