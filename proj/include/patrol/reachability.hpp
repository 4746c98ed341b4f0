#pragma once

#include <cstddef>
#include <vector>

#include "patrol/aggregation.hpp"
#include "patrol/scc.hpp"

namespace patrol {

struct LoopReport {
  double threshold = 0.0;
  std::vector<std::size_t> surviving_edges;  // indices into ViewGraph::edges
  std::vector<std::size_t> scc_id;           // per element
  std::vector<bool> on_loop;                 // per element
  std::vector<std::size_t> abandoned;        // element indices, ascending
};

struct LoopBreak {
  double threshold = 0.0;
  std::vector<std::size_t> newly_abandoned;  // element indices, ascending
};

/// Edges whose displayed weight is strictly greater than the threshold.
std::vector<std::size_t> filter_edges(const ViewGraph& graph, double threshold,
                                      DisplayMode mode);

/// SCCs of the view elements restricted to the given edges.
SccResult strongly_connected_components(const ViewGraph& graph,
                                        const std::vector<std::size_t>& edges);

/// Threshold, SCCs and loop membership for the view's current threshold.
/// An element is on a loop if its component has two or more elements, or it
/// keeps a self-edge.
LoopReport loop_report(const ViewGraph& graph, const ViewState& view);

/// Evaluates loop_report at every distinct displayed weight below 1 and
/// returns the thresholds at which the abandoned set grows, ascending.
std::vector<LoopBreak> loop_break_sweep(const ViewGraph& graph,
                                        const ViewState& view);

}  // namespace patrol
