#include "patrol/reachability.hpp"

#include <algorithm>

namespace patrol {

std::vector<std::size_t> filter_edges(const ViewGraph& graph, double threshold,
                                      DisplayMode mode) {
  validate_threshold(threshold);
  std::vector<std::size_t> surviving;
  surviving.reserve(graph.edges.size());
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    if (graph.display_weight(graph.edges[e], mode) > threshold) surviving.push_back(e);
  }
  return surviving;
}

SccResult strongly_connected_components(const ViewGraph& graph,
                                        const std::vector<std::size_t>& edges) {
  Adjacency adjacency(graph.elements.size());
  for (std::size_t e : edges) {
    adjacency[graph.edges[e].from].push_back(graph.edges[e].to);
  }
  return strongly_connected_components(adjacency);
}

LoopReport loop_report(const ViewGraph& graph, const ViewState& view) {
  LoopReport report;
  report.threshold = view.threshold;
  report.surviving_edges = filter_edges(graph, view.threshold, view.display_mode);
  const SccResult scc = strongly_connected_components(graph, report.surviving_edges);
  report.scc_id = scc.component;

  const std::size_t n = graph.elements.size();
  report.on_loop.assign(n, false);
  for (std::size_t v = 0; v < n; ++v) {
    report.on_loop[v] = scc.component_size[scc.component[v]] >= 2;
  }
  for (std::size_t e : report.surviving_edges) {
    const auto& edge = graph.edges[e];
    if (edge.from == edge.to) report.on_loop[edge.from] = true;
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (!report.on_loop[v]) report.abandoned.push_back(v);
  }
  return report;
}

std::vector<LoopBreak> loop_break_sweep(const ViewGraph& graph,
                                        const ViewState& view) {
  std::vector<double> candidates;
  for (const auto& edge : graph.edges) {
    const double w = graph.display_weight(edge, view.display_mode);
    if (w < 1.0) candidates.push_back(w);
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  ViewState probe = view;
  probe.threshold = 0.0;
  std::vector<bool> abandoned(graph.elements.size(), false);
  for (std::size_t v : loop_report(graph, probe).abandoned) abandoned[v] = true;

  std::vector<LoopBreak> breaks;
  for (double tau : candidates) {
    probe.threshold = tau;
    LoopBreak step{tau, {}};
    for (std::size_t v : loop_report(graph, probe).abandoned) {
      if (!abandoned[v]) {
        abandoned[v] = true;
        step.newly_abandoned.push_back(v);
      }
    }
    if (!step.newly_abandoned.empty()) breaks.push_back(std::move(step));
  }
  return breaks;
}

}  // namespace patrol
