#pragma once

#include <cstddef>
#include <vector>

namespace patrol {

using Adjacency = std::vector<std::vector<std::size_t>>;

struct SccResult {
  // Component of each vertex. Components are numbered in reverse
  // topological order of the condensation: component 0 is a sink.
  std::vector<std::size_t> component;
  std::vector<std::size_t> component_size;

  std::size_t count() const noexcept { return component_size.size(); }
};

/// Kosaraju-Sharir: a DFS finishing order on the transposed graph, then a
/// second DFS pass on the graph itself. Iterative, deterministic in vertex
/// and adjacency order.
SccResult strongly_connected_components(const Adjacency& graph);

/// Components with no edge leaving them.
std::vector<bool> closed_components(const Adjacency& graph,
                                    const SccResult& scc);

}  // namespace patrol
