#include "patrol/scc.hpp"

#include <limits>
#include <utility>

namespace patrol {
namespace {

constexpr std::size_t kUnassigned = std::numeric_limits<std::size_t>::max();

Adjacency transpose(const Adjacency& graph) {
  Adjacency reversed(graph.size());
  for (std::size_t v = 0; v < graph.size(); ++v) {
    for (std::size_t w : graph[v]) reversed[w].push_back(v);
  }
  return reversed;
}

// Appends vertices to `finish_order` in DFS post-order.
void post_order(const Adjacency& graph, std::size_t root,
                std::vector<bool>& visited,
                std::vector<std::size_t>& finish_order) {
  std::vector<std::pair<std::size_t, std::size_t>> stack;
  visited[root] = true;
  stack.emplace_back(root, 0);
  while (!stack.empty()) {
    auto& [v, next] = stack.back();
    if (next < graph[v].size()) {
      std::size_t w = graph[v][next++];
      if (!visited[w]) {
        visited[w] = true;
        stack.emplace_back(w, 0);
      }
    } else {
      finish_order.push_back(v);
      stack.pop_back();
    }
  }
}

}  // namespace

SccResult strongly_connected_components(const Adjacency& graph) {
  const std::size_t n = graph.size();
  const Adjacency reversed = transpose(graph);

  std::vector<bool> visited(n, false);
  std::vector<std::size_t> finish_order;
  finish_order.reserve(n);
  for (std::size_t v = 0; v < n; ++v) {
    if (!visited[v]) post_order(reversed, v, visited, finish_order);
  }

  SccResult result;
  result.component.assign(n, kUnassigned);
  std::vector<std::size_t> stack;
  for (auto it = finish_order.rbegin(); it != finish_order.rend(); ++it) {
    if (result.component[*it] != kUnassigned) continue;
    const std::size_t id = result.component_size.size();
    result.component_size.push_back(0);
    result.component[*it] = id;
    stack.push_back(*it);
    while (!stack.empty()) {
      std::size_t v = stack.back();
      stack.pop_back();
      ++result.component_size[id];
      for (std::size_t w : graph[v]) {
        if (result.component[w] == kUnassigned) {
          result.component[w] = id;
          stack.push_back(w);
        }
      }
    }
  }
  return result;
}

std::vector<bool> closed_components(const Adjacency& graph,
                                    const SccResult& scc) {
  std::vector<bool> closed(scc.count(), true);
  for (std::size_t v = 0; v < graph.size(); ++v) {
    for (std::size_t w : graph[v]) {
      if (scc.component[v] != scc.component[w]) closed[scc.component[v]] = false;
    }
  }
  return closed;
}

}  // namespace patrol
