#include "patrol/simulation.hpp"

#include <algorithm>
#include <thread>

#include "patrol/error.hpp"
#include "patrol/rng.hpp"

namespace patrol {
namespace {

// Outgoing distribution of a node as cumulative thresholds.
struct Row {
  std::vector<NodeIndex> targets;
  std::vector<double> cumulative;
};

NodeIndex sample(const Row& row, double u) {
  auto it = std::upper_bound(row.cumulative.begin(), row.cumulative.end(), u);
  // Rounding can leave the last cumulative a hair under 1.
  if (it == row.cumulative.end()) return row.targets.back();
  return row.targets[static_cast<std::size_t>(it - row.cumulative.begin())];
}

}  // namespace

std::vector<NodeIndex> AgentEnsemble::path(std::size_t agent) const {
  auto begin = paths_.begin() + static_cast<std::ptrdiff_t>(agent * (horizon_ + 1));
  return {begin, begin + static_cast<std::ptrdiff_t>(horizon_ + 1)};
}

AgentEnsemble spawn_agents(const Strategy& strategy, std::string_view start,
                           std::size_t count, std::size_t horizon,
                           std::uint64_t seed) {
  const NodeIndex origin = strategy.node_index(start);
  if (count < 1) throw Error(ErrorCode::kInvalidArgument, "agent count must be >= 1");
  if (horizon < 1) throw Error(ErrorCode::kInvalidArgument, "horizon must be >= 1");

  std::vector<Row> rows(strategy.node_count());
  for (NodeIndex v = 0; v < strategy.node_count(); ++v) {
    double acc = 0.0;
    for (std::size_t e : strategy.out_edges(v)) {
      acc += strategy.edges()[e].p;
      rows[v].targets.push_back(strategy.edges()[e].to);
      rows[v].cumulative.push_back(acc);
    }
  }

  AgentEnsemble ensemble;
  ensemble.start_ = origin;
  ensemble.count_ = count;
  ensemble.horizon_ = horizon;
  ensemble.seed_ = seed;
  ensemble.node_count_ = strategy.node_count();
  ensemble.paths_.resize(count * (horizon + 1));

  auto generate = [&](std::size_t first, std::size_t last) {
    for (std::size_t agent = first; agent < last; ++agent) {
      PatrolRng rng(seed, agent);
      NodeIndex* path = &ensemble.paths_[agent * (horizon + 1)];
      path[0] = origin;
      for (std::size_t t = 1; t <= horizon; ++t) {
        path[t] = sample(rows[path[t - 1]], rng.uniform());
      }
    }
  };

  constexpr std::size_t kAgentsPerWorker = 2048;
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers = std::min(hw, (count + kAgentsPerWorker - 1) / kAgentsPerWorker);
  if (workers <= 1) {
    generate(0, count);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t first = w * chunk;
      const std::size_t last = std::min(count, first + chunk);
      if (first < last) pool.emplace_back(generate, first, last);
    }
  }
  return ensemble;
}

std::vector<std::size_t> occupancy(const AgentEnsemble& ensemble, std::size_t t) {
  if (t > ensemble.horizon()) {
    throw Error(ErrorCode::kCursorOutOfRange,
                "cursor " + std::to_string(t) + " beyond horizon " +
                    std::to_string(ensemble.horizon()),
                {}, static_cast<double>(t), true);
  }
  std::vector<std::size_t> counts(ensemble.node_count(), 0);
  for (std::size_t agent = 0; agent < ensemble.count(); ++agent) {
    ++counts[ensemble.position(agent, t)];
  }
  return counts;
}

std::vector<NodeIndex> single_agent(const AgentEnsemble& ensemble) {
  return ensemble.path(0);
}

}  // namespace patrol
