#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "patrol/strategy.hpp"

namespace patrol {

inline constexpr std::size_t kDefaultAgentCount = 400;
inline constexpr std::size_t kDefaultAgentHorizon = 100;

/// Agents with precomputed paths. Paths never change after spawning; the
/// cursor is owned by whoever scrubs through them.
class AgentEnsemble {
 public:
  NodeIndex start() const noexcept { return start_; }
  std::size_t count() const noexcept { return count_; }
  std::size_t horizon() const noexcept { return horizon_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t node_count() const noexcept { return node_count_; }

  /// Node of agent `agent` at step t.
  NodeIndex position(std::size_t agent, std::size_t t) const {
    return paths_[agent * (horizon_ + 1) + t];
  }
  std::vector<NodeIndex> path(std::size_t agent) const;

 private:
  friend AgentEnsemble spawn_agents(const Strategy&, std::string_view,
                                    std::size_t, std::size_t, std::uint64_t);
  NodeIndex start_ = 0;
  std::size_t count_ = 0;
  std::size_t horizon_ = 0;
  std::uint64_t seed_ = 0;
  std::size_t node_count_ = 0;
  std::vector<NodeIndex> paths_;  // count x (horizon + 1)
};

/// Samples each agent's path independently from its own (seed, index)
/// stream, so the result does not depend on generation order.
AgentEnsemble spawn_agents(const Strategy& strategy, std::string_view start,
                           std::size_t count = kDefaultAgentCount,
                           std::size_t horizon = kDefaultAgentHorizon,
                           std::uint64_t seed = 0);

/// Agents per node at step t. Throws CursorOutOfRange for t > horizon.
std::vector<std::size_t> occupancy(const AgentEnsemble& ensemble, std::size_t t);

/// Path of agent 0, for single-agent replay.
std::vector<NodeIndex> single_agent(const AgentEnsemble& ensemble);

}  // namespace patrol
