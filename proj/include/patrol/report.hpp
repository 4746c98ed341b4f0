#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "patrol/strategy.hpp"

namespace patrol {

using ordered_json = nlohmann::ordered_json;

struct ReportOptions {
  std::uint64_t seed = 0;
  // Hitting-time tables grow quadratically; larger strategies skip them.
  std::size_t hitting_time_node_limit = 64;
  std::size_t simulation_agents = 400;
};

/// Rounds to 9 significant digits so reports serialize stably.
double round_report(double value);

/// FNV-1a over the canonical serialization.
std::string strategy_hash(const Strategy& strategy);

/// Self-contained analysis of a strategy: stationary distribution, location
/// masses, edge flows in both modes, hitting times, loop breaks under a
/// threshold sweep, mixing summary and a seeded simulation cross-check.
/// Throws NotIrreducible when the stationary distribution is not unique.
ordered_json build_report(const Strategy& strategy, const ReportOptions& options = {});

/// Loop breaks of the fully opened strategy graph, for the `sweep` command.
ordered_json build_sweep_table(const Strategy& strategy);

/// Probability label as drawn on edges: 9 significant digits, always with a
/// decimal point ("1.0", "0.5", "0.333333333").
std::string format_probability(double p);

/// Graphviz description: one cluster per location, edges labeled with their
/// probabilities.
std::string export_dot(const Strategy& strategy);

}  // namespace patrol
