#include "patrol/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "patrol/aggregation.hpp"
#include "patrol/chain.hpp"
#include "patrol/reachability.hpp"
#include "patrol/rng.hpp"
#include "patrol/simulation.hpp"

namespace patrol {
namespace {

ordered_json number_or_null(double value) {
  if (!std::isfinite(value)) return nullptr;
  return round_report(value);
}

std::string quote_dot(const std::string& id) {
  std::string out = "\"";
  for (char c : id) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

ViewState fully_open(const Strategy& strategy) {
  ViewState view;
  for (LocationIndex loc = 0; loc < strategy.location_count(); ++loc) {
    view.open_locations.insert(loc);
  }
  return view;
}

ordered_json sweep_json(const Strategy& strategy) {
  const ViewState view = fully_open(strategy);
  const ViewGraph graph = build_view(strategy, view);
  ordered_json table = ordered_json::array();
  for (const auto& step : loop_break_sweep(graph, view)) {
    ordered_json ids = ordered_json::array();
    for (std::size_t element : step.newly_abandoned) {
      ids.push_back(strategy.nodes()[graph.elements[element].node].id);
    }
    table.push_back({{"threshold", round_report(step.threshold)}, {"abandoned", ids}});
  }
  return table;
}

}  // namespace

double round_report(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.9g", value);
  return std::strtod(buffer, nullptr);
}

std::string strategy_hash(const Strategy& strategy) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : serialize_strategy(strategy)) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

ordered_json build_report(const Strategy& strategy, const ReportOptions& options) {
  const TransitionMatrix matrix = to_matrix(strategy);
  const StationaryDistribution pi = stationary_distribution(matrix);
  const auto nodes = strategy.nodes();

  ordered_json report;
  report["strategy"] = {{"name", strategy.name()},
                        {"hash", "fnv1a64:" + strategy_hash(strategy)},
                        {"locations", strategy.location_count()},
                        {"nodes", strategy.node_count()},
                        {"edges", strategy.edges().size()}};
  report["seed"] = options.seed;
  report["warnings"] = ordered_json::array();
  for (const auto& warning : strategy.warnings()) report["warnings"].push_back(warning);

  ordered_json stationary = ordered_json::array();
  for (std::size_t i = 0; i < pi.mass.size(); ++i) {
    stationary.push_back({{"node", pi.order[i]}, {"mass", round_report(pi.mass[i])}});
  }
  report["stationary"] = std::move(stationary);

  ordered_json locations = ordered_json::array();
  const auto masses = location_mass(pi, strategy);
  for (std::size_t loc = 0; loc < masses.size(); ++loc) {
    locations.push_back({{"location", strategy.locations()[loc].id},
                         {"mass", round_report(masses[loc])}});
  }
  report["location_mass"] = std::move(locations);

  const EdgeFlowMap absolute = edge_flow(strategy, pi, FlowMode::kAbsolute);
  const EdgeFlowMap relative = edge_flow(strategy, pi, FlowMode::kRelative);
  ordered_json flows = ordered_json::array();
  for (std::size_t e = 0; e < absolute.flows.size(); ++e) {
    const Edge& edge = strategy.edges()[e];
    flows.push_back({{"from", nodes[edge.from].id},
                     {"to", nodes[edge.to].id},
                     {"p", round_report(edge.p)},
                     {"absolute", round_report(absolute.flows[e].flow)},
                     {"relative", round_report(relative.flows[e].flow)}});
  }
  report["edge_flows"] = std::move(flows);

  if (strategy.node_count() <= options.hitting_time_node_limit) {
    ordered_json table = ordered_json::array();
    std::vector<std::vector<double>> to_target(strategy.node_count());
    for (std::size_t to = 0; to < strategy.node_count(); ++to) {
      to_target[to] = expected_hitting_times_to(matrix, to);
    }
    for (std::size_t from = 0; from < strategy.node_count(); ++from) {
      for (std::size_t to = 0; to < strategy.node_count(); ++to) {
        if (from == to) continue;
        table.push_back({{"from", nodes[from].id},
                         {"to", nodes[to].id},
                         {"steps", number_or_null(to_target[to][from])}});
      }
    }
    report["hitting_times"] = std::move(table);
  } else {
    report["hitting_times"] = nullptr;
  }

  report["loop_breaks"] = sweep_json(strategy);

  ordered_json mixing = ordered_json::array();
  for (const auto& node : nodes) {
    const auto series = visit_distribution(matrix, node.id, kDefaultHorizon);
    const auto tv = tv_to_stationary(series, pi);
    ordered_json first_below = nullptr;
    for (std::size_t t = 0; t < tv.size(); ++t) {
      if (tv[t] < 0.01) {
        first_below = t + 1;
        break;
      }
    }
    mixing.push_back({{"start", node.id},
                      {"tv_t1", round_report(tv[0])},
                      {"tv_t10", round_report(tv[9])},
                      {"tv_t100", round_report(tv[99])},
                      {"first_t_below_0.01", first_below}});
  }
  report["mixing"] = std::move(mixing);

  // Empirical check of the exact series from the first node.
  const auto& start = nodes.front().id;
  const auto ensemble = spawn_agents(strategy, start, options.simulation_agents,
                                     kDefaultAgentHorizon, options.seed);
  const auto exact = visit_distribution(matrix, start, kDefaultAgentHorizon);
  double worst = 0.0;
  for (std::size_t t = 1; t <= kDefaultAgentHorizon; ++t) {
    const auto counts = occupancy(ensemble, t);
    std::vector<double> empirical(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
      empirical[i] = static_cast<double>(counts[i]) / static_cast<double>(ensemble.count());
    }
    worst = std::max(worst, total_variation(empirical, exact.rows[t - 1]));
  }
  report["simulation"] = {{"start", start},
                          {"agents", ensemble.count()},
                          {"horizon", ensemble.horizon()},
                          {"rng", PatrolRng::kAlgorithm},
                          {"max_tv_vs_exact", round_report(worst)}};
  return report;
}

ordered_json build_sweep_table(const Strategy& strategy) {
  return {{"strategy", strategy.name()}, {"loop_breaks", sweep_json(strategy)}};
}

std::string format_probability(double p) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.9g", p);
  std::string text = buffer;
  if (text.find_first_of(".en") == std::string::npos) text += ".0";
  return text;
}

std::string export_dot(const Strategy& strategy) {
  std::ostringstream out;
  out << "digraph " << quote_dot(strategy.name()) << " {\n";
  const auto nodes = strategy.nodes();
  std::size_t cluster = 0;
  for (const auto& location : strategy.locations()) {
    out << "  subgraph " << quote_dot("cluster_" + std::to_string(cluster++) + "_" + location.id)
        << " {\n    label=" << quote_dot(location.label) << ";\n";
    for (NodeIndex v : location.member_nodes) out << "    " << quote_dot(nodes[v].id) << ";\n";
    out << "  }\n";
  }
  for (const auto& edge : strategy.edges()) {
    out << "  " << quote_dot(nodes[edge.from].id) << " -> " << quote_dot(nodes[edge.to].id)
        << " [label=" << quote_dot(format_probability(edge.p)) << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace patrol
