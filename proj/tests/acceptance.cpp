// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Independent of the unit tests so it can be run on its own.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "patrol/chain.hpp"
#include "patrol/fixtures.hpp"
#include "patrol/layout.hpp"
#include "patrol/reachability.hpp"
#include "patrol/simulation.hpp"

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool condition, const std::string& what) {
    if (!condition && pass) {
      pass = false;
      detail = what;
    }
  }
};

std::string fmt(const char* format, double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, format, value);
  return buffer;
}

patrol::ViewState all_open(const patrol::Strategy& s) {
  patrol::ViewState view;
  for (patrol::LocationIndex l = 0; l < s.location_count(); ++l) view.open_locations.insert(l);
  return view;
}

Outcome stationary_example() {
  Outcome out;
  const auto m = patrol::to_matrix(patrol::fixtures::three_node_example());
  const auto pi = patrol::stationary_distribution(m);
  const std::vector<double> exact = {1.0 / 9, 2.0 / 3, 2.0 / 9};
  const double vs_exact = oracle::max_abs_diff(pi.mass, exact);
  const double vs_oracle = oracle::max_abs_diff(pi.mass, oracle::stationary(m));
  out.require(vs_exact <= 1e-8, "pi off closed form by " + fmt("%.3g", vs_exact));
  out.require(vs_oracle <= 1e-8, "pi off dense-solve oracle by " + fmt("%.3g", vs_oracle));
  out.detail = out.pass ? "max error " + fmt("%.2g", std::max(vs_exact, vs_oracle)) : out.detail;
  return out;
}

Outcome corridor_law() {
  Outcome out;
  double worst = 0.0;
  for (int n : {0, 1, 2, 4, 8}) {
    const auto plain = patrol::generate_corridor(n, false);
    const auto path = patrol::corridor_straight_path(n, false);
    const double h = patrol::expected_hitting_time(patrol::to_matrix(plain), path.front(), path.back());
    const double expected = (n + 1.0) * (n + 1.0);
    worst = std::max(worst, std::abs(h - expected));
    out.require(std::abs(h - expected) <= 1e-8, "hitting time n=" + std::to_string(n) + " is " + fmt("%.12g", h));
    const double direct = patrol::direct_path_probability(plain, path);
    out.require(direct == std::ldexp(1.0, -n), "direct path n=" + std::to_string(n) + " is " + fmt("%.17g", direct));
    const auto memory = patrol::generate_corridor(n, true);
    const double straight = patrol::direct_path_probability(memory, patrol::corridor_straight_path(n, true));
    out.require(straight == 1.0, "memory corridor n=" + std::to_string(n) + " is " + fmt("%.17g", straight));
  }
  if (out.pass) out.detail = "n in {0,1,2,4,8}, max hitting-time error " + fmt("%.2g", worst);
  return out;
}

Outcome aggregation_validity() {
  Outcome out;
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int trial = 0; trial < 1000 && out.pass; ++trial) {
    const auto s = oracle::random_strategy(rng, {30, 10, 4, trial % 3 != 0, 300});
    auto view = oracle::random_view(rng, s);
    for (auto rule : {patrol::AggregationRule::kAverage, patrol::AggregationRule::kSum,
                      patrol::AggregationRule::kMax}) {
      view.rule = rule;
      const auto g = patrol::build_view(s, view);
      std::vector<double> sums(g.elements.size(), 0.0);
      for (const auto& e : g.edges) {
        sums[e.from] += e.weight;
        if (rule == patrol::AggregationRule::kMax) {
          out.require(e.weight > 0.0 && e.weight <= 1.0, "max-rule weight " + fmt("%.17g", e.weight));
        }
      }
      for (std::size_t i = 0; i < sums.size(); ++i) {
        if (rule == patrol::AggregationRule::kAverage) {
          worst = std::max(worst, std::abs(sums[i] - 1.0));
          out.require(std::abs(sums[i] - 1.0) <= 1e-9, "average row sum " + fmt("%.17g", sums[i]));
        } else if (rule == patrol::AggregationRule::kSum) {
          const double members = static_cast<double>(g.elements[i].members.size());
          out.require(std::abs(sums[i] - members) <= 1e-9, "sum-rule row " + fmt("%.17g", sums[i]));
        }
      }
    }
  }
  if (out.pass) out.detail = "1000 strategies x 3 rules, max row deviation " + fmt("%.2g", worst);
  return out;
}

Outcome scc_correctness() {
  Outcome out;
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> tau(0.0, 0.9);
  int graphs = 0;
  while (graphs < 200 && out.pass) {
    const auto s = oracle::random_strategy(rng, {30, 3, 3, graphs % 2 == 0, 300});
    auto view = oracle::random_view(rng, s);
    const auto g = patrol::build_view(s, view);
    if (g.elements.size() > 30) continue;
    ++graphs;
    const double threshold = tau(rng);
    const auto edges = patrol::filter_edges(g, threshold, patrol::DisplayMode::kStrategy);
    const auto scc = patrol::strongly_connected_components(g, edges);
    std::vector<std::vector<std::size_t>> adj(g.elements.size());
    for (std::size_t e : edges) adj[g.edges[e].from].push_back(g.edges[e].to);
    const auto reach = oracle::closure(adj);
    for (std::size_t a = 0; a < adj.size(); ++a) {
      for (std::size_t b = 0; b < adj.size(); ++b) {
        out.require((scc.component[a] == scc.component[b]) == oracle::same_component(reach, a, b),
                    "partition mismatch on graph " + std::to_string(graphs));
      }
    }
  }
  int sweeps = 0;
  for (const auto& name : patrol::fixtures::names()) {
    const auto s = patrol::fixtures::by_name(name);
    for (const auto& view : {patrol::ViewState{}, all_open(s)}) {
      const auto g = patrol::build_view(s, view);
      std::vector<double> taus = {0.0};
      for (const auto& e : g.edges) taus.push_back(e.weight);
      std::sort(taus.begin(), taus.end());
      taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
      std::vector<bool> abandoned(g.elements.size(), false);
      auto probe = view;
      for (double t : taus) {
        if (t >= 1.0) break;
        probe.threshold = t;
        const auto report = patrol::loop_report(g, probe);
        for (std::size_t i = 0; i < abandoned.size(); ++i) {
          out.require(!(abandoned[i] && report.on_loop[i]), "abandoned set shrank on " + name);
          abandoned[i] = !report.on_loop[i];
        }
      }
      ++sweeps;
    }
  }
  if (out.pass) {
    out.detail = std::to_string(graphs) + " graphs match the reachability oracle; " +
                 std::to_string(sweeps) + " fixture sweeps nested";
  }
  return out;
}

Outcome case_studies() {
  Outcome out;
  {
    const auto s = patrol::fixtures::airport();
    auto view = all_open(s);
    view.threshold = 0.02;
    const auto g = patrol::build_view(s, view);
    const auto report = patrol::loop_report(g, view);
    out.require(report.abandoned.size() == 1, "airport abandons " + std::to_string(report.abandoned.size()));
    out.require(!report.abandoned.empty() &&
                    s.nodes()[g.elements[report.abandoned[0]].node].id == patrol::fixtures::kAirportSpareNode,
                "airport abandons the wrong node");
  }
  {
    const auto s = patrol::fixtures::inner_loop_with_outer_ring();
    auto view = all_open(s);
    const auto g = patrol::build_view(s, view);
    const auto sweep = patrol::loop_break_sweep(g, view);
    out.require(!sweep.empty() && sweep[0].threshold == 0.001, "outer ring: first break is not 0.001");
    view.threshold = 0.01;
    const auto report = patrol::loop_report(g, view);
    for (std::size_t i = 0; i < g.elements.size(); ++i) {
      const bool inner = s.nodes()[g.elements[i].node].id.rfind("in", 0) == 0;
      out.require(report.on_loop[i] == inner, "outer ring: wrong loop membership at 0.01");
    }
  }
  double tv100 = 0.0;
  double peak = 0.0;
  double dip = 0.0;
  {
    const auto s = patrol::fixtures::office_floor();
    const auto m = patrol::to_matrix(s);
    const auto pi = patrol::stationary_distribution(m);
    const auto series = patrol::visit_distribution(m, patrol::fixtures::kOfficeStartNode, 100);
    const auto tv = patrol::tv_to_stationary(series, pi);
    tv100 = tv[99];
    peak = *std::max_element(tv.begin(), tv.begin() + 10);
    // The dip: some node's visit probability falls below its long-run share
    // before the series settles.
    for (std::size_t t = 0; t < 20; ++t) {
      for (std::size_t j = 0; j < pi.mass.size(); ++j) dip = std::max(dip, pi.mass[j] - series.rows[t][j]);
    }
    out.require(tv100 < 0.02, "office TV at t=100 is " + fmt("%.4g", tv100));
    out.require(peak >= 5.0 * tv100, "office early peak only " + fmt("%.4g", peak));
    out.require(dip > 0.0, "office series never dips below pi");
  }
  if (out.pass) {
    out.detail = "airport 1 abandoned at 0.02; ring breaks first at 0.001; office TV(100)=" +
                 fmt("%.3g", tv100) + ", peak " + fmt("%.3g", peak) + ", dip " + fmt("%.3g", dip);
  }
  return out;
}

std::uint64_t occupancy_hash(const patrol::AgentEnsemble& e) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (std::size_t t = 0; t <= e.horizon(); ++t) {
    for (std::size_t c : patrol::occupancy(e, t)) {
      for (int byte = 0; byte < 8; ++byte) {
        hash ^= (static_cast<std::uint64_t>(c) >> (8 * byte)) & 0xff;
        hash *= 0x100000001b3ull;
      }
    }
  }
  return hash;
}

Outcome simulation_fidelity() {
  Outcome out;
  double worst = 0.0;
  for (const auto& name : patrol::fixtures::names()) {
    const auto s = patrol::fixtures::by_name(name);
    const auto& start = s.nodes()[0].id;
    const auto e = patrol::spawn_agents(s, start, 10000, 100, 20240501);
    const auto exact = patrol::visit_distribution(patrol::to_matrix(s), start, 100);
    for (std::size_t t = 1; t <= 100; ++t) {
      const auto counts = patrol::occupancy(e, t);
      std::vector<double> empirical(counts.size());
      for (std::size_t i = 0; i < counts.size(); ++i) empirical[i] = counts[i] / 10000.0;
      const double tv = patrol::total_variation(empirical, exact.rows[t - 1]);
      worst = std::max(worst, tv);
      out.require(tv < 0.05, name + ": TV " + fmt("%.4g", tv) + " at t=" + std::to_string(t));
    }
    const auto again = patrol::spawn_agents(s, start, 10000, 100, 20240501);
    out.require(occupancy_hash(e) == occupancy_hash(again), name + ": rerun differs");
  }
  // Frozen reference value: the same hash on any platform.
  const auto golden = patrol::spawn_agents(patrol::fixtures::office_floor(), "h0", 1000, 100, 20240501);
  out.require(occupancy_hash(golden) == PATROL_GOLDEN_OCCUPANCY_HASH, "golden occupancy hash changed");
  if (out.pass) out.detail = "10000 agents, worst TV " + fmt("%.4f", worst) + "; reruns and golden hash identical";
  return out;
}

Outcome layout_contracts() {
  Outcome out;
  patrol::LayoutParams p;
  double drift = 0.0;
  {
    const auto s = patrol::fixtures::airport();
    const auto g = patrol::build_view(s, {});
    auto state = patrol::init_layout(g, p);
    for (int i = 0; i < 10000; ++i) {
      state = patrol::step_layout(state, g, p);
      for (std::size_t v = 0; v < s.node_count(); ++v) {
        const auto c = state.location_position[g.node_location[v]];
        drift = std::max(drift, std::abs((state.node_position[v] - c).norm() - p.r_petal));
      }
    }
    out.require(drift <= 1e-12, "petal radius drift " + fmt("%.3g", drift));
  }
  double separation_error = 0.0;
  {
    const auto s = patrol::Strategy::build("pair", {{"A", "A"}, {"B", "B"}}, {{"a", "A"}, {"b", "B"}},
                                           {{"a", "b", 1.0}, {"b", "a", 1.0}});
    const auto g = patrol::build_view(s, {});
    auto q = p;
    q.k_gravity = 0.0;
    const auto result = patrol::run_until_converged(patrol::init_layout(g, q), g, q, 1e-9, 20000);
    const double d = (result.state.location_position[0] - result.state.location_position[1]).norm();
    const double target = std::sqrt(q.k_repulse / q.k_attract);
    separation_error = std::abs(d - target) / target;
    out.require(result.converged && separation_error <= 0.01, "separation " + fmt("%.6g", d));
  }
  {
    const auto s = patrol::fixtures::office_floor();
    const auto g = patrol::build_view(s, all_open(s));
    auto q = p;
    q.seed = 17;
    auto a = patrol::init_layout(g, q);
    auto b = patrol::init_layout(g, q);
    for (int i = 0; i < 500; ++i) {
      a = patrol::step_layout(a, g, q);
      b = patrol::step_layout(b, g, q);
    }
    out.require(a.location_position == b.location_position && a.node_position == b.node_position,
                "same seed gave different positions");
  }
  int straight = 0;
  {
    const auto s = patrol::generate_corridor(4, false);
    const auto g = patrol::build_view(s, {});
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto q = p;
      q.seed = seed;
      const auto result = patrol::run_until_converged(patrol::init_layout(g, q), g, q, 0.01, 2000);
      const auto& c = result.state.location_position;
      double worst = 0.0;
      for (std::size_t i = 1; i + 1 < c.size(); ++i) {
        const auto u = c[i] - c[i - 1];
        const auto v = c[i + 1] - c[i];
        const double cosine = std::clamp(u.dot(v) / (u.norm() * v.norm()), -1.0, 1.0);
        worst = std::max(worst, std::acos(cosine) * 180.0 / std::numbers::pi);
      }
      if (result.converged && worst <= 10.0) ++straight;
    }
    out.require(straight >= 18, "corridor straight for only " + std::to_string(straight) + "/20 seeds");
  }
  if (out.pass) {
    out.detail = "petal drift " + fmt("%.2g", drift) + "; separation error " +
                 fmt("%.3g%%", 100 * separation_error) + "; corridor straight " +
                 std::to_string(straight) + "/20";
  }
  return out;
}

struct Captured {
  int status = -1;
  std::string out;
};

Captured capture(const std::string& args) {
  const std::string command = std::string(PATROLSCOPE_BIN) + " " + args + " 2>/dev/null";
  Captured result;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) return result;
  std::array<char, 4096> buffer{};
  std::size_t n = 0;
  while ((n = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0) result.out.append(buffer.data(), n);
  const int raw = ::pclose(pipe);
  result.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return result;
}

Outcome cli_stability() {
  Outcome out;
  const std::string data = PATROL_TEST_DATA;
  const auto a = capture("analyze " + data + "/example.json --seed 1");
  const auto b = capture("analyze " + data + "/example.json --seed 1");
  out.require(a.status == 0 && !a.out.empty(), "analyze failed");
  out.require(a.out == b.out, "analyze output differs between runs");
  const std::vector<std::pair<std::string, int>> cases = {
      {"example.json", 0}, {"malformed.json", 2}, {"row_sum_099.json", 2}, {"reducible.json", 0}};
  for (const auto& [file, expected] : cases) {
    const int status = capture("validate " + data + "/" + file).status;
    out.require(status == expected, "validate " + file + " exited " + std::to_string(status));
  }
  out.require(capture("validate " + data + "/missing.json").status == 1, "missing file not exit 1");
  out.require(capture("analyze " + data + "/reducible.json").status == 3, "reducible analyze not exit 3");
  if (out.pass) out.detail = "analyze byte-identical; exit codes 0/2/2/0 (+1 missing, 3 analyze reducible)";
  return out;
}

struct Criterion {
  const char* name;
  double limit_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"stationary distribution of the three-node example", 1.0, stationary_example},
      {"corridor law", 1.0, corridor_law},
      {"aggregation validity", 30.0, aggregation_validity},
      {"SCC correctness and threshold monotonicity", 30.0, scc_correctness},
      {"case-study reconstructions", 30.0, case_studies},
      {"simulation fidelity and reproducibility", 60.0, simulation_fidelity},
      {"layout contracts", 60.0, layout_contracts},
      {"CLI stability", 30.0, cli_stability},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (outcome.pass && seconds > c.limit_seconds) {
      outcome.pass = false;
      outcome.detail = "took " + fmt("%.2f", seconds) + " s, limit " + fmt("%.0f", c.limit_seconds) + " s";
    }
    std::printf("%s  %-45s %7.3fs  %s\n", outcome.pass ? "PASS" : "FAIL", c.name, seconds,
                outcome.detail.c_str());
    if (!outcome.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
