#include "patrol/chain.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include "patrol/error.hpp"
#include "patrol/scc.hpp"

namespace patrol {
namespace {

struct SparseEntry {
  std::size_t col;
  double p;
};

std::vector<std::vector<SparseEntry>> sparse_rows(const TransitionMatrix& m) {
  const std::size_t n = m.size();
  std::vector<std::vector<SparseEntry>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (m(i, j) != 0.0) rows[i].push_back({j, m(i, j)});
    }
  }
  return rows;
}

void check_stochastic(const TransitionMatrix& m) {
  const std::size_t n = m.size();
  if (m.entries.size() != n * n) {
    throw Error(ErrorCode::kInvalidArgument, "matrix is not square");
  }
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double p = m(i, j);
      if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorCode::kRowNotStochastic,
                    "entry outside [0,1] in row '" + m.order[i] + "'",
                    m.order[i], p, true);
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kStochasticTolerance) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "row '" << m.order[i] << "' sums to " << sum;
      throw Error(ErrorCode::kRowNotStochastic, msg.str(), m.order[i], sum, true);
    }
  }
}

Adjacency adjacency_of(const std::vector<std::vector<SparseEntry>>& rows) {
  Adjacency graph(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& entry : rows[i]) graph[i].push_back(entry.col);
  }
  return graph;
}

std::size_t require_index(const TransitionMatrix& m, std::string_view id) {
  if (auto index = m.index_of(id)) return *index;
  throw Error(ErrorCode::kUnknownReference,
              "unknown memory node '" + std::string(id) + "'", std::string(id));
}

}  // namespace

StationaryDistribution stationary_distribution(const TransitionMatrix& matrix,
                                               std::stop_token stop) {
  check_stochastic(matrix);
  const std::size_t n = matrix.size();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "empty matrix");

  const auto rows = sparse_rows(matrix);
  const Adjacency graph = adjacency_of(rows);
  const SccResult scc = strongly_connected_components(graph);
  const auto closed = closed_components(graph, scc);
  const auto closed_count = std::count(closed.begin(), closed.end(), true);
  if (closed_count > 1) {
    throw Error(ErrorCode::kNotIrreducible,
                "chain has " + std::to_string(closed_count) +
                    " closed classes; the stationary distribution is not unique");
  }

  StationaryDistribution result;
  result.order = matrix.order;
  std::vector<double> pi(n, 1.0 / static_cast<double>(n));
  std::vector<double> next(n);
  for (std::size_t iter = 1; iter <= kStationaryIterationCap; ++iter) {
    if (stop.stop_requested()) {
      throw Error(ErrorCode::kCancelled, "stationary distribution cancelled");
    }
    for (std::size_t j = 0; j < n; ++j) next[j] = 0.5 * pi[j];
    for (std::size_t i = 0; i < n; ++i) {
      const double half = 0.5 * pi[i];
      for (const auto& entry : rows[i]) next[entry.col] += half * entry.p;
    }
    double sum = 0.0;
    for (double v : next) sum += v;
    double delta = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      next[j] /= sum;
      delta = std::max(delta, std::abs(next[j] - pi[j]));
    }
    pi.swap(next);
    if (delta < kStationaryStepTolerance) {
      result.mass = std::move(pi);
      result.iterations = iter;
      return result;
    }
  }
  throw Error(ErrorCode::kNoConvergence,
              "power iteration did not converge within the iteration cap");
}

EdgeFlowMap edge_flow(const Strategy& strategy, const StationaryDistribution& pi,
                      FlowMode mode) {
  if (pi.mass.size() != strategy.node_count()) {
    throw Error(ErrorCode::kOrderMismatch,
                "stationary distribution does not match the strategy's nodes");
  }
  for (std::size_t i = 0; i < pi.order.size(); ++i) {
    if (pi.order[i] != strategy.nodes()[i].id) {
      throw Error(ErrorCode::kOrderMismatch,
                  "stationary distribution order differs at '" + pi.order[i] + "'",
                  pi.order[i]);
    }
  }
  EdgeFlowMap map;
  map.mode = mode;
  map.flows.reserve(strategy.edges().size());
  double max_flow = 0.0;
  for (const auto& edge : strategy.edges()) {
    const double f = pi.mass[edge.from] * edge.p;
    max_flow = std::max(max_flow, f);
    map.flows.push_back({edge.from, edge.to, f});
  }
  if (mode == FlowMode::kRelative && max_flow > 0.0) {
    for (auto& f : map.flows) f.flow /= max_flow;
  }
  return map;
}

std::vector<double> location_mass(const StationaryDistribution& pi,
                                  const Strategy& strategy) {
  if (pi.mass.size() != strategy.node_count()) {
    throw Error(ErrorCode::kOrderMismatch,
                "stationary distribution does not match the strategy's nodes");
  }
  std::vector<double> mass(strategy.location_count(), 0.0);
  for (NodeIndex v = 0; v < strategy.node_count(); ++v) {
    mass[strategy.nodes()[v].location] += pi.mass[v];
  }
  return mass;
}

VisitDistributionSeries visit_distribution(const TransitionMatrix& matrix,
                                           std::string_view start,
                                           std::size_t horizon) {
  const std::size_t origin = require_index(matrix, start);
  if (horizon < 1) throw Error(ErrorCode::kInvalidArgument, "horizon must be >= 1");
  const std::size_t n = matrix.size();

  VisitDistributionSeries series;
  series.order = matrix.order;
  series.start = std::string(start);
  series.horizon = horizon;
  series.rows.reserve(horizon);

  std::vector<double> current(n, 0.0);
  current[origin] = 1.0;
  for (std::size_t t = 1; t <= horizon; ++t) {
    std::vector<double> next(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = current[i];
      if (w == 0.0) continue;
      const double* row = &matrix.entries[i * n];
      for (std::size_t j = 0; j < n; ++j) next[j] += w * row[j];
    }
    series.rows.push_back(next);
    current = std::move(next);
  }
  return series;
}

std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    }
    if (std::abs(a[pivot * n + col]) < 1e-300) {
      throw Error(ErrorCode::kInvalidArgument, "singular linear system");
    }
    if (pivot != col) {
      for (std::size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[pivot * n + k]);
      std::swap(b[col], b[pivot]);
    }
    const double diag = a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] / diag;
      if (factor == 0.0) continue;
      for (std::size_t k = col; k < n; ++k) a[r * n + k] -= factor * a[col * n + k];
      b[r] -= factor * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double acc = b[i];
    for (std::size_t k = i + 1; k < n; ++k) acc -= a[i * n + k] * x[k];
    x[i] = acc / a[i * n + i];
  }
  return x;
}

std::vector<double> expected_hitting_times_to(const TransitionMatrix& matrix,
                                              std::size_t to) {
  const std::size_t n = matrix.size();
  const double inf = std::numeric_limits<double>::infinity();

  // Predecessor lists; edges leaving `to` are irrelevant once it is hit.
  std::vector<std::vector<std::size_t>> preds(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == to) continue;
    for (std::size_t j = 0; j < n; ++j) {
      if (matrix(i, j) != 0.0) preds[j].push_back(i);
    }
  }

  std::vector<bool> reaches(n, false);
  std::deque<std::size_t> queue{to};
  reaches[to] = true;
  while (!queue.empty()) {
    std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t u : preds[v]) {
      if (!reaches[u]) {
        reaches[u] = true;
        queue.push_back(u);
      }
    }
  }

  // A node has infinite expectation if it can wander into a node that never
  // reaches the target.
  std::vector<bool> infinite(n, false);
  for (std::size_t v = 0; v < n; ++v) {
    if (!reaches[v]) {
      infinite[v] = true;
      queue.push_back(v);
    }
  }
  while (!queue.empty()) {
    std::size_t v = queue.front();
    queue.pop_front();
    for (std::size_t u : preds[v]) {
      if (!infinite[u]) {
        infinite[u] = true;
        queue.push_back(u);
      }
    }
  }

  std::vector<std::size_t> unknowns;
  std::vector<std::size_t> slot(n, n);
  for (std::size_t v = 0; v < n; ++v) {
    if (v != to && !infinite[v]) {
      slot[v] = unknowns.size();
      unknowns.push_back(v);
    }
  }

  std::vector<double> times(n, inf);
  times[to] = 0.0;
  const std::size_t m = unknowns.size();
  if (m == 0) return times;
  std::vector<double> a(m * m, 0.0);
  std::vector<double> b(m, 1.0);
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t i = unknowns[r];
    a[r * m + r] = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == to || slot[j] == n) continue;
      a[r * m + slot[j]] -= matrix(i, j);
    }
  }
  const auto x = solve_dense(std::move(a), std::move(b));
  for (std::size_t r = 0; r < m; ++r) times[unknowns[r]] = x[r];
  return times;
}

double expected_hitting_time(const TransitionMatrix& matrix,
                             std::string_view from, std::string_view to) {
  const std::size_t source = require_index(matrix, from);
  const std::size_t target = require_index(matrix, to);
  if (source == target) return 0.0;
  const double time = expected_hitting_times_to(matrix, target)[source];
  if (!std::isfinite(time)) {
    throw Error(ErrorCode::kUnreachable,
                "'" + std::string(to) + "' is not almost surely reached from '" +
                    std::string(from) + "'",
                std::string(to));
  }
  return time;
}

double direct_path_probability(const Strategy& strategy,
                               const std::vector<std::string>& path) {
  double probability = 1.0;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    auto from = strategy.find_node(path[k]);
    auto to = strategy.find_node(path[k + 1]);
    if (!from || !to) return 0.0;
    auto p = strategy.edge_probability(*from, *to);
    if (!p) return 0.0;
    probability *= *p;
  }
  return probability;
}

double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += std::abs(a[i] - b[i]);
  return 0.5 * sum;
}

std::vector<double> tv_to_stationary(const VisitDistributionSeries& series,
                                     const StationaryDistribution& pi) {
  if (series.order != pi.order) {
    throw Error(ErrorCode::kOrderMismatch,
                "visit series and stationary distribution use different node orders");
  }
  std::vector<double> tv;
  tv.reserve(series.rows.size());
  for (const auto& row : series.rows) tv.push_back(total_variation(row, pi.mass));
  return tv;
}

}  // namespace patrol
