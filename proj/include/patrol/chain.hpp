#pragma once

#include <cstddef>
#include <stop_token>
#include <string>
#include <string_view>
#include <vector>

#include "patrol/strategy.hpp"

namespace patrol {

struct StationaryDistribution {
  std::vector<std::string> order;
  std::vector<double> mass;
  std::size_t iterations = 0;
};

enum class FlowMode { kAbsolute, kRelative };

struct EdgeFlow {
  NodeIndex from = 0;
  NodeIndex to = 0;
  double flow = 0.0;
};

struct EdgeFlowMap {
  FlowMode mode = FlowMode::kAbsolute;
  std::vector<EdgeFlow> flows;  // parallel to Strategy::edges()
};

struct VisitDistributionSeries {
  std::vector<std::string> order;
  std::string start;
  std::size_t horizon = 0;
  // rows[t - 1] is the distribution after t steps, t = 1..horizon.
  std::vector<std::vector<double>> rows;
};

inline constexpr std::size_t kDefaultHorizon = 100;
inline constexpr double kStationaryStepTolerance = 1e-12;
inline constexpr std::size_t kStationaryIterationCap = 1'000'000;

/// Power iteration on the lazy chain (P + I) / 2, which has the same
/// stationary vector as P but is aperiodic. Throws NotIrreducible when more
/// than one closed class exists, NoConvergence at the iteration cap and
/// Cancelled when `stop` is requested.
StationaryDistribution stationary_distribution(const TransitionMatrix& matrix,
                                               std::stop_token stop = {});

/// f_ij = pi_i * P_ij per strategy edge; relative mode divides by the max.
EdgeFlowMap edge_flow(const Strategy& strategy, const StationaryDistribution& pi,
                      FlowMode mode);

/// Time share per location: the sum of pi over its member nodes.
std::vector<double> location_mass(const StationaryDistribution& pi,
                                  const Strategy& strategy);

VisitDistributionSeries visit_distribution(const TransitionMatrix& matrix,
                                           std::string_view start,
                                           std::size_t horizon = kDefaultHorizon);

/// Expected number of steps from `from` until `to` is first entered
/// (0 when from == to). Throws Unreachable if the expectation is infinite.
double expected_hitting_time(const TransitionMatrix& matrix,
                             std::string_view from, std::string_view to);

/// Expected hitting times of `to` from every node; entries are +inf where the
/// expectation diverges.
std::vector<double> expected_hitting_times_to(const TransitionMatrix& matrix,
                                              std::size_t to);

/// Product of edge probabilities along the path, 0 if any step is not an
/// edge.
double direct_path_probability(const Strategy& strategy,
                               const std::vector<std::string>& path);

/// Total-variation distance of each series row to pi.
std::vector<double> tv_to_stationary(const VisitDistributionSeries& series,
                                     const StationaryDistribution& pi);

double total_variation(const std::vector<double>& a, const std::vector<double>& b);

/// Solves the dense system A x = b (row-major A) by Gaussian elimination with
/// partial pivoting. Throws InvalidArgument for a singular system.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b);

}  // namespace patrol
