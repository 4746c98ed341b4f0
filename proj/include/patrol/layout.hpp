#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "patrol/aggregation.hpp"

namespace patrol {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm() const { return std::hypot(x, y); }
  bool operator==(const Vec2&) const = default;
};

/// Force constants and geometry. Defaults settle a ten-location graph in a
/// 1000x1000 canvas within a couple of thousand steps.
struct LayoutParams {
  double k_attract = 0.05;
  double k_repulse = 500.0;
  double k_gravity = 0.01;
  double k_axial = 0.5;
  double damping = 0.85;
  double dt = 1.0;
  double r_closed = 20.0;
  double r_open = 60.0;
  double r_petal = 12.0;
  double r_node = 4.0;          // memory node radius, scales its gravity
  double init_radius = 300.0;   // disc for the initial placement
  Vec2 canvas_center{500.0, 500.0};
  std::uint64_t seed = 0;
  double min_distance = 1e-3;   // repulsion floor for coincident points
};

/// Throws InvalidArgument if constants are negative/non-finite, dt <= 0,
/// damping outside (0,1) or the radii are not r_petal < r_closed < r_open.
void validate(const LayoutParams& params);

struct LayoutState {
  std::vector<Vec2> location_position;
  std::vector<Vec2> location_velocity;
  std::vector<Vec2> node_position;
  std::vector<Vec2> node_velocity;
  std::vector<bool> location_open;
  std::size_t iteration = 0;
};

/// Seeded uniform placement of locations in a disc around the canvas
/// center; memory nodes evenly spaced on their location's petal circle.
LayoutState init_layout(const ViewGraph& view, const LayoutParams& params);

/// Brings a state in line with a changed view: toggled locations keep their
/// center; members of a newly closed location snap to the petal circle.
void sync_layout(LayoutState& state, const ViewGraph& view, const LayoutParams& params);

/// One integration step.
///   locations: attraction k_attract * w * d along shared links (w = larger
///     of the two directed weights), repulsion k_repulse / d between all
///     pairs, gravity toward the canvas center scaled by the location radius;
///   memory nodes: repulsion within their location, gravity toward the
///     parent center, and in open locations the axial force
///     k_axial * <E, F> F per incident edge E, F the unit vector
///     perpendicular to the node-center axis.
/// Members move with their parent, closed ones are projected back onto the
/// petal circle and open ones clamped inside r_open.
LayoutState step_layout(const LayoutState& state, const ViewGraph& view,
                        const LayoutParams& params);

struct ConvergenceResult {
  LayoutState state;
  bool converged = false;
  std::size_t iterations = 0;
  double last_displacement = 0.0;
};

ConvergenceResult run_until_converged(LayoutState state, const ViewGraph& view,
                                      const LayoutParams& params, double tol,
                                      std::size_t max_iter);

}  // namespace patrol
