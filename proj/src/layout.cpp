#include "patrol/layout.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "patrol/error.hpp"
#include "patrol/rng.hpp"

namespace patrol {
namespace {

// Per-step travel cap for memory nodes. The axial force grows with edge
// length, so without a cap long edges can make the rotation overshoot.
constexpr double kMaxNodeStepFraction = 0.5;  // of r_petal
constexpr double kMaxNodeTurn = 0.5;          // radians per step

Vec2 unit_or(Vec2 v, Vec2 fallback) {
  const double n = v.norm();
  return n > 0.0 ? v * (1.0 / n) : fallback;
}

// Deterministic direction for coincident points.
Vec2 tie_break_direction(std::size_t a, std::size_t b) {
  const double angle = static_cast<double>(a * 7919 + b * 104729) * 2.399963229728653;
  return {std::cos(angle), std::sin(angle)};
}

Vec2 repulsion(Vec2 self, Vec2 other, std::size_t i, std::size_t j,
               const LayoutParams& params) {
  const Vec2 delta = self - other;
  const double d = delta.norm();
  const Vec2 direction = d > 0.0 ? delta * (1.0 / d) : tie_break_direction(i, j);
  return direction * (params.k_repulse / std::max(d, params.min_distance));
}

// Constant pull of k * radius, softened to a linear spring inside the
// element's own radius so the element can settle on its target.
Vec2 gravity(Vec2 self, Vec2 target, double radius, const LayoutParams& params) {
  const Vec2 delta = target - self;
  const double d = delta.norm();
  if (d == 0.0) return {};
  const double magnitude = params.k_gravity * radius * std::min(1.0, d / radius);
  return delta * (magnitude / d);
}

double location_radius(bool open, const LayoutParams& params) {
  return open ? params.r_open : params.r_closed;
}

Vec2 petal_slot(Vec2 center, std::size_t k, std::size_t m, double radius) {
  const double angle = -std::numbers::pi / 2 +
                       2.0 * std::numbers::pi * static_cast<double>(k) /
                           static_cast<double>(m);
  return center + Vec2{std::cos(angle), std::sin(angle)} * radius;
}

}  // namespace

void validate(const LayoutParams& p) {
  for (double k : {p.k_attract, p.k_repulse, p.k_gravity, p.k_axial, p.r_node,
                   p.init_radius, p.min_distance}) {
    if (!std::isfinite(k) || k < 0.0) {
      throw Error(ErrorCode::kInvalidArgument, "layout constants must be finite and >= 0");
    }
  }
  if (!(p.dt > 0.0) || !std::isfinite(p.dt)) {
    throw Error(ErrorCode::kInvalidArgument, "layout dt must be > 0");
  }
  if (!(p.damping > 0.0 && p.damping < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "layout damping must lie in (0,1)");
  }
  if (!(p.r_petal > 0.0 && p.r_petal < p.r_closed && p.r_closed < p.r_open)) {
    throw Error(ErrorCode::kInvalidArgument, "layout radii must satisfy r_petal < r_closed < r_open");
  }
}

LayoutState init_layout(const ViewGraph& view, const LayoutParams& params) {
  validate(params);
  const std::size_t locations = view.location_members.size();
  LayoutState state;
  state.location_open = view.location_open;
  state.location_position.resize(locations);
  state.location_velocity.assign(locations, Vec2{});
  state.node_position.resize(view.node_location.size());
  state.node_velocity.assign(view.node_location.size(), Vec2{});

  PatrolRng rng(params.seed, 0);
  for (std::size_t loc = 0; loc < locations; ++loc) {
    const double r = params.init_radius * std::sqrt(rng.uniform());
    const double angle = 2.0 * std::numbers::pi * rng.uniform();
    state.location_position[loc] =
        params.canvas_center + Vec2{std::cos(angle), std::sin(angle)} * r;
    const auto& members = view.location_members[loc];
    for (std::size_t k = 0; k < members.size(); ++k) {
      state.node_position[members[k]] =
          petal_slot(state.location_position[loc], k, members.size(), params.r_petal);
    }
  }
  return state;
}

void sync_layout(LayoutState& state, const ViewGraph& view, const LayoutParams& params) {
  for (std::size_t loc = 0; loc < view.location_members.size(); ++loc) {
    const bool open = view.location_open[loc];
    if (state.location_open[loc] == open) continue;
    state.location_open[loc] = open;
    if (open) continue;
    const Vec2 center = state.location_position[loc];
    const auto& members = view.location_members[loc];
    for (std::size_t k = 0; k < members.size(); ++k) {
      Vec2& p = state.node_position[members[k]];
      const Vec2 fallback = petal_slot(Vec2{}, k, members.size(), 1.0);
      p = center + unit_or(p - center, fallback) * params.r_petal;
      state.node_velocity[members[k]] = Vec2{};
    }
  }
}

LayoutState step_layout(const LayoutState& state, const ViewGraph& view,
                        const LayoutParams& params) {
  const std::size_t locations = state.location_position.size();
  const std::size_t nodes = state.node_position.size();
  LayoutState next = state;
  ++next.iteration;

  // Locations: driven by location positions only.
  std::vector<Vec2> force(locations);
  std::map<std::pair<std::size_t, std::size_t>, double> attraction;
  for (const auto& link : view.location_links) {
    const auto key = std::minmax(link.from, link.to);
    double& w = attraction[{key.first, key.second}];
    w = std::max(w, link.weight);
  }
  for (const auto& [pair, w] : attraction) {
    const Vec2 pull = (state.location_position[pair.second] -
                       state.location_position[pair.first]) * (params.k_attract * w);
    force[pair.first] += pull;
    force[pair.second] -= pull;
  }
  for (std::size_t a = 0; a < locations; ++a) {
    for (std::size_t b = a + 1; b < locations; ++b) {
      const Vec2 push = repulsion(state.location_position[a],
                                  state.location_position[b], a, b, params);
      force[a] += push;
      force[b] -= push;
    }
    force[a] += gravity(state.location_position[a], params.canvas_center,
                        location_radius(state.location_open[a], params), params);
  }
  for (std::size_t a = 0; a < locations; ++a) {
    next.location_velocity[a] =
        (state.location_velocity[a] + force[a] * params.dt) * params.damping;
    next.location_position[a] =
        state.location_position[a] + next.location_velocity[a] * params.dt;
  }

  // Memory nodes ride along with their parent, then react to local forces.
  std::vector<Vec2> carried(nodes);
  for (std::size_t v = 0; v < nodes; ++v) {
    const std::size_t loc = view.node_location[v];
    carried[v] = state.node_position[v] + (next.location_position[loc] -
                                           state.location_position[loc]);
  }
  auto element_position = [&](std::size_t element) {
    const ViewElement& e = view.elements[element];
    return e.kind == ElementKind::kNode ? carried[e.node]
                                        : next.location_position[e.location];
  };

  std::vector<Vec2> node_force(nodes);
  std::vector<Vec2> axial_force(nodes);
  std::vector<double> stiffness(nodes, 0.0);
  for (std::size_t loc = 0; loc < locations; ++loc) {
    const auto& members = view.location_members[loc];
    const Vec2 center = next.location_position[loc];
    for (std::size_t i = 0; i < members.size(); ++i) {
      const std::size_t v = members[i];
      for (std::size_t j = i + 1; j < members.size(); ++j) {
        const std::size_t w = members[j];
        const Vec2 push = repulsion(carried[v], carried[w], v, w, params);
        node_force[v] += push;
        node_force[w] -= push;
      }
      node_force[v] += gravity(carried[v], center, params.r_node, params);
    }
  }

  if (params.k_axial > 0.0) {
    auto axial = [&](std::size_t element, Vec2 counterpart) {
      const ViewElement& e = view.elements[element];
      if (e.kind != ElementKind::kNode) return;
      const Vec2 center = next.location_position[e.location];
      const Vec2 axis = carried[e.node] - center;
      if (axis.norm() == 0.0) return;
      const Vec2 radial = axis * (1.0 / axis.norm());
      const Vec2 perpendicular{-radial.y, radial.x};
      const Vec2 edge = counterpart - carried[e.node];
      axial_force[e.node] += perpendicular * (params.k_axial * edge.dot(perpendicular));
      // F turns as the node moves, so the pull stiffens with |E| / |axis|.
      stiffness[e.node] +=
          params.k_axial * (1.0 + edge.norm() / std::max(axis.norm(), params.min_distance));
    };
    for (const auto& edge : view.edges) {
      if (edge.from == edge.to) continue;
      axial(edge.from, element_position(edge.to));
      axial(edge.to, element_position(edge.from));
    }
  }

  const double max_step = kMaxNodeStepFraction * params.r_petal;
  for (std::size_t v = 0; v < nodes; ++v) {
    const std::size_t loc = view.node_location[v];
    const Vec2 center = next.location_position[loc];
    const bool open = state.location_open[loc];
    // Damping alone cannot hold the axial spring once edges get long, so its
    // contribution is scaled down by the local stiffness. Rest positions are
    // unaffected.
    const double relax = 1.0 / (1.0 + params.dt * params.dt * stiffness[v]);
    const Vec2 total = node_force[v] + axial_force[v] * relax;
    Vec2 velocity = (state.node_velocity[v] + total * params.dt) * params.damping;

    const Vec2 offset = carried[v] - center;
    const double r = offset.norm();
    const Vec2 radial = unit_or(offset, Vec2{0.0, -1.0});
    if (!open) velocity -= radial * velocity.dot(radial);
    if (velocity.norm() * params.dt > max_step) {
      velocity = velocity * (max_step / (velocity.norm() * params.dt));
    }

    // Integrate around the parent center: tangential motion turns the node,
    // radial motion changes its distance.
    const Vec2 tangent{-radial.y, radial.x};
    const double turn =
        r > params.min_distance
            ? std::clamp(velocity.dot(tangent) * params.dt / r, -kMaxNodeTurn, kMaxNodeTurn)
            : 0.0;
    double radius = open ? r + velocity.dot(radial) * params.dt : params.r_petal;
    const double c = std::cos(turn);
    const double s = std::sin(turn);
    Vec2 direction{radial.x * c - radial.y * s, radial.x * s + radial.y * c};
    if (radius < 0.0) {
      radius = -radius;
      direction = direction * -1.0;
    }
    if (open && radius > params.r_open) {
      radius = params.r_open;
      const double outward_speed = velocity.dot(radial);
      if (outward_speed > 0.0) velocity -= radial * outward_speed;
    }
    next.node_position[v] = center + direction * radius;
    next.node_velocity[v] = {velocity.x * c - velocity.y * s, velocity.x * s + velocity.y * c};
  }
  return next;
}

ConvergenceResult run_until_converged(LayoutState state, const ViewGraph& view,
                                      const LayoutParams& params, double tol,
                                      std::size_t max_iter) {
  if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tolerance must be > 0");
  validate(params);
  ConvergenceResult result;
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    LayoutState next = step_layout(state, view, params);
    double displacement = 0.0;
    for (std::size_t i = 0; i < next.location_position.size(); ++i) {
      displacement = std::max(
          displacement, (next.location_position[i] - state.location_position[i]).norm());
    }
    for (std::size_t i = 0; i < next.node_position.size(); ++i) {
      displacement = std::max(
          displacement, (next.node_position[i] - state.node_position[i]).norm());
    }
    state = std::move(next);
    result.iterations = iter + 1;
    result.last_displacement = displacement;
    if (displacement < tol) {
      result.converged = true;
      break;
    }
  }
  result.state = std::move(state);
  return result;
}

}  // namespace patrol
