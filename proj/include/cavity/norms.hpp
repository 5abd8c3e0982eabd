#pragma once

#include "cavity/field.hpp"

namespace cavity {

/// max |u| over non-Exterior nodes.
double sup_norm(const ScalarField& u);

/// Largest difference quotient |u(p) - u(q)| / |p - q| over all axis and
/// diagonal neighbour pairs of non-Exterior nodes, boundary nodes included.
double discrete_lipschitz_norm(const ScalarField& u);

/// Distance to the flat boundary {y = 0}.
inline double vertical_distance(Vec2 p) { return p.y; }

/// Distance from p to the nearest non-Exterior node with 0 <= u <= eps,
/// or +infinity when no node qualifies.
double distance_to_transition_set(const ScalarField& u, double eps, Vec2 p);

}  // namespace cavity
