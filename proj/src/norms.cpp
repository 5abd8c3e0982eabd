#include "cavity/norms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cavity/error.hpp"

namespace cavity {

double sup_norm(const ScalarField& u) {
  const Grid& g = u.grid();
  double m = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.node_class(k) != NodeClass::Exterior) m = std::max(m, std::abs(u[k]));
  }
  return m;
}

double discrete_lipschitz_norm(const ScalarField& u) {
  const Grid& g = u.grid();
  const double h = g.h();
  const double hd = h * std::sqrt(2.0);
  // Forward half of the 8-neighbourhood visits each pair once.
  constexpr int kOffsets[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  double best = 0.0;
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (!g.active(i, j)) continue;
      const double v = u(i, j);
      for (int o = 0; o < 4; ++o) {
        const int a = i + kOffsets[o][0];
        const int b = j + kOffsets[o][1];
        if (!g.active(a, b)) continue;
        const double d = o < 2 ? h : hd;
        best = std::max(best, std::abs(u(a, b) - v) / d);
      }
    }
  }
  return best;
}

double distance_to_transition_set(const ScalarField& u, double eps, Vec2 p) {
  if (!(eps > 0.0)) throw Error(Errc::NonPositiveEpsilon, "eps must be positive");
  const Grid& g = u.grid();
  double best2 = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.node_class(k) == NodeClass::Exterior) continue;
    const double v = u[k];
    if (v < 0.0 || v > eps) continue;
    const Vec2 q = g.position(g.node(k));
    const double dx = q.x - p.x;
    const double dy = q.y - p.y;
    best2 = std::min(best2, dx * dx + dy * dy);
  }
  return std::sqrt(best2);
}

}  // namespace cavity
