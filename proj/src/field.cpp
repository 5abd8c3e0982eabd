#include "cavity/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cavity/error.hpp"

namespace cavity {

ScalarField::ScalarField(GridPtr grid, double fill)
    : grid_(std::move(grid)), values_(grid_->size(), 0.0) {
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (grid_->node_class(k) != NodeClass::Exterior) values_[k] = fill;
  }
}

ScalarField::ScalarField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size()) {
    throw Error(Errc::GridMismatch, "value count does not match grid");
  }
}

ScalarField ScalarField::from_function(GridPtr grid, const BoundaryData& f) {
  ScalarField u(grid);
  for (std::size_t k = 0; k < u.values_.size(); ++k) {
    if (grid->node_class(k) != NodeClass::Exterior) u.values_[k] = f(grid->position(grid->node(k)));
  }
  return u;
}

double ScalarField::min_value() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (grid_->node_class(k) != NodeClass::Exterior) m = std::min(m, values_[k]);
  }
  return m;
}

double ScalarField::max_value() const {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (grid_->node_class(k) != NodeClass::Exterior) m = std::max(m, values_[k]);
  }
  return m;
}

double ScalarField::interpolate(Vec2 p) const {
  const Grid& g = *grid_;
  const double fx = (p.x - g.origin().x) / g.h();
  const double fy = (p.y - g.origin().y) / g.h();
  const double tol = 1e-9;
  if (fx < -tol || fy < -tol || fx > g.nx() - 1 + tol || fy > g.ny() - 1 + tol) {
    throw Error(Errc::StencilLeavesDomain, "interpolation point outside lattice");
  }
  int i = std::clamp(static_cast<int>(std::floor(fx)), 0, g.nx() - 2);
  int j = std::clamp(static_cast<int>(std::floor(fy)), 0, g.ny() - 2);
  const double tx = std::clamp(fx - i, 0.0, 1.0);
  const double ty = std::clamp(fy - j, 0.0, 1.0);
  // Corners with zero weight may be Exterior.
  auto corner = [&](int di, int dj, double w) {
    if (w == 0.0) return 0.0;
    if (!g.active(i + di, j + dj)) {
      throw Error(Errc::StencilLeavesDomain, "interpolation cell touches exterior");
    }
    return w * (*this)(i + di, j + dj);
  };
  return corner(0, 0, (1 - tx) * (1 - ty)) + corner(1, 0, tx * (1 - ty)) +
         corner(0, 1, (1 - tx) * ty) + corner(1, 1, tx * ty);
}

void impose_boundary(ScalarField& u, const BoundaryData& phi) {
  const Grid& g = u.grid();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.is_boundary(k)) u[k] = phi(g.position(g.node(k)));
  }
}

}  // namespace cavity
