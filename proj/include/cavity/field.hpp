#pragma once

#include <span>
#include <vector>

#include "cavity/grid.hpp"

namespace cavity {

/// One real value per grid node. Exterior nodes hold 0 and are ignored by
/// every reduction.
class ScalarField {
 public:
  explicit ScalarField(GridPtr grid, double fill = 0.0);
  ScalarField(GridPtr grid, std::vector<double> values);

  /// Samples f at every non-Exterior node.
  static ScalarField from_function(GridPtr grid, const BoundaryData& f);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }

  double& operator()(int i, int j) { return values_[grid_->index(i, j)]; }
  double operator()(int i, int j) const { return values_[grid_->index(i, j)]; }
  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool same_grid(const ScalarField& other) const {
    return grid_ == other.grid_ || *grid_ == *other.grid_;
  }

  /// Minimum and maximum over non-Exterior nodes.
  double min_value() const;
  double max_value() const;

  /// Bilinear interpolation; throws StencilLeavesDomain if the cell
  /// containing p has an Exterior corner or lies outside the lattice.
  double interpolate(Vec2 p) const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

/// Overwrites boundary nodes with phi evaluated at the node position.
void impose_boundary(ScalarField& u, const BoundaryData& phi);

}  // namespace cavity
