#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "cavity/field.hpp"
#include "cavity/operators.hpp"
#include "cavity/reaction.hpp"

namespace cavity {

/// Direction set for the wide stencil. n_dirs counts signed directions:
/// 4 = axes, 8 = axes + diagonals, 16 = adds the four knight-move lines.
struct StencilConfig {
  int n_dirs = 8;
  bool upwind = true;

  void validate() const;
  int line_count() const { return n_dirs / 2; }
  bool operator==(const StencilConfig&) const = default;
};

inline constexpr int kMaxLines = 8;

struct LineOffset {
  int di;
  int dj;
  int norm2;
};

/// Lattice lines; consecutive entries (0,1), (2,3), (4,5), (6,7) are orthogonal.
inline constexpr std::array<LineOffset, kMaxLines> kLines{{
    {1, 0, 1}, {0, 1, 1}, {1, 1, 2}, {1, -1, 2}, {2, 1, 5}, {1, -2, 5}, {1, 2, 5}, {2, -1, 5}}};
inline constexpr int kPairCount = 4;
/// Image of each line under (x, y) -> (x, -y).
inline constexpr std::array<int, kMaxLines> kReflectedLine{{0, 1, 3, 2, 7, 6, 5, 4}};

/// Neighbour values around one node, with the node's own value left free.
/// plus[k] / minus[k] are the values at node +/- kLines[k].
struct LocalStencil {
  Vec2 x{};
  double h = 1.0;
  int line_count = 4;
  std::uint32_t available = 0;
  std::array<double, kMaxLines> plus{};
  std::array<double, kMaxLines> minus{};

  bool has(int line) const { return (available >> line) & 1u; }
};

/// Forward-mode dual number; lets the scalar solver get exact slopes of the
/// piecewise-smooth scheme in the node's own value.
struct Dual {
  double v = 0.0;
  double d = 0.0;
};

template <class T>
struct NodeDifferencesT {
  std::array<T, kMaxLines> second{};
  std::uint32_t available = 0;
  T fwd_x{}, bwd_x{}, fwd_y{}, bwd_y{};
  bool has(int line) const { return (available >> line) & 1u; }
};
using NodeDifferences = NodeDifferencesT<double>;

NodeDifferences differences(const LocalStencil& s, double v);
NodeDifferencesT<Dual> differences(const LocalStencil& s, Dual v);

/// Gathers the stencil of an Interior node; throws StencilLeavesDomain otherwise.
LocalStencil gather(const ScalarField& u, NodeIndex node, const StencilConfig& cfg);

/// Monotone discrete operator F_h(X, differences).
double apply_scheme(const OperatorSpec& spec, Vec2 x, const NodeDifferences& d, const StencilConfig& cfg);
Dual apply_scheme(const OperatorSpec& spec, Vec2 x, const NodeDifferencesT<Dual>& d,
                  const StencilConfig& cfg);

/// F_h and its partial derivatives in the node's own value and in every
/// neighbour slot, at the branch selected by the current values.
struct SchemeLinearization {
  double value = 0.0;
  double own = 0.0;
  std::array<double, kMaxLines> plus{};
  std::array<double, kMaxLines> minus{};
};
SchemeLinearization linearize_scheme(const OperatorSpec& spec, const LocalStencil& s, double v,
                                     const StencilConfig& cfg);

/// kappa such that the scheme decreases in the node's own value at rate at
/// least kappa / h^2.
double scheme_diagonal_bound(const OperatorSpec& spec, const StencilConfig& cfg);

/// Throws NonMonotoneStencil when a linear/Isaacs diffusion matrix is not
/// diagonally dominant on [-1,1]^2.
void validate_scheme(const OperatorSpec& spec, const StencilConfig& cfg);

/// (u(node + dir) - 2 u(node) + u(node - dir)) / |dir h|^2.
double directional_second_difference(const ScalarField& u, NodeIndex node, int di, int dj);

struct UpwindGradient {
  Vec2 central{};
  /// Per-axis max(u0 - uW, u0 - uE, 0) / h, combined in the Euclidean norm;
  /// monotone when entering with a minus sign.
  double descent_magnitude = 0.0;
  /// Per-axis max(uW - u0, uE - u0, 0) / h; monotone when entering with a plus sign.
  double ascent_magnitude = 0.0;
};
UpwindGradient upwind_gradient(const ScalarField& u, NodeIndex node);

struct HessianEstimate {
  double d_min = 0.0;
  double d_max = 0.0;
  std::vector<std::pair<double, double>> pairs;  // per orthogonal line pair
};
HessianEstimate hessian_eigen_estimates(const ScalarField& u, NodeIndex node, const StencilConfig& cfg);

/// Constant or per-node right-hand side.
class RightHandSide {
 public:
  RightHandSide(double constant = 0.0) : constant_(constant) {}  // NOLINT implicit
  explicit RightHandSide(ScalarField field) : field_(std::move(field)) {}

  double at(std::size_t k) const { return field_ ? (*field_)[k] : constant_; }
  bool is_constant() const { return !field_.has_value(); }

 private:
  double constant_ = 0.0;
  std::optional<ScalarField> field_;
};

/// Interior: F_h(X, D_h u) - zeta_eps(u) - rhs. Boundary: u - phi (0 when phi
/// is empty). Exterior: 0.
ScalarField residual(const ScalarField& u, const OperatorSpec& spec, const ReactionProfile& profile,
                     double eps, const StencilConfig& cfg, const BoundaryData& phi = {},
                     const RightHandSide& rhs = {});

/// sup |residual| over Interior nodes.
double interior_residual_norm(const ScalarField& u, const OperatorSpec& spec,
                              const ReactionProfile& profile, double eps, const StencilConfig& cfg,
                              const RightHandSide& rhs = {});

struct MonotonicityReport {
  std::size_t samples = 0;
  std::size_t neighbor_violations = 0;
  std::size_t own_violations = 0;
  double worst_gap = 0.0;
};

/// Random stencils at spacing h: raising a neighbour must not lower F_h,
/// raising the node's own value must not raise it.
MonotonicityReport monotonicity_check(const OperatorSpec& spec, const StencilConfig& cfg,
                                      std::size_t samples, std::uint64_t seed, double h = 0.05);

}  // namespace cavity
