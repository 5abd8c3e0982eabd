#pragma once

#include <optional>
#include <vector>

#include "cavity/field.hpp"
#include "cavity/operators.hpp"
#include "cavity/reaction.hpp"
#include "cavity/scheme.hpp"

namespace cavity {

enum class SweepOrder { Lexicographic, RedBlack };

const char* sweep_order_name(SweepOrder order);

struct SolverConfig {
  double tol = 1e-8;
  long max_sweeps = 200000;
  SweepOrder sweep_order = SweepOrder::Lexicographic;
  bool newton_fallback_bisection = true;
  /// Under-relaxation factor in (0, 1], multiplies the over-relaxation below.
  double damping = 1.0;
  /// Over-relaxation factor in [1, 2); 0 picks 2 / (1 + sin(pi / N)) from the
  /// domain extent N in cells. 1 is plain Gauss-Seidel.
  double relaxation = 0.0;
  bool record_history = false;
  /// Semismooth Newton outer loop with a sparse Krylov inner solve for problems
  /// without a reaction term; falls back to nodewise sweeps when it stalls.
  bool newton = true;
  StencilConfig stencil{};

  void validate() const;
  bool operator==(const SolverConfig&) const = default;
};

struct SolveReport {
  bool converged = false;
  long sweeps = 0;
  double final_residual = 0.0;
  double sup_u = 0.0;
  double min_u = 0.0;
  double lipschitz_norm = 0.0;
  double wall_ms = 0.0;
  double relaxation = 1.0;         // relaxation factor in effect at the end
  std::size_t multiple_root_nodes = 0;  // nodes whose last scalar solve had several roots
  std::vector<double> residual_history;
};

struct SolveResult {
  ScalarField u;
  SolveReport report;
};

/// Scalar solve of F_h(node; v) - zeta_eps(v) = rhs with the neighbours of
/// `node` frozen at their values in u. Takes the smallest root when the
/// scalar equation is not guaranteed to have a unique one.
double nodewise_update(const ScalarField& u, NodeIndex node, const OperatorSpec& spec,
                       const ReactionProfile& profile, double eps, const SolverConfig& cfg,
                       double rhs = 0.0);

/// F_h(u) = rhs at Interior nodes, u = phi elsewhere. Starts from 0 in the
/// interior unless an initial guess is given.
SolveResult solve_dirichlet(const OperatorSpec& spec, const RightHandSide& rhs, const BoundaryData& phi,
                            const GridPtr& grid, const SolverConfig& cfg,
                            const std::optional<ScalarField>& initial = std::nullopt);

/// F_h(u) = zeta_eps(u) at Interior nodes, u = phi elsewhere. Bump profiles
/// require phi >= 0 at every boundary node.
SolveResult solve_singular(const OperatorSpec& spec, const ReactionProfile& profile, double eps,
                           const BoundaryData& phi, const GridPtr& grid, const SolverConfig& cfg,
                           const std::optional<ScalarField>& initial = std::nullopt);

struct SandwichReport {
  std::size_t lower_violations = 0;
  std::size_t upper_violations = 0;
  double worst_lower_gap = 0.0;  // max of u_lower - u
  double worst_upper_gap = 0.0;  // max of u - u_upper
  double tolerance = 1e-6;
  bool holds() const { return lower_violations == 0 && upper_violations == 0; }
};

struct PerronBracket {
  SolveResult lower;
  SolveResult upper;
  SolveResult solution;
  SandwichReport sandwich;
};

/// Lower: F = sup zeta_eps. Upper: F = 0. Middle: the singular problem.
PerronBracket perron_bracket(const OperatorSpec& spec, const ReactionProfile& profile, double eps,
                             const BoundaryData& phi, const GridPtr& grid, const SolverConfig& cfg);

/// Values on n equispaced nodes of [0, 1].
struct Profile1D {
  double h = 0.0;
  std::vector<double> values;

  double position(std::size_t k) const { return static_cast<double>(k) * h; }
};

/// u'' = zeta_eps(u) on [0, 1] with u(0) = left, u(1) = right, by shooting on
/// u'(0); RK4 with eight steps per node interval.
Profile1D shooting_oracle_1d(const ReactionProfile& profile, double eps, double left, double right,
                             int n);

struct Solve1DResult {
  Profile1D profile;
  SolveReport report;
};

/// The 2D scheme restricted to fields constant in x, on the column
/// y in [0, 1] with u(0) = left and u(1) = right.
Solve1DResult solve_singular_1d(const OperatorSpec& spec, const ReactionProfile& profile, double eps,
                                double left, double right, int n, const SolverConfig& cfg);

}  // namespace cavity
