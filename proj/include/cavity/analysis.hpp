#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cavity/field.hpp"
#include "cavity/operators.hpp"
#include "cavity/reaction.hpp"
#include "cavity/scheme.hpp"
#include "cavity/solver.hpp"

namespace cavity {

// ---- level sets ----------------------------------------------------------

struct Segment {
  Vec2 a{};
  Vec2 b{};
};

/// Piecewise-linear level curve. `points` holds every edge crossing once.
struct Contour {
  std::vector<Segment> segments;
  std::vector<Vec2> points;
  bool empty() const { return points.empty(); }
};

/// Marching squares over cells whose four corners are active; ambiguous
/// cells are resolved by the cell average.
Contour extract_free_boundary(const ScalarField& u, double level);

/// Symmetric Hausdorff distance between finite point sets.
double hausdorff_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b);

// ---- epsilon sweeps -------------------------------------------------------

struct SweepSetup {
  OperatorSpec spec = OperatorSpec::laplace();
  ReactionProfile profile = ReactionProfile::bump(1.0);
  BoundaryData phi;
  GridPtr grid;
  SolverConfig solver{};
  std::vector<double> eps_list;
  int threads = 1;
  /// Reject eps <= 2h, where the transition layer spans fewer than two cells.
  bool resolution_guard = true;
};

struct SweepRow {
  double eps = 0.0;
  double lipschitz_norm = 0.0;
  double sup_u = 0.0;
  double min_u = 0.0;
  long sweeps = 0;
  double final_residual = 0.0;
  double fb_hausdorff_to_prev = 0.0;  // NaN for the first row or a missing level set
  bool converged = false;
  std::size_t multiple_root_nodes = 0;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  /// L(eps_min) / L(eps_prev); NaN when both vanish.
  double plateau_ratio = 0.0;
  /// sup |u^{eps_k} - u^{eps_{k+1}}| for consecutive rows.
  std::vector<double> uniform_gaps;
  ReactionProfile profile{};
};

struct SweepResult {
  SweepReport report;
  std::vector<ScalarField> fields;
  std::vector<Contour> free_boundaries;  // level eps of each row, empty when out of range
};

/// One singular solve per eps, run concurrently and merged in eps order.
/// eps_list must be strictly decreasing and, under the resolution guard,
/// every eps must exceed 2h.
SweepResult epsilon_sweep(const SweepSetup& setup);

// ---- maximum principle ----------------------------------------------------

struct AbpReport {
  double min_u = 0.0;
  double sup_u = 0.0;
  double ratio = 0.0;  // sup u / sup |phi| over boundary nodes
};

AbpReport abp_check(const ScalarField& u, const BoundaryData& phi);

// ---- limit problem --------------------------------------------------------

struct LimitReport {
  double sup_residual = 0.0;
  std::size_t nodes_checked = 0;
  bool vacuous = false;
};

/// sup |F_h(u)| over Interior nodes with u > threshold lying more than 2h
/// from every node with u <= threshold.
LimitReport limit_residual_check(const ScalarField& u, const OperatorSpec& spec, double threshold,
                                 const StencilConfig& cfg = {});

/// sup |u_k - u_{k+1}| over consecutive fields.
std::vector<double> uniform_gaps(const std::vector<ScalarField>& fields);

// ---- barrier --------------------------------------------------------------

/// omega(Y) = mu (exp(-delta |Y|^2) - exp(-delta)).
struct BarrierParams {
  double mu = 1.0;
  double delta = 10.0;
  EllipticityParams params{};

  /// (2 / lambda)(b + n Lambda).
  double delta_star() const;
  bool admissible() const { return delta >= delta_star(); }
};

struct BarrierValue {
  double value = 0.0;
  Vec2 gradient{};
  SymMatrix2 hessian{};
};

BarrierValue barrier_eval(const BarrierParams& bp, Vec2 y);

struct BarrierReport {
  std::size_t samples = 0;
  double sampled_min = 0.0;        // min of P-(D^2 omega) - b |grad omega| on the annulus
  double min_gap_to_bound = 0.0;   // min of (sampled value - analytic lower bound)
  std::size_t negative_samples = 0;
  double fd_gradient_error = 0.0;
  double fd_hessian_error = 0.0;
  bool admissible = false;
  double delta_star = 0.0;
};

/// Samples the annulus 1/2 <= |Y| <= 1 uniformly in area.
BarrierReport verify_barrier(const BarrierParams& bp, std::size_t samples, std::uint64_t seed = 1);

/// 2 mu delta (delta lambda / 2 - b - n Lambda) exp(-delta |Y|^2).
double barrier_lower_bound(const BarrierParams& bp, Vec2 y);

// ---- boundary point experiments -------------------------------------------

struct HopfResult {
  double theta = 0.0;
  double u_center = 0.0;
  double c_measured = 0.0;
  Vec2 center{};
  Vec2 contact{};
  SolveReport report;
};

/// F = 0 on the ball of radius r tangent to {y = -1} at the contact point
/// (0, -1), inside the box [-1,1]^2 with n nodes per side. theta is the
/// second-order one-sided difference of u along +y at the contact point.
HopfResult hopf_experiment(const OperatorSpec& spec, double r, int n, const BoundaryData& phi,
                           const SolverConfig& cfg);

/// Center of the Hopf ball of radius r.
inline Vec2 hopf_center(double r) { return {0.0, -1.0 + r}; }
inline Vec2 hopf_contact() { return {0.0, -1.0}; }

/// Nonnegative data vanishing at the contact point:
/// r (1 + Y_y) g(Y), Y = (X - center) / r, with g a random positive trigonometric sum.
BoundaryData hopf_random_data(double r, std::uint64_t seed);

struct PropagationResult {
  ScalarField w;          // half-ball solution
  ScalarField reflected;  // on the full ball
  double c_measured = 0.0;
  double reflection_residual = 0.0;
  double mirror_error = 0.0;  // max |U(x,-y) + U(x,y) - 2 sigma|
  SolveReport report;
};

/// F = 0 on the unit half-ball with w = sigma on the flat part and 0 on the
/// arc; U is w above {y = 0} and 2 sigma - w(x, -y) below. The residual of the
/// reflected operator is taken at Interior nodes of the ball grid off y = 0.
PropagationResult propagation_experiment(const OperatorSpec& spec, double sigma, int n,
                                         const SolverConfig& cfg);

/// sup / inf of u over the concentric sub-box (UnitSquare) or sub-ball
/// (Ball, HalfBall) scaled by `fraction`.
double harnack_ratio(const ScalarField& u, double fraction);

enum class BlowupMode { DivideByEps, SubtractEpsDivideByRho };

/// v(Y) = u(X0 + rho Y) / eps or (u(X0 + rho Y) - eps) / rho on the unit ball
/// grid with n nodes per side.
ScalarField blowup_field(const ScalarField& u, Vec2 x0, double rho, double eps, BlowupMode mode, int n = 65);

}  // namespace cavity
