#include "cavity/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include "cavity/error.hpp"
#include "cavity/norms.hpp"

namespace cavity {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kUlp = std::numeric_limits<double>::epsilon();

// Number of scan points used to locate the smallest root inside [0, eps].
constexpr int kRootScan = 64;

struct ScalarProblem {
  const OperatorSpec* spec = nullptr;
  const ReactionProfile* profile = nullptr;
  double eps = 1.0;
  double rhs = 0.0;
  const StencilConfig* stencil = nullptr;
  bool unique = true;
  bool fallback = true;
  bool column = false;  // 1D mode: x-lines see the node's own value
  double ftol = 1e-10;
};

struct ScalarRoot {
  double v = 0.0;
  bool multiple = false;
};

template <class D>
void flatten_x(D& d) {
  d.second[0] = {};
  d.fwd_x = {};
  d.bwd_x = {};
}

double reaction(const ScalarProblem& p, double v) {
  return p.profile->kind == ReactionKind::Off ? 0.0 : zeta_eps(*p.profile, p.eps, v);
}

double g_value(const ScalarProblem& p, const LocalStencil& s, double v) {
  NodeDifferences d = differences(s, v);
  if (p.column) flatten_x(d);
  return apply_scheme(*p.spec, s.x, d, *p.stencil) - reaction(p, v) - p.rhs;
}

Dual g_dual(const ScalarProblem& p, const LocalStencil& s, double v) {
  NodeDifferencesT<Dual> d = differences(s, Dual{v, 1.0});
  if (p.column) flatten_x(d);
  Dual f = apply_scheme(*p.spec, s.x, d, *p.stencil);
  if (p.profile->kind != ReactionKind::Off) {
    f.v -= zeta_eps(*p.profile, p.eps, v);
    f.d -= zeta_eps_derivative(*p.profile, p.eps, v);
  }
  f.v -= p.rhs;
  return f;
}

std::pair<double, double> neighbour_range(const LocalStencil& s) {
  double lo = kInf;
  double hi = -kInf;
  for (int k = 0; k < s.line_count; ++k) {
    if (!s.has(k)) continue;
    lo = std::min({lo, s.plus[k], s.minus[k]});
    hi = std::max({hi, s.plus[k], s.minus[k]});
  }
  return {lo, hi};
}

bool collapsed(double lo, double hi) {
  return hi - lo <= 4.0 * kUlp * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
}

// Finds a point with g > 0 below `start` (dir = -1) or g < 0 above it (dir = +1).
double expand_to_sign(const ScalarProblem& p, const LocalStencil& s, double start, double width,
                      int dir) {
  for (int it = 0; it < 60; ++it) {
    const double v = start + dir * width;
    const double g = g_value(p, s, v);
    if (std::isfinite(g) && ((dir < 0 && g > 0.0) || (dir > 0 && g < 0.0))) return v;
    width *= 4.0;
  }
  throw Error(Errc::BracketFailure, "no sign change around the node value");
}

double bracket_width(const LocalStencil& s) {
  const auto [lo, hi] = neighbour_range(s);
  return 10.0 * (hi - lo) + 1e-3 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
}

// Safeguarded Newton on g(lo) > 0 > g(hi); g may be non-monotone inside.
double bisect(const ScalarProblem& p, const LocalStencil& s, double lo, double hi, double v) {
  if (!(v > lo && v < hi)) v = 0.5 * (lo + hi);
  for (int it = 0; it < 400; ++it) {
    const Dual g = g_dual(p, s, v);
    if (std::abs(g.v) <= p.ftol) return v;
    if (g.v > 0.0) {
      lo = v;
    } else {
      hi = v;
    }
    if (collapsed(lo, hi)) return 0.5 * (lo + hi);
    double next = g.d < 0.0 ? v - g.v / g.d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    // Force progress when Newton stalls near one end.
    if (std::abs(next - v) < 1e-3 * (hi - lo) && it % 4 == 3) next = 0.5 * (lo + hi);
    v = next;
  }
  return v;
}

ScalarRoot solve_unique(const ScalarProblem& p, const LocalStencil& s, double v0) {
  double lo = -kInf;
  double hi = kInf;
  double v = v0;
  for (int it = 0; it < 16; ++it) {
    const Dual g = g_dual(p, s, v);
    if (!std::isfinite(g.v)) break;
    if (std::abs(g.v) <= p.ftol) return {v, false};
    if (g.v > 0.0) {
      lo = std::max(lo, v);
    } else {
      hi = std::min(hi, v);
    }
    if (!(g.d < 0.0)) break;
    double next = v - g.v / g.d;
    if (!(next > lo && next < hi)) {
      if (std::isfinite(lo) && std::isfinite(hi)) {
        next = 0.5 * (lo + hi);
      } else {
        break;
      }
    }
    if (std::abs(next - v) <= 2.0 * kUlp * std::max(1.0, std::abs(v))) return {next, false};
    if (std::isfinite(lo) && std::isfinite(hi) && collapsed(lo, hi)) return {next, false};
    v = next;
  }
  if (!p.fallback) return {v, false};
  const double w = bracket_width(s);
  const auto [nlo, nhi] = neighbour_range(s);
  if (!std::isfinite(lo)) lo = expand_to_sign(p, s, nlo, w, -1);
  if (!std::isfinite(hi)) hi = expand_to_sign(p, s, nhi, w, +1);
  return {bisect(p, s, lo, hi, v), false};
}

// Smallest root: g > 0 far below, reaction only acts on [0, eps].
ScalarRoot solve_smallest(const ScalarProblem& p, const LocalStencil& s) {
  const double w = bracket_width(s);
  const auto [nlo, nhi] = neighbour_range(s);
  const double g0 = g_value(p, s, 0.0);
  if (g0 <= 0.0) {
    if (g0 == 0.0) return {0.0, false};
    const double lo = expand_to_sign(p, s, std::min(nlo, 0.0), w, -1);
    return {bisect(p, s, lo, 0.0, 0.5 * lo), false};
  }
  double prev = 0.0;
  for (int k = 1; k <= kRootScan; ++k) {
    const double v = p.eps * k / kRootScan;
    const double g = g_value(p, s, v);
    if (g <= 0.0) {
      bool multiple = false;
      for (int j = k + 1; j <= kRootScan; ++j) {
        if (g_value(p, s, p.eps * j / kRootScan) > 0.0) {
          multiple = true;
          break;
        }
      }
      if (g == 0.0) return {v, multiple};
      return {bisect(p, s, prev, v, 0.5 * (prev + v)), multiple};
    }
    prev = v;
  }
  const double hi = expand_to_sign(p, s, std::max(nhi, p.eps), w, +1);
  return {bisect(p, s, p.eps, hi, 0.5 * (p.eps + hi)), false};
}

ScalarRoot solve_scalar(const ScalarProblem& p, const LocalStencil& s, double v0) {
  return p.unique ? solve_unique(p, s, v0) : solve_smallest(p, s);
}

// Own-value slope bound of the column scheme, in units of 1/h^2.
double column_diagonal_bound(const OperatorSpec& spec, const StencilConfig& cfg) {
  const EllipticityParams& bp = spec.base_params();
  switch (spec.variant()) {
    case Variant::Laplace:
      return 2.0;
    case Variant::PucciPlus:
    case Variant::PucciMinus: {
      double k = kInf;
      for (int p = 0; p < cfg.line_count() / 2; ++p) {
        double sum = 0.0;
        for (int line : {2 * p, 2 * p + 1}) {
          if (kLines[line].dj != 0) sum += 1.0 / kLines[line].norm2;
        }
        k = std::min(k, 2.0 * bp.lambda * sum);
      }
      return k;
    }
    case Variant::LinearDrift:
    case Variant::Isaacs: {
      double k = kInf;
      for (const auto& family : spec.families()) {
        for (const auto& c : family) {
          for (double y : {-1.0, 1.0}) {
            for (double x : {-1.0, 1.0}) k = std::min(k, 2.0 * c.diffusion_at({x, y}).m22);
          }
        }
      }
      return k;
    }
  }
  return 0.0;
}

bool scalar_unique(double kappa, double h, const ReactionProfile& profile, double eps) {
  if (profile.kind == ReactionKind::Off) return true;
  return kappa / (h * h) > zeta_eps_lipschitz(profile, eps);
}

double auto_relaxation(int cells) {
  return 2.0 / (1.0 + std::sin(std::numbers::pi / std::max(cells, 2)));
}

// Extent of the Interior nodes in cells, the length scale for over-relaxation.
int interior_extent(const Grid& g) {
  int i0 = g.nx();
  int i1 = -1;
  int j0 = g.ny();
  int j1 = -1;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.node_class(k) != NodeClass::Interior) continue;
    const NodeIndex n = g.node(k);
    i0 = std::min(i0, n.i);
    i1 = std::max(i1, n.i);
    j0 = std::min(j0, n.j);
    j1 = std::max(j1, n.j);
  }
  if (i1 < 0) return 2;
  return std::max(i1 - i0, j1 - j0) + 2;
}

int node_colour(NodeIndex n, const StencilConfig& cfg) {
  if (cfg.n_dirs == 4) return (n.i + n.j) & 1;
  return (n.i & 1) + 2 * (n.j & 1);
}

class Relaxation {
 public:
  Relaxation(const SolverConfig& cfg, int cells) : patience_(std::max(100, 10 * cells)) {
    omega_ = (cfg.relaxation == 0.0 ? auto_relaxation(cells) : cfg.relaxation) * cfg.damping;
  }

  double omega() const { return omega_; }

  // Backs off towards plain Gauss-Seidel when the residual keeps climbing or
  // stops setting new lows. Nonsmooth drift terms can lock over-relaxed
  // sweeps into a cycle.
  void observe(double r) {
    if (r < best_) {
      best_ = r;
      climbing_ = 0;
      stalled_ = 0;
      return;
    }
    if (omega_ <= 1.0) return;
    ++stalled_;
    if ((r > 4.0 * best_ && ++climbing_ >= 8) || stalled_ >= patience_) {
      omega_ = 1.0 + 0.5 * (omega_ - 1.0);
      if (omega_ < 1.0 + 1e-3) omega_ = 1.0;
      best_ = r;
      climbing_ = 0;
      stalled_ = 0;
    }
  }

 private:
  double omega_ = 1.0;
  double best_ = kInf;
  int climbing_ = 0;
  int stalled_ = 0;
  int patience_;
};

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct GridProblem {
  const OperatorSpec* spec;
  const ReactionProfile* profile;
  double eps;
  const RightHandSide* rhs;
};

class GridSweeper {
 public:
  GridSweeper(const GridProblem& problem, const SolverConfig& cfg, ScalarField& u)
      : problem_(problem), cfg_(cfg), u_(u), g_(u.grid()) {
    for (std::size_t k = 0; k < g_.size(); ++k) {
      if (g_.node_class(k) == NodeClass::Interior) order_.push_back(k);
    }
    if (cfg.sweep_order == SweepOrder::RedBlack) {
      std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
        return node_colour(g_.node(a), cfg.stencil) < node_colour(g_.node(b), cfg.stencil);
      });
    }
    base_.spec = problem.spec;
    base_.profile = problem.profile;
    base_.eps = problem.eps;
    base_.stencil = &cfg_.stencil;
    base_.fallback = cfg.newton_fallback_bisection;
    base_.ftol = 1e-2 * cfg.tol;
    base_.unique = scalar_unique(scheme_diagonal_bound(*problem.spec, cfg.stencil), g_.h(),
                                 *problem.profile, problem.eps);
  }

  std::size_t sweep(double omega) {
    std::size_t multiple = 0;
    ScalarProblem p = base_;
    for (std::size_t k : order_) {
      const LocalStencil s = gather(u_, g_.node(k), cfg_.stencil);
      p.rhs = problem_.rhs->at(k);
      const ScalarRoot root = solve_scalar(p, s, u_[k]);
      if (root.multiple) ++multiple;
      u_[k] += omega * (root.v - u_[k]);
    }
    return multiple;
  }

  double residual() const {
    double worst = 0.0;
    ScalarProblem p = base_;
    for (std::size_t k : order_) {
      const LocalStencil s = gather(u_, g_.node(k), cfg_.stencil);
      p.rhs = problem_.rhs->at(k);
      const double r = std::abs(g_value(p, s, u_[k]));
      if (!(r <= worst)) worst = r;  // propagates NaN
    }
    return worst;
  }

 private:
  GridProblem problem_;
  const SolverConfig& cfg_;
  ScalarField& u_;
  const Grid& g_;
  std::vector<std::size_t> order_;
  ScalarProblem base_;
};

template <class Sweeper>
void iterate(Sweeper& sweeper, const SolverConfig& cfg, int cells, SolveReport& report) {
  Relaxation relax(cfg, cells);
  double r = sweeper.residual();
  report.final_residual = r;
  if (cfg.record_history) report.residual_history.push_back(r);
  if (r <= cfg.tol) {
    report.converged = true;
    report.relaxation = relax.omega();
    return;
  }
  for (long s = 1; s <= cfg.max_sweeps; ++s) {
    report.multiple_root_nodes = sweeper.sweep(relax.omega());
    r = sweeper.residual();
    report.sweeps = s;
    report.final_residual = r;
    if (cfg.record_history) report.residual_history.push_back(r);
    if (!std::isfinite(r)) break;
    if (r <= cfg.tol) {
      report.converged = true;
      break;
    }
    relax.observe(r);
  }
  report.relaxation = relax.omega();
}

// Policy iteration for F_h(u) = rhs: linearize at the current branch and
// solve the sparse M-matrix system for the correction. The Jacobian is not
// symmetric (neighbouring rows may pick different direction pairs), which
// rules out over-relaxed sweeps as the inner solver.
class NewtonSolver {
 public:
  NewtonSolver(const GridProblem& problem, const SolverConfig& cfg, ScalarField& u)
      : problem_(problem), cfg_(cfg), u_(u), g_(u.grid()) {
    for (std::size_t k = 0; k < g_.size(); ++k) {
      if (g_.node_class(k) == NodeClass::Interior) order_.push_back(k);
    }
    slot_.assign(g_.size(), kNone);
    for (std::size_t r = 0; r < order_.size(); ++r) slot_[order_[r]] = r;
    res_.resize(static_cast<Eigen::Index>(order_.size()));
  }

  // Returns false when the iteration stops making progress.
  bool run(SolveReport& report) {
    double r = residual(u_);
    report.final_residual = r;
    if (cfg_.record_history) report.residual_history.push_back(r);
    int slow = 0;
    while (r > cfg_.tol) {
      if (report.sweeps >= cfg_.max_sweeps || !std::isfinite(r)) return true;
      Eigen::SparseMatrix<double, Eigen::RowMajor> jac;
      if (!linearize(jac)) return false;
      Eigen::BiCGSTAB<Eigen::SparseMatrix<double, Eigen::RowMajor>, Eigen::IncompleteLUT<double>> krylov;
      krylov.preconditioner().setFillfactor(4);
      krylov.setTolerance(1e-3);
      krylov.setMaxIterations(static_cast<Eigen::Index>(std::min(cfg_.max_sweeps - report.sweeps, 100000L)));
      krylov.compute(jac);
      if (krylov.info() != Eigen::Success) return false;
      const Eigen::VectorXd delta = krylov.solve(-res_);
      report.sweeps += std::max<long>(1, static_cast<long>(krylov.iterations()));
      if (!delta.allFinite()) return false;
      // Damped update; accept the first step that lowers the residual.
      double step = 1.0;
      double trial = kInf;
      ScalarField next = u_;
      for (int halving = 0; halving < 6; ++halving, step *= 0.5) {
        next = u_;
        for (std::size_t q = 0; q < order_.size(); ++q) {
          next[order_[q]] += step * delta[static_cast<Eigen::Index>(q)];
        }
        trial = residual(next);
        if (trial < r) break;
      }
      if (!(trial < r)) {
        residual(u_);
        return false;
      }
      slow = trial > 0.5 * r ? slow + 1 : 0;
      u_ = std::move(next);
      r = trial;
      report.final_residual = r;
      if (cfg_.record_history) report.residual_history.push_back(r);
      if (slow >= 10) return false;
    }
    report.converged = true;
    report.relaxation = 1.0;
    return true;
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  // Fills res_ as a side effect.
  double residual(const ScalarField& u) {
    double worst = 0.0;
    for (std::size_t q = 0; q < order_.size(); ++q) {
      const std::size_t k = order_[q];
      const LocalStencil s = gather(u, g_.node(k), cfg_.stencil);
      const double f = apply_scheme(*problem_.spec, s.x, differences(s, u[k]), cfg_.stencil) - problem_.rhs->at(k);
      res_[static_cast<Eigen::Index>(q)] = f;
      if (!(std::abs(f) <= worst)) worst = std::abs(f);
    }
    return worst;
  }

  // Jacobian restricted to Interior unknowns; boundary values are fixed.
  bool linearize(Eigen::SparseMatrix<double, Eigen::RowMajor>& jac) {
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(order_.size() * (1 + 2 * static_cast<std::size_t>(cfg_.stencil.line_count())));
    for (std::size_t q = 0; q < order_.size(); ++q) {
      const std::size_t k = order_[q];
      const NodeIndex n = g_.node(k);
      const LocalStencil s = gather(u_, n, cfg_.stencil);
      const SchemeLinearization lin = linearize_scheme(*problem_.spec, s, u_[k], cfg_.stencil);
      if (!(lin.own < 0.0)) return false;
      const auto row = static_cast<int>(q);
      entries.emplace_back(row, row, lin.own);
      for (int l = 0; l < s.line_count; ++l) {
        if (!s.has(l)) continue;
        for (int sign : {1, -1}) {
          const double c = sign > 0 ? lin.plus[l] : lin.minus[l];
          if (c == 0.0) continue;
          const std::size_t m = slot_[g_.index(n.i + sign * kLines[l].di, n.j + sign * kLines[l].dj)];
          if (m != kNone) entries.emplace_back(row, static_cast<int>(m), c);
        }
      }
    }
    const auto dim = static_cast<Eigen::Index>(order_.size());
    jac.resize(dim, dim);
    jac.setFromTriplets(entries.begin(), entries.end());
    return true;
  }

  GridProblem problem_;
  const SolverConfig& cfg_;
  ScalarField& u_;
  const Grid& g_;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> slot_;
  Eigen::VectorXd res_;
};

void finish_report(const ScalarField& u, SolveReport& report) {
  report.sup_u = u.max_value();
  report.min_u = u.min_value();
  report.lipschitz_norm = discrete_lipschitz_norm(u);
}

SolveResult run_grid(const OperatorSpec& spec, const ReactionProfile& profile, double eps,
                     const RightHandSide& rhs, const BoundaryData& phi, const GridPtr& grid,
                     const SolverConfig& cfg, const std::optional<ScalarField>& initial) {
  const auto start = Clock::now();
  cfg.validate();
  validate_scheme(spec, cfg.stencil);
  ScalarField u = initial ? *initial : ScalarField(grid, 0.0);
  if (!u.same_grid(ScalarField(grid))) throw Error(Errc::GridMismatch, "initial guess grid");
  if (phi) impose_boundary(u, phi);
  SolveReport report;
  GridProblem problem{&spec, &profile, eps, &rhs};
  const int cells = interior_extent(*grid);
  if (cfg.newton && profile.kind == ReactionKind::Off) {
    NewtonSolver newton(problem, cfg, u);
    if (newton.run(report) && (report.converged || report.sweeps >= cfg.max_sweeps)) {
      finish_report(u, report);
      report.wall_ms = elapsed_ms(start);
      return {std::move(u), std::move(report)};
    }
  }
  SolverConfig rest = cfg;
  rest.max_sweeps = std::max(1L, cfg.max_sweeps - report.sweeps);
  const long spent = report.sweeps;
  std::vector<double> history = std::move(report.residual_history);
  report = SolveReport{};
  GridSweeper sweeper(problem, rest, u);
  iterate(sweeper, rest, cells, report);
  report.sweeps += spent;
  if (cfg.record_history) history.insert(history.end(), report.residual_history.begin(), report.residual_history.end());
  report.residual_history = std::move(history);
  finish_report(u, report);
  report.wall_ms = elapsed_ms(start);
  return {std::move(u), std::move(report)};
}

class ColumnSweeper {
 public:
  ColumnSweeper(const ScalarProblem& base, std::vector<double>& col, double h, int line_count)
      : base_(base), col_(col), h_(h), line_count_(line_count) {}

  LocalStencil stencil(int j) const {
    LocalStencil s;
    s.x = {0.5, j * h_};
    s.h = h_;
    s.line_count = line_count_;
    const int n = static_cast<int>(col_.size());
    for (int k = 0; k < line_count_; ++k) {
      const int dj = kLines[k].dj;
      if (j + dj < 0 || j + dj >= n || j - dj < 0 || j - dj >= n) continue;
      s.plus[k] = col_[j + dj];
      s.minus[k] = col_[j - dj];
      s.available |= 1u << k;
    }
    return s;
  }

  std::size_t sweep(double omega) {
    std::size_t multiple = 0;
    for (int j = 1; j + 1 < static_cast<int>(col_.size()); ++j) {
      const ScalarRoot root = solve_scalar(base_, stencil(j), col_[j]);
      if (root.multiple) ++multiple;
      col_[j] += omega * (root.v - col_[j]);
    }
    return multiple;
  }

  double residual() const {
    double worst = 0.0;
    for (int j = 1; j + 1 < static_cast<int>(col_.size()); ++j) {
      const double r = std::abs(g_value(base_, stencil(j), col_[j]));
      if (!(r <= worst)) worst = r;
    }
    return worst;
  }

 private:
  ScalarProblem base_;
  std::vector<double>& col_;
  double h_;
  int line_count_;
};

// State of u'' = zeta_eps(u) integrated from 0 with u(0) = left, u'(0) = slope.
std::vector<double> shoot(const ReactionProfile& profile, double eps, double left, double slope, int n) {
  constexpr int kSub = 8;
  const double step = 1.0 / (kSub * (n - 1));
  auto acc = [&](double u) {
    return profile.kind == ReactionKind::Off ? 0.0 : zeta_eps(profile, eps, u);
  };
  std::vector<double> out(static_cast<std::size_t>(n));
  double u = left;
  double v = slope;
  out[0] = u;
  for (int node = 1; node < n; ++node) {
    for (int s = 0; s < kSub; ++s) {
      const double k1u = v;
      const double k1v = acc(u);
      const double k2u = v + 0.5 * step * k1v;
      const double k2v = acc(u + 0.5 * step * k1u);
      const double k3u = v + 0.5 * step * k2v;
      const double k3v = acc(u + 0.5 * step * k2u);
      const double k4u = v + step * k3v;
      const double k4v = acc(u + step * k3u);
      u += step / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
      v += step / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    out[static_cast<std::size_t>(node)] = u;
  }
  return out;
}

}  // namespace

const char* sweep_order_name(SweepOrder order) {
  return order == SweepOrder::RedBlack ? "RedBlack" : "Lexicographic";
}

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw Error(Errc::InvalidSolverConfig, "tol must be positive");
  if (max_sweeps < 1) throw Error(Errc::InvalidSolverConfig, "max_sweeps must be at least 1");
  if (!(damping > 0.0 && damping <= 1.0)) {
    throw Error(Errc::InvalidSolverConfig, "damping must lie in (0, 1]");
  }
  if (!(relaxation == 0.0 || (relaxation >= 1.0 && relaxation < 2.0))) {
    throw Error(Errc::InvalidSolverConfig, "relaxation must be 0 (auto) or in [1, 2)");
  }
  stencil.validate();
}

double nodewise_update(const ScalarField& u, NodeIndex node, const OperatorSpec& spec,
                       const ReactionProfile& profile, double eps, const SolverConfig& cfg, double rhs) {
  cfg.validate();
  if (profile.kind != ReactionKind::Off && !(eps > 0.0)) {
    throw Error(Errc::NonPositiveEpsilon, "eps must be positive");
  }
  ScalarProblem p;
  p.spec = &spec;
  p.profile = &profile;
  p.eps = eps;
  p.rhs = rhs;
  p.stencil = &cfg.stencil;
  p.fallback = cfg.newton_fallback_bisection;
  p.ftol = 1e-2 * cfg.tol;
  p.unique = scalar_unique(scheme_diagonal_bound(spec, cfg.stencil), u.grid().h(), profile, eps);
  const LocalStencil s = gather(u, node, cfg.stencil);
  return solve_scalar(p, s, u(node.i, node.j)).v;
}

SolveResult solve_dirichlet(const OperatorSpec& spec, const RightHandSide& rhs, const BoundaryData& phi,
                            const GridPtr& grid, const SolverConfig& cfg,
                            const std::optional<ScalarField>& initial) {
  const ReactionProfile off = ReactionProfile::off();
  return run_grid(spec, off, 1.0, rhs, phi, grid, cfg, initial);
}

SolveResult solve_singular(const OperatorSpec& spec, const ReactionProfile& profile, double eps,
                           const BoundaryData& phi, const GridPtr& grid, const SolverConfig& cfg,
                           const std::optional<ScalarField>& initial) {
  if (!(eps > 0.0)) throw Error(Errc::NonPositiveEpsilon, "eps must be positive");
  if (profile.kind != ReactionKind::Off && phi) {
    for (std::size_t k = 0; k < grid->size(); ++k) {
      if (!grid->is_boundary(k)) continue;
      const Vec2 x = grid->position(grid->node(k));
      if (phi(x) < 0.0) {
        throw Error(Errc::NegativeBoundaryData,
                    "phi < 0 at (" + std::to_string(x.x) + ", " + std::to_string(x.y) + ")");
      }
    }
  }
  return run_grid(spec, profile, eps, RightHandSide(0.0), phi, grid, cfg, initial);
}

PerronBracket perron_bracket(const OperatorSpec& spec, const ReactionProfile& profile, double eps,
                             const BoundaryData& phi, const GridPtr& grid, const SolverConfig& cfg) {
  PerronBracket out{solve_dirichlet(spec, RightHandSide(sup_zeta_eps(profile, eps)), phi, grid, cfg),
                    solve_dirichlet(spec, RightHandSide(0.0), phi, grid, cfg),
                    solve_singular(spec, profile, eps, phi, grid, cfg),
                    {}};
  const ScalarField& lo = out.lower.u;
  const ScalarField& hi = out.upper.u;
  const ScalarField& u = out.solution.u;
  SandwichReport& s = out.sandwich;
  s.worst_lower_gap = -kInf;
  s.worst_upper_gap = -kInf;
  for (std::size_t k = 0; k < grid->size(); ++k) {
    if (grid->node_class(k) == NodeClass::Exterior) continue;
    const double below = lo[k] - u[k];
    const double above = u[k] - hi[k];
    s.worst_lower_gap = std::max(s.worst_lower_gap, below);
    s.worst_upper_gap = std::max(s.worst_upper_gap, above);
    if (below > s.tolerance) ++s.lower_violations;
    if (above > s.tolerance) ++s.upper_violations;
  }
  return out;
}

Profile1D shooting_oracle_1d(const ReactionProfile& profile, double eps, double left, double right, int n) {
  if (n < 33) throw Error(Errc::InvalidArgument, "shooting oracle needs n >= 33");
  if (!(eps > 0.0)) throw Error(Errc::NonPositiveEpsilon, "eps must be positive");
  if (left < 0.0 || right < 0.0) throw Error(Errc::NegativeBoundaryData, "walls must be >= 0");

  auto miss = [&](double slope) { return shoot(profile, eps, left, slope, n).back() - right; };
  const double guess = right - left;
  double lo = guess - 1.0;
  double hi = guess + 1.0;
  double glo = miss(lo);
  double ghi = miss(hi);
  for (int it = 0; it < 60 && (glo > 0.0 || ghi < 0.0); ++it) {
    const double w = 2.0 * (hi - lo);
    if (glo > 0.0) glo = miss(lo = guess - w);
    if (ghi < 0.0) ghi = miss(hi = guess + w);
  }
  if (glo > 0.0 || ghi < 0.0 || !std::isfinite(glo) || !std::isfinite(ghi)) {
    throw Error(Errc::ShootingBracketFailure, "u(1) does not change sign over the slope range");
  }
  double slope = 0.5 * (lo + hi);
  for (int it = 0; it < 200 && !collapsed(lo, hi); ++it) {
    slope = 0.5 * (lo + hi);
    const double g = miss(slope);
    if (g == 0.0) break;
    if (g < 0.0) {
      lo = slope;
    } else {
      hi = slope;
    }
  }
  return {1.0 / (n - 1), shoot(profile, eps, left, slope, n)};
}

Solve1DResult solve_singular_1d(const OperatorSpec& spec, const ReactionProfile& profile, double eps,
                                double left, double right, int n, const SolverConfig& cfg) {
  const auto start = Clock::now();
  cfg.validate();
  validate_scheme(spec, cfg.stencil);
  if (n < 3) throw Error(Errc::ResolutionOutOfRange, "column needs at least 3 nodes");
  if (!(eps > 0.0)) throw Error(Errc::NonPositiveEpsilon, "eps must be positive");
  if (profile.kind != ReactionKind::Off && (left < 0.0 || right < 0.0)) {
    throw Error(Errc::NegativeBoundaryData, "walls must be >= 0");
  }
  const double h = 1.0 / (n - 1);
  std::vector<double> col(static_cast<std::size_t>(n), 0.0);
  col.front() = left;
  col.back() = right;

  ScalarProblem p;
  p.spec = &spec;
  p.profile = &profile;
  p.eps = eps;
  p.stencil = &cfg.stencil;
  p.fallback = cfg.newton_fallback_bisection;
  p.column = true;
  p.ftol = 1e-2 * cfg.tol;
  p.unique = scalar_unique(column_diagonal_bound(spec, cfg.stencil), h, profile, eps);

  ColumnSweeper sweeper(p, col, h, cfg.stencil.line_count());
  SolveReport report;
  iterate(sweeper, cfg, n - 1, report);
  report.sup_u = *std::max_element(col.begin(), col.end());
  report.min_u = *std::min_element(col.begin(), col.end());
  for (std::size_t k = 1; k < col.size(); ++k) {
    report.lipschitz_norm = std::max(report.lipschitz_norm, std::abs(col[k] - col[k - 1]) / h);
  }
  report.wall_ms = elapsed_ms(start);
  return {{h, std::move(col)}, std::move(report)};
}

}  // namespace cavity
