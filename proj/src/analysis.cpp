#include "cavity/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "cavity/error.hpp"
#include "cavity/norms.hpp"
#include "cavity/parallel.hpp"

namespace cavity {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

double directed_hausdorff(const std::vector<Vec2>& a, const std::vector<Vec2>& sorted_b) {
  double worst = 0.0;
  for (const Vec2& p : a) {
    auto it = std::lower_bound(sorted_b.begin(), sorted_b.end(), p.x,
                               [](const Vec2& q, double x) { return q.x < x; });
    double best2 = kInf;
    for (auto r = it; r != sorted_b.end(); ++r) {
      const double dx = r->x - p.x;
      if (dx * dx >= best2) break;
      const double dy = r->y - p.y;
      best2 = std::min(best2, dx * dx + dy * dy);
    }
    for (auto l = it; l != sorted_b.begin();) {
      --l;
      const double dx = p.x - l->x;
      if (dx * dx >= best2) break;
      const double dy = l->y - p.y;
      best2 = std::min(best2, dx * dx + dy * dy);
    }
    worst = std::max(worst, std::sqrt(best2));
  }
  return worst;
}

std::vector<Vec2> sorted_by_x(std::vector<Vec2> v) {
  std::sort(v.begin(), v.end(), [](const Vec2& a, const Vec2& b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  return v;
}

double fd_step_value(const BarrierParams& bp, Vec2 y) { return barrier_eval(bp, y).value; }

}  // namespace

Contour extract_free_boundary(const ScalarField& u, double level) {
  const Grid& g = u.grid();
  if (!(level >= u.min_value() && level <= u.max_value())) {
    throw Error(Errc::LevelOutOfRange, "level " + std::to_string(level) + " outside field range");
  }
  Contour c;
  const int nx = g.nx();
  const int ny = g.ny();
  // Crossing point index per edge: horizontal edges first, then vertical.
  std::vector<int> hcache(static_cast<std::size_t>(nx) * ny, -1);
  std::vector<int> vcache(static_cast<std::size_t>(nx) * ny, -1);
  auto crossing = [&](int i, int j, bool horizontal) -> int {
    int& slot = (horizontal ? hcache : vcache)[g.index(i, j)];
    if (slot >= 0) return slot;
    const int i2 = horizontal ? i + 1 : i;
    const int j2 = horizontal ? j : j + 1;
    const double vp = u(i, j);
    const double vq = u(i2, j2);
    const double t = (level - vp) / (vq - vp);
    const Vec2 p = g.position(i, j);
    const Vec2 q = g.position(i2, j2);
    c.points.push_back(p + t * (q - p));
    slot = static_cast<int>(c.points.size()) - 1;
    return slot;
  };
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      if (!g.active(i, j) || !g.active(i + 1, j) || !g.active(i + 1, j + 1) || !g.active(i, j + 1)) continue;
      const double va = u(i, j);
      const double vb = u(i + 1, j);
      const double vc = u(i + 1, j + 1);
      const double vd = u(i, j + 1);
      const bool ha = va >= level;
      const bool hb = vb >= level;
      const bool hc = vc >= level;
      const bool hd = vd >= level;
      // Edges: 0 bottom (a-b), 1 right (b-c), 2 top (d-c), 3 left (a-d).
      const bool cross[4] = {ha != hb, hb != hc, hd != hc, ha != hd};
      auto edge_point = [&](int e) {
        switch (e) {
          case 0: return crossing(i, j, true);
          case 1: return crossing(i + 1, j, false);
          case 2: return crossing(i, j + 1, true);
          default: return crossing(i, j, false);
        }
      };
      auto add = [&](int e0, int e1) {
        c.segments.push_back({c.points[static_cast<std::size_t>(edge_point(e0))],
                              c.points[static_cast<std::size_t>(edge_point(e1))]});
      };
      const int count = cross[0] + cross[1] + cross[2] + cross[3];
      if (count == 2) {
        int first = -1;
        int second = -1;
        for (int e = 0; e < 4; ++e) {
          if (!cross[e]) continue;
          (first < 0 ? first : second) = e;
        }
        add(first, second);
      } else if (count == 4) {
        const bool centre_high = 0.25 * (va + vb + vc + vd) >= level;
        // Cut off the corners on the other side of the centre.
        const bool cut_a = (ha != centre_high);
        if (cut_a) {
          add(3, 0);
          add(1, 2);
        } else {
          add(0, 1);
          add(2, 3);
        }
      }
    }
  }
  return c;
}

double hausdorff_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  if (a.empty() || b.empty()) throw Error(Errc::EmptySet, "Hausdorff distance of an empty set");
  const std::vector<Vec2> sa = sorted_by_x(a);
  const std::vector<Vec2> sb = sorted_by_x(b);
  return std::max(directed_hausdorff(a, sb), directed_hausdorff(b, sa));
}

SweepResult epsilon_sweep(const SweepSetup& setup) {
  if (!setup.grid) throw Error(Errc::InvalidArgument, "sweep needs a grid");
  if (setup.eps_list.empty()) throw Error(Errc::InvalidArgument, "empty eps list");
  const double h = setup.grid->h();
  for (std::size_t k = 0; k < setup.eps_list.size(); ++k) {
    const double e = setup.eps_list[k];
    if (k > 0 && !(e < setup.eps_list[k - 1])) {
      throw Error(Errc::InvalidArgument, "eps list must be strictly decreasing");
    }
    if (setup.resolution_guard && !(e > 2.0 * h)) {
      throw Error(Errc::EpsilonBelowResolution,
                  "eps " + std::to_string(e) + " does not exceed 2h = " + std::to_string(2.0 * h));
    }
  }
  const std::size_t m = setup.eps_list.size();
  std::vector<std::optional<SolveResult>> solves(m);
  parallel_for(m, resolve_threads(setup.threads), [&](std::size_t k) {
    solves[k] = solve_singular(setup.spec, setup.profile, setup.eps_list[k], setup.phi, setup.grid,
                               setup.solver);
  });

  SweepResult out;
  out.report.profile = setup.profile;
  for (std::size_t k = 0; k < m; ++k) {
    const SolveResult& s = *solves[k];
    SweepRow row;
    row.eps = setup.eps_list[k];
    row.lipschitz_norm = s.report.lipschitz_norm;
    row.sup_u = s.report.sup_u;
    row.min_u = s.report.min_u;
    row.sweeps = s.report.sweeps;
    row.final_residual = s.report.final_residual;
    row.converged = s.report.converged;
    row.multiple_root_nodes = s.report.multiple_root_nodes;
    Contour fb;
    try {
      fb = extract_free_boundary(s.u, row.eps);
    } catch (const Error& e) {
      if (e.code() != Errc::LevelOutOfRange) throw;
    }
    row.fb_hausdorff_to_prev = kNaN;
    if (k > 0 && !fb.empty() && !out.free_boundaries.back().empty()) {
      row.fb_hausdorff_to_prev = hausdorff_distance(fb.points, out.free_boundaries.back().points);
    }
    out.report.rows.push_back(row);
    out.free_boundaries.push_back(std::move(fb));
    out.fields.push_back(s.u);
  }
  const auto& rows = out.report.rows;
  if (rows.size() >= 2) {
    const double last = rows.back().lipschitz_norm;
    const double prev = rows[rows.size() - 2].lipschitz_norm;
    out.report.plateau_ratio = (last == 0.0 && prev == 0.0) ? kNaN : last / prev;
  } else {
    out.report.plateau_ratio = kNaN;
  }
  out.report.uniform_gaps = uniform_gaps(out.fields);
  return out;
}

AbpReport abp_check(const ScalarField& u, const BoundaryData& phi) {
  const Grid& g = u.grid();
  double sup_phi = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.is_boundary(k)) sup_phi = std::max(sup_phi, std::abs(phi(g.position(g.node(k)))));
  }
  AbpReport r;
  r.min_u = u.min_value();
  r.sup_u = u.max_value();
  if (sup_phi > 0.0) {
    r.ratio = r.sup_u / sup_phi;
  } else {
    r.ratio = sup_norm(u) == 0.0 ? 0.0 : kInf;
  }
  return r;
}

LimitReport limit_residual_check(const ScalarField& u, const OperatorSpec& spec, double threshold,
                                 const StencilConfig& cfg) {
  const Grid& g = u.grid();
  LimitReport r;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.node_class(k) != NodeClass::Interior || !(u[k] > threshold)) continue;
    const NodeIndex n = g.node(k);
    bool near = false;
    for (int dj = -2; dj <= 2 && !near; ++dj) {
      for (int di = -2; di <= 2; ++di) {
        if (di * di + dj * dj > 4 || !g.active(n.i + di, n.j + dj)) continue;
        if (u(n.i + di, n.j + dj) <= threshold) {
          near = true;
          break;
        }
      }
    }
    if (near) continue;
    const LocalStencil s = gather(u, n, cfg);
    r.sup_residual = std::max(r.sup_residual, std::abs(apply_scheme(spec, s.x, differences(s, u[k]), cfg)));
    ++r.nodes_checked;
  }
  r.vacuous = r.nodes_checked == 0;
  return r;
}

std::vector<double> uniform_gaps(const std::vector<ScalarField>& fields) {
  std::vector<double> gaps;
  for (std::size_t k = 0; k + 1 < fields.size(); ++k) {
    const ScalarField& a = fields[k];
    const ScalarField& b = fields[k + 1];
    if (!a.same_grid(b)) throw Error(Errc::GridMismatch, "sweep fields on different grids");
    double gap = 0.0;
    for (std::size_t n = 0; n < a.grid().size(); ++n) {
      if (a.grid().node_class(n) != NodeClass::Exterior) gap = std::max(gap, std::abs(a[n] - b[n]));
    }
    gaps.push_back(gap);
  }
  return gaps;
}

double BarrierParams::delta_star() const {
  return (2.0 / params.lambda) * (params.b + params.n_dim * params.Lambda);
}

BarrierValue barrier_eval(const BarrierParams& bp, Vec2 y) {
  const double e = std::exp(-bp.delta * dot(y, y));
  const double a = 2.0 * bp.mu * bp.delta * e;
  const double q = 4.0 * bp.mu * bp.delta * bp.delta * e;
  BarrierValue v;
  v.value = bp.mu * (e - std::exp(-bp.delta));
  v.gradient = {-a * y.x, -a * y.y};
  v.hessian = {q * y.x * y.x - a, q * y.x * y.y, q * y.y * y.y - a};
  return v;
}

double barrier_lower_bound(const BarrierParams& bp, Vec2 y) {
  const EllipticityParams& p = bp.params;
  return 2.0 * bp.mu * bp.delta * (bp.delta * p.lambda / 2.0 - p.b - p.n_dim * p.Lambda) *
         std::exp(-bp.delta * dot(y, y));
}

BarrierReport verify_barrier(const BarrierParams& bp, std::size_t samples, std::uint64_t seed) {
  if (samples < 1000) throw Error(Errc::InvalidArgument, "barrier check needs at least 1000 samples");
  bp.params.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> area(0.25, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  BarrierReport r;
  r.samples = samples;
  r.delta_star = bp.delta_star();
  r.admissible = bp.admissible();
  r.sampled_min = kInf;
  r.min_gap_to_bound = kInf;
  const double step = 1e-4;
  const std::size_t fd_samples = std::min<std::size_t>(samples, 1000);
  for (std::size_t k = 0; k < samples; ++k) {
    const double rad = std::sqrt(area(rng));
    const double th = angle(rng);
    const Vec2 y{rad * std::cos(th), rad * std::sin(th)};
    const BarrierValue v = barrier_eval(bp, y);
    const double value = pucci_minus(bp.params, v.hessian) - bp.params.b * norm(v.gradient);
    r.sampled_min = std::min(r.sampled_min, value);
    r.min_gap_to_bound = std::min(r.min_gap_to_bound, value - barrier_lower_bound(bp, y));
    if (value < 0.0) ++r.negative_samples;

    if (k >= fd_samples) continue;
    const Vec2 ex{step, 0.0};
    const Vec2 ey{0.0, step};
    const double f0 = fd_step_value(bp, y);
    const double fxp = fd_step_value(bp, y + ex);
    const double fxm = fd_step_value(bp, y - ex);
    const double fyp = fd_step_value(bp, y + ey);
    const double fym = fd_step_value(bp, y - ey);
    const double gx = (fxp - fxm) / (2.0 * step);
    const double gy = (fyp - fym) / (2.0 * step);
    const double hxx = (fxp - 2.0 * f0 + fxm) / (step * step);
    const double hyy = (fyp - 2.0 * f0 + fym) / (step * step);
    const double hxy = (fd_step_value(bp, y + ex + ey) - fd_step_value(bp, y + ex - ey) -
                        fd_step_value(bp, y - ex + ey) + fd_step_value(bp, y - ex - ey)) /
                       (4.0 * step * step);
    r.fd_gradient_error =
        std::max({r.fd_gradient_error, std::abs(gx - v.gradient.x), std::abs(gy - v.gradient.y)});
    r.fd_hessian_error = std::max({r.fd_hessian_error, std::abs(hxx - v.hessian.m11),
                                   std::abs(hxy - v.hessian.m12), std::abs(hyy - v.hessian.m22)});
  }
  return r;
}

HopfResult hopf_experiment(const OperatorSpec& spec, double r, int n, const BoundaryData& phi,
                           const SolverConfig& cfg) {
  if (!(r > 0.0 && r <= 1.0)) throw Error(Errc::InvalidArgument, "Hopf radius must lie in (0, 1]");
  HopfResult out;
  out.center = hopf_center(r);
  out.contact = hopf_contact();
  if (phi(out.contact) > 1e-10) {
    throw Error(Errc::NonVanishingContact, "boundary datum at the contact point is " +
                                               std::to_string(phi(out.contact)));
  }
  const GridPtr grid = build_grid(DomainSpec::ball(out.center, r), n);
  for (std::size_t k = 0; k < grid->size(); ++k) {
    if (grid->is_boundary(k) && phi(grid->position(grid->node(k))) < 0.0) {
      throw Error(Errc::NegativeBoundaryData, "Hopf data must be nonnegative");
    }
  }
  SolveResult s = solve_dirichlet(spec, RightHandSide(0.0), phi, grid, cfg);
  const NodeIndex x0 = grid->nearest_node(out.contact);
  if (!grid->active(x0.i, x0.j + 2)) throw Error(Errc::StencilLeavesDomain, "ball too small for theta");
  const double u0 = s.u(x0.i, x0.j);
  const double u1 = s.u(x0.i, x0.j + 1);
  const double u2 = s.u(x0.i, x0.j + 2);
  out.theta = (-3.0 * u0 + 4.0 * u1 - u2) / (2.0 * grid->h());
  out.u_center = s.u.interpolate(out.center);
  out.c_measured = out.u_center / (out.theta * r);
  out.report = std::move(s.report);
  return out;
}

BoundaryData hopf_random_data(double r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(-0.3, 0.3);
  std::uniform_real_distribution<double> freq(-3.0, 3.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  struct Term {
    double c, wx, wy, psi;
  };
  std::array<Term, 3> terms{};
  for (auto& t : terms) t = {amp(rng), freq(rng), freq(rng), phase(rng)};
  const Vec2 z = hopf_center(r);
  return [terms, z, r](Vec2 x) {
    const Vec2 y = (1.0 / r) * (x - z);
    double g = 1.0;
    for (const auto& t : terms) g += t.c * std::cos(t.wx * y.x + t.wy * y.y + t.psi);
    return r * std::max(0.0, 1.0 + y.y) * g;
  };
}

PropagationResult propagation_experiment(const OperatorSpec& spec, double sigma, int n,
                                         const SolverConfig& cfg) {
  if (!(sigma > 0.0)) throw Error(Errc::InvalidArgument, "sigma must be positive");
  const GridPtr half = build_grid(DomainSpec::half_ball(1.0), n);
  const GridPtr ball = build_grid(DomainSpec::ball({0.0, 0.0}, 1.0), n);
  const BoundaryData phi = [sigma](Vec2 x) { return x.y <= 1e-12 ? sigma : 0.0; };
  SolveResult s = solve_dirichlet(spec, RightHandSide(0.0), phi, half, cfg);

  ScalarField big(ball, 0.0);
  const int mid = (n - 1) / 2;
  for (std::size_t k = 0; k < ball->size(); ++k) {
    if (ball->node_class(k) == NodeClass::Exterior) continue;
    const NodeIndex b = ball->node(k);
    const int jh = b.j - mid;
    if (!half->active(b.i, std::abs(jh))) throw Error(Errc::GridMismatch, "half-ball and ball masks differ");
    big[k] = jh >= 0 ? s.u(b.i, jh) : 2.0 * sigma - s.u(b.i, -jh);
  }

  PropagationResult out{std::move(s.u), big, kInf, 0.0, 0.0, std::move(s.report)};
  for (std::size_t k = 0; k < ball->size(); ++k) {
    if (ball->node_class(k) == NodeClass::Exterior) continue;
    const NodeIndex b = ball->node(k);
    if (b.j < mid) {
      const double pair = big[k] + big(b.i, 2 * mid - b.j);
      out.mirror_error = std::max(out.mirror_error, std::abs(pair - 2.0 * sigma));
    }
  }
  const OperatorSpec g = reflect_operator(spec);
  const ScalarField res = residual(big, g, ReactionProfile::off(), 1.0, cfg.stencil);
  for (std::size_t k = 0; k < ball->size(); ++k) {
    if (ball->node_class(k) != NodeClass::Interior || ball->node(k).j == mid) continue;
    out.reflection_residual = std::max(out.reflection_residual, std::abs(res[k]));
  }
  for (std::size_t k = 0; k < half->size(); ++k) {
    if (half->node_class(k) == NodeClass::Exterior) continue;
    const Vec2 x = half->position(half->node(k));
    if (x.y > 0.0 && norm(x) < 0.75) out.c_measured = std::min(out.c_measured, out.w[k] / sigma);
  }
  return out;
}

double harnack_ratio(const ScalarField& u, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(Errc::InvalidArgument, "fraction must lie in (0, 1]");
  const Grid& g = u.grid();
  const DomainSpec& d = g.domain();
  constexpr double slack = 1e-12;
  auto inside = [&](Vec2 x) {
    switch (d.shape) {
      case Shape::UnitSquare:
        return std::abs(x.x - 0.5) <= 0.5 * fraction + slack && std::abs(x.y - 0.5) <= 0.5 * fraction + slack;
      case Shape::HalfBall:
        return x.y >= 0.0 && norm(x) <= fraction * d.radius + slack;
      case Shape::Ball:
        return distance(x, d.center) <= fraction * d.radius + slack;
    }
    return false;
  };
  double lo = kInf;
  double hi = -kInf;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.node_class(k) == NodeClass::Exterior || !inside(g.position(g.node(k)))) continue;
    if (!(u[k] > 0.0)) throw Error(Errc::NonPositiveField, "field is not positive on the inner set");
    lo = std::min(lo, u[k]);
    hi = std::max(hi, u[k]);
  }
  if (hi < lo) throw Error(Errc::EmptySet, "no nodes in the inner set");
  return hi / lo;
}

ScalarField blowup_field(const ScalarField& u, Vec2 x0, double rho, double eps, BlowupMode mode, int n) {
  if (!(rho > 0.0)) throw Error(Errc::NonPositiveScale, "rho must be positive");
  if (mode == BlowupMode::DivideByEps && !(eps > 0.0)) throw Error(Errc::NonPositiveEpsilon, "eps must be positive");
  const GridPtr unit = build_grid(DomainSpec::ball({0.0, 0.0}, 1.0), n);
  ScalarField v(unit, 0.0);
  for (std::size_t k = 0; k < unit->size(); ++k) {
    if (unit->node_class(k) == NodeClass::Exterior) continue;
    const Vec2 p = x0 + rho * unit->position(unit->node(k));
    double value = 0.0;
    try {
      value = u.interpolate(p);
    } catch (const Error& e) {
      if (e.code() != Errc::StencilLeavesDomain) throw;
      throw Error(Errc::BlowupLeavesDomain, "blow-up window leaves the domain");
    }
    v[k] = mode == BlowupMode::DivideByEps ? value / eps : (value - eps) / rho;
  }
  return v;
}

}  // namespace cavity
