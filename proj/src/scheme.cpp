#include "cavity/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "cavity/error.hpp"

namespace cavity {
namespace {

// Dual arithmetic, only what the scheme needs.
Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
Dual operator-(Dual a) { return {-a.v, -a.d}; }
Dual operator*(double s, Dual a) { return {s * a.v, s * a.d}; }
Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }

double value_of(double x) { return x; }
double value_of(Dual x) { return x.v; }

template <class T>
T tmax(T a, T b) { return value_of(a) >= value_of(b) ? a : b; }
template <class T>
T tmin(T a, T b) { return value_of(a) <= value_of(b) ? a : b; }

double tsqrt(double x) { return std::sqrt(x); }
Dual tsqrt(Dual x) {
  const double s = std::sqrt(x.v);
  return {s, s > 0.0 ? x.d / (2.0 * s) : 0.0};
}

template <class T>
T lift(double x) {
  if constexpr (std::is_same_v<T, Dual>) {
    return Dual{x, 0.0};
  } else {
    return x;
  }
}

template <class T>
T descent_magnitude(const NodeDifferencesT<T>& d) {
  const T zero = lift<T>(0.0);
  const T gx = tmax(tmax(d.bwd_x, -d.fwd_x), zero);
  const T gy = tmax(tmax(d.bwd_y, -d.fwd_y), zero);
  return tsqrt(gx * gx + gy * gy);
}

template <class T>
T ascent_magnitude(const NodeDifferencesT<T>& d) {
  const T zero = lift<T>(0.0);
  const T gx = tmax(tmax(-d.bwd_x, d.fwd_x), zero);
  const T gy = tmax(tmax(-d.bwd_y, d.fwd_y), zero);
  return tsqrt(gx * gx + gy * gy);
}

template <class T>
T central_magnitude(const NodeDifferencesT<T>& d) {
  const T cx = 0.5 * (d.fwd_x + d.bwd_x);
  const T cy = 0.5 * (d.fwd_y + d.bwd_y);
  return tsqrt(cx * cx + cy * cy);
}

// Weighted positive/negative parts: up * D+ - down * D-.
template <class T>
T split_term(T dd, double up, double down) {
  return value_of(dd) > 0.0 ? up * dd : down * dd;
}

template <class T>
T pucci_pairs(const NodeDifferencesT<T>& d, int line_count, double up, double down, bool maximize) {
  bool any = false;
  T best{};
  for (int p = 0; p < line_count / 2; ++p) {
    const int a = 2 * p;
    const int b = 2 * p + 1;
    if (!d.has(a) || !d.has(b)) continue;
    const T s = split_term(d.second[a], up, down) + split_term(d.second[b], up, down);
    if (!any) {
      best = s;
      any = true;
    } else {
      best = maximize ? tmax(best, s) : tmin(best, s);
    }
  }
  if (!any) throw Error(Errc::StencilLeavesDomain, "no complete orthogonal pair");
  return best;
}

void require_dominant(const SymMatrix2& a) {
  const double off = std::abs(a.m12);
  if (a.m11 - off < -1e-14 || a.m22 - off < -1e-14) {
    throw Error(Errc::NonMonotoneStencil, "diffusion matrix is not diagonally dominant");
  }
}

template <class T>
T control_scheme(const Control& c, Vec2 x, const NodeDifferencesT<T>& d, const StencilConfig& cfg) {
  const SymMatrix2 a = c.diffusion_at(x);
  require_dominant(a);
  const double off = std::abs(a.m12);
  T r = (a.m11 - off) * d.second[0] + (a.m22 - off) * d.second[1];
  if (off > 0.0) {
    const int line = a.m12 > 0.0 ? 2 : 3;
    if (!d.has(line)) throw Error(Errc::StencilLeavesDomain, "diagonal arm unavailable");
    r = r + (2.0 * off) * d.second[line];
  }
  const double bx = c.drift.x;
  const double by = c.drift.y;
  if (cfg.upwind) {
    if (bx > 0.0) r = r + bx * d.fwd_x;
    if (bx < 0.0) r = r + bx * d.bwd_x;
    if (by > 0.0) r = r + by * d.fwd_y;
    if (by < 0.0) r = r + by * d.bwd_y;
  } else {
    r = r + (0.5 * bx) * (d.fwd_x + d.bwd_x) + (0.5 * by) * (d.fwd_y + d.bwd_y);
  }
  return r;
}

template <class T>
T base_scheme(const OperatorSpec& spec, Vec2 x, const NodeDifferencesT<T>& d, const StencilConfig& cfg) {
  const EllipticityParams& bp = spec.base_params();
  switch (spec.variant()) {
    case Variant::Laplace:
      return d.second[0] + d.second[1];
    case Variant::PucciPlus: {
      T r = pucci_pairs(d, cfg.line_count(), bp.Lambda, bp.lambda, true);
      if (bp.b > 0.0) r = r + bp.b * (cfg.upwind ? ascent_magnitude(d) : central_magnitude(d));
      return r;
    }
    case Variant::PucciMinus: {
      T r = pucci_pairs(d, cfg.line_count(), bp.lambda, bp.Lambda, false);
      if (bp.b > 0.0) r = r - bp.b * (cfg.upwind ? descent_magnitude(d) : central_magnitude(d));
      return r;
    }
    case Variant::LinearDrift:
      return control_scheme(spec.families()[0][0], x, d, cfg);
    case Variant::Isaacs: {
      const bool sup_inf = spec.mode() == IsaacsMode::SupInf;
      bool first_outer = true;
      T outer{};
      for (const auto& family : spec.families()) {
        bool first_inner = true;
        T inner{};
        for (const auto& c : family) {
          const T v = control_scheme(c, x, d, cfg);
          if (first_inner) {
            inner = v;
            first_inner = false;
          } else {
            inner = sup_inf ? tmin(inner, v) : tmax(inner, v);
          }
        }
        if (first_outer) {
          outer = inner;
          first_outer = false;
        } else {
          outer = sup_inf ? tmax(outer, inner) : tmin(outer, inner);
        }
      }
      return outer;
    }
  }
  return T{};
}

template <class T>
NodeDifferencesT<T> reflect_differences(const NodeDifferencesT<T>& d) {
  NodeDifferencesT<T> r;
  for (int k = 0; k < kMaxLines; ++k) {
    const int src = kReflectedLine[k];
    if (d.has(src)) {
      r.second[k] = -d.second[src];
      r.available |= 1u << k;
    }
  }
  r.fwd_x = -d.fwd_x;
  r.bwd_x = -d.bwd_x;
  r.fwd_y = d.bwd_y;
  r.bwd_y = d.fwd_y;
  return r;
}

template <class T>
T apply_level(const OperatorSpec& spec, std::size_t level, Vec2 x, const NodeDifferencesT<T>& d,
              const StencilConfig& cfg) {
  if (level == 0) return base_scheme(spec, x, d, cfg);
  const OperatorTransform& t = spec.transforms()[level - 1];
  if (const auto* rs = std::get_if<RescaleTransform>(&t)) {
    const double s = 0.5 * rs->r0;
    const double second_scale = rs->eps / (s * s);
    const double first_scale = rs->eps / s;
    NodeDifferencesT<T> scaled = d;
    for (auto& v : scaled.second) v = second_scale * v;
    scaled.fwd_x = first_scale * d.fwd_x;
    scaled.bwd_x = first_scale * d.bwd_x;
    scaled.fwd_y = first_scale * d.fwd_y;
    scaled.bwd_y = first_scale * d.bwd_y;
    return (s * s / rs->eps) * apply_level(spec, level - 1, rs->x0 + s * x, scaled, cfg);
  }
  if (x.y >= 0.0) return apply_level(spec, level - 1, x, d, cfg);
  return -apply_level(spec, level - 1, reflect_point(x), reflect_differences(d), cfg);
}

}  // namespace

void StencilConfig::validate() const {
  if (n_dirs != 4 && n_dirs != 8 && n_dirs != 16) {
    throw Error(Errc::InvalidStencilConfig, "n_dirs must be 4, 8 or 16");
  }
}

NodeDifferences differences(const LocalStencil& s, double v) {
  NodeDifferences d;
  d.available = s.available;
  const double h2 = s.h * s.h;
  for (int k = 0; k < s.line_count; ++k) {
    if (s.has(k)) d.second[k] = (s.plus[k] + s.minus[k] - 2.0 * v) / (kLines[k].norm2 * h2);
  }
  d.fwd_x = (s.plus[0] - v) / s.h;
  d.bwd_x = (v - s.minus[0]) / s.h;
  d.fwd_y = (s.plus[1] - v) / s.h;
  d.bwd_y = (v - s.minus[1]) / s.h;
  return d;
}

NodeDifferencesT<Dual> differences(const LocalStencil& s, Dual v) {
  const NodeDifferences p = differences(s, v.v);
  NodeDifferencesT<Dual> d;
  d.available = p.available;
  const double h2 = s.h * s.h;
  for (int k = 0; k < s.line_count; ++k) {
    if (s.has(k)) d.second[k] = {p.second[k], -2.0 * v.d / (kLines[k].norm2 * h2)};
  }
  d.fwd_x = {p.fwd_x, -v.d / s.h};
  d.bwd_x = {p.bwd_x, v.d / s.h};
  d.fwd_y = {p.fwd_y, -v.d / s.h};
  d.bwd_y = {p.bwd_y, v.d / s.h};
  return d;
}

namespace {

// Differences with a unit tangent on one slot: -1 = own value, 2k = plus[k], 2k+1 = minus[k].
NodeDifferencesT<Dual> seeded_differences(const LocalStencil& s, double v, int slot) {
  const NodeDifferences p = differences(s, v);
  auto tangent = [slot](int k, bool plus) { return slot == 2 * k + (plus ? 0 : 1) ? 1.0 : 0.0; };
  const double dv = slot < 0 ? 1.0 : 0.0;
  NodeDifferencesT<Dual> d;
  d.available = p.available;
  const double h2 = s.h * s.h;
  for (int k = 0; k < s.line_count; ++k) {
    if (!s.has(k)) continue;
    d.second[k] = {p.second[k], (tangent(k, true) + tangent(k, false) - 2.0 * dv) / (kLines[k].norm2 * h2)};
  }
  d.fwd_x = {p.fwd_x, (tangent(0, true) - dv) / s.h};
  d.bwd_x = {p.bwd_x, (dv - tangent(0, false)) / s.h};
  d.fwd_y = {p.fwd_y, (tangent(1, true) - dv) / s.h};
  d.bwd_y = {p.bwd_y, (dv - tangent(1, false)) / s.h};
  return d;
}

}  // namespace

SchemeLinearization linearize_scheme(const OperatorSpec& spec, const LocalStencil& s, double v,
                                     const StencilConfig& cfg) {
  SchemeLinearization out;
  const Dual own = apply_scheme(spec, s.x, seeded_differences(s, v, -1), cfg);
  out.value = own.v;
  out.own = own.d;
  for (int k = 0; k < s.line_count; ++k) {
    if (!s.has(k)) continue;
    out.plus[k] = apply_scheme(spec, s.x, seeded_differences(s, v, 2 * k), cfg).d;
    out.minus[k] = apply_scheme(spec, s.x, seeded_differences(s, v, 2 * k + 1), cfg).d;
  }
  return out;
}

LocalStencil gather(const ScalarField& u, NodeIndex node, const StencilConfig& cfg) {
  const Grid& g = u.grid();
  if (!g.contains(node.i, node.j) || g.node_class(node.i, node.j) != NodeClass::Interior) {
    throw Error(Errc::StencilLeavesDomain, "stencil requested at a non-interior node");
  }
  LocalStencil s;
  s.x = g.position(node);
  s.h = g.h();
  s.line_count = cfg.line_count();
  for (int k = 0; k < s.line_count; ++k) {
    const auto [di, dj, n2] = kLines[k];
    if (g.active(node.i + di, node.j + dj) && g.active(node.i - di, node.j - dj)) {
      s.plus[k] = u(node.i + di, node.j + dj);
      s.minus[k] = u(node.i - di, node.j - dj);
      s.available |= 1u << k;
    }
  }
  return s;
}

double apply_scheme(const OperatorSpec& spec, Vec2 x, const NodeDifferences& d, const StencilConfig& cfg) {
  return apply_level(spec, spec.transforms().size(), x, d, cfg);
}

Dual apply_scheme(const OperatorSpec& spec, Vec2 x, const NodeDifferencesT<Dual>& d,
                  const StencilConfig& cfg) {
  return apply_level(spec, spec.transforms().size(), x, d, cfg);
}

double scheme_diagonal_bound(const OperatorSpec& spec, const StencilConfig& cfg) {
  const EllipticityParams& bp = spec.base_params();
  switch (spec.variant()) {
    case Variant::Laplace:
      return 4.0;
    case Variant::PucciPlus:
    case Variant::PucciMinus: {
      double k = INFINITY;
      for (int p = 0; p < cfg.line_count() / 2; ++p) {
        k = std::min(k, 2.0 * bp.lambda * (1.0 / kLines[2 * p].norm2 + 1.0 / kLines[2 * p + 1].norm2));
      }
      return k;
    }
    case Variant::LinearDrift:
    case Variant::Isaacs: {
      double k = INFINITY;
      constexpr double kCorners[4][2] = {{-1, -1}, {1, -1}, {-1, 1}, {1, 1}};
      for (const auto& family : spec.families()) {
        for (const auto& c : family) {
          for (const auto& corner : kCorners) {
            const SymMatrix2 a = c.diffusion_at({corner[0], corner[1]});
            k = std::min(k, 2.0 * a.trace() - 2.0 * std::abs(a.m12));
          }
        }
      }
      return k;
    }
  }
  return 0.0;
}

void validate_scheme(const OperatorSpec& spec, const StencilConfig& cfg) {
  cfg.validate();
  constexpr double kCorners[4][2] = {{-1, -1}, {1, -1}, {-1, 1}, {1, 1}};
  for (const auto& family : spec.families()) {
    for (const auto& c : family) {
      for (const auto& corner : kCorners) {
        const SymMatrix2 a = c.diffusion_at({corner[0], corner[1]});
        require_dominant(a);
        if (a.m12 != 0.0 && cfg.line_count() < 4) {
          throw Error(Errc::InvalidStencilConfig, "off-diagonal diffusion needs n_dirs >= 8");
        }
      }
    }
  }
}

double directional_second_difference(const ScalarField& u, NodeIndex node, int di, int dj) {
  const Grid& g = u.grid();
  if (!g.active(node.i, node.j) || !g.active(node.i + di, node.j + dj) ||
      !g.active(node.i - di, node.j - dj)) {
    throw Error(Errc::StencilLeavesDomain, "directional stencil leaves the domain");
  }
  const double len2 = (di * di + dj * dj) * g.h() * g.h();
  return (u(node.i + di, node.j + dj) - 2.0 * u(node.i, node.j) + u(node.i - di, node.j - dj)) / len2;
}

UpwindGradient upwind_gradient(const ScalarField& u, NodeIndex node) {
  const Grid& g = u.grid();
  const int i = node.i;
  const int j = node.j;
  if (!g.active(i, j) || !g.active(i + 1, j) || !g.active(i - 1, j) || !g.active(i, j + 1) ||
      !g.active(i, j - 1)) {
    throw Error(Errc::StencilLeavesDomain, "gradient stencil leaves the domain");
  }
  NodeDifferences d;
  const double v = u(i, j);
  d.fwd_x = (u(i + 1, j) - v) / g.h();
  d.bwd_x = (v - u(i - 1, j)) / g.h();
  d.fwd_y = (u(i, j + 1) - v) / g.h();
  d.bwd_y = (v - u(i, j - 1)) / g.h();
  UpwindGradient r;
  r.central = {0.5 * (d.fwd_x + d.bwd_x), 0.5 * (d.fwd_y + d.bwd_y)};
  r.descent_magnitude = descent_magnitude(d);
  r.ascent_magnitude = ascent_magnitude(d);
  return r;
}

HessianEstimate hessian_eigen_estimates(const ScalarField& u, NodeIndex node, const StencilConfig& cfg) {
  cfg.validate();
  HessianEstimate est;
  est.d_min = INFINITY;
  est.d_max = -INFINITY;
  std::array<double, kMaxLines> dd{};
  for (int k = 0; k < cfg.line_count(); ++k) {
    dd[k] = directional_second_difference(u, node, kLines[k].di, kLines[k].dj);
    est.d_min = std::min(est.d_min, dd[k]);
    est.d_max = std::max(est.d_max, dd[k]);
  }
  for (int p = 0; p < cfg.line_count() / 2; ++p) est.pairs.emplace_back(dd[2 * p], dd[2 * p + 1]);
  return est;
}

ScalarField residual(const ScalarField& u, const OperatorSpec& spec, const ReactionProfile& profile,
                     double eps, const StencilConfig& cfg, const BoundaryData& phi,
                     const RightHandSide& rhs) {
  const Grid& g = u.grid();
  const bool reactive = profile.kind != ReactionKind::Off;
  ScalarField r(u.grid_ptr());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const NodeClass c = g.node_class(k);
    if (c == NodeClass::Exterior) continue;
    const NodeIndex node = g.node(k);
    if (c == NodeClass::Interior) {
      const LocalStencil s = gather(u, node, cfg);
      const double f = apply_scheme(spec, s.x, differences(s, u[k]), cfg);
      r[k] = f - (reactive ? zeta_eps(profile, eps, u[k]) : 0.0) - rhs.at(k);
    } else if (phi) {
      r[k] = u[k] - phi(g.position(node));
    }
  }
  return r;
}

double interior_residual_norm(const ScalarField& u, const OperatorSpec& spec,
                              const ReactionProfile& profile, double eps, const StencilConfig& cfg,
                              const RightHandSide& rhs) {
  const Grid& g = u.grid();
  const bool reactive = profile.kind != ReactionKind::Off;
  double worst = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.node_class(k) != NodeClass::Interior) continue;
    const LocalStencil s = gather(u, g.node(k), cfg);
    const double f = apply_scheme(spec, s.x, differences(s, u[k]), cfg);
    const double r = f - (reactive ? zeta_eps(profile, eps, u[k]) : 0.0) - rhs.at(k);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

MonotonicityReport monotonicity_check(const OperatorSpec& spec, const StencilConfig& cfg,
                                      std::size_t samples, std::uint64_t seed, double h) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> bump(1e-3, 0.5);
  std::uniform_int_distribution<int> pick(0, 2 * cfg.line_count() - 1);
  MonotonicityReport report;
  report.samples = samples;
  for (std::size_t n = 0; n < samples; ++n) {
    LocalStencil s;
    s.x = {unit(rng), unit(rng)};
    s.h = h;
    s.line_count = cfg.line_count();
    for (int k = 0; k < s.line_count; ++k) {
      s.plus[k] = unit(rng);
      s.minus[k] = unit(rng);
      s.available |= 1u << k;
    }
    const double v = unit(rng);
    const double f0 = apply_scheme(spec, s.x, differences(s, v), cfg);
    const double slack = 1e-9 * std::max(1.0, std::abs(f0));

    LocalStencil raised = s;
    const int slot = pick(rng);
    const double delta = bump(rng);
    if (slot < s.line_count) {
      raised.plus[slot] += delta;
    } else {
      raised.minus[slot - s.line_count] += delta;
    }
    const double f_nb = apply_scheme(spec, s.x, differences(raised, v), cfg);
    if (f_nb < f0 - slack) {
      ++report.neighbor_violations;
      report.worst_gap = std::max(report.worst_gap, f0 - f_nb);
    }
    const double f_own = apply_scheme(spec, s.x, differences(s, v + bump(rng)), cfg);
    if (f_own > f0 + slack) {
      ++report.own_violations;
      report.worst_gap = std::max(report.worst_gap, f_own - f0);
    }
  }
  return report;
}

}  // namespace cavity
