#include "cavity/operators.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "cavity/error.hpp"

namespace cavity {
namespace {

constexpr double kAdmissibleSlack = 1e-12;

void validate_control(const EllipticityParams& params, const Control& c) {
  // Eigenvalue extremes of an affine family over a box sit at its corners.
  constexpr double kCorners[4][2] = {{-1, -1}, {1, -1}, {-1, 1}, {1, 1}};
  for (const auto& corner : kCorners) {
    const auto [e1, e2] = sym_eigenvalues(c.diffusion_at({corner[0], corner[1]}));
    if (e1 < params.lambda * (1.0 - kAdmissibleSlack) || e2 > params.Lambda * (1.0 + kAdmissibleSlack)) {
      throw Error(Errc::InadmissibleCoefficients, "diffusion eigenvalues outside [lambda, Lambda]");
    }
  }
  if (norm(c.drift) > params.b * (1.0 + kAdmissibleSlack) + 1e-300) {
    throw Error(Errc::InadmissibleCoefficients, "drift exceeds b");
  }
}

double eval_control(const Control& c, Vec2 x, Vec2 p, SymMatrix2 m) {
  return trace_product(c.diffusion_at(x), m) + dot(c.drift, p);
}

double eval_base(const OperatorSpec& spec, Vec2 x, Vec2 p, SymMatrix2 m) {
  const EllipticityParams& bp = spec.base_params();
  switch (spec.variant()) {
    case Variant::Laplace:
      return m.trace();
    case Variant::PucciPlus:
      return pucci_plus(bp, m) + bp.b * norm(p);
    case Variant::PucciMinus:
      return pucci_minus(bp, m) - bp.b * norm(p);
    case Variant::LinearDrift:
      return eval_control(spec.families()[0][0], x, p, m);
    case Variant::Isaacs: {
      const bool sup_inf = spec.mode() == IsaacsMode::SupInf;
      double outer = sup_inf ? -INFINITY : INFINITY;
      for (const auto& family : spec.families()) {
        double inner = sup_inf ? INFINITY : -INFINITY;
        for (const auto& c : family) {
          const double v = eval_control(c, x, p, m);
          inner = sup_inf ? std::min(inner, v) : std::max(inner, v);
        }
        outer = sup_inf ? std::max(outer, inner) : std::min(outer, inner);
      }
      return outer;
    }
  }
  return 0.0;
}

double eval_level(const OperatorSpec& spec, std::size_t level, Vec2 x, Vec2 p, SymMatrix2 m) {
  if (level == 0) return eval_base(spec, x, p, m);
  const OperatorTransform& t = spec.transforms()[level - 1];
  if (const auto* r = std::get_if<RescaleTransform>(&t)) {
    const double s = 0.5 * r->r0;
    const double inner = eval_level(spec, level - 1, r->x0 + s * x, (r->eps / s) * p,
                                    (r->eps / (s * s)) * m);
    return (s * s / r->eps) * inner;
  }
  if (x.y >= 0.0) return eval_level(spec, level - 1, x, p, m);
  return -eval_level(spec, level - 1, reflect_point(x), reflect_gradient(p), reflect_hessian(m));
}

}  // namespace

void EllipticityParams::validate() const {
  if (!(lambda > 0.0)) throw Error(Errc::RangeError, "lambda must be positive");
  if (!(Lambda >= lambda)) throw Error(Errc::RangeError, "Lambda must be >= lambda");
  if (!(b >= 0.0)) throw Error(Errc::RangeError, "b must be nonnegative");
  if (n_dim < 1) throw Error(Errc::RangeError, "n_dim must be positive");
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::Laplace: return "laplace";
    case Variant::PucciPlus: return "pucci_plus";
    case Variant::PucciMinus: return "pucci_minus";
    case Variant::LinearDrift: return "linear_drift";
    case Variant::Isaacs: return "isaacs";
  }
  return "unknown";
}

std::pair<double, double> sym_eigenvalues(SymMatrix2 m) {
  const double mean = 0.5 * (m.m11 + m.m22);
  const double radius = std::hypot(0.5 * (m.m11 - m.m22), m.m12);
  return {mean - radius, mean + radius};
}

double pucci_plus(const EllipticityParams& params, SymMatrix2 m) {
  const auto [e1, e2] = sym_eigenvalues(m);
  auto term = [&](double e) { return e > 0.0 ? params.Lambda * e : params.lambda * e; };
  return term(e1) + term(e2);
}

double pucci_minus(const EllipticityParams& params, SymMatrix2 m) {
  const auto [e1, e2] = sym_eigenvalues(m);
  auto term = [&](double e) { return e > 0.0 ? params.lambda * e : params.Lambda * e; };
  return term(e1) + term(e2);
}

OperatorSpec OperatorSpec::laplace() {
  OperatorSpec s;
  s.variant_ = Variant::Laplace;
  return s;
}

OperatorSpec OperatorSpec::pucci_plus(const EllipticityParams& params) {
  params.validate();
  OperatorSpec s;
  s.variant_ = Variant::PucciPlus;
  s.params_ = s.base_params_ = params;
  return s;
}

OperatorSpec OperatorSpec::pucci_minus(const EllipticityParams& params) {
  params.validate();
  OperatorSpec s;
  s.variant_ = Variant::PucciMinus;
  s.params_ = s.base_params_ = params;
  return s;
}

OperatorSpec OperatorSpec::linear_drift(const EllipticityParams& params, const Control& control) {
  params.validate();
  validate_control(params, control);
  OperatorSpec s;
  s.variant_ = Variant::LinearDrift;
  s.params_ = s.base_params_ = params;
  s.families_ = {{control}};
  return s;
}

OperatorSpec OperatorSpec::isaacs(const EllipticityParams& params,
                                  std::vector<std::vector<Control>> families, IsaacsMode mode) {
  params.validate();
  if (families.empty()) throw Error(Errc::EmptyIsaacsFamily, "no outer controls");
  for (const auto& family : families) {
    if (family.empty()) throw Error(Errc::EmptyIsaacsFamily, "empty inner family");
    for (const auto& c : family) validate_control(params, c);
  }
  OperatorSpec s;
  s.variant_ = Variant::Isaacs;
  s.params_ = s.base_params_ = params;
  s.families_ = std::move(families);
  s.mode_ = mode;
  return s;
}

bool OperatorSpec::reflected() const {
  return std::any_of(transforms_.begin(), transforms_.end(),
                     [](const OperatorTransform& t) { return std::holds_alternative<ReflectTransform>(t); });
}

std::optional<RescaleTransform> OperatorSpec::rescale_state() const {
  for (auto it = transforms_.rbegin(); it != transforms_.rend(); ++it) {
    if (const auto* r = std::get_if<RescaleTransform>(&*it)) return *r;
  }
  return std::nullopt;
}

bool OperatorSpec::x_dependent() const {
  if (!transforms_.empty()) {
    // Reflection switches branches on the sign of y.
    if (reflected()) return true;
  }
  for (const auto& family : families_) {
    for (const auto& c : family) {
      if (c.x_dependent()) return true;
    }
  }
  return false;
}

OperatorSpec OperatorSpec::with_transform(const OperatorTransform& t,
                                          const EllipticityParams& effective) const {
  OperatorSpec s = *this;
  s.transforms_.push_back(t);
  s.params_ = effective;
  return s;
}

double eval_operator(const OperatorSpec& spec, Vec2 x, Vec2 p, SymMatrix2 m) {
  return eval_level(spec, spec.transforms().size(), x, p, m);
}

OperatorSpec rescale_operator(const OperatorSpec& spec, Vec2 x0, double r0, double eps) {
  if (!(r0 > 0.0) || !(eps > 0.0)) throw Error(Errc::NonPositiveScale, "r0 and eps must be positive");
  EllipticityParams effective = spec.params();
  effective.b *= 0.5 * r0;
  return spec.with_transform(RescaleTransform{x0, r0, eps}, effective);
}

OperatorSpec reflect_operator(const OperatorSpec& spec) {
  return spec.with_transform(ReflectTransform{}, spec.params());
}

StructuralReport check_F1(const OperatorSpec& spec, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw Error(Errc::InvalidArgument, "samples must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> box(-5.0, 5.0);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const EllipticityParams& ep = spec.params();
  StructuralReport report;
  report.samples = samples;
  report.worst_f1_gap = -INFINITY;
  for (std::size_t k = 0; k < samples; ++k) {
    const Vec2 x{unit(rng), unit(rng)};
    const Vec2 p{box(rng), box(rng)};
    const Vec2 q{box(rng), box(rng)};
    const SymMatrix2 m{box(rng), box(rng), box(rng)};
    const SymMatrix2 n{box(rng), box(rng), box(rng)};
    const double diff = eval_operator(spec, x, p, m) - eval_operator(spec, x, q, n);
    const double drift = ep.b * norm(p - q);
    const double lower = pucci_minus(ep, m - n) - drift;
    const double upper = pucci_plus(ep, m - n) + drift;
    const double gap = std::max(lower - diff, diff - upper);
    report.worst_f1_gap = std::max(report.worst_f1_gap, gap);
    if (gap > 1e-9) ++report.f1_violations;
  }
  // Theta over a handful of random position pairs.
  const std::size_t pairs = 16;
  for (std::size_t k = 0; k < pairs; ++k) {
    const Vec2 x{unit(rng), unit(rng)};
    const Vec2 x0{unit(rng), unit(rng)};
    report.theta_sup = std::max(report.theta_sup, oscillation_theta(spec, x, x0, 256, seed + 1 + k));
  }
  return report;
}

double oscillation_theta(const OperatorSpec& spec, Vec2 x, Vec2 x0, std::size_t samples,
                         std::uint64_t seed) {
  if (samples == 0) throw Error(Errc::InvalidArgument, "samples must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double best = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    // Uniform direction on the unit Frobenius sphere: (m11, sqrt2 m12, m22) in S^2.
    double a = gauss(rng), b = gauss(rng), c = gauss(rng);
    const double r = std::sqrt(a * a + b * b + c * c);
    if (r == 0.0) continue;
    const SymMatrix2 m{a / r, b / (r * std::sqrt(2.0)), c / r};
    const double v = std::abs(eval_operator(spec, x, {}, m) - eval_operator(spec, x0, {}, m));
    best = std::max(best, v);
  }
  return best;
}

}  // namespace cavity
