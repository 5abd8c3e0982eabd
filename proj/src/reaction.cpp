#include "cavity/reaction.hpp"

#include <algorithm>
#include <cmath>

#include "cavity/error.hpp"

namespace cavity {
namespace {

constexpr double kGuard = 1e-12;

double unit_bump(double s) {
  if (!(s > 0.0 && s < 1.0)) return 0.0;
  const double q = s * (1.0 - s);
  if (q < kGuard) return 0.0;
  return std::exp(4.0 - 1.0 / q);
}

double unit_bump_derivative(double s) {
  if (!(s > 0.0 && s < 1.0)) return 0.0;
  const double q = s * (1.0 - s);
  if (q < kGuard) return 0.0;
  return std::exp(4.0 - 1.0 / q) * (1.0 - 2.0 * s) / (q * q);
}

// max |d/ds exp(4 - 1/(s(1-s)))| on (0,1); symmetric, so scan (0, 1/2).
double unit_bump_lipschitz() {
  static const double value = [] {
    double best = 0.0;
    double arg = 0.25;
    constexpr int kSamples = 20000;
    for (int k = 1; k < kSamples; ++k) {
      const double s = 0.5 * k / kSamples;
      const double d = std::abs(unit_bump_derivative(s));
      if (d > best) {
        best = d;
        arg = s;
      }
    }
    // Golden-section refinement around the best sample.
    double a = std::max(1e-6, arg - 0.5 / kSamples);
    double b = std::min(0.5, arg + 0.5 / kSamples);
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100; ++it) {
      const double c = b - g * (b - a);
      const double d = a + g * (b - a);
      if (std::abs(unit_bump_derivative(c)) > std::abs(unit_bump_derivative(d))) {
        b = d;
      } else {
        a = c;
      }
    }
    return std::max(best, std::abs(unit_bump_derivative(0.5 * (a + b))));
  }();
  return value;
}

void require_eps(double eps) {
  if (!(eps > 0.0)) throw Error(Errc::NonPositiveEpsilon, "eps must be positive");
}

}  // namespace

double zeta(const ReactionProfile& profile, double s) {
  if (profile.kind == ReactionKind::Off) return 0.0;
  return profile.peak * unit_bump(s);
}

double zeta_derivative(const ReactionProfile& profile, double s) {
  if (profile.kind == ReactionKind::Off) return 0.0;
  return profile.peak * unit_bump_derivative(s);
}

double zeta_eps(const ReactionProfile& profile, double eps, double s) {
  require_eps(eps);
  return zeta(profile, s / eps) / eps;
}

double zeta_eps_derivative(const ReactionProfile& profile, double eps, double s) {
  require_eps(eps);
  return zeta_derivative(profile, s / eps) / (eps * eps);
}

double sup_zeta_eps(const ReactionProfile& profile, double eps) {
  require_eps(eps);
  return profile.kind == ReactionKind::Off ? 0.0 : profile.peak / eps;
}

double zeta_eps_lipschitz(const ReactionProfile& profile, double eps) {
  require_eps(eps);
  if (profile.kind == ReactionKind::Off) return 0.0;
  return profile.peak * unit_bump_lipschitz() / (eps * eps);
}

}  // namespace cavity
