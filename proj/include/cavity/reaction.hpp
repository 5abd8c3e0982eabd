#pragma once

namespace cavity {

enum class ReactionKind { Off, Bump };

/// Reaction profile zeta: a smooth nonnegative bump supported in [0,1]
/// with peak value `peak` at s = 1/2.
struct ReactionProfile {
  ReactionKind kind = ReactionKind::Off;
  double peak = 1.0;  // sup bound of zeta on [0,1]

  static ReactionProfile off() { return {}; }
  static ReactionProfile bump(double peak) { return {ReactionKind::Bump, peak}; }

  bool operator==(const ReactionProfile&) const = default;
};

double zeta(const ReactionProfile& profile, double s);
double zeta_derivative(const ReactionProfile& profile, double s);

/// zeta_eps(s) = zeta(s / eps) / eps.
double zeta_eps(const ReactionProfile& profile, double eps, double s);
double zeta_eps_derivative(const ReactionProfile& profile, double eps, double s);

/// sup over s of zeta_eps: peak / eps for Bump, 0 for Off.
double sup_zeta_eps(const ReactionProfile& profile, double eps);

/// sup over s of |zeta_eps'|, i.e. max|zeta'| / eps^2.
double zeta_eps_lipschitz(const ReactionProfile& profile, double eps);

}  // namespace cavity
