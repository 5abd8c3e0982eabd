#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "cavity/geometry.hpp"

namespace cavity {

/// Symmetric 2x2 matrix stored as (m11, m12, m22).
struct SymMatrix2 {
  double m11 = 0.0;
  double m12 = 0.0;
  double m22 = 0.0;

  double trace() const { return m11 + m22; }
  double frobenius() const { return std::sqrt(m11 * m11 + 2.0 * m12 * m12 + m22 * m22); }

  static SymMatrix2 identity() { return {1.0, 0.0, 1.0}; }
  static SymMatrix2 diag(double a, double b) { return {a, 0.0, b}; }

  friend SymMatrix2 operator+(SymMatrix2 a, SymMatrix2 b) {
    return {a.m11 + b.m11, a.m12 + b.m12, a.m22 + b.m22};
  }
  friend SymMatrix2 operator-(SymMatrix2 a, SymMatrix2 b) {
    return {a.m11 - b.m11, a.m12 - b.m12, a.m22 - b.m22};
  }
  friend SymMatrix2 operator-(SymMatrix2 a) { return {-a.m11, -a.m12, -a.m22}; }
  friend SymMatrix2 operator*(double s, SymMatrix2 a) { return {s * a.m11, s * a.m12, s * a.m22}; }
  bool operator==(const SymMatrix2&) const = default;
};

/// Tr(A * M) for symmetric A, M.
inline double trace_product(SymMatrix2 a, SymMatrix2 m) {
  return a.m11 * m.m11 + 2.0 * a.m12 * m.m12 + a.m22 * m.m22;
}

/// Ellipticity constants 0 < lambda <= Lambda, drift bound b >= 0.
struct EllipticityParams {
  double lambda = 1.0;
  double Lambda = 1.0;
  double b = 0.0;
  int n_dim = 2;

  void validate() const;
  bool operator==(const EllipticityParams&) const = default;
};

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
std::pair<double, double> sym_eigenvalues(SymMatrix2 m);

double pucci_plus(const EllipticityParams& params, SymMatrix2 m);
double pucci_minus(const EllipticityParams& params, SymMatrix2 m);

/// One (A, B) pair of a linear or Isaacs operator. A may depend affinely on
/// position: A(X) = a + X.x * a_dx + X.y * a_dy.
struct Control {
  SymMatrix2 a = SymMatrix2::identity();
  Vec2 drift{};
  SymMatrix2 a_dx{};
  SymMatrix2 a_dy{};

  SymMatrix2 diffusion_at(Vec2 x) const { return a + x.x * a_dx + x.y * a_dy; }
  bool x_dependent() const { return !(a_dx == SymMatrix2{}) || !(a_dy == SymMatrix2{}); }
  bool operator==(const Control&) const = default;
};

enum class Variant { Laplace, PucciPlus, PucciMinus, LinearDrift, Isaacs };
enum class IsaacsMode { SupInf, InfSup };

const char* variant_name(Variant v);

/// F_eps(Y, p, M) = (1/eps)(r0/2)^2 F(x0 + (r0/2) Y, (2 eps / r0) p, eps (2/r0)^2 M).
struct RescaleTransform {
  Vec2 x0{};
  double r0 = 1.0;
  double eps = 1.0;
  bool operator==(const RescaleTransform&) const = default;
};

/// Odd reflection across {y = 0}: G = F above, -F(X~, p~, M~) below.
struct ReflectTransform {
  bool operator==(const ReflectTransform&) const = default;
};

using OperatorTransform = std::variant<RescaleTransform, ReflectTransform>;

/// A fully nonlinear operator F(X, p, M) together with any composed
/// rescale/reflection transforms. Immutable after construction.
///
/// Pucci variants carry their drift envelope: PucciPlus is P+(M) + b|p|,
/// PucciMinus is P-(M) - b|p|.
class OperatorSpec {
 public:
  static OperatorSpec laplace();
  static OperatorSpec pucci_plus(const EllipticityParams& params);
  static OperatorSpec pucci_minus(const EllipticityParams& params);
  static OperatorSpec linear_drift(const EllipticityParams& params, const Control& control);
  /// families[alpha][beta]. Every control must satisfy lambda I <= A <= Lambda I
  /// on [-1,1]^2 and |B| <= b.
  static OperatorSpec isaacs(const EllipticityParams& params,
                             std::vector<std::vector<Control>> families, IsaacsMode mode);

  Variant variant() const { return variant_; }
  /// Effective constants of the composed operator (b shrinks under rescaling).
  const EllipticityParams& params() const { return params_; }
  const EllipticityParams& base_params() const { return base_params_; }
  const std::vector<std::vector<Control>>& families() const { return families_; }
  IsaacsMode mode() const { return mode_; }
  const std::vector<OperatorTransform>& transforms() const { return transforms_; }

  bool reflected() const;
  std::optional<RescaleTransform> rescale_state() const;
  bool x_dependent() const;

  OperatorSpec with_transform(const OperatorTransform& t, const EllipticityParams& effective) const;

  bool operator==(const OperatorSpec&) const = default;

 private:
  OperatorSpec() = default;

  Variant variant_ = Variant::Laplace;
  EllipticityParams params_{};
  EllipticityParams base_params_{};
  std::vector<std::vector<Control>> families_;
  IsaacsMode mode_ = IsaacsMode::SupInf;
  std::vector<OperatorTransform> transforms_;
};

double eval_operator(const OperatorSpec& spec, Vec2 x, Vec2 p, SymMatrix2 m);

/// Records the change of variables F -> F_eps; the effective b becomes (r0/2) b.
OperatorSpec rescale_operator(const OperatorSpec& spec, Vec2 x0, double r0, double eps);

/// Records the odd reflection F -> G across {y = 0}.
OperatorSpec reflect_operator(const OperatorSpec& spec);

/// Reflection helpers: X~ = (x, -y), p~ = (-p1, p2), M~ flips the sign of
/// both diagonal entries and keeps the off-diagonal.
inline Vec2 reflect_point(Vec2 x) { return {x.x, -x.y}; }
inline Vec2 reflect_gradient(Vec2 p) { return {-p.x, p.y}; }
inline SymMatrix2 reflect_hessian(SymMatrix2 m) { return {-m.m11, m.m12, -m.m22}; }

struct StructuralReport {
  std::size_t samples = 0;
  std::size_t f1_violations = 0;
  double worst_f1_gap = 0.0;  // largest excursion outside the Pucci envelope (<= 0 when clean)
  double theta_sup = 0.0;
};

/// Samples (X, p, q, M, N) with X in [-1,1]^2 and the other entries uniform
/// in [-5,5]; counts envelope violations beyond 1e-9.
StructuralReport check_F1(const OperatorSpec& spec, std::size_t samples, std::uint64_t seed);

/// Sampled sup over unit-Frobenius M of |F(X,0,M) - F(X0,0,M)|.
double oscillation_theta(const OperatorSpec& spec, Vec2 x, Vec2 x0, std::size_t samples,
                         std::uint64_t seed);

}  // namespace cavity
