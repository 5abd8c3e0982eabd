#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cavity/error.hpp"
#include "cavity/operators.hpp"

using namespace cavity;

namespace {

const EllipticityParams kP12{1.0, 2.0, 0.0, 2};
const EllipticityParams kP12b{1.0, 2.0, 0.5, 2};

SymMatrix2 random_matrix(std::mt19937_64& rng, double scale = 5.0) {
  std::uniform_real_distribution<double> U(-scale, scale);
  return {U(rng), U(rng), U(rng)};
}

// Independent Pucci oracle: eigenvalues through the characteristic polynomial.
double pucci_oracle(const EllipticityParams& p, SymMatrix2 m, bool plus) {
  const double tr = m.m11 + m.m22;
  const double det = m.m11 * m.m22 - m.m12 * m.m12;
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  double s = 0.0;
  for (double e : {tr / 2.0 - disc, tr / 2.0 + disc}) {
    if (plus) s += e > 0 ? p.Lambda * e : p.lambda * e;
    else s += e > 0 ? p.lambda * e : p.Lambda * e;
  }
  return s;
}

Control control(double a11, double a12, double a22, double bx = 0.0, double by = 0.0) {
  Control c;
  c.a = {a11, a12, a22};
  c.drift = {bx, by};
  return c;
}

std::vector<OperatorSpec> shipped_variants() {
  std::vector<std::vector<Control>> fam{{control(1.5, 0.2, 1.2, 0.3, 0.0), control(1.0, 0.0, 1.8, 0.0, -0.4)},
                                        {control(1.3, -0.3, 1.4, 0.1, 0.2)}};
  return {OperatorSpec::laplace(),
          OperatorSpec::pucci_plus(kP12b),
          OperatorSpec::pucci_minus(kP12b),
          OperatorSpec::linear_drift(kP12b, control(1.4, 0.3, 1.6, 0.3, -0.2)),
          OperatorSpec::isaacs(kP12b, fam, IsaacsMode::SupInf),
          OperatorSpec::isaacs(kP12b, fam, IsaacsMode::InfSup)};
}

}  // namespace

TEST_CASE("sym_eigenvalues") {
  auto [a, b] = sym_eigenvalues(SymMatrix2::diag(2, 3));
  CHECK(a == 2.0);
  CHECK(b == 3.0);
  std::tie(a, b) = sym_eigenvalues({0, 1, 0});
  CHECK(a == doctest::Approx(-1.0));
  CHECK(b == doctest::Approx(1.0));
  std::mt19937_64 rng(2);
  for (int k = 0; k < 1000; ++k) {
    const SymMatrix2 m = random_matrix(rng);
    const auto [e1, e2] = sym_eigenvalues(m);
    CHECK(e1 <= e2);
    for (double e : {e1, e2}) {
      const double charpoly = (m.m11 - e) * (m.m22 - e) - m.m12 * m.m12;
      CHECK(std::abs(charpoly) < 1e-10);
    }
  }
}

TEST_CASE("Pucci examples") {
  CHECK(pucci_plus(kP12, SymMatrix2::identity()) == 4.0);
  CHECK(pucci_plus(kP12, SymMatrix2::diag(3, -1)) == 5.0);
  CHECK(pucci_plus(kP12, {}) == 0.0);
  CHECK(pucci_minus(kP12, SymMatrix2::identity()) == 2.0);
  CHECK(pucci_minus(kP12, SymMatrix2::diag(3, -1)) == 1.0);
  CHECK(pucci_minus(kP12, {}) == 0.0);
}

TEST_CASE("Pucci algebra on random matrices") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> T(0.01, 10.0);
  for (int k = 0; k < 1000; ++k) {
    const SymMatrix2 m = random_matrix(rng);
    const SymMatrix2 n = random_matrix(rng);
    const double t = T(rng);
    CHECK(pucci_minus(kP12, m) <= pucci_plus(kP12, m) + 1e-12);
    CHECK(std::abs(pucci_plus(kP12, t * m) - t * pucci_plus(kP12, m)) <= 1e-12 * (1 + t * 30));
    CHECK(std::abs(pucci_minus(kP12, t * m) - t * pucci_minus(kP12, m)) <= 1e-12 * (1 + t * 30));
    CHECK(std::abs(pucci_plus(kP12, -m) + pucci_minus(kP12, m)) <= 1e-12);
    CHECK(pucci_plus(kP12, m + n) <= pucci_plus(kP12, m) + pucci_plus(kP12, n) + 1e-12);
    CHECK(pucci_minus(kP12, m + n) >= pucci_minus(kP12, m) + pucci_minus(kP12, n) - 1e-12);
    CHECK(pucci_plus(kP12, m) == doctest::Approx(pucci_oracle(kP12, m, true)).epsilon(1e-12));
    CHECK(pucci_minus(kP12, m) == doctest::Approx(pucci_oracle(kP12, m, false)).epsilon(1e-12));
  }
}

TEST_CASE("eval_operator examples") {
  CHECK(eval_operator(OperatorSpec::laplace(), {0.3, 0.1}, {4, 5}, SymMatrix2::diag(2, -2)) == 0.0);

  const Control c = control(1.5, 0.25, 1.2, 0.3, -0.1);
  const OperatorSpec single = OperatorSpec::isaacs(kP12b, {{c}}, IsaacsMode::SupInf);
  const SymMatrix2 m{0.7, -1.1, 2.0};
  const Vec2 p{1.0, 2.0};
  CHECK(eval_operator(single, {}, p, m) ==
        doctest::Approx(1.5 * 0.7 + 2 * 0.25 * -1.1 + 1.2 * 2.0 + 0.3 * 1.0 - 0.1 * 2.0));

  std::mt19937_64 rng(4);
  const OperatorSpec pp = OperatorSpec::pucci_plus(kP12);
  for (int k = 0; k < 100; ++k) {
    const SymMatrix2 r = random_matrix(rng);
    CHECK(eval_operator(pp, {}, {}, r) == doctest::Approx(pucci_oracle(kP12, r, true)).epsilon(1e-12));
  }
  // Pucci variants carry the drift envelope.
  const OperatorSpec pm = OperatorSpec::pucci_minus(kP12b);
  CHECK(eval_operator(pm, {}, {3, 4}, {}) == doctest::Approx(-2.5));
}

TEST_CASE("Isaacs sup-inf and inf-sup over finite families") {
  const std::vector<std::vector<Control>> fam{{control(1, 0, 1), control(2, 0, 2)},
                                              {control(1.5, 0, 1.5), control(1.2, 0, 1.2)}};
  const OperatorSpec si = OperatorSpec::isaacs({1, 2, 0, 2}, fam, IsaacsMode::SupInf);
  const OperatorSpec is = OperatorSpec::isaacs({1, 2, 0, 2}, fam, IsaacsMode::InfSup);
  const SymMatrix2 m = SymMatrix2::identity();
  // Values: family 0 -> {2, 4}, family 1 -> {3, 2.4}.
  CHECK(eval_operator(si, {}, {}, m) == doctest::Approx(2.4));
  CHECK(eval_operator(is, {}, {}, m) == doctest::Approx(3.0));
}

TEST_CASE("admissibility of coefficients") {
  auto code = [](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::InvalidArgument;
  };
  CHECK(code([] { OperatorSpec::linear_drift(kP12, control(0.5, 0, 1)); }) == Errc::InadmissibleCoefficients);
  CHECK(code([] { OperatorSpec::linear_drift(kP12, control(1, 0, 1, 0.1, 0)); }) ==
        Errc::InadmissibleCoefficients);
  CHECK(code([] { OperatorSpec::isaacs(kP12, {}, IsaacsMode::SupInf); }) == Errc::EmptyIsaacsFamily);
  CHECK(code([] { OperatorSpec::isaacs(kP12, {{}}, IsaacsMode::SupInf); }) == Errc::EmptyIsaacsFamily);
  CHECK(code([] { OperatorSpec::pucci_plus({-1, 2, 0, 2}); }) == Errc::RangeError);
  CHECK(code([] { OperatorSpec::pucci_plus({2, 1, 0, 2}); }) == Errc::RangeError);
}

TEST_CASE("normalization and degenerate ellipticity") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (const OperatorSpec& spec : shipped_variants()) {
    CHECK(eval_operator(spec, {U(rng), U(rng)}, {}, {}) == 0.0);
    for (int k = 0; k < 500; ++k) {
      const Vec2 x{U(rng), U(rng)};
      const Vec2 p{5 * U(rng), 5 * U(rng)};
      const SymMatrix2 m = random_matrix(rng);
      // N = v v^T + w w^T is positive semidefinite.
      const double v1 = U(rng), v2 = U(rng), w1 = U(rng), w2 = U(rng);
      const SymMatrix2 n{v1 * v1 + w1 * w1, v1 * v2 + w1 * w2, v2 * v2 + w2 * w2};
      CHECK(eval_operator(spec, x, p, m + n) >= eval_operator(spec, x, p, m) - 1e-12);
    }
  }
}

TEST_CASE("rescale transform") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> U01(-5.0, 5.0);
  const OperatorSpec lap = rescale_operator(OperatorSpec::laplace(), {0.2, 0.3}, 0.4, 0.01);
  for (int k = 0; k < 50; ++k) {
    const SymMatrix2 m = random_matrix(rng);
    CHECK(eval_operator(lap, {0.1, 0.2}, {1, 1}, m) == doctest::Approx(m.trace()).epsilon(1e-12));
  }

  // Pure drift: F = <B, p> with A = I and M = 0.
  const EllipticityParams dp{1.0, 1.0, 1.0, 2};
  const OperatorSpec drift = OperatorSpec::linear_drift(dp, control(1, 0, 1, 0.6, -0.8));
  const double r0 = 0.3;
  const OperatorSpec rd = rescale_operator(drift, {0.1, 0.1}, r0, 0.05);
  CHECK(eval_operator(rd, {0.2, -0.4}, {2, 3}, {}) ==
        doctest::Approx(0.5 * r0 * (0.6 * 2 - 0.8 * 3)).epsilon(1e-12));
  CHECK(rd.params().b == doctest::Approx(0.5 * r0));

  // Direct substitution into F_eps(Y,p,M) = (1/eps)(r0/2)^2 F(x0 + (r0/2)Y, (2 eps/r0) p, eps (2/r0)^2 M).
  const OperatorSpec pp = OperatorSpec::pucci_plus(kP12b);
  const Vec2 x0{0.25, 0.5};
  const double r = 0.1, eps = 0.05;
  const OperatorSpec rp = rescale_operator(pp, x0, r, eps);
  for (int k = 0; k < 200; ++k) {
    const SymMatrix2 m = random_matrix(rng);
    const Vec2 p{U01(rng), U01(rng)};
    const Vec2 y{0.3, -0.2};
    const double direct = (1.0 / eps) * (r / 2) * (r / 2) *
                          (pucci_oracle(kP12b, eps * (2 / r) * (2 / r) * m, true) +
                           kP12b.b * norm((2 * eps / r) * p));
    CHECK(eval_operator(rp, y, p, m) == doctest::Approx(direct).epsilon(1e-12));
  }
  CHECK_THROWS_AS(rescale_operator(pp, x0, 0.0, eps), Error);
  CHECK_THROWS_AS(rescale_operator(pp, x0, r, -1.0), Error);
}

TEST_CASE("reflection transform") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const OperatorSpec lap = reflect_operator(OperatorSpec::laplace());
  const OperatorSpec pm = OperatorSpec::pucci_minus(kP12);
  const OperatorSpec g = reflect_operator(pm);
  for (int k = 0; k < 500; ++k) {
    const Vec2 x{U(rng), U(rng)};
    const Vec2 p{5 * U(rng), 5 * U(rng)};
    const SymMatrix2 m = random_matrix(rng);
    CHECK(eval_operator(lap, x, p, m) == doctest::Approx(m.trace()).epsilon(1e-14));
    if (x.y >= 0) {
      CHECK(eval_operator(g, x, p, m) == eval_operator(pm, x, p, m));
      CHECK(eval_operator(reflect_operator(g), x, p, m) == eval_operator(pm, x, p, m));
    } else {
      // M~ built componentwise: flip both diagonal entries, keep m12.
      const SymMatrix2 mt{-m.m11, m.m12, -m.m22};
      CHECK(eval_operator(g, x, p, m) == doctest::Approx(-pucci_oracle(kP12, mt, false)).epsilon(1e-12));
    }
  }
  CHECK(g.reflected());
  CHECK_FALSE(pm.reflected());
}

TEST_CASE("check_F1 reports no violations for shipped variants") {
  const OperatorSpec lap = OperatorSpec::laplace();
  CHECK(check_F1(lap, 10000, 1).f1_violations == 0);
  for (const OperatorSpec& spec : shipped_variants()) {
    const StructuralReport r = check_F1(spec, 10000, 11);
    CHECK(r.samples == 10000);
    CHECK(r.f1_violations == 0);
    CHECK(r.worst_f1_gap <= 1e-9);
  }
}

TEST_CASE("oscillation theta") {
  for (const OperatorSpec& spec : shipped_variants()) {
    CHECK(oscillation_theta(spec, {0.3, 0.2}, {-0.5, 0.1}, 256, 1) == 0.0);
  }

  // A(X) = a + x a_dx: Theta(X, X0) = sup |Tr((x - x0) a_dx M)| / |M| = |x - x0| |a_dx|_F.
  Control c = control(1.5, 0.0, 1.5);
  c.a_dx = {0.2, 0.1, -0.15};
  Control d = control(1.4, 0.1, 1.6);
  d.a_dy = {0.1, 0.0, 0.1};
  const OperatorSpec spec = OperatorSpec::isaacs(kP12, {{c, d}, {d}}, IsaacsMode::SupInf);
  const Vec2 x{0.6, -0.3}, x0{-0.4, 0.5};
  double net = 0.0;
  for (int a = 0; a < 32; ++a) {
    for (int b = 0; b < 32; ++b) {
      const double th = std::numbers::pi * (a + 0.5) / 32;
      const double ph = 2 * std::numbers::pi * b / 32;
      const SymMatrix2 m{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph) / std::sqrt(2.0),
                         std::cos(th)};
      net = std::max(net, std::abs(eval_operator(spec, x, {}, m) - eval_operator(spec, x0, {}, m)));
    }
  }
  const double sampled = oscillation_theta(spec, x, x0, 4096, 3);
  CHECK(net > 0.0);
  CHECK(std::abs(sampled - net) <= 0.05 * net);
}
