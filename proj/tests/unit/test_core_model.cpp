#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "cavity/error.hpp"
#include "cavity/field.hpp"
#include "cavity/grid.hpp"
#include "cavity/norms.hpp"

using namespace cavity;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::InvalidArgument;
}

ScalarField random_field(const GridPtr& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  ScalarField u(g);
  for (std::size_t k = 0; k < g->size(); ++k) {
    if (g->node_class(k) != NodeClass::Exterior) u[k] = U(rng);
  }
  return u;
}

}  // namespace

TEST_CASE("unit square 17 has 15x15 interior and a flat bottom row") {
  const GridPtr g = build_grid(DomainSpec::unit_square(), 17);
  CHECK(g->size() == 289);
  CHECK(g->count(NodeClass::Interior) == 225);
  CHECK(g->count(NodeClass::Exterior) == 0);
  CHECK(g->h() == doctest::Approx(1.0 / 16).epsilon(1e-15));
  for (int i = 0; i < 17; ++i) CHECK(g->node_class(i, 0) == NodeClass::FlatBoundary);
  for (int j = 1; j < 17; ++j) {
    CHECK(g->node_class(0, j) == NodeClass::CurvedBoundary);
    CHECK(g->node_class(16, j) == NodeClass::CurvedBoundary);
  }
}

TEST_CASE("half ball masks the outside of the disk") {
  const GridPtr g = build_grid(DomainSpec::half_ball(1.0), 65);
  for (int j = 0; j < g->ny(); ++j) {
    for (int i = 0; i < g->nx(); ++i) {
      const Vec2 p = g->position(i, j);
      const double r2 = p.x * p.x + p.y * p.y;
      if (r2 > 1.0 + 1e-9) CHECK(g->node_class(i, j) == NodeClass::Exterior);
      if (j == 0 && r2 <= 1.0) CHECK(g->node_class(i, j) == NodeClass::FlatBoundary);
    }
  }
  // B'_1 is the whole bottom segment [-1, 1].
  CHECK(g->position(0, 0).x == doctest::Approx(-1.0));
  CHECK(g->node_class(0, 0) == NodeClass::FlatBoundary);
  CHECK(g->node_class(64, 0) == NodeClass::FlatBoundary);
}

TEST_CASE("ball interior count matches an exhaustive integer lattice scan") {
  const GridPtr g = build_grid(DomainSpec::ball({0.0, 0.5}, 0.25), 129);
  // h = 1/64, centre at lattice (64, 96), radius 16 cells.
  auto inside = [](int i, int j) {
    const int di = i - 64;
    const int dj = j - 96;
    return di * di + dj * dj <= 256;
  };
  std::size_t expected = 0;
  for (int j = 1; j < 128; ++j) {
    for (int i = 1; i < 128; ++i) {
      const int di = i - 64;
      const int dj = j - 96;
      if (di * di + dj * dj >= 256) continue;
      bool full = true;
      for (int b = -1; b <= 1; ++b)
        for (int a = -1; a <= 1; ++a) full = full && inside(i + a, j + b);
      if (full) ++expected;
    }
  }
  CHECK(expected > 600);
  CHECK(g->count(NodeClass::Interior) == expected);
  CHECK(g->count(NodeClass::FlatBoundary) == 0);
}

TEST_CASE("grid construction errors") {
  CHECK(code_of([] { build_grid(DomainSpec::unit_square(), 16); }) == Errc::NonOddResolution);
  CHECK(code_of([] { build_grid(DomainSpec::unit_square(), 15); }) == Errc::ResolutionOutOfRange);
  CHECK(code_of([] { build_grid(DomainSpec::unit_square(), 1027); }) == Errc::ResolutionOutOfRange);
  CHECK(code_of([] { build_grid(DomainSpec::ball({0.9, 0.0}, 0.25), 33); }) == Errc::BallOutOfBox);
  CHECK(code_of([] { build_grid(DomainSpec::half_ball(0.0), 33); }) == Errc::InvalidDomain);
}

TEST_CASE("classification is deterministic") {
  const GridPtr a = build_grid(DomainSpec::ball({0.1, -0.2}, 0.7), 257);
  const GridPtr b = build_grid(DomainSpec::ball({0.1, -0.2}, 0.7), 257);
  CHECK(a->classes() == b->classes());
}

TEST_CASE("sup norm") {
  const GridPtr g = build_grid(DomainSpec::half_ball(1.0), 33);
  CHECK(sup_norm(ScalarField(g, 0.0)) == 0.0);
  CHECK(sup_norm(ScalarField(g, -3.0)) == 3.0);
  const ScalarField u = random_field(g, 7);
  double scan = 0.0;
  for (std::size_t k = 0; k < g->size(); ++k) {
    if (g->node_class(k) != NodeClass::Exterior) scan = std::max(scan, std::abs(u[k]));
  }
  CHECK(sup_norm(u) == scan);
}

TEST_CASE("discrete Lipschitz norm") {
  const GridPtr g = build_grid(DomainSpec::unit_square(), 17);
  const ScalarField lin = ScalarField::from_function(g, [](Vec2 p) { return 2.0 * p.x; });
  CHECK(discrete_lipschitz_norm(lin) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(discrete_lipschitz_norm(ScalarField(g, 4.0)) == 0.0);

  SUBCASE("random field equals the exhaustive edge scan") {
    const GridPtr hb = build_grid(DomainSpec::half_ball(1.0), 17);
    const ScalarField u = random_field(hb, 3);
    double best = 0.0;
    for (int j = 0; j < hb->ny(); ++j) {
      for (int i = 0; i < hb->nx(); ++i) {
        if (!hb->active(i, j)) continue;
        for (int dj = -1; dj <= 1; ++dj) {
          for (int di = -1; di <= 1; ++di) {
            if ((di == 0 && dj == 0) || !hb->active(i + di, j + dj)) continue;
            const double d = hb->h() * std::sqrt(double(di * di + dj * dj));
            best = std::max(best, std::abs(u(i, j) - u(i + di, j + dj)) / d);
          }
        }
      }
    }
    CHECK(discrete_lipschitz_norm(u) == doctest::Approx(best).epsilon(1e-14));
  }

  SUBCASE("homogeneity and translation invariance") {
    const ScalarField u = random_field(g, 11);
    const double L = discrete_lipschitz_norm(u);
    for (double alpha : {-2.5, 0.3, 7.0}) {
      ScalarField v(g);
      ScalarField w(g);
      for (std::size_t k = 0; k < g->size(); ++k) {
        v[k] = alpha * u[k];
        w[k] = u[k] + alpha;
      }
      CHECK(discrete_lipschitz_norm(v) == doctest::Approx(std::abs(alpha) * L).epsilon(1e-13));
      CHECK(discrete_lipschitz_norm(w) == doctest::Approx(L).epsilon(1e-12));
    }
  }
}

TEST_CASE("vertical distance") {
  CHECK(vertical_distance({0.3, 0.0}) == 0.0);
  CHECK(vertical_distance({0.3, 0.25}) == 0.25);
  CHECK(vertical_distance({-0.1, 0.7}) == 0.7);
}

TEST_CASE("distance to the transition set") {
  const GridPtr g = build_grid(DomainSpec::unit_square(), 33);
  const ScalarField u = ScalarField::from_function(g, [](Vec2 p) { return p.y; });
  CHECK(std::abs(distance_to_transition_set(u, 0.25, {0.5, 1.0}) - 0.75) <= g->h());
  CHECK(distance_to_transition_set(u, 0.25, {0.5, 0.125}) == 0.0);
  CHECK(std::isinf(distance_to_transition_set(ScalarField(g, 2.0), 0.25, {0.5, 0.5})));

  const ScalarField r = random_field(g, 5);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const Vec2 p{U(rng), U(rng)};
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < g->size(); ++k) {
      if (r[k] >= 0.0 && r[k] <= 0.2) best = std::min(best, distance(p, g->position(g->node(k))));
    }
    CHECK(distance_to_transition_set(r, 0.2, p) == doctest::Approx(best).epsilon(1e-14));

    const Vec2 q{U(rng), U(rng)};
    CHECK(std::abs(distance_to_transition_set(r, 0.2, p) - distance_to_transition_set(r, 0.2, q)) <=
          distance(p, q) + g->h());
  }
}

TEST_CASE("bilinear interpolation reproduces bilinear fields") {
  const GridPtr g = build_grid(DomainSpec::unit_square(), 17);
  auto f = [](Vec2 p) { return 1.0 + 2.0 * p.x - p.y + 3.0 * p.x * p.y; };
  const ScalarField u = ScalarField::from_function(g, f);
  for (Vec2 p : {Vec2{0.13, 0.77}, Vec2{0.5, 0.5}, Vec2{0.99, 0.01}}) {
    CHECK(u.interpolate(p) == doctest::Approx(f(p)).epsilon(1e-13));
  }
  const GridPtr hb = build_grid(DomainSpec::half_ball(1.0), 17);
  CHECK(code_of([&] { ScalarField(hb).interpolate({0.99, 0.99}); }) == Errc::StencilLeavesDomain);
}
