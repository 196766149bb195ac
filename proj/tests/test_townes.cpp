#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <chrono>
#include <cmath>
#include <random>

#include "kgp/error.hpp"
#include "kgp/townes.hpp"
#include "support.hpp"

using namespace kgp;
using doctest::Approx;

namespace {

// Fixed-step RK4 shooting, independent of the library integrator.
int rk4_shot(double q0) {
  using S = std::array<double, 2>;
  auto f = [](double r, const S& y) { return S{y[1], -y[1] / r + y[0] - y[0] * y[0] * y[0]}; };
  const double r0 = 1e-3, h = 1e-3;
  const double c = q0 - q0 * q0 * q0;
  S y{q0 + 0.25 * c * r0 * r0, 0.5 * c * r0};
  for (double r = r0; r < 40.0; r += h) {
    const S k1 = f(r, y);
    const S k2 = f(r + 0.5 * h, {y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]});
    const S k3 = f(r + 0.5 * h, {y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]});
    const S k4 = f(r + h, {y[0] + h * k3[0], y[1] + h * k3[1]});
    for (int j = 0; j < 2; ++j) y[j] += h / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
    if (y[0] < 0.0) return +1;
    if (y[1] > 0.0) return -1;
  }
  return 0;
}

}  // namespace

TEST_CASE("Q(0) and a* match the frozen reference") {
  const auto& gs = test::ground_state();
  CHECK(gs.q_origin == Approx(test::kQOrigin).epsilon(1e-11));
  CHECK(gs.a_star == Approx(test::kAStar).epsilon(1e-9));
  for (const auto& m : test::kMoments) {
    CHECK(gs.moment(m.p) == Approx(m.m_p).epsilon(1e-6));
  }
}

TEST_CASE("Q(0) agrees with an independent RK4 bisection") {
  double lo = 2.0, hi = 2.4;
  for (int k = 0; k < 34; ++k) {
    const double mid = 0.5 * (lo + hi);
    (rk4_shot(mid) > 0 ? hi : lo) = mid;
  }
  CHECK(test::ground_state().q_origin == Approx(0.5 * (lo + hi)).epsilon(1e-8));
}

TEST_CASE("three routes to a* agree and the shot is fast") {
  const auto t0 = std::chrono::steady_clock::now();
  const auto gs = shoot_q(test::default_grid());
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(gs.consistency_spread <= 1e-6);
  CHECK(std::abs(gs.kinetic_q - gs.a_star) / gs.a_star <= 1e-6);
  CHECK(std::abs(gs.half_quartic_q - gs.a_star) / gs.a_star <= 1e-6);
  CHECK(seconds < 5.0);
}

TEST_CASE("Q is positive, decreasing and decays before R") {
  const auto& gs = test::ground_state();
  const auto q = gs.q.values();
  for (std::size_t i = 0; i + 1 < q.size(); ++i) {
    REQUIRE(q[i] > 0.0);
    REQUIRE(q[i + 1] <= q[i]);
  }
  CHECK(gs.q.boundary_ok(1e-10));
  CHECK(mass(gs.q0) == Approx(1.0).epsilon(1e-13));
  CHECK(kinetic(gs.q0) == Approx(1.0).epsilon(1e-6));
}

TEST_CASE("shot classification brackets the ground state") {
  CHECK(classify_shot(1.5) == ShotOutcome::turns_back);
  CHECK(classify_shot(3.0) == ShotOutcome::crosses_zero);
  ShootingOptions bad;
  bad.bracket_lo = 2.5;
  CHECK_THROWS_AS(shoot_q(test::default_grid(), bad), ConvergenceError);
}

TEST_CASE("Gagliardo-Nirenberg defect is nonnegative and vanishes at Q0") {
  const auto& gs = test::ground_state();
  CHECK(std::abs(gn_defect(gs.q0, gs.a_star)) <= 1e-6);
  std::mt19937_64 rng(7);
  for (int k = 0; k < 1000; ++k) {
    REQUIRE(gn_defect(random_profile(gs.grid(), rng), gs.a_star) >= -1e-6);
  }
  CHECK_THROWS_AS(gn_defect(gs.q, gs.a_star), DomainError);
}

TEST_CASE("GN defect scales like the kinetic energy") {
  const auto& gs = test::ground_state();
  std::mt19937_64 rng(11);
  const auto u = random_profile(gs.grid(), rng);
  const double d = gn_defect(u, gs.a_star);
  const auto w = normalized(rescale_profile(u, 2.0));
  CHECK(gn_defect(w, gs.a_star) == Approx(4.0 * d).epsilon(1e-3));
}
