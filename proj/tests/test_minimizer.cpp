#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "kgp/energy.hpp"
#include "kgp/error.hpp"
#include "kgp/minimizer.hpp"
#include "support.hpp"

using namespace kgp;
using doctest::Approx;

namespace {

const EnergyOptions kFree{.allow_unnormalized = true};

double fd_directional(const RadialFunction& u, const RadialFunction& phi, const ModelParams& params, double h) {
  const double ep = energy(u + phi.scaled_by(h), params, kFree).total;
  const double em = energy(u - phi.scaled_by(h), params, kFree).total;
  return (ep - em) / (2.0 * h);
}

ModelParams critical(double b) { return {.a = test::ground_state().a_star, .b = b, .p = 1.0}; }

}  // namespace

TEST_CASE("Q0 is stationary for the plain GP functional at a = a*") {
  const auto& gs = test::ground_state();
  const ModelParams params{.a = gs.a_star, .b = 0.0, .p = 1.0, .with_potential = false};
  // -Lap Q0 - a* Q0^3 = -Q0; Q0 is the interpolated ODE solution, so the
  // discrete residual is at discretization level.
  const auto st = el_residual(gs.q0, params);
  CHECK(st.mu == Approx(-1.0).epsilon(1e-6));
  CHECK(st.residual < 1e-3);
}

TEST_CASE("gradient matches finite differences of the energy") {
  const auto& gs = test::ground_state();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> bdist(0.0, 2.0), pdist(0.2, 1.8), adist(0.5, 2.0);
  for (int k = 0; k < 20; ++k) {
    const auto u = random_profile(gs.grid(), rng);
    const auto phi = random_profile(gs.grid(), rng);
    const ModelParams params{.a = adist(rng) * gs.a_star, .b = k == 0 ? 0.0 : bdist(rng), .p = pdist(rng)};
    const double analytic = 2.0 * inner(el_gradient(u, params), phi);
    const double fd = fd_directional(u, phi, params, 1e-5);
    CHECK(std::abs(analytic - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("gradient is linear when the nonlinear terms vanish") {
  // a is forced positive; at a = 1e-12 the cubic term is far below the tolerance.
  const auto& gs = test::ground_state();
  std::mt19937_64 rng(5);
  const ModelParams params{.a = 1e-12, .b = 0.0, .p = 1.0};
  const auto u = random_profile(gs.grid(), rng);
  const auto v = random_profile(gs.grid(), rng);
  const auto lhs = el_gradient(u + v.scaled_by(2.0), params);
  const auto rhs = el_gradient(u, params) + el_gradient(v, params).scaled_by(2.0);
  const auto diff = lhs - rhs;
  CHECK(std::sqrt(mass(diff)) <= 1e-9 * std::sqrt(mass(lhs)));
}

TEST_CASE("monotone_check") {
  const auto grid = test::default_grid();
  const auto g = gaussian_profile(grid);
  CHECK(monotone_check(g, 0.0));
  const auto ring = RadialFunction::sample(grid, [](double r) { return r * std::exp(-r * r); });
  CHECK_FALSE(monotone_check(ring, 1e-12));
}

TEST_CASE("minimizer output is certified") {
  const auto& gs = test::ground_state();
  const auto params = critical(0.1);
  FlowOptions opts;
  opts.frame = Frame::blowup(blowup_scale(params, gs.a_star));
  opts.record_trace = true;
  const auto res = minimize(params, gaussian_profile(gs.grid()), opts, gs.a_star);
  REQUIRE(res.converged);
  CHECK(res.residual <= 1e-6);
  CHECK(std::abs(mass(res.profile) - 1.0) <= 1e-10);
  CHECK(std::abs(mass(res.frame_profile) - 1.0) <= 1e-10);
  CHECK(monotone_check(res.frame_profile, 1e-12));
  for (double v : res.frame_profile.values()) REQUIRE(v >= 0.0);
  CHECK_FALSE(res.domain_too_small);
  CHECK(res.breakdown.total <= upper_bound(params, gs) * (1.0 - 1e-9));
  CHECK(res.breakdown.total < 0.0);

  REQUIRE(res.energy_trace.size() >= 2);
  for (std::size_t k = 1; k < res.energy_trace.size(); ++k) {
    REQUIRE(res.energy_trace[k] <= res.energy_trace[k - 1] + 1e-12);
  }
  const auto st = el_residual(res, params);
  CHECK(st.residual == Approx(res.residual).epsilon(1e-6));
  CHECK(st.mu == Approx(res.mu).epsilon(1e-10));
}

TEST_CASE("two starts reach the same minimum") {
  const auto& gs = test::ground_state();
  const auto params = critical(0.1);
  FlowOptions opts;
  opts.frame = Frame::blowup(blowup_scale(params, gs.a_star));
  const auto from_q0 = minimize(params, gs.q0, opts, gs.a_star);
  const auto from_gauss = minimize(params, gaussian_profile(gs.grid()), opts, gs.a_star);
  REQUIRE(from_q0.converged);
  REQUIRE(from_gauss.converged);
  CHECK(std::abs(from_q0.breakdown.total - from_gauss.breakdown.total) <= 1e-6 * std::abs(from_q0.breakdown.total));
  CHECK(h1_distance(from_q0.frame_profile, from_gauss.frame_profile) <= 1e-4);
}

TEST_CASE("physical and blow-up frames agree") {
  const auto& gs = test::ground_state();
  const auto params = critical(0.1);
  FlowOptions phys;
  const auto a = minimize(params, gs.q0, phys, gs.a_star);
  FlowOptions blow;
  blow.frame = Frame::blowup(blowup_scale(params, gs.a_star));
  const auto b = minimize(params, gs.q0, blow, gs.a_star);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK(a.frame_used == Frame::physical());
  CHECK(b.breakdown.total == Approx(a.breakdown.total).epsilon(1e-4));
  const double eps = blow.frame.eps;
  CHECK(b.mu / (eps * eps) == Approx(a.mu).epsilon(1e-4));
}

TEST_CASE("b = 0 below the critical mass converges to a GP minimizer") {
  const auto& gs = test::ground_state();
  const ModelParams params{.a = 0.5 * gs.a_star, .b = 0.0, .p = 1.0};
  const auto res = minimize(params, gaussian_profile(gs.grid()), {}, gs.a_star);
  CHECK(res.converged);
  CHECK(res.breakdown.total < 0.0);
  for (double ell : {0.25, 0.5, 1.0, 2.0}) {
    CHECK(res.breakdown.total <= trial_energy(ell, params, gs) + 1e-8);
  }
}

TEST_CASE("invalid inputs are rejected") {
  const auto& gs = test::ground_state();
  const auto g = gaussian_profile(gs.grid());
  CHECK_THROWS_AS(minimize(critical(0.0), g, {}, gs.a_star), InfimumNotAttained);
  CHECK_THROWS_AS(minimize({.a = 2.0 * gs.a_star, .b = 0.0, .p = 1.0}, g, {}, gs.a_star), InfimumNotAttained);
  CHECK_THROWS_AS(minimize(critical(0.0), g), DomainError);
  CHECK_THROWS_AS(minimize(critical(0.1), RadialFunction::zeros(gs.grid()), {}, gs.a_star), DomainError);
  CHECK_THROWS_AS(minimize(critical(0.1), g.scaled_by(-1.0), {}, gs.a_star), DomainError);
  FlowOptions bad;
  bad.backtracking = 1.5;
  CHECK_THROWS(minimize(critical(0.1), g, bad, gs.a_star));
}

TEST_CASE("iteration cap reports nonconvergence with a descended iterate") {
  const auto& gs = test::ground_state();
  FlowOptions opts;
  opts.max_iters = 2;
  opts.frame = Frame::blowup(blowup_scale(critical(0.1), gs.a_star));
  const auto res = minimize(critical(0.1), gaussian_profile(gs.grid()), opts, gs.a_star);
  CHECK_FALSE(res.converged);
  CHECK(res.iterations <= 2);
  const double eps = opts.frame.eps;
  CHECK(res.breakdown.total * eps * eps <= res.initial_energy + 1e-12);
}

TEST_CASE("blow-up scale") {
  CHECK(blowup_scale({.a = 1.0, .b = 1e-3, .p = 1.0}, 1.0) == Approx(0.1).epsilon(1e-14));
  CHECK(blowup_scale({.a = 2.0, .b = 1e-4, .p = 1.0}, 1.0) == Approx(1e-2).epsilon(1e-14));
  CHECK(frame_kind_from_string(to_string(FrameKind::blowup)) == FrameKind::blowup);
}
