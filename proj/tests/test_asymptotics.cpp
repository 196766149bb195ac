#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "kgp/asymptotics.hpp"
#include "kgp/error.hpp"
#include "support.hpp"

using namespace kgp;
using doctest::Approx;

namespace {

std::vector<SweepRecord> critical_sweep(std::vector<PointOverride> overrides = {}) {
  SweepSpec spec;
  spec.regime = Regime::critical;
  spec.b_list = geometric_b_list(1e-1, 1e-3, 6);
  spec.overrides = std::move(overrides);
  return run_sweep(test::ground_state(), spec);
}

const std::vector<SweepRecord>& cached_critical() {
  static const auto records = critical_sweep();
  return records;
}

}  // namespace

TEST_CASE("power-law fit recovers synthetic limits") {
  std::vector<double> b = geometric_b_list(1e-1, 1e-4, 8), y;
  for (double x : b) y.push_back(-0.5 + 0.3 * std::sqrt(x));
  auto fit = fit_power_limit(b, y);
  CHECK(fit.estimate == Approx(-0.5).epsilon(1e-6));
  CHECK(fit.rate == Approx(0.5).epsilon(1e-4));
  CHECK(fit.coefficient == Approx(0.3).epsilon(1e-4));

  y.clear();
  for (double x : b) y.push_back(2.0 - 1.5 * std::pow(x, 1.3));
  fit = fit_power_limit(b, y);
  CHECK(fit.estimate == Approx(2.0).epsilon(1e-6));

  auto rb = b;
  auto ry = y;
  std::reverse(rb.begin(), rb.end());
  std::reverse(ry.begin(), ry.end());
  std::swap(rb[1], rb[4]);
  std::swap(ry[1], ry[4]);
  const auto permuted = fit_power_limit(rb, ry);
  CHECK(permuted.estimate == fit.estimate);
  CHECK(permuted.rate == fit.rate);
}

TEST_CASE("degenerate fits fall back") {
  const std::vector<double> b{1e-1, 1e-2, 1e-3, 1e-4};
  const std::vector<double> flat(4, -0.7);
  auto fit = fit_power_limit(b, flat);
  CHECK(fit.estimate == Approx(-0.7).epsilon(1e-15));
  CHECK(std::isnan(fit.rate));

  std::vector<double> steep;
  for (double x : b) steep.push_back(1.0 + std::pow(x, 4.0));
  fit = fit_power_limit(b, steep);
  CHECK(std::isnan(fit.rate));
  CHECK(fit.estimate == steep.back());

  CHECK_THROWS_AS(fit_power_limit(std::vector<double>{1.0, 0.1}, std::vector<double>{1.0, 2.0}), DomainError);
}

TEST_CASE("geometric b list") {
  const auto b = geometric_b_list(1e-1, 1e-4, 12);
  REQUIRE(b.size() == 12);
  CHECK(b.front() == 1e-1);
  CHECK(b.back() == 1e-4);
  for (std::size_t i = 2; i < b.size(); ++i) {
    CHECK(b[i] / b[i - 1] == Approx(b[1] / b[0]).epsilon(1e-12));
  }
  CHECK(default_b_list(Regime::supercritical).back() == 1e-5);
}

TEST_CASE("sweep spec validation") {
  SweepSpec spec;
  spec.b_list = {1e-1, 1e-2};
  CHECK_NOTHROW(spec.validate());
  spec.a_ratio = 1.5;
  CHECK_THROWS_AS(spec.validate(), DomainError);
  spec.regime = Regime::supercritical;
  CHECK_NOTHROW(spec.validate());
  spec.b_list = {1e-2, 1e-1};
  CHECK_THROWS_AS(spec.validate(), DomainError);
  spec.b_list = {1e-1, 1e-2};
  spec.overrides = {{5, 10}};
  CHECK_THROWS_AS(spec.validate(), DomainError);
}

TEST_CASE("profile convergence is exact on its own target") {
  const auto& gs = test::ground_state();
  const auto pc = profile_convergence(gs.q0, gs, 1.0);
  CHECK(pc.beta_est == Approx(1.0).epsilon(1e-6));
  const double beta = beta_limit(1.0, gs.moment(1.0));
  const auto w = normalized(rescale_profile(gs.q0, beta));
  const auto at_target = profile_convergence(w, gs, 1.0);
  CHECK(at_target.beta_est == Approx(beta).epsilon(1e-5));
  CHECK(at_target.profile_h1 < 1e-8);
}

TEST_CASE("critical sweep satisfies the sign and sandwich invariants") {
  const auto& gs = test::ground_state();
  const auto& rec = cached_critical();
  REQUIRE(rec.size() == 6);
  for (const auto& r : rec) REQUIRE(r.converged);
  const auto inv = check_sweep_invariants(rec);
  CHECK(inv.negative);
  CHECK(inv.below_upper_bound);
  CHECK(inv.nondecreasing);
  CHECK(inv.concave);

  // At a = a* the scaled trial bound is the limit itself, so the scaled
  // energies sit below it and approach it as b shrinks.
  const double limit = theorem2_limit(1.0, gs.moment(1.0));
  double prev_gap = INFINITY;
  for (const auto& r : rec) {
    CHECK(r.upper_bound * std::cbrt(r.b) == Approx(limit).epsilon(1e-8));
    CHECK(r.scaled_energy <= limit * (1.0 - 1e-9));
    const double gap = (limit - r.scaled_energy) / std::abs(limit);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap < 0.05);
}

TEST_CASE("critical sweep records are certified and scaled consistently") {
  const auto& rec = cached_critical();
  double kmin = INFINITY, kmax = 0.0;
  for (const auto& r : rec) {
    CHECK(r.residual <= 1e-6);
    CHECK(r.monotone);
    CHECK_FALSE(r.domain_too_small);
    CHECK(r.eps == Approx(std::cbrt(r.b)).epsilon(1e-14));
    CHECK(r.scaled_energy == Approx(std::cbrt(r.b) * r.energy.total).epsilon(1e-14));
    CHECK(r.kinetic_scaled == Approx(r.beta_est * r.beta_est).epsilon(1e-8));
    kmin = std::min(kmin, r.kinetic_scaled);
    kmax = std::max(kmax, r.kinetic_scaled);
  }
  CHECK(kmax / kmin < 10.0);
  // beta and the profile distance move toward the limit
  CHECK(rec.back().profile_h1 < rec.front().profile_h1);
}

TEST_CASE("estimate_limit uses converged records only") {
  const auto& rec = cached_critical();
  const auto fit = estimate_limit(rec, "scaled_energy");
  CHECK(fit.samples_used == 3);
  CHECK(std::isfinite(fit.estimate));
  auto broken = rec;
  for (std::size_t i = 0; i < 4; ++i) broken[i].converged = false;
  CHECK_THROWS_AS(estimate_limit(broken, "scaled_energy"), DomainError);
  CHECK_THROWS_AS(estimate_limit(rec, "no_such_column"), DomainError);
}

TEST_CASE("overrides produce flagged nonconverged records") {
  const auto rec = critical_sweep({{2, 1}});
  CHECK_FALSE(rec[2].converged);
  CHECK(rec[3].converged);
  CHECK(estimate_limit(rec, "scaled_energy").samples_used == 3);
}

TEST_CASE("warm and cold starts agree") {
  SweepSpec spec;
  spec.b_list = {1e-1, 1e-2};
  const auto warm = run_sweep(test::ground_state(), spec);
  spec.warm_start = false;
  const auto cold = run_sweep(test::ground_state(), spec);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(warm[i].energy.total == Approx(cold[i].energy.total).epsilon(1e-8));
  }
}

TEST_CASE("supercritical sweep scales like bE(b)") {
  SweepSpec spec;
  spec.regime = Regime::supercritical;
  spec.a_ratio = 2.0;
  spec.b_list = geometric_b_list(1e-1, 1e-3, 4);
  const auto rec = run_sweep(test::ground_state(), spec);
  for (const auto& r : rec) {
    REQUIRE(r.converged);
    CHECK(r.scaled_energy == Approx(r.b * r.energy.total).epsilon(1e-14));
    CHECK(std::isnan(r.profile_h1));
    CHECK(r.scaled_energy < -0.25);
  }
  CHECK(check_sweep_invariants(rec).all());
}

TEST_CASE("invariant checker flags a concavity violation") {
  auto rec = cached_critical();
  rec[2].energy.total -= 0.5 * std::abs(rec[2].energy.total);
  const auto inv = check_sweep_invariants(rec);
  CHECK_FALSE(inv.concave);
  CHECK(inv.worst_concave > 1e-6);
}
