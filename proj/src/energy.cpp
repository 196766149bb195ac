#include "kgp/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <boost/math/tools/minima.hpp>

#include "kgp/error.hpp"

namespace kgp {

void ModelParams::validate() const {
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("params.a must be positive");
  if (!(b >= 0.0) || !std::isfinite(b)) throw DomainError("params.b must be non-negative");
  if (!(p > 0.0 && p < 2.0)) throw DomainError("params.p must lie in (0, 2)");
}

EnergyBreakdown energy(const RadialFunction& u, const ModelParams& params, const EnergyOptions& opts) {
  params.validate();
  if (!opts.allow_unnormalized && std::abs(mass(u) - 1.0) > opts.mass_tol) {
    throw DomainError("energy needs a normalized profile (pass allow_unnormalized for diagnostics)");
  }
  EnergyBreakdown e;
  e.kinetic = kinetic(u);
  e.kirchhoff = params.b * e.kinetic * e.kinetic;
  e.potential = params.with_potential ? -singular_moment(u, params.p) : 0.0;
  e.interaction = -0.5 * params.a * quartic(u);
  e.total = e.kinetic + e.kirchhoff + e.potential + e.interaction;
  return e;
}

double trial_energy(double ell, const ModelParams& params, double a_star, double m_p) {
  params.validate();
  if (!(ell > 0.0)) throw DomainError("trial scale l must be positive");
  const double excess = params.a / a_star - 1.0;
  const double m = params.with_potential ? m_p : 0.0;
  const double l2 = ell * ell;
  return params.b * l2 * l2 - l2 * excess - std::pow(ell, params.p) * m;
}

double trial_energy(double ell, const ModelParams& params, const GroundStateData& gs) {
  return trial_energy(ell, params, gs.a_star, gs.moment(params.p));
}

TrialOptimum optimize_trial(const ModelParams& params, double a_star, double m_p) {
  params.validate();
  if (!(params.b > 0.0)) throw DomainError("upper_bound needs b > 0");
  const double excess = params.a / a_star - 1.0;
  const double m = params.with_potential ? m_p : 0.0;
  const double p = params.p;
  // l f'(l) at l = e^x; it has a single sign change when a minimizer exists.
  auto slope = [&](double x) {
    const double l = std::exp(x);
    const double l2 = l * l;
    return 4.0 * params.b * l2 * l2 - 2.0 * excess * l2 - p * m * std::pow(l, p);
  };
  auto f = [&](double x) { return trial_energy(std::exp(x), params, a_star, m_p); };

  double lo = std::log(1e-4);
  double hi = std::log(1e4);
  if (!(slope(lo) < 0.0) || !(slope(hi) > 0.0)) {
    throw ConvergenceError("upper_bound: minimizer of the trial energy is not bracketed in [1e-4, 1e4]");
  }
  while (hi - lo > 1e-2) {
    const double mid = 0.5 * (lo + hi);
    (slope(mid) < 0.0 ? lo : hi) = mid;
  }
  // Brent refinement on log l inside the sign bracket.
  const auto [x, fx] = boost::math::tools::brent_find_minima(f, lo, hi, 52);
  return {fx, std::exp(x)};
}

double upper_bound(const ModelParams& params, double a_star, double m_p) {
  return optimize_trial(params, a_star, m_p).value;
}

double upper_bound(const ModelParams& params, const GroundStateData& gs) {
  return upper_bound(params, gs.a_star, gs.moment(params.p));
}

namespace {
void check_limit_domain(double p, double m_p) {
  if (!(p > 0.0 && p < 2.0)) throw DomainError("p must lie in (0, 2)");
  if (!(m_p > 0.0) || !std::isfinite(m_p)) throw DomainError("M_p must be positive");
}
}  // namespace

double theorem2_limit(double p, double m_p) {
  check_limit_domain(p, m_p);
  const double k = 4.0 - p;
  return std::pow(m_p, 4.0 / k) * (std::pow(p / 4.0, 4.0 / k) - std::pow(p / 4.0, p / k));
}

double beta_limit(double p, double m_p) {
  check_limit_domain(p, m_p);
  return std::pow(p * m_p / 4.0, 1.0 / (4.0 - p));
}

double theorem3_limit(double a, double a_star) {
  if (!(a_star > 0.0)) throw DomainError("a* must be positive");
  if (a < a_star) throw DomainError("theorem3_limit needs a >= a*");
  const double excess = a / a_star - 1.0;
  return 0.0 - 0.25 * excess * excess;
}

Lemma4Report lemma4_check(const RadialFunction& u, std::span<const double> eps_list, double p, double c_cal) {
  const double k = kinetic(u);
  const double s = singular_moment(u, p);
  Lemma4Report report;
  report.c_cal = c_cal;
  report.max_rho = -std::numeric_limits<double>::infinity();
  for (double eps : eps_list) {
    if (!(eps > 0.0)) throw DomainError("lemma4 eps must be positive");
    const double rho = (s - eps * k) * std::pow(eps, p / (2.0 - p));
    report.eps.push_back(eps);
    report.rho.push_back(rho);
    report.max_rho = std::max(report.max_rho, rho);
  }
  report.within = report.max_rho <= c_cal * (1.0 + 1e-12);
  return report;
}

std::vector<double> lemma4_default_eps() {
  return {1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3};
}

double calibrate_lemma4(const GroundStateData& gs, double p, std::span<const double> eps_list) {
  const RadialFunction probes[] = {gaussian_profile(gs.grid()), gs.q0};
  double c_cal = -std::numeric_limits<double>::infinity();
  for (const auto& probe : probes) {
    for (double scale : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      // Loose support check: the widest Q0 rescale is cut at R by design.
      const RadialFunction u = normalized(rescale_profile(probe, scale, 1e-2));
      c_cal = std::max(c_cal, lemma4_check(u, eps_list, p, 0.0).max_rho);
    }
  }
  return c_cal;
}

RadialFunction gaussian_profile(const GridPtr& grid) {
  const double c = 1.0 / std::sqrt(std::numbers::pi);
  return RadialFunction::sample(grid, [c](double r) { return c * std::exp(-0.5 * r * r); });
}

}  // namespace kgp
