#pragma once

#include <span>
#include <vector>

#include "kgp/radial.hpp"
#include "kgp/townes.hpp"

namespace kgp {

/// E_b(u) = K + b K^2 + int V|u|^2 - (a/2) int |u|^4 with V = -|x|^{-p}.
struct ModelParams {
  double a = 1.0;
  double b = 0.0;
  double p = 1.0;
  /// Diagnostics only: drop the potential term (V = 0).
  bool with_potential = true;

  void validate() const;
  bool operator==(const ModelParams&) const = default;
};

struct EnergyBreakdown {
  double kinetic = 0.0;      ///< int |grad u|^2
  double kirchhoff = 0.0;    ///< b (int |grad u|^2)^2
  double potential = 0.0;    ///< int V |u|^2 = -singular_moment
  double interaction = 0.0;  ///< -(a/2) int |u|^4
  double total = 0.0;
};

struct EnergyOptions {
  bool allow_unnormalized = false;
  double mass_tol = 1e-8;
};

EnergyBreakdown energy(const RadialFunction& u, const ModelParams& params, const EnergyOptions& opts = {});

/// Closed form of E_b(l Q0(l x)): b l^4 - l^2 (a/a* - 1) - l^p M_p.
double trial_energy(double ell, const ModelParams& params, double a_star, double m_p);
double trial_energy(double ell, const ModelParams& params, const GroundStateData& gs);

struct TrialOptimum {
  double value = 0.0;
  double ell = 0.0;
};

/// inf_{l>0} trial_energy(l): sign bracketing of the derivative on log l in
/// [1e-4, 1e4], then Brent refinement.
TrialOptimum optimize_trial(const ModelParams& params, double a_star, double m_p);
double upper_bound(const ModelParams& params, double a_star, double m_p);
double upper_bound(const ModelParams& params, const GroundStateData& gs);

/// M^{4/(4-p)} [(p/4)^{4/(4-p)} - (p/4)^{p/(4-p)}] = inf_l (l^4 - l^p M)
double theorem2_limit(double p, double m_p);
/// (p M / 4)^{1/(4-p)}, the argmin of l^4 - l^p M
double beta_limit(double p, double m_p);
/// -(a/a* - 1)^2 / 4
double theorem3_limit(double a, double a_star);

/// rho(eps) = -(eps K(u) + int V|u|^2) eps^{p/(2-p)}, compared against an
/// empirically calibrated envelope c_cal.
struct Lemma4Report {
  std::vector<double> eps;
  std::vector<double> rho;
  double max_rho = 0.0;
  double c_cal = 0.0;
  bool within = true;
};

Lemma4Report lemma4_check(const RadialFunction& u, std::span<const double> eps_list, double p, double c_cal);

/// 10^{-3}, 10^{-2}, ..., 10^{3}
std::vector<double> lemma4_default_eps();

/// max rho over the probe family {Gaussian, Q0} x rescales {1/4, 1/2, 1, 2, 4}.
double calibrate_lemma4(const GroundStateData& gs, double p, std::span<const double> eps_list);

/// pi^{-1/2} exp(-r^2/2): unit mass, unit kinetic energy.
RadialFunction gaussian_profile(const GridPtr& grid);

}  // namespace kgp
