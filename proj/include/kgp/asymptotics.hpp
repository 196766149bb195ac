#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kgp/energy.hpp"
#include "kgp/minimizer.hpp"
#include "kgp/townes.hpp"

namespace kgp {

enum class Regime { critical, supercritical };

std::string to_string(Regime r);
Regime regime_from_string(const std::string& name);

/// Per-point override of the flow iteration cap (used to exercise failure paths).
struct PointOverride {
  std::size_t index = 0;
  int max_iters = 0;

  bool operator==(const PointOverride&) const = default;
};

struct SweepSpec {
  Regime regime = Regime::critical;
  /// a / a*; must be 1 for the critical regime and > 1 for the supercritical one.
  double a_ratio = 1.0;
  double p = 1.0;
  /// Strictly decreasing, positive.
  std::vector<double> b_list;
  bool warm_start = true;
  /// Frame is chosen per point; the other fields apply to every minimization.
  FlowOptions flow;
  std::vector<PointOverride> overrides;

  void validate() const;
};

/// Geometric list from `from` down to `to` with `count` points (endpoints exact).
std::vector<double> geometric_b_list(double from, double to, std::size_t count);
/// 1e-1 .. 1e-4 for critical, 1e-1 .. 1e-5 for supercritical, 12 points.
std::vector<double> default_b_list(Regime regime);

struct SweepRecord {
  double b = 0.0;
  double eps = 0.0;
  EnergyBreakdown energy;
  /// b^{p/(4-p)} E(b) if a = a*, else b E(b).
  double scaled_energy = 0.0;
  /// sqrt(kinetic) of the blow-up-frame profile.
  double beta_est = 0.0;
  /// h1 distance of the blow-up-frame profile to beta Q0(beta x); NaN if a > a*.
  double profile_h1 = 0.0;
  double kinetic_scaled = 0.0;    ///< b^{2/(4-p)} kinetic(u_b)
  double potential_scaled = 0.0;  ///< b^{p/(4-p)} singular_moment(u_b)
  double upper_bound = 0.0;
  double mu = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool monotone = false;
  bool domain_too_small = false;
  RadialFunction frame_profile;
};

/// Minimizations in list order, each warm-started from the previous frame profile.
std::vector<SweepRecord> run_sweep(const GroundStateData& gs, const SweepSpec& spec);

struct ProfileConvergence {
  double beta_est = 0.0;
  double profile_h1 = 0.0;
};

/// `w` is a blow-up-frame profile on gs's grid.
ProfileConvergence profile_convergence(const RadialFunction& w, const GroundStateData& gs, double p);

struct LimitFit {
  double estimate = 0.0;
  /// Fitted exponent gamma in y = L + c b^gamma; NaN when the fit fell back.
  double rate = 0.0;
  double coefficient = 0.0;
  /// Root-mean-square fit residual.
  double residual = 0.0;
  int samples_used = 0;
};

/// Least-squares fit of y = L + c b^gamma with gamma in [0.05, 3] (variable
/// projection). Constant data returns its mean; a degenerate fit returns the
/// smallest-b sample. Input order does not matter.
LimitFit fit_power_limit(std::span<const double> b, std::span<const double> y);

/// Column names: scaled_energy, beta_est, profile_h1, kinetic_scaled, potential_scaled.
/// Only converged records with finite values are used; at least three are required.
/// The fit sees the smallest-b `tail_fraction` of them (never fewer than three),
/// where higher-order corrections in b have died out.
LimitFit estimate_limit(std::span<const SweepRecord> records, const std::string& column,
                        double tail_fraction = 0.5);

double column_value(const SweepRecord& rec, const std::string& column);

/// Sign, sandwich and shape checks on converged records (in b order).
struct SweepInvariants {
  bool negative = true;           ///< E(b) < 0
  bool below_upper_bound = true;  ///< E(b) <= upper_bound(b) (relative slack)
  bool nondecreasing = true;      ///< E nondecreasing in b (relative slack)
  bool concave = true;            ///< E(b_mid) >= chord of its neighbours (relative slack)
  double worst_upper = 0.0;       ///< max (E - upper_bound) / |E|
  double worst_monotone = 0.0;    ///< max (E(b_small) - E(b_large)) / |E|
  double worst_concave = 0.0;     ///< max (chord - E(b_mid)) / |E|

  bool all() const { return negative && below_upper_bound && nondecreasing && concave; }
};

SweepInvariants check_sweep_invariants(std::span<const SweepRecord> records, double slack = 1e-6);

}  // namespace kgp
