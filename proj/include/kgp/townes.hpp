#pragma once

#include "kgp/radial.hpp"

namespace kgp {

struct ShootingOptions {
  /// Stop bisection once the bracket on Q(0) is narrower than this (or cannot be split).
  double tol = 1e-15;
  double bracket_lo = 1.5;
  double bracket_hi = 3.0;
  int max_bisections = 200;
  double ode_rtol = 1e-12;
  double ode_atol = 1e-15;
  /// Relative gap between the two bracketing trajectories beyond which the
  /// shooting solution is replaced by the K0 tail.
  double match_gap = 1e-9;
  double r_max = 60.0;
};

/// Townes ground state on a grid: -Q'' - Q'/r + Q - Q^3 = 0, Q'(0) = 0, Q > 0.
struct GroundStateData {
  RadialFunction q;
  RadialFunction q0;             ///< Q / ||Q||_{L^2}
  double a_star = 0.0;           ///< int Q^2, the source of truth for a*
  double q_origin = 0.0;         ///< Q(0)
  double kinetic_q = 0.0;        ///< int |grad Q|^2 (check)
  double half_quartic_q = 0.0;   ///< (1/2) int Q^4 (check)
  double consistency_spread = 0.0;
  double match_radius = 0.0;     ///< last node taken from the shooting trajectory

  /// M_p = int |Q0|^2 / |x|^p dx
  double moment(double p) const;
  const GridPtr& grid() const noexcept { return q.grid_ptr(); }
};

GroundStateData shoot_q(const GridPtr& grid, double tol);
GroundStateData shoot_q(const GridPtr& grid, const ShootingOptions& opts = {});

double moment(const GroundStateData& gs, double p);

/// kinetic(u) - (a*/2) quartic(u) for a normalized u; >= 0 by Gagliardo-Nirenberg.
double gn_defect(const RadialFunction& u, double a_star, double mass_tol = 1e-8);

/// Classification of a single shooting trajectory from Q(0) = q_origin.
enum class ShotOutcome { crosses_zero, turns_back, undecided };
ShotOutcome classify_shot(double q_origin, const ShootingOptions& opts = {});

}  // namespace kgp
