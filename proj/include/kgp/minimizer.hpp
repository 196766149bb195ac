#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kgp/energy.hpp"
#include "kgp/radial.hpp"

namespace kgp {

enum class FrameKind { physical, blowup };

/// Coordinates used during minimization. In the blow-up frame the iterate is
/// v(x) = eps u(eps x) on the input grid, so a concentrating u stays resolved.
struct Frame {
  FrameKind kind = FrameKind::physical;
  double eps = 1.0;

  static Frame physical() { return {}; }
  static Frame blowup(double eps) { return {FrameKind::blowup, eps}; }
  bool operator==(const Frame&) const = default;
};

std::string to_string(FrameKind kind);
FrameKind frame_kind_from_string(const std::string& name);

/// eps = b^{1/(4-p)} for a <= a*, eps = b^{1/2} for a > a*.
double blowup_scale(const ModelParams& params, double a_star);

struct FlowOptions {
  /// Initial pseudo-time step. Directions are preconditioned, so 1 is a Newton-sized step.
  double step = 1.0;
  int max_iters = 20000;
  /// Stop once the relative energy decrease stays below this for `stall_window` steps.
  double energy_tol = 1e-15;
  int stall_window = 50;
  /// Stop once the EL residual (frame normalization) drops below this.
  double residual_tol = 1e-7;
  double backtracking = 0.5;
  int max_halvings = 40;
  double growth = 1.1;
  /// Cap on the step; beyond 2 the near-Newton direction overshoots stiff modes.
  double max_step = 1.5;
  Frame frame;
  /// Flag the result when |v(R)| > truncation_tol * max|v|.
  double truncation_tol = 1e-6;
  bool record_trace = false;

  void validate() const;
  bool operator==(const FlowOptions&) const = default;
};

struct MinimizeResult {
  /// Physical minimizer u on the input grid scaled by the frame factor.
  RadialFunction profile;
  /// v(x) = eps u(eps x) on the input grid; equal to `profile` in the physical frame.
  RadialFunction frame_profile;
  EnergyBreakdown breakdown;
  /// Lagrange multiplier and EL residual of the frame functional eps^2 E_b(u).
  /// Physical values are mu / eps^2 and residual / eps^3.
  double mu = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  Frame frame_used;
  bool domain_too_small = false;
  double initial_energy = 0.0;
  /// Frame energies of accepted iterates (only with record_trace).
  std::vector<double> energy_trace;
};

/// G(u) = -(1 + 2b K(u)) Lap_r u + V u - a u^3, the L^2 gradient of E_b / 2.
/// Discretely: <G, phi> (plain weights) equals dE_b(u)[phi] / 2 exactly.
RadialFunction el_gradient(const RadialFunction& u, const ModelParams& params);

struct Stationarity {
  double mu = 0.0;
  double residual = 0.0;
};

/// mu = <G, u> / <u, u>, residual = ||G - mu u||.
Stationarity el_residual(const RadialFunction& u, const ModelParams& params);
/// Evaluated in the frame the result was computed in.
Stationarity el_residual(const MinimizeResult& res, const ModelParams& params);

/// Normalized gradient flow with positivity projection and backtracking.
/// `init` is read in frame coordinates (v on the input grid for the blow-up
/// frame); it must be nonnegative and nonzero and is renormalized on entry.
/// Throws InfimumNotAttained for b = 0 and a >= a* (requires a_star when b = 0).
MinimizeResult minimize(const ModelParams& params, const RadialFunction& init, const FlowOptions& opts = {},
                        std::optional<double> a_star = std::nullopt);

/// u_{i+1} <= u_i + tol for all i.
bool monotone_check(const RadialFunction& u, double tol);

}  // namespace kgp
