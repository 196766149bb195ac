#include "kgp/townes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <boost/numeric/odeint.hpp>

#include "kgp/error.hpp"

namespace kgp {

namespace {

namespace odeint = boost::numeric::odeint;
using State = std::array<double, 2>;

// Below this radius the trajectory is the Taylor series about the origin.
constexpr double kSeriesRadius = 1e-4;

struct TownesRhs {
  void operator()(const State& y, State& dy, double r) const {
    dy[0] = y[1];
    dy[1] = -y[1] / r + y[0] - y[0] * y[0] * y[0];
  }
};

State series_state(double q0, double r) {
  const double c = q0 - q0 * q0 * q0;
  return {q0 + 0.25 * c * r * r, 0.5 * c * r};
}

// One trajectory of the radial ODE, advanced lazily and stopped at its first
// zero crossing or turning point.
class Shot {
 public:
  Shot(double q0, const ShootingOptions& opts)
      : q0_(q0),
        r_max_(opts.r_max),
        stepper_(odeint::make_dense_output(opts.ode_atol, opts.ode_rtol, odeint::runge_kutta_dopri5<State>())) {
    stepper_.initialize(series_state(q0, kSeriesRadius), kSeriesRadius, 1e-4);
  }

  ShotOutcome outcome() const { return outcome_; }

  // Advance until the trajectory covers r, an event fires, or r_max is reached.
  void advance_to(double r) {
    while (outcome_ == ShotOutcome::undecided && stepper_.current_time() < r &&
           stepper_.current_time() < r_max_) {
      stepper_.do_step(TownesRhs{});
      const State& y = stepper_.current_state();
      if (!std::isfinite(y[0]) || y[0] < 0.0) {
        outcome_ = ShotOutcome::crosses_zero;
      } else if (y[1] > 0.0) {
        outcome_ = ShotOutcome::turns_back;
      }
    }
  }

  // Value at r if the trajectory is still trusted there (no event before r).
  bool value_at(double r, State& out) {
    if (r < kSeriesRadius) {
      out = series_state(q0_, r);
      return true;
    }
    advance_to(r);
    if (outcome_ != ShotOutcome::undecided || stepper_.current_time() < r) return false;
    stepper_.calc_state(r, out);
    return true;
  }

 private:
  double q0_;
  double r_max_;
  ShotOutcome outcome_ = ShotOutcome::undecided;
  odeint::result_of::make_dense_output<odeint::runge_kutta_dopri5<State>>::type stepper_;
};

}  // namespace

ShotOutcome classify_shot(double q_origin, const ShootingOptions& opts) {
  Shot shot(q_origin, opts);
  shot.advance_to(opts.r_max);
  return shot.outcome();
}

double GroundStateData::moment(double p) const { return singular_moment(q0, p); }

double moment(const GroundStateData& gs, double p) { return gs.moment(p); }

GroundStateData shoot_q(const GridPtr& grid, double tol) {
  ShootingOptions opts;
  opts.tol = tol;
  return shoot_q(grid, opts);
}

GroundStateData shoot_q(const GridPtr& grid, const ShootingOptions& opts) {
  if (!grid) throw DomainError("shoot_q needs a grid");
  if (!(opts.tol > 0.0)) throw DomainError("shooting tolerance must be positive");

  double lo = opts.bracket_lo;
  double hi = opts.bracket_hi;
  if (!(lo < hi) || classify_shot(lo, opts) != ShotOutcome::turns_back ||
      classify_shot(hi, opts) != ShotOutcome::crosses_zero) {
    throw ConvergenceError("shoot_q: bracket not found (need turning trajectory at lo, crossing at hi)");
  }

  int it = 0;
  for (; it < opts.max_bisections; ++it) {
    if (hi - lo < opts.tol) break;
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    switch (classify_shot(mid, opts)) {
      case ShotOutcome::crosses_zero: hi = mid; break;
      case ShotOutcome::turns_back: lo = mid; break;
      case ShotOutcome::undecided:
        throw ConvergenceError("shoot_q: trajectory neither crossed nor turned before r_max");
    }
  }
  if (it == opts.max_bisections && hi - lo >= opts.tol) {
    throw ConvergenceError("shoot_q: bisection did not converge within the iteration cap");
  }

  // Average the two bracketing trajectories while they agree, then continue
  // with the decaying solution K0 of the linearized equation.
  const auto r = grid->nodes();
  std::vector<double> q(r.size(), 0.0);
  q[0] = 0.5 * (lo + hi);
  Shot below(lo, opts), above(hi, opts);
  std::size_t last = 0;
  for (std::size_t i = 1; i < r.size(); ++i) {
    State a{}, b{};
    if (!below.value_at(r[i], a) || !above.value_at(r[i], b)) break;
    const double mid = 0.5 * (a[0] + b[0]);
    if (!(mid > 0.0) || mid >= q[last] || std::abs(a[0] - b[0]) > opts.match_gap * mid) break;
    q[i] = mid;
    last = i;
  }
  if (last < 2) throw ConvergenceError("shoot_q: trusted region too short for the grid");
  const double r_m = r[last];
  const double k_m = std::cyl_bessel_k(0.0, r_m);
  for (std::size_t i = last + 1; i < r.size(); ++i) {
    q[i] = q[last] * std::cyl_bessel_k(0.0, r[i]) / k_m;
  }

  GroundStateData gs{RadialFunction(grid, std::move(q)), RadialFunction::zeros(grid)};
  gs.q_origin = gs.q[0];
  gs.match_radius = r_m;
  gs.a_star = mass(gs.q);
  gs.kinetic_q = kinetic(gs.q);
  gs.half_quartic_q = 0.5 * quartic(gs.q);
  gs.q0 = gs.q.scaled_by(1.0 / std::sqrt(gs.a_star));
  const double m = gs.a_star, k = gs.kinetic_q, h = gs.half_quartic_q;
  gs.consistency_spread = std::max({std::abs(m - k), std::abs(m - h), std::abs(k - h)}) / m;
  return gs;
}

double gn_defect(const RadialFunction& u, double a_star, double mass_tol) {
  if (std::abs(mass(u) - 1.0) > mass_tol) throw DomainError("gn_defect needs a normalized profile");
  return kinetic(u) - 0.5 * a_star * quartic(u);
}

}  // namespace kgp
