#include "kgp/minimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>

#include "kgp/error.hpp"

namespace kgp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kRoundoff = 1e-14;

struct Parts {
  double kinetic = 0.0;
  double potential = 0.0;  // int s v^2 with the frame coefficient folded in
  double quartic = 0.0;
  double mass = 0.0;
};

// eps^2 E_b(v / eps on the grid scaled by eps), written on the unscaled grid:
//   K(v) + (b/eps^2) K(v)^2 - eps^{2-p} S_p(v) - (a/2) Q4(v).
class FrameFunctional {
 public:
  FrameFunctional(const RadialGrid& grid, const ModelParams& params, double eps)
      : n_(grid.size()), a_(params.a), b_(params.b / (eps * eps)) {
    w_.assign(grid.plain_weights().begin(), grid.plain_weights().end());
    kappa_.assign(grid.stiffness().begin(), grid.stiffness().end());
    for (double& x : w_) x *= kTwoPi;
    for (double& x : kappa_) x *= kTwoPi;
    s_.assign(n_, 0.0);
    if (params.with_potential) {
      s_ = grid.singular_weights(params.p);
      const double lambda = kTwoPi * std::pow(eps, 2.0 - params.p);
      for (double& x : s_) x *= lambda;
    }
  }

  std::size_t size() const { return n_; }

  Parts parts(std::span<const double> v) const {
    Parts out;
    for (std::size_t c = 0; c + 1 < n_; ++c) {
      const double d = v[c + 1] - v[c];
      out.kinetic += kappa_[c] * d * d;
    }
    for (std::size_t i = 0; i < n_; ++i) {
      const double v2 = v[i] * v[i];
      out.potential += s_[i] * v2;
      out.quartic += w_[i] * v2 * v2;
      out.mass += w_[i] * v2;
    }
    return out;
  }

  double value(const Parts& q) const {
    return q.kinetic + b_ * q.kinetic * q.kinetic - q.potential - 0.5 * a_ * q.quartic;
  }

  // value(t) - value(v) accumulated from differences, so that the sign stays
  // reliable once the change drops below the rounding error of value().
  double delta(std::span<const double> t, std::span<const double> v, const Parts& pt, const Parts& pv) const {
    double dk = 0.0, ds = 0.0, dq = 0.0;
    for (std::size_t c = 0; c + 1 < n_; ++c) {
      const double a = t[c + 1] - t[c], b = v[c + 1] - v[c];
      dk += kappa_[c] * (a - b) * (a + b);
    }
    for (std::size_t i = 0; i < n_; ++i) {
      const double m = (t[i] - v[i]) * (t[i] + v[i]);
      ds += s_[i] * m;
      dq += w_[i] * m * (t[i] * t[i] + v[i] * v[i]);
    }
    return dk + b_ * dk * (pt.kinetic + pv.kinetic) - ds - 0.5 * a_ * dq;
  }

  // L^2 gradient of value/2 given the precomputed kinetic energy.
  void gradient(std::span<const double> v, double kin, std::vector<double>& g) const {
    const double c = 1.0 + 2.0 * b_ * kin;
    g.assign(n_, 0.0);
    for (std::size_t e = 0; e + 1 < n_; ++e) {
      const double f = kappa_[e] * (v[e] - v[e + 1]);
      g[e] += c * f;
      g[e + 1] -= c * f;
    }
    for (std::size_t i = 0; i < n_; ++i) {
      g[i] = g[i] / w_[i] - s_[i] / w_[i] * v[i] - a_ * v[i] * v[i] * v[i];
    }
  }

  Stationarity stationarity(std::span<const double> v, const std::vector<double>& g) const {
    double gv = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      gv += w_[i] * g[i] * v[i];
      vv += w_[i] * v[i] * v[i];
    }
    const double mu = gv / vv;
    double rr = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double r = g[i] - mu * v[i];
      rr += w_[i] * r * r;
    }
    return {mu, std::sqrt(rr)};
  }

  // Solves (c A + sigma W) d = W r, A the stiffness matrix, W the mass weights.
  void precondition(double c, double sigma, std::span<const double> r, std::vector<double>& d) const {
    std::vector<double> diag(n_), upper(n_, 0.0), rhs(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      diag[i] = sigma * w_[i];
      rhs[i] = w_[i] * r[i];
    }
    for (std::size_t e = 0; e + 1 < n_; ++e) {
      diag[e] += c * kappa_[e];
      diag[e + 1] += c * kappa_[e];
      upper[e] = -c * kappa_[e];
    }
    // Thomas algorithm; the matrix is symmetric positive definite.
    for (std::size_t i = 1; i < n_; ++i) {
      const double m = upper[i - 1] / diag[i - 1];
      diag[i] -= m * upper[i - 1];
      rhs[i] -= m * rhs[i - 1];
    }
    d.assign(n_, 0.0);
    d[n_ - 1] = rhs[n_ - 1] / diag[n_ - 1];
    for (std::size_t i = n_ - 1; i-- > 0;) {
      d[i] = (rhs[i] - upper[i] * d[i + 1]) / diag[i];
    }
  }

  double kirchhoff_coefficient(double kin) const { return 1.0 + 2.0 * b_ * kin; }

 private:
  std::size_t n_;
  double a_;
  double b_;
  std::vector<double> w_, kappa_, s_;
};

bool normalize_in_place(const FrameFunctional& f, std::vector<double>& v) {
  const double m = f.parts(v).mass;
  if (!(m > 0.0) || !std::isfinite(m)) return false;
  const double s = 1.0 / std::sqrt(m);
  for (double& x : v) x *= s;
  return true;
}

}  // namespace

std::string to_string(FrameKind kind) { return kind == FrameKind::physical ? "physical" : "blowup"; }

FrameKind frame_kind_from_string(const std::string& name) {
  if (name == "physical") return FrameKind::physical;
  if (name == "blowup") return FrameKind::blowup;
  throw DomainError("unknown frame '" + name + "' (expected physical or blowup)");
}

double blowup_scale(const ModelParams& params, double a_star) {
  params.validate();
  if (!(params.b > 0.0)) throw DomainError("blow-up frame needs b > 0");
  if (params.a > a_star) return std::sqrt(params.b);
  return std::pow(params.b, 1.0 / (4.0 - params.p));
}

void FlowOptions::validate() const {
  if (!(step > 0.0)) throw DomainError("flow.step must be positive");
  if (max_iters <= 0) throw DomainError("flow.max_iters must be positive");
  if (!(energy_tol > 0.0)) throw DomainError("flow.energy_tol must be positive");
  if (stall_window <= 0) throw DomainError("flow.stall_window must be positive");
  if (!(residual_tol > 0.0)) throw DomainError("flow.residual_tol must be positive");
  if (!(backtracking > 0.0 && backtracking < 1.0)) throw DomainError("flow.backtracking must lie in (0, 1)");
  if (max_halvings <= 0) throw DomainError("flow.max_halvings must be positive");
  if (!(growth >= 1.0)) throw DomainError("flow.growth must be at least 1");
  if (!(max_step >= step)) throw DomainError("flow.max_step must be at least flow.step");
  if (!(frame.eps > 0.0) || !std::isfinite(frame.eps)) throw DomainError("flow.frame eps must be positive");
  if (frame.kind == FrameKind::physical && frame.eps != 1.0) {
    throw DomainError("physical frame has eps = 1");
  }
  if (!(truncation_tol > 0.0)) throw DomainError("flow.truncation_tol must be positive");
}

RadialFunction el_gradient(const RadialFunction& u, const ModelParams& params) {
  params.validate();
  const FrameFunctional f(u.grid(), params, 1.0);
  std::vector<double> g;
  f.gradient(u.values(), f.parts(u.values()).kinetic, g);
  return u.with_values(std::move(g));
}

Stationarity el_residual(const RadialFunction& u, const ModelParams& params) {
  params.validate();
  const FrameFunctional f(u.grid(), params, 1.0);
  std::vector<double> g;
  f.gradient(u.values(), f.parts(u.values()).kinetic, g);
  return f.stationarity(u.values(), g);
}

Stationarity el_residual(const MinimizeResult& res, const ModelParams& params) {
  params.validate();
  const FrameFunctional f(res.frame_profile.grid(), params, res.frame_used.eps);
  const auto v = res.frame_profile.values();
  std::vector<double> g;
  f.gradient(v, f.parts(v).kinetic, g);
  return f.stationarity(v, g);
}

bool monotone_check(const RadialFunction& u, double tol) {
  const auto v = u.values();
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (v[i + 1] > v[i] + tol) return false;
  }
  return true;
}

MinimizeResult minimize(const ModelParams& params, const RadialFunction& init, const FlowOptions& opts,
                        std::optional<double> a_star) {
  params.validate();
  opts.validate();
  if (params.b == 0.0) {
    if (!a_star) throw DomainError("minimize with b = 0 needs a* to rule out a >= a*");
    if (params.a >= *a_star) throw InfimumNotAttained("infimum not attained: b = 0 with a >= a*");
  }
  for (double x : init.values()) {
    if (x < 0.0) throw DomainError("minimize: init must be nonnegative");
  }
  if (init.max_abs() == 0.0) throw DomainError("minimize: init is identically zero and cannot be normalized");

  const double eps = opts.frame.eps;
  const FrameFunctional f(init.grid(), params, eps);
  const std::size_t n = f.size();

  std::vector<double> v(init.values().begin(), init.values().end());
  normalize_in_place(f, v);
  Parts parts = f.parts(v);
  double e = f.value(parts);

  MinimizeResult out{init, init, {}, 0.0, 0.0, 0, false, opts.frame, false, e, {}};
  if (opts.record_trace) out.energy_trace.push_back(e);

  std::vector<double> g, r(n), d, trial(n);
  double alpha = opts.step;
  int stalled = 0;
  Stationarity st;
  int it = 0;
  for (;; ++it) {
    f.gradient(v, parts.kinetic, g);
    st = f.stationarity(v, g);
    if (st.residual <= opts.residual_tol) {
      out.converged = true;
      break;
    }
    if (it >= opts.max_iters || stalled >= opts.stall_window) break;

    for (std::size_t i = 0; i < n; ++i) r[i] = g[i] - st.mu * v[i];
    const double sigma = std::max(std::abs(st.mu), 1e-3);
    f.precondition(f.kirchhoff_coefficient(parts.kinetic), sigma, r, d);

    bool accepted = false;
    Parts trial_parts;
    double trial_e = e;
    double change = 0.0;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = std::max(v[i] - alpha * d[i], 0.0);
      if (normalize_in_place(f, trial)) {
        trial_parts = f.parts(trial);
        trial_e = f.value(trial_parts);
        change = f.delta(trial, v, trial_parts, parts);
        // Residual near the origin carries almost no energy; once the change
        // is at rounding level the step is judged by the energy alone.
        if (change <= kRoundoff * std::abs(e)) {
          accepted = true;
          break;
        }
      }
      alpha *= opts.backtracking;
    }
    if (!accepted) break;

    stalled = -change <= opts.energy_tol * std::abs(trial_e) ? stalled + 1 : 0;
    v.swap(trial);
    parts = trial_parts;
    e = trial_e;
    alpha = std::min(alpha * opts.growth, opts.max_step);
    if (opts.record_trace) out.energy_trace.push_back(e);
  }

  out.iterations = it;
  out.mu = st.mu;
  out.residual = st.residual;
  out.frame_profile = init.with_values(v);
  out.domain_too_small = !out.frame_profile.boundary_ok(opts.truncation_tol);
  if (eps == 1.0) {
    out.profile = out.frame_profile;
  } else {
    const double inv = 1.0 / eps;
    for (double& x : v) x *= inv;
    out.profile = RadialFunction(init.grid().scaled(eps), std::move(v));
  }
  out.breakdown = energy(out.profile, params);
  return out;
}

}  // namespace kgp
