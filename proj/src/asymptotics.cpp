#include "kgp/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <boost/math/tools/minima.hpp>

#include "kgp/error.hpp"

namespace kgp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kGammaMin = 0.05;
constexpr double kGammaMax = 3.0;
constexpr int kGammaScan = 60;

struct LinearFit {
  double level = 0.0;
  double coefficient = 0.0;
  double ssr = std::numeric_limits<double>::infinity();
  bool ok = false;
};

// Least squares y ~ L + c b^gamma for fixed gamma.
LinearFit fit_linear(std::span<const double> b, std::span<const double> y, double gamma) {
  const std::size_t n = b.size();
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::pow(b[i], gamma);
  const double xm = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - xm) * (x[i] - xm);
    sxy += (x[i] - xm) * (y[i] - ym);
  }
  LinearFit f;
  if (!(sxx > 1e-300)) return f;
  f.coefficient = sxy / sxx;
  f.level = ym - f.coefficient * xm;
  f.ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.level - f.coefficient * x[i];
    f.ssr += r * r;
  }
  f.ok = std::isfinite(f.level) && std::isfinite(f.ssr);
  return f;
}

}  // namespace

std::string to_string(Regime r) { return r == Regime::critical ? "critical" : "supercritical"; }

Regime regime_from_string(const std::string& name) {
  if (name == "critical") return Regime::critical;
  if (name == "supercritical") return Regime::supercritical;
  throw DomainError("unknown regime '" + name + "' (expected critical or supercritical)");
}

void SweepSpec::validate() const {
  if (!(p > 0.0 && p < 2.0)) throw DomainError("sweep p must lie in (0, 2)");
  if (regime == Regime::critical && a_ratio != 1.0) throw DomainError("critical sweep needs a/a* = 1");
  if (regime == Regime::supercritical && !(a_ratio > 1.0)) throw DomainError("supercritical sweep needs a/a* > 1");
  if (b_list.empty()) throw DomainError("sweep b_list is empty");
  for (std::size_t i = 0; i < b_list.size(); ++i) {
    if (!(b_list[i] > 0.0) || !std::isfinite(b_list[i])) throw DomainError("sweep b values must be positive");
    if (i > 0 && !(b_list[i] < b_list[i - 1])) throw DomainError("sweep b_list must be strictly decreasing");
  }
  for (const auto& o : overrides) {
    if (o.index >= b_list.size()) throw DomainError("sweep override index out of range");
    if (o.max_iters <= 0) throw DomainError("sweep override max_iters must be positive");
  }
  flow.validate();
}

std::vector<double> geometric_b_list(double from, double to, std::size_t count) {
  if (!(from > 0.0) || !(to > 0.0)) throw DomainError("geometric b list needs positive endpoints");
  if (count < 2) throw DomainError("geometric b list needs at least two points");
  std::vector<double> out(count);
  const double lf = std::log(from), lt = std::log(to);
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = std::exp(lf + (lt - lf) * static_cast<double>(k) / static_cast<double>(count - 1));
  }
  out.front() = from;
  out.back() = to;
  return out;
}

std::vector<double> default_b_list(Regime regime) {
  return geometric_b_list(1e-1, regime == Regime::critical ? 1e-4 : 1e-5, 12);
}

ProfileConvergence profile_convergence(const RadialFunction& w, const GroundStateData& gs, double p) {
  const double beta = beta_limit(p, gs.moment(p));
  const RadialFunction target = rescale_profile(gs.q0, beta);
  return {std::sqrt(kinetic(w)), h1_distance(w, target)};
}

std::vector<SweepRecord> run_sweep(const GroundStateData& gs, const SweepSpec& spec) {
  spec.validate();
  const double p = spec.p;
  const double m_p = gs.moment(p);
  const bool critical = spec.regime == Regime::critical;

  // Limit shape in the blow-up frame: beta Q0(beta x).
  const double beta0 = critical ? beta_limit(p, m_p) : std::sqrt(0.5 * (spec.a_ratio - 1.0));
  const RadialFunction shape = normalized(rescale_profile(gs.q0, beta0));
  const RadialFunction target = critical ? rescale_profile(gs.q0, beta0) : shape;

  std::vector<SweepRecord> out;
  out.reserve(spec.b_list.size());
  RadialFunction init = shape;
  for (std::size_t k = 0; k < spec.b_list.size(); ++k) {
    const double b = spec.b_list[k];
    const ModelParams params{spec.a_ratio * gs.a_star, b, p, true};
    FlowOptions flow = spec.flow;
    flow.frame = Frame::blowup(blowup_scale(params, gs.a_star));
    for (const auto& o : spec.overrides) {
      if (o.index == k) flow.max_iters = o.max_iters;
    }
    const MinimizeResult res = minimize(params, spec.warm_start ? init : shape, flow, gs.a_star);

    SweepRecord rec{.frame_profile = res.frame_profile};
    rec.b = b;
    rec.eps = flow.frame.eps;
    rec.energy = res.breakdown;
    rec.scaled_energy = (critical ? std::pow(b, p / (4.0 - p)) : b) * res.breakdown.total;
    rec.beta_est = std::sqrt(kinetic(res.frame_profile));
    rec.profile_h1 = critical ? h1_distance(res.frame_profile, target) : kNaN;
    rec.kinetic_scaled = std::pow(b, 2.0 / (4.0 - p)) * res.breakdown.kinetic;
    rec.potential_scaled = -std::pow(b, p / (4.0 - p)) * res.breakdown.potential;
    rec.upper_bound = upper_bound(params, gs.a_star, m_p);
    rec.mu = res.mu;
    rec.residual = res.residual;
    rec.iterations = res.iterations;
    rec.converged = res.converged;
    rec.monotone = monotone_check(res.frame_profile, 1e-8 * res.frame_profile[0]);
    rec.domain_too_small = res.domain_too_small;
    out.push_back(std::move(rec));
    init = res.frame_profile;
  }
  return out;
}

LimitFit fit_power_limit(std::span<const double> b_in, std::span<const double> y_in) {
  if (b_in.size() != y_in.size()) throw DomainError("fit_power_limit: b and y lengths differ");
  const std::size_t n = b_in.size();
  if (n < 3) throw DomainError("fit_power_limit needs at least three samples");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return b_in[i] != b_in[j] ? b_in[i] < b_in[j] : y_in[i] < y_in[j];
  });
  std::vector<double> b(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    b[i] = b_in[order[i]];
    y[i] = y_in[order[i]];
    if (!(b[i] > 0.0) || !std::isfinite(y[i])) throw DomainError("fit_power_limit needs b > 0 and finite y");
  }

  LimitFit fit;
  fit.samples_used = static_cast<int>(n);
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double spread = 0.0;
  for (double v : y) spread = std::max(spread, std::abs(v - mean));
  if (spread <= 1e-14 * std::max(1.0, std::abs(mean))) {
    fit.estimate = mean;
    fit.rate = kNaN;
    fit.residual = 0.0;
    return fit;
  }

  auto ssr = [&](double g) { return fit_linear(b, y, g).ssr; };
  int best = 0;
  double best_ssr = std::numeric_limits<double>::infinity();
  const double step = (kGammaMax - kGammaMin) / kGammaScan;
  for (int k = 0; k <= kGammaScan; ++k) {
    const double s = ssr(kGammaMin + k * step);
    if (s < best_ssr) {
      best_ssr = s;
      best = k;
    }
  }
  const double lo = kGammaMin + std::max(best - 1, 0) * step;
  const double hi = kGammaMin + std::min(best + 1, kGammaScan) * step;
  const auto [gamma, ssr_min] = boost::math::tools::brent_find_minima(ssr, lo, hi, 52);
  const LinearFit lf = fit_linear(b, y, gamma);

  const bool at_edge = gamma <= kGammaMin + 1e-6 || gamma >= kGammaMax - 1e-6;
  if (!lf.ok || at_edge) {
    fit.estimate = y.front();
    fit.rate = kNaN;
    fit.coefficient = kNaN;
    fit.residual = lf.ok ? std::sqrt(lf.ssr / n) : kNaN;
    return fit;
  }
  fit.estimate = lf.level;
  fit.rate = gamma;
  fit.coefficient = lf.coefficient;
  fit.residual = std::sqrt(ssr_min / n);
  return fit;
}

double column_value(const SweepRecord& rec, const std::string& column) {
  if (column == "scaled_energy") return rec.scaled_energy;
  if (column == "beta_est") return rec.beta_est;
  if (column == "profile_h1") return rec.profile_h1;
  if (column == "kinetic_scaled") return rec.kinetic_scaled;
  if (column == "potential_scaled") return rec.potential_scaled;
  throw DomainError("unknown sweep column '" + column + "'");
}

LimitFit estimate_limit(std::span<const SweepRecord> records, const std::string& column, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw DomainError("tail_fraction must lie in (0, 1]");
  std::vector<std::pair<double, double>> samples;
  for (const auto& rec : records) {
    const double v = column_value(rec, column);
    if (!rec.converged || !std::isfinite(v)) continue;
    samples.emplace_back(rec.b, v);
  }
  if (samples.size() < 3) throw DomainError("estimate_limit needs at least three converged records");
  std::sort(samples.begin(), samples.end());
  const auto keep = std::max<std::size_t>(
      3, static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(samples.size()))));
  samples.resize(std::min(keep, samples.size()));
  std::vector<double> b, y;
  for (const auto& [bb, yy] : samples) {
    b.push_back(bb);
    y.push_back(yy);
  }
  return fit_power_limit(b, y);
}

SweepInvariants check_sweep_invariants(std::span<const SweepRecord> records, double slack) {
  std::vector<const SweepRecord*> ok;
  for (const auto& r : records) {
    if (r.converged) ok.push_back(&r);
  }
  std::sort(ok.begin(), ok.end(), [](const SweepRecord* x, const SweepRecord* y) { return x->b < y->b; });

  SweepInvariants inv;
  inv.worst_upper = inv.worst_monotone = inv.worst_concave = -std::numeric_limits<double>::infinity();
  for (const SweepRecord* r : ok) {
    const double e = r->energy.total;
    if (!(e < 0.0)) inv.negative = false;
    inv.worst_upper = std::max(inv.worst_upper, (e - r->upper_bound) / std::abs(e));
  }
  for (std::size_t i = 0; i + 1 < ok.size(); ++i) {
    const double lo = ok[i]->energy.total, hi = ok[i + 1]->energy.total;
    inv.worst_monotone = std::max(inv.worst_monotone, (lo - hi) / std::abs(hi));
  }
  for (std::size_t i = 0; i + 2 < ok.size(); ++i) {
    const double b0 = ok[i]->b, b1 = ok[i + 1]->b, b2 = ok[i + 2]->b;
    const double t = (b1 - b0) / (b2 - b0);
    const double chord = (1.0 - t) * ok[i]->energy.total + t * ok[i + 2]->energy.total;
    const double e1 = ok[i + 1]->energy.total;
    inv.worst_concave = std::max(inv.worst_concave, (chord - e1) / std::abs(e1));
  }
  inv.below_upper_bound = !(inv.worst_upper > slack);
  inv.nondecreasing = !(inv.worst_monotone > slack);
  inv.concave = !(inv.worst_concave > slack);
  return inv;
}

}  // namespace kgp
