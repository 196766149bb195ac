#include "kgp/radial.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "kgp/error.hpp"

namespace kgp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// 3-point Gauss-Legendre on [-1, 1]; exact for the degree-4 integrand L_k(r) * r.
constexpr std::array<double, 3> kGaussX{-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr std::array<double, 3> kGaussW{5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

std::vector<double> plain_weights_for(std::span<const double> r) {
  const std::size_t n = r.size();
  std::vector<double> w(n, 0.0);
  for (std::size_t c = 0; c + 1 < n; ++c) {
    // Cubic through four neighbouring nodes. At the origin the stencil uses the
    // mirror node -r_1, whose value is u(r_1) for an even extension.
    std::array<std::size_t, 4> idx{};
    std::array<double, 4> xs{};
    if (c == 0) {
      idx = {1, 0, 1, 2};
      xs = {-r[1], r[0], r[1], r[2]};
    } else {
      const std::size_t first = (c + 2 < n) ? c - 1 : c - 2;
      for (std::size_t k = 0; k < 4; ++k) {
        idx[k] = first + k;
        xs[k] = r[first + k];
      }
    }
    const double a = r[c];
    const double b = r[c + 1];
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t g = 0; g < kGaussX.size(); ++g) {
      const double x = mid + half * kGaussX[g];
      const double gw = half * kGaussW[g] * x;
      for (std::size_t k = 0; k < 4; ++k) {
        double basis = 1.0;
        for (std::size_t m = 0; m < 4; ++m) {
          if (m != k) basis *= (x - xs[m]) / (xs[k] - xs[m]);
        }
        w[idx[k]] += gw * basis;
      }
    }
  }
  return w;
}

// int_0^1 (1 - t) (1 + eta t)^q dt without cancellation for small eta.
double left_moment(double eta, double q) {
  const double s = q + 2.0;
  if (eta < 0.25) {
    double term = s * (s - 1.0) / 2.0;  // C(s, k) eta^{k-2} at k = 2
    double sum = 0.0;
    for (int k = 2; k < 60; ++k) {
      sum += term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
      term *= (s - k) / (k + 1.0) * eta;
    }
    return sum / ((q + 1.0) * (q + 2.0));
  }
  const double num = std::expm1(s * std::log1p(eta)) - s * eta;
  return num / ((q + 1.0) * (q + 2.0) * eta * eta);
}

// int_0^1 (1 + eta t)^q dt
double full_moment(double eta, double q) {
  return std::expm1((q + 1.0) * std::log1p(eta)) / ((q + 1.0) * eta);
}

}  // namespace

std::string to_string(Grading g) {
  return g == Grading::uniform ? "uniform" : "sinh";
}

Grading grading_from_string(const std::string& name) {
  if (name == "uniform") return Grading::uniform;
  if (name == "sinh") return Grading::sinh;
  throw DomainError("unknown grading '" + name + "'");
}

RadialGrid::RadialGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.size() < 16) throw DomainError("radial grid needs at least 16 nodes");
  if (nodes_.front() != 0.0) throw DomainError("radial grid must start at r = 0");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!std::isfinite(nodes_[i]) || !(nodes_[i] > nodes_[i - 1])) {
      throw DomainError("radial grid nodes must be finite and strictly increasing");
    }
  }
  plain_ = plain_weights_for(nodes_);
  stiffness_.resize(nodes_.size() - 1);
  for (std::size_t c = 0; c + 1 < nodes_.size(); ++c) {
    const double h = nodes_[c + 1] - nodes_[c];
    stiffness_[c] = 0.5 * (nodes_[c] + nodes_[c + 1]) / h;
  }
}

GridPtr RadialGrid::make(const GridSpec& spec) {
  if (spec.n < 16) throw DomainError("grid.n must be at least 16");
  if (!(spec.radius > 0.0) || !std::isfinite(spec.radius)) throw DomainError("grid.r must be positive");
  std::vector<double> r(spec.n);
  const double last = static_cast<double>(spec.n - 1);
  if (spec.grading == Grading::uniform) {
    for (std::size_t i = 0; i < spec.n; ++i) r[i] = spec.radius * (static_cast<double>(i) / last);
  } else {
    if (!(spec.core > 0.0)) throw DomainError("grid.core must be positive");
    const double sigma = std::asinh(spec.radius / spec.core);
    for (std::size_t i = 0; i < spec.n; ++i) {
      r[i] = spec.core * std::sinh(sigma * static_cast<double>(i) / last);
    }
  }
  r.front() = 0.0;
  r.back() = spec.radius;
  return std::make_shared<const RadialGrid>(std::move(r));
}

GridPtr RadialGrid::from_nodes(std::vector<double> nodes) {
  return std::make_shared<const RadialGrid>(std::move(nodes));
}

GridPtr RadialGrid::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw DomainError("grid scale factor must be positive");
  std::vector<double> r(nodes_);
  for (double& x : r) x *= factor;
  return from_nodes(std::move(r));
}

std::vector<double> RadialGrid::singular_weights(double p) const {
  if (!(p > 0.0 && p < 2.0)) throw DomainError("singular weight exponent p must lie in (0, 2)");
  const double q = 1.0 - p;
  std::vector<double> s(nodes_.size(), 0.0);
  {
    const double h = nodes_[1];
    const double hq1 = std::pow(h, q + 1.0);
    s[0] += hq1 / ((q + 1.0) * (q + 2.0));
    s[1] += hq1 / (q + 2.0);
  }
  for (std::size_t c = 1; c + 1 < nodes_.size(); ++c) {
    const double a = nodes_[c];
    const double h = nodes_[c + 1] - a;
    const double eta = h / a;
    const double scale = h * std::pow(a, q);
    const double left = left_moment(eta, q);
    s[c] += scale * left;
    s[c + 1] += scale * (full_moment(eta, q) - left);
  }
  return s;
}

bool RadialGrid::same_as(const RadialGrid& other) const noexcept {
  return this == &other || nodes_ == other.nodes_;
}

RadialFunction::RadialFunction(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw DomainError("radial function needs a grid");
  if (values_.size() != grid_->size()) throw DomainError("radial function length does not match grid");
  for (double v : values_) {
    if (!std::isfinite(v)) throw DomainError("radial function values must be finite");
  }
}

RadialFunction RadialFunction::zeros(GridPtr grid) {
  const std::size_t n = grid->size();
  return {std::move(grid), std::vector<double>(n, 0.0)};
}

RadialFunction RadialFunction::sample(GridPtr grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid->node(i));
  return {std::move(grid), std::move(v)};
}

double RadialFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool RadialFunction::boundary_ok(double tol) const {
  return std::abs(values_.back()) <= tol * max_abs();
}

RadialFunction RadialFunction::scaled_by(double c) const {
  std::vector<double> v(values_);
  for (double& x : v) x *= c;
  return {grid_, std::move(v)};
}

RadialFunction RadialFunction::with_values(std::vector<double> values) const {
  return {grid_, std::move(values)};
}

void require_same_grid(const RadialFunction& u, const RadialFunction& v) {
  if (!u.grid().same_as(v.grid())) throw DomainError("radial functions live on different grids");
}

RadialFunction operator+(const RadialFunction& u, const RadialFunction& v) {
  require_same_grid(u, v);
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = u[i] + v[i];
  return u.with_values(std::move(out));
}

RadialFunction operator-(const RadialFunction& u, const RadialFunction& v) {
  require_same_grid(u, v);
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = u[i] - v[i];
  return u.with_values(std::move(out));
}

double mass(const RadialFunction& u) {
  const auto w = u.grid().plain_weights();
  const auto v = u.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) sum += w[i] * v[i] * v[i];
  return kTwoPi * sum;
}

double kinetic(const RadialFunction& u) {
  if (u.size() < 3) throw DomainError("kinetic energy needs at least 3 nodes");
  const auto k = u.grid().stiffness();
  const auto v = u.values();
  double sum = 0.0;
  for (std::size_t c = 0; c < k.size(); ++c) {
    const double d = v[c + 1] - v[c];
    sum += k[c] * d * d;
  }
  return kTwoPi * sum;
}

double quartic(const RadialFunction& u) {
  const auto w = u.grid().plain_weights();
  const auto v = u.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double v2 = v[i] * v[i];
    sum += w[i] * v2 * v2;
  }
  return kTwoPi * sum;
}

double singular_moment(const RadialFunction& u, double p) {
  const auto s = u.grid().singular_weights(p);
  const auto v = u.values();
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) sum += s[i] * v[i] * v[i];
  return kTwoPi * sum;
}

double inner(const RadialFunction& u, const RadialFunction& v) {
  require_same_grid(u, v);
  const auto w = u.grid().plain_weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += w[i] * u[i] * v[i];
  return kTwoPi * sum;
}

RadialFunction normalized(const RadialFunction& u) {
  const double m = mass(u);
  if (!(m > 0.0)) throw DomainError("cannot normalize a zero profile");
  return u.scaled_by(1.0 / std::sqrt(m));
}

double h1_distance(const RadialFunction& u, const RadialFunction& v) {
  const RadialFunction d = u - v;
  return std::sqrt(std::max(0.0, mass(d) + kinetic(d)));
}

MonotoneCubic::MonotoneCubic(std::span<const double> x, std::span<const double> y)
    : x_(x.begin(), x.end()), y_(y.begin(), y.end()), d_(x.size(), 0.0) {
  const std::size_t n = x_.size();
  if (n < 3 || y_.size() != n) throw DomainError("monotone cubic needs matching arrays of length >= 3");
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    delta[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0.0) continue;
    const double w1 = 2.0 * h[i] + h[i - 1];
    const double w2 = h[i] + 2.0 * h[i - 1];
    d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
  }
  // d_[0] stays 0: even symmetry at the origin.
  const std::size_t m = n - 1;
  const double h0 = h[m - 1], h1 = h[m - 2];
  const double s0 = delta[m - 1], s1 = delta[m - 2];
  double d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
  if (d * s0 <= 0.0) {
    d = 0.0;
  } else if (s0 * s1 <= 0.0 && std::abs(d) > 3.0 * std::abs(s0)) {
    d = 3.0 * s0;
  }
  d_[m] = d;
}

double MonotoneCubic::operator()(double t, double outside) const {
  if (t < x_.front() || t > x_.back()) return outside;
  auto it = std::upper_bound(x_.begin(), x_.end(), t);
  std::size_t i = (it == x_.begin()) ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  if (i + 1 >= x_.size()) return y_.back();
  const double h = x_[i + 1] - x_[i];
  const double s = (t - x_[i]) / h;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return h00 * y_[i] + h * h10 * d_[i] + h01 * y_[i + 1] + h * h11 * d_[i + 1];
}

RadialFunction rescale_profile(const RadialFunction& u, double eps, double support_tol) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("rescale factor must be positive");
  if (eps == 1.0) return u;
  const MonotoneCubic interp(u.grid().nodes(), u.values());
  std::vector<double> w(u.size());
  const auto r = u.grid().nodes();
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = eps * interp(eps * r[i], 0.0);
  RadialFunction out = u.with_values(std::move(w));
  if (eps < 1.0 && !out.boundary_ok(support_tol)) {
    throw DomainError("rescaled support exceeds grid radius");
  }
  return out;
}

RadialFunction random_profile(const GridPtr& grid, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 4);
  std::uniform_real_distribution<double> amp(-1.0, 1.0), center(0.0, 8.0), width(0.3, 3.0);
  const int k = count(rng);
  std::vector<double> c(k), m(k), s(k);
  for (int j = 0; j < k; ++j) {
    c[j] = amp(rng);
    m[j] = center(rng);
    s[j] = width(rng);
  }
  // Keep away from a vanishing profile.
  c[0] = c[0] < 0.0 ? c[0] - 0.1 : c[0] + 0.1;
  return normalized(RadialFunction::sample(grid, [&](double r) {
    double v = 0.0;
    for (int j = 0; j < k; ++j) {
      const double z = (r - m[j]) / s[j];
      v += c[j] * std::exp(-0.5 * z * z);
    }
    return v;
  }));
}

}  // namespace kgp
