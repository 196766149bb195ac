#pragma once

// Radial discretization of R^2. Every integral over the plane is 2*pi times a
// one-dimensional integral in r; the 2*pi is folded into the quadrature here so
// callers never see it.

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace kgp {

enum class Grading { uniform, sinh };

struct GridSpec {
  std::size_t n = 4096;
  double radius = 30.0;
  Grading grading = Grading::sinh;
  /// Length scale below which sinh grading is roughly uniform.
  double core = 0.5;

  bool operator==(const GridSpec&) const = default;
};

std::string to_string(Grading g);
Grading grading_from_string(const std::string& name);

class RadialGrid;
using GridPtr = std::shared_ptr<const RadialGrid>;

/// Nodes 0 = r_0 < ... < r_{N-1} = R with three quadrature rules:
///  - plain:    sum_i w_i f(r_i)           ~ int_0^R f(r) r dr   (fourth order, diagonal)
///  - singular: sum_i s_i(p) f(r_i)        ~ int_0^R f(r) r^{1-p} dr (exact on P1 interpolants)
///  - stiffness: sum_c k_c (f_{c+1}-f_c)^2 = int_0^R |(I f)'|^2 r dr  (P1 interpolant, exact)
/// Immutable after construction.
class RadialGrid {
 public:
  explicit RadialGrid(std::vector<double> nodes);

  static GridPtr make(const GridSpec& spec);
  static GridPtr from_nodes(std::vector<double> nodes);

  /// Grid with every node multiplied by `factor`; weights recomputed from the new nodes.
  GridPtr scaled(double factor) const;

  std::size_t size() const noexcept { return nodes_.size(); }
  double radius() const noexcept { return nodes_.back(); }
  std::span<const double> nodes() const noexcept { return nodes_; }
  double node(std::size_t i) const { return nodes_[i]; }
  std::span<const double> plain_weights() const noexcept { return plain_; }
  /// Cell coefficients (r_c + r_{c+1}) / (2 h_c), one per cell.
  std::span<const double> stiffness() const noexcept { return stiffness_; }
  std::vector<double> singular_weights(double p) const;

  bool same_as(const RadialGrid& other) const noexcept;

 private:
  std::vector<double> nodes_;
  std::vector<double> plain_;
  std::vector<double> stiffness_;
};

/// Real radial profile sampled on a shared grid.
class RadialFunction {
 public:
  RadialFunction(GridPtr grid, std::vector<double> values);
  static RadialFunction zeros(GridPtr grid);
  static RadialFunction sample(GridPtr grid, const std::function<double(double)>& f);

  const GridPtr& grid_ptr() const noexcept { return grid_; }
  const RadialGrid& grid() const noexcept { return *grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double max_abs() const;

  /// |u(R)| <= tol * max|u|: the profile has decayed before the truncation radius.
  bool boundary_ok(double tol) const;

  RadialFunction scaled_by(double c) const;
  RadialFunction with_values(std::vector<double> values) const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

RadialFunction operator+(const RadialFunction& u, const RadialFunction& v);
RadialFunction operator-(const RadialFunction& u, const RadialFunction& v);

/// int |u|^2 dx
double mass(const RadialFunction& u);
/// int |grad u|^2 dx
double kinetic(const RadialFunction& u);
/// int |u|^4 dx
double quartic(const RadialFunction& u);
/// int |u|^2 / |x|^p dx, 0 < p < 2
double singular_moment(const RadialFunction& u, double p);
/// L^2 inner product int u v dx with the plain weights.
double inner(const RadialFunction& u, const RadialFunction& v);

RadialFunction normalized(const RadialFunction& u);

/// w(r) = eps * u(eps r) on the same grid, by monotone cubic interpolation.
/// Values requested beyond R are taken as zero; if eps < 1 and the stretched
/// profile is still above `support_tol * max|w|` at R, throws DomainError.
RadialFunction rescale_profile(const RadialFunction& u, double eps, double support_tol = 1e-6);

/// (mass(u-v) + kinetic(u-v))^{1/2}
double h1_distance(const RadialFunction& u, const RadialFunction& v);

/// Same grid object or identical nodes; throws DomainError otherwise.
void require_same_grid(const RadialFunction& u, const RadialFunction& v);

/// Normalized smooth profile: a sum of 1-4 signed Gaussian rings with centers
/// in [0, 8] and widths in [0.3, 3], so it has decayed well inside R >= 20.
RadialFunction random_profile(const GridPtr& grid, std::mt19937_64& rng);

/// Monotone piecewise-cubic (Fritsch-Carlson) interpolant with u'(0) = 0.
class MonotoneCubic {
 public:
  MonotoneCubic(std::span<const double> x, std::span<const double> y);
  /// Outside [x_0, x_{N-1}] returns `outside`.
  double operator()(double t, double outside = 0.0) const;

 private:
  std::vector<double> x_, y_, d_;
};

}  // namespace kgp
