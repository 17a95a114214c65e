#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace conic {

// Gauss-Legendre rule on (-1, 1).
void gauss_legendre(int count, std::vector<double>& x, std::vector<double>& w);

// Gauss rule on (-1, 1) for the weight (1 - x^2)^alpha, alpha > -1.
// Built from the symmetric Jacobi recurrence via a tridiagonal
// eigenvalue problem.
void gauss_gegenbauer(int count, double alpha, std::vector<double>& x,
                      std::vector<double>& w);

// Gauss-Legendre rule mapped to the interval (a, b).
void gauss_legendre_ab(int count, double a, double b, std::vector<double>& x,
                       std::vector<double>& w);

// Nodes and weights for integrals over the radial half-line (0, inf),
// produced by mapping a Gauss-Legendre rule through r = t/(1-t), or by
// chaining finite Gauss-Legendre panels.  Weights carry the Jacobian
// of the map only; power-law factors such as r^{n-1} belong to the
// integrand.
struct RadialRule {
  std::vector<double> r;
  std::vector<double> w;
  // For the compactified rule: the Gauss-Legendre nodes in t = r/(1+r),
  // kept for collocation derivatives.  Empty for panel rules.
  std::vector<double> t;
  // For panel rules: start index of each panel (plus a final sentinel
  // equal to count()).  Empty for the compactified rule.
  std::vector<int> panel_offsets;
  int count() const { return static_cast<int>(r.size()); }
};

RadialRule radial_rule(int count);

RadialRule radial_rule_panels(std::span<const double> breakpoints,
                              int per_panel);

// Integrates f(r) r^m dr over (0, inf) or the panel range.
template <class F>
double integrate_radial(const RadialRule& rule, int m, F&& f) {
  double acc = 0.0;
  for (int i = 0; i < rule.count(); ++i)
    acc += rule.w[i] * std::pow(rule.r[i], m) * f(rule.r[i]);
  return acc;
}

// Tensor rule for zonal integrands on the model cone: radial nodes in
// r paired with angular nodes in x = cos(theta).  Angular weights
// integrate against (1 - x^2)^{(n-3)/2} dx, i.e. sin^{n-2}(theta)
// d(theta); the volume of the rotation orbit Vol(S^{n-2}) is not
// included and multiplies zonal link integrals separately.
struct PolarRule {
  int n = 0;
  RadialRule radial;
  std::vector<double> x;
  std::vector<double> wx;
  int angular_count() const { return static_cast<int>(x.size()); }
  int node_count() const { return radial.count() * angular_count(); }
};

PolarRule polar_rule(int n, int radial_count, int angular_count);

PolarRule polar_rule_panels(int n, std::span<const double> breakpoints,
                            int per_panel, int angular_count);

// Integrates f(r, x) against r^{n-1} dr (1-x^2)^{(n-3)/2} dx.
template <class F>
double integrate_polar(const PolarRule& rule, F&& f) {
  double acc = 0.0;
  const int nr = rule.radial.count();
  const int na = rule.angular_count();
  for (int i = 0; i < nr; ++i) {
    const double r = rule.radial.r[i];
    double row = 0.0;
    for (int j = 0; j < na; ++j) row += rule.wx[j] * f(r, rule.x[j]);
    acc += rule.radial.w[i] * std::pow(r, rule.n - 1) * row;
  }
  return acc;
}

// Composite Simpson weights for count nodes with uniform spacing h
// (count >= 3; an even count gets a trapezoid closing panel).
std::vector<double> simpson_weights(int count, double h);

// Barycentric Lagrange differentiation matrix for distinct nodes;
// row-major count x count.
std::vector<double> differentiation_matrix(std::span<const double> nodes);

// Natural cubic spline through (x_i, y_i), x strictly increasing.
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y);
  double value(double x) const;
  double derivative(double x) const;

 private:
  std::vector<double> x_, y_, m_;
};

// Least-squares expansion of quotient values in epsilon, after
// subtracting the eps -> 0 baseline:
//   plain:  value - base = A eps^2
//   log:    value - base = A eps^2 log(1/eps) + B eps^2
//   cubic:  value - base = A eps^2 + B eps^3
enum class FitModel { plain, log, cubic };

struct ExpansionFit {
  FitModel model = FitModel::plain;
  std::vector<double> coefficients;
  double residual = 0.0;
  std::vector<double> eps;
  double leading() const { return coefficients.empty() ? 0.0 : coefficients[0]; }
};

// Throws fit_error when fewer than 3 samples (or fewer than the
// basis size) are given, when eps values repeat or leave (0, 1), or
// when the normal equations are numerically singular.
ExpansionFit fit_expansion(std::span<const std::pair<double, double>> samples,
                           double base, FitModel model);

// General least squares: fits y ~ sum_k c_k basis_k(x) and returns
// the coefficients.  Throws fit_error on rank deficiency.
std::vector<double> least_squares_fit(
    std::span<const double> x, std::span<const double> y,
    std::span<const std::function<double(double)>> basis);

}  // namespace conic
