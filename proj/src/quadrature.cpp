#include "conic/quadrature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

#include "conic/errors.hpp"

namespace conic {

namespace {

// Nodes and weights on (-1, 1) for the weight (1-x)^alpha (1+x)^alpha
// via the Golub-Welsch eigenvalue method on the symmetric Jacobi
// three-term recurrence.
void gauss_jacobi_symmetric(int count, double alpha, std::vector<double>& x,
                            std::vector<double>& w) {
  if (count < 1) throw std::invalid_argument("gauss rule: count must be >= 1");
  if (!(alpha > -1.0))
    throw std::invalid_argument("gauss rule: weight exponent must exceed -1");
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(count);
  Eigen::VectorXd sub(count > 1 ? count - 1 : 1);
  const double ab = 2.0 * alpha;  // a + b for equal exponents
  for (int k = 1; k < count; ++k) {
    const double num =
        4.0 * k * (k + alpha) * (k + alpha) * (k + ab);
    const double den = (2.0 * k + ab) * (2.0 * k + ab) * (2.0 * k + ab + 1.0) *
                       (2.0 * k + ab - 1.0);
    sub(k - 1) = std::sqrt(num / den);
  }
  // mu0 = int (1-x^2)^alpha dx = sqrt(pi) Gamma(alpha+1) / Gamma(alpha+3/2)
  const double mu0 = std::sqrt(M_PI) *
                     std::exp(std::lgamma(alpha + 1.0) - std::lgamma(alpha + 1.5));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub.head(std::max(count - 1, 0)));
  if (es.info() != Eigen::Success)
    throw resolution_error("gauss rule: tridiagonal eigensolve failed");
  x.resize(count);
  w.resize(count);
  for (int i = 0; i < count; ++i) {
    x[i] = es.eigenvalues()(i);
    const double v0 = es.eigenvectors()(0, i);
    w[i] = mu0 * v0 * v0;
  }
}

}  // namespace

void gauss_legendre(int count, std::vector<double>& x, std::vector<double>& w) {
  if (count < 1) throw std::invalid_argument("gauss rule: count must be >= 1");
  x.assign(count, 0.0);
  w.assign(count, 0.0);
  const int half = (count + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (count + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 64; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < count; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = count * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[count - 1 - i] = z;
    w[i] = w[count - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

void gauss_gegenbauer(int count, double alpha, std::vector<double>& x,
                      std::vector<double>& w) {
  gauss_jacobi_symmetric(count, alpha, x, w);
}

void gauss_legendre_ab(int count, double a, double b, std::vector<double>& x,
                       std::vector<double>& w) {
  gauss_legendre(count, x, w);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < count; ++i) {
    x[i] = mid + half * x[i];
    w[i] *= half;
  }
}

RadialRule radial_rule(int count) {
  std::vector<double> t, wt;
  gauss_legendre_ab(count, 0.0, 1.0, t, wt);
  RadialRule rule;
  rule.t = t;
  rule.r.resize(count);
  rule.w.resize(count);
  for (int i = 0; i < count; ++i) {
    const double omt = 1.0 - t[i];
    rule.r[i] = t[i] / omt;
    rule.w[i] = wt[i] / (omt * omt);
  }
  return rule;
}

RadialRule radial_rule_panels(std::span<const double> breakpoints,
                              int per_panel) {
  if (breakpoints.size() < 2)
    throw std::invalid_argument("radial_rule_panels: need at least 2 breakpoints");
  RadialRule rule;
  std::vector<double> base_x, base_w;
  gauss_legendre(per_panel, base_x, base_w);
  for (size_t p = 0; p + 1 < breakpoints.size(); ++p) {
    if (!(breakpoints[p + 1] > breakpoints[p]))
      throw std::invalid_argument(
          "radial_rule_panels: breakpoints must increase strictly");
    rule.panel_offsets.push_back(rule.count());
    const double mid = 0.5 * (breakpoints[p] + breakpoints[p + 1]);
    const double half = 0.5 * (breakpoints[p + 1] - breakpoints[p]);
    for (int i = 0; i < per_panel; ++i) {
      rule.r.push_back(mid + half * base_x[i]);
      rule.w.push_back(half * base_w[i]);
    }
  }
  rule.panel_offsets.push_back(rule.count());
  return rule;
}

PolarRule polar_rule(int n, int radial_count, int angular_count) {
  if (n < 4) throw dimension_error("polar_rule: n must be at least 4");
  PolarRule rule;
  rule.n = n;
  rule.radial = radial_rule(radial_count);
  gauss_gegenbauer(angular_count, 0.5 * (n - 3), rule.x, rule.wx);
  return rule;
}

PolarRule polar_rule_panels(int n, std::span<const double> breakpoints,
                            int per_panel, int angular_count) {
  if (n < 4) throw dimension_error("polar_rule_panels: n must be at least 4");
  PolarRule rule;
  rule.n = n;
  rule.radial = radial_rule_panels(breakpoints, per_panel);
  gauss_gegenbauer(angular_count, 0.5 * (n - 3), rule.x, rule.wx);
  return rule;
}

std::vector<double> simpson_weights(int count, double h) {
  if (count < 3 || h <= 0.0)
    throw std::invalid_argument("simpson_weights: need count >= 3, h > 0");
  std::vector<double> w(count, 0.0);
  int last = count - 1;
  // Uneven interval count: close the final interval with a trapezoid.
  const bool tail = (last % 2 != 0);
  const int simpson_last = tail ? last - 1 : last;
  for (int i = 0; i + 2 <= simpson_last; i += 2) {
    w[i] += h / 3.0;
    w[i + 1] += 4.0 * h / 3.0;
    w[i + 2] += h / 3.0;
  }
  if (tail) {
    w[last - 1] += 0.5 * h;
    w[last] += 0.5 * h;
  }
  return w;
}

std::vector<double> differentiation_matrix(std::span<const double> nodes) {
  const int m = static_cast<int>(nodes.size());
  if (m < 2) throw std::invalid_argument("differentiation_matrix: need >= 2 nodes");
  // Barycentric weights, normalized to avoid overflow.
  std::vector<double> logw(m, 0.0);
  std::vector<double> sign(m, 1.0);
  for (int i = 0; i < m; ++i) {
    double ls = 0.0, sg = 1.0;
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      const double d = nodes[i] - nodes[j];
      ls -= std::log(std::abs(d));
      if (d < 0) sg = -sg;
    }
    logw[i] = ls;
    sign[i] = sg;
  }
  const double lmax = *std::max_element(logw.begin(), logw.end());
  std::vector<double> wbar(m);
  for (int i = 0; i < m; ++i) wbar[i] = sign[i] * std::exp(logw[i] - lmax);

  std::vector<double> D(static_cast<size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    double rowsum = 0.0;
    for (int j = 0; j < m; ++j) {
      if (j == i) continue;
      const double v = (wbar[j] / wbar[i]) / (nodes[i] - nodes[j]);
      D[static_cast<size_t>(i) * m + j] = v;
      rowsum += v;
    }
    D[static_cast<size_t>(i) * m + i] = -rowsum;
  }
  return D;
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const int m = static_cast<int>(x_.size());
  if (m < 3 || y_.size() != x_.size())
    throw std::invalid_argument("CubicSpline: need matching arrays, >= 3 nodes");
  for (int i = 1; i < m; ++i)
    if (!(x_[i] > x_[i - 1]))
      throw std::invalid_argument("CubicSpline: nodes must increase strictly");
  // Natural spline: tridiagonal system for second derivatives.
  m_.assign(m, 0.0);
  std::vector<double> diag(m, 2.0), rhs(m, 0.0), sub(m, 0.0), sup(m, 0.0);
  for (int i = 1; i + 1 < m; ++i) {
    const double hl = x_[i] - x_[i - 1];
    const double hr = x_[i + 1] - x_[i];
    sub[i] = hl / (hl + hr);
    sup[i] = hr / (hl + hr);
    rhs[i] = 6.0 / (hl + hr) *
             ((y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl);
  }
  // Forward elimination (first and last rows are identity: m = 0).
  for (int i = 2; i + 1 < m; ++i) {
    const double f = sub[i] / diag[i - 1];
    diag[i] -= f * sup[i - 1];
    rhs[i] -= f * rhs[i - 1];
  }
  for (int i = m - 2; i >= 1; --i)
    m_[i] = (rhs[i] - sup[i] * m_[i + 1]) / diag[i];
}

double CubicSpline::value(double x) const {
  const int m = static_cast<int>(x_.size());
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  int i = static_cast<int>(it - x_.begin()) - 1;
  i = std::clamp(i, 0, m - 2);
  const double h = x_[i + 1] - x_[i];
  const double u = (x - x_[i]) / h;
  const double v = 1.0 - u;
  return v * y_[i] + u * y_[i + 1] +
         h * h / 6.0 *
             ((v * v * v - v) * m_[i] + (u * u * u - u) * m_[i + 1]);
}

double CubicSpline::derivative(double x) const {
  const int m = static_cast<int>(x_.size());
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  int i = static_cast<int>(it - x_.begin()) - 1;
  i = std::clamp(i, 0, m - 2);
  const double h = x_[i + 1] - x_[i];
  const double u = (x - x_[i]) / h;
  const double v = 1.0 - u;
  return (y_[i + 1] - y_[i]) / h +
         h / 6.0 *
             ((3.0 * u * u - 1.0) * m_[i + 1] - (3.0 * v * v - 1.0) * m_[i]);
}

std::vector<double> least_squares_fit(
    std::span<const double> x, std::span<const double> y,
    std::span<const std::function<double(double)>> basis) {
  const int rows = static_cast<int>(x.size());
  const int cols = static_cast<int>(basis.size());
  if (rows < cols) throw fit_error("least squares: more basis functions than samples");
  Eigen::MatrixXd A(rows, cols);
  Eigen::VectorXd b(rows);
  for (int i = 0; i < rows; ++i) {
    b(i) = y[i];
    for (int j = 0; j < cols; ++j) A(i, j) = basis[j](x[i]);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < cols) throw fit_error("least squares: rank-deficient design");
  Eigen::VectorXd c = qr.solve(b);
  return std::vector<double>(c.data(), c.data() + cols);
}

ExpansionFit fit_expansion(std::span<const std::pair<double, double>> samples,
                           double base, FitModel model) {
  const int m = static_cast<int>(samples.size());
  if (m < 3) throw fit_error("fit_expansion: need at least 3 samples");
  std::set<double> distinct;
  for (const auto& [eps, value] : samples) {
    (void)value;
    if (!(eps > 0.0 && eps < 1.0))
      throw fit_error("fit_expansion: samples must have eps in (0, 1)");
    if (!distinct.insert(eps).second)
      throw fit_error("fit_expansion: duplicate eps sample");
  }

  std::vector<std::function<double(double)>> basis;
  switch (model) {
    case FitModel::plain:
      basis = {[](double e) { return e * e; }};
      break;
    case FitModel::log:
      basis = {[](double e) { return e * e * std::log(1.0 / e); },
               [](double e) { return e * e; }};
      break;
    case FitModel::cubic:
      basis = {[](double e) { return e * e; },
               [](double e) { return e * e * e; }};
      break;
  }

  std::vector<double> x(m), y(m);
  for (int i = 0; i < m; ++i) {
    x[i] = samples[i].first;
    y[i] = samples[i].second - base;
  }
  ExpansionFit fit;
  fit.model = model;
  fit.eps = x;
  fit.coefficients = least_squares_fit(x, y, basis);
  double ss = 0.0;
  for (int i = 0; i < m; ++i) {
    double pred = 0.0;
    for (size_t j = 0; j < basis.size(); ++j)
      pred += fit.coefficients[j] * basis[j](x[i]);
    ss += (y[i] - pred) * (y[i] - pred);
  }
  fit.residual = std::sqrt(ss / m);
  return fit;
}

}  // namespace conic
