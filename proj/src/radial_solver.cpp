#include "conic/radial_solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <random>

#include "conic/errors.hpp"

namespace conic {

namespace {

struct Coefficients {
  // -Phi'' - P Phi' + Q Phi = F in r, for Phi = psi (1+r)^{n-3}.
  double P = 0.0, Q = 0.0, F = 0.0;
};

Coefficients ode_coefficients(const ConeContext& ctx, double lambda, double r) {
  const int n = ctx.n;
  const double m = n - 3.0;
  Coefficients c;
  c.P = -2.0 * m / (1.0 + r) + (n - 1) / r;
  const double onepr2 = 1.0 + r * r;
  c.Q = -m * (m + 1.0) / ((1.0 + r) * (1.0 + r)) +
        (n - 1) * m / (r * (1.0 + r)) + lambda / (r * r) -
        n * (n + 2.0) / (onepr2 * onepr2);
  c.F = lambda / ctx.a * radial_sources(ctx, r).q2 * std::pow(1.0 + r, m);
  return c;
}

double decay_constant_closed(const ConeContext& ctx, double lambda) {
  const int n = ctx.n;
  return -lambda * (n - 2) * ctx.c / (ctx.a * (lambda + n - 3.0));
}

// Smallest-singular-value estimate of the row-equilibrated system by
// inverse power iteration on A^T A.
double min_singular_estimate(const Eigen::SparseMatrix<double>& A) {
  Eigen::SparseMatrix<double> B = A;
  // Row equilibration.
  Eigen::VectorXd scale = Eigen::VectorXd::Zero(A.rows());
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      scale(it.row()) = std::max(scale(it.row()), std::abs(it.value()));
  for (int k = 0; k < B.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(B, k); it; ++it)
      it.valueRef() = it.value() / scale(it.row());

  Eigen::SparseMatrix<double> Bt = Eigen::SparseMatrix<double>(B.transpose());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu, lut;
  lu.compute(B);
  lut.compute(Bt);
  if (lu.info() != Eigen::Success || lut.info() != Eigen::Success) return 0.0;

  std::mt19937 gen(12345u);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::VectorXd v(B.rows());
  for (int i = 0; i < v.size(); ++i) v(i) = unif(gen);
  v.normalize();
  double rho = 0.0;
  for (int it = 0; it < 8; ++it) {
    Eigen::VectorXd w = lut.solve(v);
    Eigen::VectorXd z = lu.solve(w);
    rho = z.norm();
    if (rho == 0.0) return 0.0;
    v = z / rho;
  }
  return 1.0 / std::sqrt(rho);
}

}  // namespace

double RadialSolution::psi_at(double r) const {
  if (r < 0.0) throw std::domain_error("psi_at: r must be >= 0");
  const double tt = r / (1.0 + r);
  return spline.value(tt) * std::pow(1.0 - tt, n - 3);
}

double RadialSolution::psi_derivative_at(double r) const {
  if (r < 0.0) throw std::domain_error("psi_derivative_at: r must be >= 0");
  const double tt = r / (1.0 + r);
  const double omt = 1.0 - tt;
  return spline.derivative(tt) * std::pow(omt, n - 1) -
         (n - 3) * std::pow(omt, n - 2) * spline.value(tt);
}

RadialSolution solve_mode(const ModeProblem& problem) {
  const ConeContext& ctx = problem.ctx;
  const int n = ctx.n;
  if (n < 5) throw dimension_error("solve_mode: requires n >= 5");
  const double lambda = problem.lambda;
  if (lambda < n - 1.0 - 1e-12)
    throw std::out_of_range("solve_mode: lambda below n-1 is not covered");
  const int N = problem.resolution;
  if (N < 16) throw resolution_error("solve_mode: resolution too small");

  const bool resonant = std::abs(lambda - (n - 1.0)) <= 1e-12;
  const double h = 1.0 / N;
  const double C_inf = decay_constant_closed(ctx, lambda);

  std::vector<double> t(N + 1), r(N + 1);
  for (int i = 0; i <= N; ++i) {
    t[i] = i * h;
    r[i] = t[i] / (1.0 - t[i]);
  }
  r[N] = std::numeric_limits<double>::infinity();

  const int interior = N - 1;
  const int dim = resonant ? interior + 1 : interior;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(interior) * 5);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);

  const std::vector<double> simpson = simpson_weights(N + 1, h);

  for (int i = 1; i <= interior; ++i) {
    const double omt = 1.0 - t[i];
    const Coefficients c = ode_coefficients(ctx, lambda, r[i]);
    const double Ac = std::pow(omt, 4) / (h * h);
    const double Bc = (2.0 * std::pow(omt, 3) - c.P * omt * omt) / (2.0 * h);
    const double lower = -Ac - Bc;
    const double diag = 2.0 * Ac + c.Q;
    const double upper = -Ac + Bc;
    const int row = i - 1;
    if (i > 1) trips.emplace_back(row, row - 1, lower);
    trips.emplace_back(row, row, diag);
    if (i < interior) trips.emplace_back(row, row + 1, upper);
    rhs(row) = c.F;
    if (i == interior) rhs(row) -= upper * C_inf;
    if (resonant) {
      // Kernel column U'(r)(1+r)^{n-3} and orthogonality row
      // simpson_i U'(r_i) r_i^{n-3} (1-t_i)^{n-5}.
      const double up = bubble_derivative(ctx, r[i]);
      trips.emplace_back(row, interior, up * std::pow(1.0 + r[i], n - 3));
      trips.emplace_back(interior, row,
                         simpson[i] * up * std::pow(r[i], n - 3) *
                             std::pow(omt, n - 5));
    }
  }

  Eigen::SparseMatrix<double> A(dim, dim);
  A.setFromTriplets(trips.begin(), trips.end());
  A.makeCompressed();

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success)
    throw resolution_error(
        "solve_mode: sparse factorization failed; try doubling the resolution");
  Eigen::VectorXd sol = lu.solve(rhs);
  if (lu.info() != Eigen::Success)
    throw resolution_error(
        "solve_mode: linear solve failed; try doubling the resolution");

  std::vector<double> phi(N + 1);
  phi[0] = 0.0;
  phi[N] = C_inf;
  for (int i = 1; i <= interior; ++i) phi[i] = sol(i - 1);

  RadialSolution out;
  out.lambda = lambda;
  out.resolution = N;
  out.n = n;
  out.t = t;
  out.kernel_multiplier = resonant ? sol(interior) : 0.0;
  out.indicial_exponent =
      0.5 * (-(n - 2.0) + std::sqrt((n - 2.0) * (n - 2.0) + 4.0 * lambda));
  out.decay_constant = C_inf;

  out.psi.resize(N + 1);
  for (int i = 0; i <= N; ++i)
    out.psi[i] = phi[i] * std::pow(1.0 - t[i], n - 3);

  // Discrete residual (backward-error check).
  double resid = 0.0, fscale = 1.0;
  Eigen::VectorXd Ax = A * sol;
  for (int i = 0; i < dim; ++i) {
    resid = std::max(resid, std::abs(Ax(i) - rhs(i)));
    fscale = std::max(fscale, std::abs(rhs(i)));
  }
  out.operator_residual = resid / fscale;

  // beta and the orthogonality residual by Simpson on the t grid.
  double beta = 0.0, ortho = 0.0;
  for (int i = 1; i <= interior; ++i) {
    const double omt = 1.0 - t[i];
    const RadialSources s = radial_sources(ctx, r[i]);
    const double base = phi[i] * std::pow(omt, n - 5);
    beta += simpson[i] * base * s.q2 * std::pow(r[i], n - 1);
    ortho += simpson[i] * base * bubble_derivative(ctx, r[i]) *
             std::pow(r[i], n - 3);
  }
  if (n == 5) beta += simpson[N] * phi[N] * (-(n - 2.0) * ctx.c);
  out.beta = beta;
  out.ortho_residual = ortho;

  out.min_singular_value = min_singular_estimate(A);

  out.spline = CubicSpline(t, phi);

  const double check_tol = std::max(problem.tolerance, 1e-8);
  if (out.operator_residual > check_tol)
    throw resolution_error(
        "solve_mode: discrete residual above tolerance; try doubling the "
        "resolution");
  return out;
}

double beta_value(const ConeContext& ctx, double lambda, int resolution) {
  ModeProblem p;
  p.ctx = ctx;
  p.lambda = lambda;
  p.resolution = resolution;
  return solve_mode(p).beta;
}

double psi1_radial(const ConeContext& ctx, double r) {
  if (r == 0.0) return 0.0;
  return -0.5 * (ctx.n - 2) * radial_sources(ctx, r).q1 * r * r;
}

double psi1_radial_derivative(const ConeContext& ctx, double r) {
  // -(n-2)/2 d/dr [ c r (1+r^2)^{-n/2} ]
  const double s = 1.0 + r * r;
  return -0.5 * (ctx.n - 2) * ctx.c * std::pow(s, -0.5 * ctx.n - 1.0) *
         (s - ctx.n * r * r);
}

std::vector<PoincareTrial> default_poincare_trials(int count, unsigned seed) {
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> alpha_d(0.5, 3.0);
  std::uniform_real_distribution<double> center_d(0.3, 2.5);
  std::vector<PoincareTrial> trials;
  trials.reserve(count);
  for (int k = 0; k < count; ++k) {
    const double alpha = alpha_d(gen);
    const double m = center_d(gen);
    PoincareTrial tr;
    tr.label = "bump_" + std::to_string(k);
    tr.psi = [alpha, m](double r) {
      return r * r * std::exp(-alpha * (r - m) * (r - m));
    };
    tr.dpsi = [alpha, m](double r) {
      return std::exp(-alpha * (r - m) * (r - m)) *
             (2.0 * r - 2.0 * alpha * r * r * (r - m));
    };
    trials.push_back(std::move(tr));
  }
  return trials;
}

PoincareReport weighted_poincare_check(const ConeContext& ctx,
                                       const std::vector<PoincareTrial>& trials) {
  const int n = ctx.n;
  const RadialRule rule = radial_rule(600);
  const double up_norm = integrate_radial(rule, n - 3, [&](double r) {
    const double up = bubble_derivative(ctx, r);
    return up * up;
  });

  PoincareReport report;
  for (const auto& tr : trials) {
    const double cross = integrate_radial(
        rule, n - 3, [&](double r) { return tr.psi(r) * bubble_derivative(ctx, r); });
    const double c = cross / up_norm;
    auto proj = [&](double r) { return tr.psi(r) - c * bubble_derivative(ctx, r); };
    auto dproj = [&](double r) {
      return tr.dpsi(r) - c * bubble_second_derivative(ctx, r);
    };
    const double denom = integrate_radial(
        rule, n - 1, [&](double r) { return dproj(r) * dproj(r); });
    const double scale = integrate_radial(
        rule, n - 1, [&](double r) { return proj(r) * proj(r); });
    if (!(denom > 1e-14 * std::max(1.0, scale)))
      throw std::invalid_argument(
          "weighted_poincare_check: trial collapses after projection");
    const double numer =
        n * (n + 2.0) * integrate_radial(rule, n - 1, [&](double r) {
          const double v = proj(r);
          const double onepr2 = 1.0 + r * r;
          return v * v / (onepr2 * onepr2);
        });
    PoincareRow row;
    row.label = tr.label;
    row.ratio = numer / denom;
    if (row.ratio > report.worst_ratio) {
      report.worst_ratio = row.ratio;
      report.worst_label = row.label;
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace conic
