#pragma once

#include <functional>
#include <vector>

#include "conic/bubble.hpp"
#include "conic/quadrature.hpp"

namespace conic {

// One linearized radial mode problem
//   L_lambda psi = lambda a^{-1} q2,   L_lambda = -d2/dr2 - (n-1)/r d/dr
//                                        + lambda/r^2 - n(n+2)/(1+r^2)^2,
// posed on (0, inf) with the weighted orthogonality constraint
// int psi U' r^{n-3} dr = 0.
struct ModeProblem {
  ConeContext ctx;
  double lambda = 0.0;
  double tolerance = 1e-8;
  int resolution = 4000;  // uniform interior nodes in t = r/(1+r)
};

struct RadialSolution {
  double lambda = 0.0;
  int resolution = 0;
  std::vector<double> t;    // uniform grid including endpoints
  std::vector<double> psi;  // psi at the grid (psi[0] = 0 by limit)
  double beta = 0.0;
  double ortho_residual = 0.0;     // int psi U' r^{n-3} dr
  double operator_residual = 0.0;  // max-norm discrete residual
  double indicial_exponent = 0.0;  // positive root of mu(mu+n-2) = lambda
  double decay_constant = 0.0;     // limit of psi r^{n-3} at infinity
  double kernel_multiplier = 0.0;  // Lagrange multiplier, lambda = n-1 only
  double min_singular_value = 0.0; // smallest singular value estimate
  // Cubic-spline interpolants in the compactified variable.
  double psi_at(double r) const;
  double psi_derivative_at(double r) const;

  int n = 0;
  CubicSpline spline;  // interpolant of psi (1+r)^{n-3} over t
};

// Solves one mode.  lambda = n-1 is solved as a bordered system with
// the orthogonality row and the U' kernel column; lambda > n-1 is a
// plain boundary value problem with the constraint checked after the
// fact.  Throws std::out_of_range for lambda < n-1, dimension_error
// for n < 5, and resolution_error when the linear solve fails or the
// self-checks exceed tolerance.
RadialSolution solve_mode(const ModeProblem& problem);

// beta(lambda) = int psi_lambda q2 r^{n-1} dr.
double beta_value(const ConeContext& ctx, double lambda, int resolution = 4000);

// Radial factor of the first corrector: -(n-2)/2 q1(r) r^2.
double psi1_radial(const ConeContext& ctx, double r);
double psi1_radial_derivative(const ConeContext& ctx, double r);

// Sampling check of the weighted Poincare inequality
//   n(n+2) int psi^2 (1+r^2)^{-2} r^{n-1} dr <= int (psi')^2 r^{n-1} dr
// for trials projected orthogonal to U' in the r^{n-3} weight.
struct PoincareTrial {
  std::function<double(double)> psi;
  std::function<double(double)> dpsi;
  std::string label;
};

struct PoincareRow {
  std::string label;
  double ratio = 0.0;
};

struct PoincareReport {
  std::vector<PoincareRow> rows;
  double worst_ratio = 0.0;
  std::string worst_label;
  bool all_within(double slack) const { return worst_ratio <= 1.0 + slack; }
};

// Throws std::invalid_argument when a trial collapses to zero after
// the projection.
PoincareReport weighted_poincare_check(const ConeContext& ctx,
                                       const std::vector<PoincareTrial>& trials);

// Deterministic bump trials for the sampling check.
std::vector<PoincareTrial> default_poincare_trials(int count, unsigned seed);

}  // namespace conic
