#pragma once

#include <optional>
#include <string>
#include <vector>

namespace conic {

// Volume of the unit round sphere S^dim.
double sphere_volume(int dim);

// Yamabe invariant of the round sphere S^n, n*(n-1)*Vol(S^n)^{2/n}.
double sphere_yamabe(int n);

// Ambient data for a cone over a link of given (n-1)-volume.
// All bubble profiles below are normalized so that the critical
// Sobolev norm of U equals one:  integral of U^{2n/(n-2)} over the
// model cone is exactly 1.
struct ConeContext {
  int n = 0;                  // ambient dimension, n >= 4
  double link_volume = 0.0;   // Vol of the link Y
  double a = 0.0;             // conformal Laplacian constant 4(n-1)/(n-2)
  double yamabe = 0.0;        // critical constant of the model cone
  double c = 0.0;             // bubble amplitude
  double p = 0.0;             // critical exponent 2n/(n-2)

  // Normalization constant of the quadratic bubble integrals.
  // Finite only for n >= 5; requesting it in dimension 4 throws.
  double omega() const;

  bool has_omega() const { return n >= 5; }

 private:
  friend ConeContext make_context(int n, double link_volume);
  std::optional<double> omega_ = std::nullopt;
};

// Builds the context for dimension n and link volume.  Throws
// dimension_error for n < 4 or a non-positive volume.
ConeContext make_context(int n, double link_volume);

// Standard bubble U(r) = c (1+r^2)^{-(n-2)/2} and derivatives.
double bubble(const ConeContext& ctx, double r);
double bubble_derivative(const ConeContext& ctx, double r);
double bubble_second_derivative(const ConeContext& ctx, double r);

// Generator of dilations V = r U' + (n-2)/2 U.  Lies in the kernel of
// the linearized critical equation; V(1) = 0.
double dilation_generator(const ConeContext& ctx, double r);
double dilation_generator_derivative(const ConeContext& ctx, double r);

// Radial source profiles entering the linearized mode equations:
//   q1 = U'/(n-2) + U/r   (equal to c r^{-1} (1+r^2)^{-n/2}),
//   q2 = 2(n-1)U'/(n-2) + n U/r.
// Defined for r > 0.
struct RadialSources {
  double q1 = 0.0;
  double q2 = 0.0;
};
RadialSources radial_sources(const ConeContext& ctx, double r);

// Closed-form checks of the quadratic bubble integrals against direct
// quadrature.  Each row states one identity; rel_err is measured
// against the omega scale.  Requires n >= 5.
struct IdentityRow {
  std::string name;
  double quadrature = 0.0;
  double closed_form = 0.0;
  double rel_err = 0.0;
};

struct IdentityReport {
  int n = 0;
  double omega = 0.0;
  std::vector<IdentityRow> rows;
  double max_rel_err = 0.0;
  bool all_within(double tol) const { return max_rel_err <= tol; }
};

IdentityReport verify_radial_identities(const ConeContext& ctx);

// Quadrature value of omega for cross-checks against the closed form.
double omega_quadrature(const ConeContext& ctx);

}  // namespace conic
