#pragma once

#include <limits>
#include <optional>
#include <vector>

#include "conic/bubble.hpp"
#include "conic/quadrature.hpp"

namespace conic {

// Finite combination of zonal spherical harmonics on S^{n-1},
// polynomial in x = cos(theta).  Modes are indexed by the integer
// degree ell >= 1, with amplitudes against the L^2-normalized zonal
// harmonic, so the profile has zero mean automatically.
struct ZonalMode {
  int ell = 0;
  double amplitude = 0.0;
};

class ZonalProfile {
 public:
  ZonalProfile() = default;
  ZonalProfile(int n, std::vector<ZonalMode> modes);

  int n() const { return n_; }
  const std::vector<ZonalMode>& modes() const { return modes_; }
  bool zero() const { return modes_.empty(); }

  double value(double x) const;
  double dx(double x) const;
  double d2x(double x) const;
  double d3x(double x) const;
  // Laplace-Beltrami of the profile on the round S^{n-1}:
  // (1-x^2) d2x - (n-1) x dx, equal to -sum ell(ell+n-2) amp Z_ell.
  double laplacian(double x) const;
  // Squared round gradient (1-x^2) (dx)^2.
  double gradient_sq(double x) const;
  double max_abs() const;

 private:
  double scan_max_abs() const;

  int n_ = 0;
  std::vector<ZonalMode> modes_;
  double max_abs_ = 0.0;  // cached at construction
};

// L^2(S^{n-1})-normalized zonal harmonic of degree ell at x, and its
// Laplace eigenvalue ell(ell+n-2).
double zonal_harmonic(int n, int ell, double x);
double zonal_eigenvalue(int n, int ell);

// Family of cone link metrics h(s) = phi(s,.)^2 h0 on S^{n-1}, with
//   phi(s,x) = 1 + s f(x) + (s^2/2) w(x),
// h0 the round metric, f zero-mean.  The default family has w = 0,
// i.e. h(s) = (1 + s f)^2 h0 exactly.  A nonzero w changes the
// second-order jet of the family without changing its first-order
// direction; quotient_order > 1 models an orbifold link Y = S^{n-1}/Z_k
// carried purely through the link volume.
struct ZonalConformalFamily {
  int n = 0;
  int quotient_order = 1;
  ZonalProfile f;
  std::optional<ZonalProfile> second_order;

  double s_max() const;
  double link_volume() const;
  bool trivial() const { return f.zero() && !second_order; }
};

ZonalConformalFamily make_family(int n, std::vector<ZonalMode> f_modes,
                                 int quotient_order = 1);

// Conformal factor phi(s, x) and its s-derivatives.  Throws
// degenerate_metric_error when phi <= 0.
double conformal_factor(const ZonalConformalFamily& fam, double s, double x);

// Exact volume density of g = ds^2 + s^2 h(s) against ds dmu_{h0}:
// s^{n-1} phi^{n-1}.  Pre: 0 <= s < s_max.
double measure_density(const ZonalConformalFamily& fam, double s, double x);

// Exact scalar curvature of g = ds^2 + s^2 h(s).  Pre: 0 < s < s_max.
double scalar_curvature(const ZonalConformalFamily& fam, double s, double x);

// Squared gradient |grad u|^2_g at (s, x) for a zonal u with partial
// derivatives u_s, u_x.
double gradient_sq(const ZonalConformalFamily& fam, double s, double x,
                   double u_s, double u_x);

// 2-jet of a zonal function at a point, for pointwise operator
// evaluation.
struct PointJet2 {
  double u = 0.0;
  double ur = 0.0;
  double ux = 0.0;
  double urr = 0.0;
  double uxx = 0.0;
};

// Exact Laplace-Beltrami of a zonal function under the blown-up
// metric g_eps = dr^2 + r^2 h(eps r), evaluated from the jet at
// (r, x).  eps = 1 gives the cone metric itself in s = r.
double laplacian_blowup(const ZonalConformalFamily& fam, double eps, double r,
                        double x, const PointJet2& jet);

// Closed-form expansion pieces at (r, x) for the family direction
// xi = 2 f h0 (and second-order jet from w and f^2):
//   measure:    r^{n-1} phi(eps r)^{n-1} = r^{n-1}(1 + eps m1 + eps^2 m2 + ...)
//   curvature:  R_{g_eps} = eps R1 + eps^2 R2 + O(eps^3)
//   operator:   L_eps u = L0 u + eps L1 u + eps^2 L2 u + ...,
//               L_eps = -a Lap_{g_eps} + R_{g_eps}
// L2 is provided along radial u only, which is how it enters the
// expansion (it acts on U).
double measure_first_order(const ZonalConformalFamily& fam, double r, double x);
double measure_second_order(const ZonalConformalFamily& fam, double r, double x);
double curvature_first_order(const ZonalConformalFamily& fam, double r, double x);
double curvature_second_order(const ZonalConformalFamily& fam, double r, double x);
double conformal_laplacian_zero(const ConeContext& ctx, double r, double x,
                                const PointJet2& jet);
double conformal_laplacian_first(const ConeContext& ctx,
                                 const ZonalConformalFamily& fam, double r,
                                 double x, const PointJet2& jet);
double conformal_laplacian_second_radial(const ConeContext& ctx,
                                         const ZonalConformalFamily& fam,
                                         double r, double x,
                                         const PointJet2& jet);

// Values on the tensor grid of a PolarRule, radial index major.
// Optional first-derivative grids ride along when the producer knows
// them analytically.
struct ZonalGridFunction {
  PolarRule rule;
  std::vector<double> values;
  std::vector<double> d_r;
  std::vector<double> d_x;
  // Support bound in the cone variable s = eps * r; +inf when global.
  double support_s = std::numeric_limits<double>::infinity();

  double& at(int i, int j) { return values[i * rule.angular_count() + j]; }
  double at(int i, int j) const { return values[i * rule.angular_count() + j]; }
};

ZonalGridFunction make_grid_function(const PolarRule& rule);

template <class F>
ZonalGridFunction sample_grid_function(const PolarRule& rule, F&& f) {
  ZonalGridFunction g = make_grid_function(rule);
  const int na = rule.angular_count();
  for (int i = 0; i < rule.radial.count(); ++i)
    for (int j = 0; j < na; ++j)
      g.values[i * na + j] = f(rule.radial.r[i], rule.x[j]);
  return g;
}

// Exact Laplace-Beltrami of a grid function under g_eps, computed by
// collocation derivatives (barycentric differentiation in t and x).
// Throws degenerate_metric_error if the metric degenerates at a node
// and std::invalid_argument on grid shape mismatch.
ZonalGridFunction laplace_beltrami(const ZonalConformalFamily& fam, double eps,
                                   const ZonalGridFunction& u);

// The four closed-form expansion pieces sampled on a grid.
struct ExpansionPieces {
  ZonalGridFunction m1, m2, L1U, L2U;
};

ExpansionPieces expansion_pieces(const ZonalConformalFamily& fam,
                                 const ConeContext& ctx, const PolarRule& rule);

}  // namespace conic
