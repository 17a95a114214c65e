#include "conic/cone_geometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "conic/errors.hpp"

namespace conic {

namespace {

// Gegenbauer polynomials C_l^{alpha} with derivatives up to third
// order, by differentiating the three-term recurrence.
struct GegenbauerJet {
  double c = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0;
};

GegenbauerJet gegenbauer_jet(int ell, double alpha, double x) {
  GegenbauerJet prev2{1.0, 0.0, 0.0, 0.0};
  if (ell == 0) return prev2;
  GegenbauerJet prev1{2.0 * alpha * x, 2.0 * alpha, 0.0, 0.0};
  if (ell == 1) return prev1;
  GegenbauerJet cur;
  for (int l = 2; l <= ell; ++l) {
    const double A = 2.0 * (l + alpha - 1.0) / l;
    const double B = (l + 2.0 * alpha - 2.0) / l;
    cur.c = A * x * prev1.c - B * prev2.c;
    cur.c1 = A * (prev1.c + x * prev1.c1) - B * prev2.c1;
    cur.c2 = A * (2.0 * prev1.c1 + x * prev1.c2) - B * prev2.c2;
    cur.c3 = A * (3.0 * prev1.c2 + x * prev1.c3) - B * prev2.c3;
    prev2 = prev1;
    prev1 = cur;
  }
  return cur;
}

// 1 / (L^2(S^{n-1}) norm of C_l^{(n-2)/2}):
// ||C||^2 = Vol(S^{n-2}) * pi 2^{1-2a} Gamma(l+2a) / (l! (l+a) Gamma(a)^2).
double zonal_normalizer(int n, int ell) {
  const double a = 0.5 * (n - 2);
  const double log_int = std::log(M_PI) + (1.0 - 2.0 * a) * std::log(2.0) +
                         std::lgamma(ell + 2.0 * a) -
                         std::lgamma(ell + 1.0) - std::log(ell + a) -
                         2.0 * std::lgamma(a);
  const double norm_sq = sphere_volume(n - 2) * std::exp(log_int);
  return 1.0 / std::sqrt(norm_sq);
}

struct PhiJet {
  double phi = 1.0;
  double phi_s = 0.0;   // d/ds
  double phi_ss = 0.0;  // d2/ds2
  double phi_x = 0.0;   // d/dx
  double f = 0.0, f_x = 0.0, lap_f = 0.0, grad_f_sq = 0.0;
  double w = 0.0, w_x = 0.0, lap_w = 0.0;
};

PhiJet phi_jet(const ZonalConformalFamily& fam, double s, double x) {
  PhiJet j;
  j.f = fam.f.value(x);
  j.f_x = fam.f.dx(x);
  j.lap_f = fam.f.laplacian(x);
  j.grad_f_sq = fam.f.gradient_sq(x);
  if (fam.second_order) {
    j.w = fam.second_order->value(x);
    j.w_x = fam.second_order->dx(x);
    j.lap_w = fam.second_order->laplacian(x);
  }
  j.phi = 1.0 + s * j.f + 0.5 * s * s * j.w;
  j.phi_s = j.f + s * j.w;
  j.phi_ss = j.w;
  j.phi_x = s * j.f_x + 0.5 * s * s * j.w_x;
  return j;
}

void require_valid_scale(const ZonalConformalFamily& fam, double s,
                         const char* who) {
  if (s >= fam.s_max())
    throw degenerate_metric_error(std::string(who) +
                                  ": scale beyond the family's validity bound");
}

}  // namespace

double zonal_harmonic(int n, int ell, double x) {
  if (n < 4 || ell < 1)
    throw std::invalid_argument("zonal_harmonic: need n >= 4, ell >= 1");
  return zonal_normalizer(n, ell) * gegenbauer_jet(ell, 0.5 * (n - 2), x).c;
}

double zonal_eigenvalue(int n, int ell) {
  return static_cast<double>(ell) * (ell + n - 2);
}

ZonalProfile::ZonalProfile(int n, std::vector<ZonalMode> modes)
    : n_(n), modes_(std::move(modes)) {
  if (n < 4) throw dimension_error("ZonalProfile: n must be at least 4");
  for (const auto& m : modes_)
    if (m.ell < 1)
      throw std::invalid_argument("ZonalProfile: modes need ell >= 1");
  max_abs_ = scan_max_abs();
}

double ZonalProfile::value(double x) const {
  double acc = 0.0;
  for (const auto& m : modes_)
    acc += m.amplitude * zonal_normalizer(n_, m.ell) *
           gegenbauer_jet(m.ell, 0.5 * (n_ - 2), x).c;
  return acc;
}

double ZonalProfile::dx(double x) const {
  double acc = 0.0;
  for (const auto& m : modes_)
    acc += m.amplitude * zonal_normalizer(n_, m.ell) *
           gegenbauer_jet(m.ell, 0.5 * (n_ - 2), x).c1;
  return acc;
}

double ZonalProfile::d2x(double x) const {
  double acc = 0.0;
  for (const auto& m : modes_)
    acc += m.amplitude * zonal_normalizer(n_, m.ell) *
           gegenbauer_jet(m.ell, 0.5 * (n_ - 2), x).c2;
  return acc;
}

double ZonalProfile::d3x(double x) const {
  double acc = 0.0;
  for (const auto& m : modes_)
    acc += m.amplitude * zonal_normalizer(n_, m.ell) *
           gegenbauer_jet(m.ell, 0.5 * (n_ - 2), x).c3;
  return acc;
}

double ZonalProfile::laplacian(double x) const {
  double acc = 0.0;
  for (const auto& m : modes_)
    acc -= m.amplitude * zonal_eigenvalue(n_, m.ell) *
           zonal_normalizer(n_, m.ell) *
           gegenbauer_jet(m.ell, 0.5 * (n_ - 2), x).c;
  return acc;
}

double ZonalProfile::gradient_sq(double x) const {
  const double d = dx(x);
  return (1.0 - x * x) * d * d;
}

double ZonalProfile::max_abs() const { return max_abs_; }

double ZonalProfile::scan_max_abs() const {
  if (modes_.empty()) return 0.0;
  // Candidates: endpoints plus interior critical points located by a
  // sign scan of the derivative with bisection refinement.
  double best = std::max(std::abs(value(-1.0)), std::abs(value(1.0)));
  const int scan = 2048;
  double xl = -1.0;
  double dl = dx(xl);
  for (int i = 1; i <= scan; ++i) {
    const double xr = -1.0 + 2.0 * i / scan;
    const double dr = dx(xr);
    if (dl == 0.0) best = std::max(best, std::abs(value(xl)));
    if (dl * dr < 0.0) {
      double lo = xl, hi = xr;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (dx(lo) * dx(mid) <= 0.0)
          hi = mid;
        else
          lo = mid;
      }
      best = std::max(best, std::abs(value(0.5 * (lo + hi))));
    }
    xl = xr;
    dl = dr;
  }
  return best;
}

double ZonalConformalFamily::s_max() const {
  const double m = f.max_abs();
  if (m == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / (2.0 * m);
}

double ZonalConformalFamily::link_volume() const {
  return sphere_volume(n - 1) / quotient_order;
}

ZonalConformalFamily make_family(int n, std::vector<ZonalMode> f_modes,
                                 int quotient_order) {
  if (quotient_order < 1)
    throw std::invalid_argument("make_family: quotient order must be >= 1");
  ZonalConformalFamily fam;
  fam.n = n;
  fam.quotient_order = quotient_order;
  fam.f = ZonalProfile(n, std::move(f_modes));
  return fam;
}

double conformal_factor(const ZonalConformalFamily& fam, double s, double x) {
  if (s < 0.0) throw std::domain_error("conformal_factor: s must be >= 0");
  const double phi = phi_jet(fam, s, x).phi;
  if (!(phi > 0.0))
    throw degenerate_metric_error("conformal_factor: metric degenerates");
  return phi;
}

double measure_density(const ZonalConformalFamily& fam, double s, double x) {
  if (s < 0.0) throw std::domain_error("measure_density: s must be >= 0");
  require_valid_scale(fam, s, "measure_density");
  const double phi = phi_jet(fam, s, x).phi;
  if (!(phi > 0.0))
    throw degenerate_metric_error("measure_density: metric degenerates");
  return std::pow(s * phi, fam.n - 1);
}

double scalar_curvature(const ZonalConformalFamily& fam, double s, double x) {
  if (s <= 0.0) throw std::domain_error("scalar_curvature: s must be positive");
  require_valid_scale(fam, s, "scalar_curvature");
  const int n = fam.n;
  const PhiJet j = phi_jet(fam, s, x);
  if (!(j.phi > 0.0))
    throw degenerate_metric_error("scalar_curvature: metric degenerates");

  const double phi = j.phi;
  const double lap_phi = s * j.lap_f + 0.5 * s * s * j.lap_w;
  const double grad_phi_sq = (1.0 - x * x) * j.phi_x * j.phi_x;
  const double lap_ln = lap_phi / phi - grad_phi_sq / (phi * phi);
  const double grad_ln_sq = grad_phi_sq / (phi * phi);

  // Conformal change on the (n-1)-dimensional link.
  const double R0 = static_cast<double>(n - 1) * (n - 2);
  const double Rh =
      (R0 - 2.0 * (n - 2) * lap_ln - (n - 2.0) * (n - 3.0) * grad_ln_sq) /
      (phi * phi);

  const double ratio = j.phi_s / phi;
  const double tr_h1 = 2.0 * (n - 1) * ratio;
  const double h1_sq = 4.0 * (n - 1) * ratio * ratio;
  const double tr_h2 =
      2.0 * (n - 1) * (j.phi_s * j.phi_s + phi * j.phi_ss) / (phi * phi);

  return (Rh - R0) / (s * s) - (n / s) * tr_h1 + 0.75 * h1_sq -
         0.25 * tr_h1 * tr_h1 - tr_h2;
}

double gradient_sq(const ZonalConformalFamily& fam, double s, double x,
                   double u_s, double u_x) {
  const double phi = phi_jet(fam, s, x).phi;
  if (!(phi > 0.0))
    throw degenerate_metric_error("gradient_sq: metric degenerates");
  return u_s * u_s + (1.0 - x * x) * u_x * u_x / (s * s * phi * phi);
}

double laplacian_blowup(const ZonalConformalFamily& fam, double eps, double r,
                        double x, const PointJet2& jet) {
  if (r <= 0.0) throw std::domain_error("laplacian_blowup: r must be positive");
  const int n = fam.n;
  const PhiJet j = phi_jet(fam, eps * r, x);
  if (!(j.phi > 0.0))
    throw degenerate_metric_error("laplacian_blowup: metric degenerates");
  const double lap0_u = (1.0 - x * x) * jet.uxx - (n - 1) * x * jet.ux;
  const double radial =
      jet.urr + (n - 1) * (1.0 / r + eps * j.phi_s / j.phi) * jet.ur;
  const double angular =
      (lap0_u + (n - 3) * (1.0 - x * x) * (j.phi_x / j.phi) * jet.ux) /
      (r * r * j.phi * j.phi);
  return radial + angular;
}

double measure_first_order(const ZonalConformalFamily& fam, double r, double x) {
  return (fam.n - 1) * r * fam.f.value(x);
}

double measure_second_order(const ZonalConformalFamily& fam, double r,
                            double x) {
  const int n = fam.n;
  const double f = fam.f.value(x);
  const double w = fam.second_order ? fam.second_order->value(x) : 0.0;
  return r * r * (0.5 * (n - 1) * w + 0.5 * (n - 1) * (n - 2) * f * f);
}

double curvature_first_order(const ZonalConformalFamily& fam, double r,
                             double x) {
  const int n = fam.n;
  const double f = fam.f.value(x);
  const double lap_f = fam.f.laplacian(x);
  return -(4.0 * (n - 1) * (n - 1) * f + 2.0 * (n - 2) * lap_f) / r;
}

double curvature_second_order(const ZonalConformalFamily& fam, double r,
                              double x) {
  (void)r;
  const int n = fam.n;
  const double f = fam.f.value(x);
  const double lap_f = fam.f.laplacian(x);
  const double grad_f_sq = fam.f.gradient_sq(x);
  const double w = fam.second_order ? fam.second_order->value(x) : 0.0;
  const double lap_w = fam.second_order ? fam.second_order->laplacian(x) : 0.0;
  return 4.0 * (n - 1) * (n - 1) * f * f + 6.0 * (n - 2) * f * lap_f +
         (n - 2.0) * (5.0 - n) * grad_f_sq -
         2.0 * (static_cast<double>(n) * n - 1.0) * w - (n - 2.0) * lap_w;
}

double conformal_laplacian_zero(const ConeContext& ctx, double r, double x,
                                const PointJet2& jet) {
  const int n = ctx.n;
  const double lap0_u = (1.0 - x * x) * jet.uxx - (n - 1) * x * jet.ux;
  return -ctx.a * (jet.urr + (n - 1) * jet.ur / r + lap0_u / (r * r));
}

double conformal_laplacian_first(const ConeContext& ctx,
                                 const ZonalConformalFamily& fam, double r,
                                 double x, const PointJet2& jet) {
  const int n = ctx.n;
  const double f = fam.f.value(x);
  const double f_x = fam.f.dx(x);
  const double lap0_u = (1.0 - x * x) * jet.uxx - (n - 1) * x * jet.ux;
  const double lap1_u =
      (n - 1) * f * jet.ur +
      (-2.0 * f * lap0_u + (n - 3) * (1.0 - x * x) * f_x * jet.ux) / r;
  return -ctx.a * lap1_u + curvature_first_order(fam, r, x) * jet.u;
}

double conformal_laplacian_second_radial(const ConeContext& ctx,
                                         const ZonalConformalFamily& fam,
                                         double r, double x,
                                         const PointJet2& jet) {
  const int n = ctx.n;
  const double f = fam.f.value(x);
  const double w = fam.second_order ? fam.second_order->value(x) : 0.0;
  const double lap2_u = (n - 1) * r * (w - f * f) * jet.ur;
  return -ctx.a * lap2_u + curvature_second_order(fam, r, x) * jet.u;
}

ZonalGridFunction make_grid_function(const PolarRule& rule) {
  ZonalGridFunction g;
  g.rule = rule;
  g.values.assign(static_cast<size_t>(rule.node_count()), 0.0);
  return g;
}

namespace {

// Radial first/second collocation derivatives for a grid function,
// handling both the compactified rule (differentiate in t, chain rule
// through r = t/(1-t)) and panel rules (differentiate per panel).
void radial_derivatives(const RadialRule& rule, const Eigen::MatrixXd& u,
                        Eigen::MatrixXd& ur, Eigen::MatrixXd& urr) {
  const int nr = rule.count();
  if (!rule.t.empty()) {
    const std::vector<double> Dv = differentiation_matrix(rule.t);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        Dt(Dv.data(), nr, nr);
    Eigen::MatrixXd ut = Dt * u;
    Eigen::MatrixXd utt = Dt * ut;
    ur.resize(nr, u.cols());
    urr.resize(nr, u.cols());
    for (int i = 0; i < nr; ++i) {
      const double omt = 1.0 - rule.t[i];
      const double omt2 = omt * omt;
      ur.row(i) = omt2 * ut.row(i);
      urr.row(i) = omt2 * omt2 * utt.row(i) - 2.0 * omt2 * omt * ut.row(i);
    }
    return;
  }
  ur.setZero(nr, u.cols());
  urr.setZero(nr, u.cols());
  for (size_t p = 0; p + 1 < rule.panel_offsets.size(); ++p) {
    const int lo = rule.panel_offsets[p];
    const int hi = rule.panel_offsets[p + 1];
    const int m = hi - lo;
    std::span<const double> nodes(rule.r.data() + lo, static_cast<size_t>(m));
    const std::vector<double> Dv = differentiation_matrix(nodes);
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        D(Dv.data(), m, m);
    ur.middleRows(lo, m) = D * u.middleRows(lo, m);
    urr.middleRows(lo, m) = D * ur.middleRows(lo, m);
  }
}

}  // namespace

ZonalGridFunction laplace_beltrami(const ZonalConformalFamily& fam, double eps,
                                   const ZonalGridFunction& u) {
  const PolarRule& rule = u.rule;
  const int nr = rule.radial.count();
  const int na = rule.angular_count();
  if (static_cast<int>(u.values.size()) != nr * na)
    throw std::invalid_argument("laplace_beltrami: grid shape mismatch");
  if (rule.n != fam.n)
    throw std::invalid_argument("laplace_beltrami: dimension mismatch");

  Eigen::MatrixXd vals(nr, na);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < na; ++j) vals(i, j) = u.at(i, j);

  Eigen::MatrixXd ur, urr;
  radial_derivatives(rule.radial, vals, ur, urr);

  const std::vector<double> Dxv = differentiation_matrix(rule.x);
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                 Eigen::RowMajor>>
      Dx(Dxv.data(), na, na);
  Eigen::MatrixXd ux = vals * Dx.transpose();
  Eigen::MatrixXd uxx = ux * Dx.transpose();

  ZonalGridFunction out = make_grid_function(rule);
  for (int i = 0; i < nr; ++i) {
    const double r = rule.radial.r[i];
    for (int j = 0; j < na; ++j) {
      PointJet2 jet;
      jet.u = vals(i, j);
      jet.ur = ur(i, j);
      jet.ux = ux(i, j);
      jet.urr = urr(i, j);
      jet.uxx = uxx(i, j);
      out.values[static_cast<size_t>(i) * na + j] =
          laplacian_blowup(fam, eps, r, rule.x[j], jet);
    }
  }
  return out;
}

ExpansionPieces expansion_pieces(const ZonalConformalFamily& fam,
                                 const ConeContext& ctx,
                                 const PolarRule& rule) {
  if (fam.n != ctx.n)
    throw std::invalid_argument("expansion_pieces: dimension mismatch");
  ExpansionPieces out{make_grid_function(rule), make_grid_function(rule),
                      make_grid_function(rule), make_grid_function(rule)};
  const int na = rule.angular_count();
  for (int i = 0; i < rule.radial.count(); ++i) {
    const double r = rule.radial.r[i];
    PointJet2 jet;
    jet.u = bubble(ctx, r);
    jet.ur = bubble_derivative(ctx, r);
    jet.urr = bubble_second_derivative(ctx, r);
    for (int j = 0; j < na; ++j) {
      const double x = rule.x[j];
      const size_t k = static_cast<size_t>(i) * na + j;
      out.m1.values[k] = measure_first_order(fam, r, x);
      out.m2.values[k] = measure_second_order(fam, r, x);
      out.L1U.values[k] = conformal_laplacian_first(ctx, fam, r, x, jet);
      out.L2U.values[k] = conformal_laplacian_second_radial(ctx, fam, r, x, jet);
    }
  }
  return out;
}

}  // namespace conic
