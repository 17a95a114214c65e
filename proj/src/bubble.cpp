#include "conic/bubble.hpp"

#include <algorithm>
#include <cmath>

#include "conic/errors.hpp"
#include "conic/quadrature.hpp"

namespace conic {

double sphere_volume(int dim) {
  if (dim < 0) throw dimension_error("sphere_volume: negative dimension");
  return 2.0 * std::pow(M_PI, 0.5 * (dim + 1)) / std::tgamma(0.5 * (dim + 1));
}

double sphere_yamabe(int n) {
  if (n < 3) throw dimension_error("sphere_yamabe: n must be at least 3");
  return static_cast<double>(n) * (n - 1) * std::pow(sphere_volume(n), 2.0 / n);
}

double ConeContext::omega() const {
  if (!omega_)
    throw divergent_constant_error(
        "omega diverges in dimension 4: the defining integral of U^2 r^{n-1} "
        "has a logarithmic tail");
  return *omega_;
}

ConeContext make_context(int n, double link_volume) {
  if (n < 4) throw dimension_error("make_context: n must be at least 4");
  if (!(link_volume > 0.0))
    throw dimension_error("make_context: link volume must be positive");
  ConeContext ctx;
  ctx.n = n;
  ctx.link_volume = link_volume;
  ctx.a = 4.0 * (n - 1) / static_cast<double>(n - 2);
  ctx.p = 2.0 * n / static_cast<double>(n - 2);
  const double ratio = link_volume / sphere_volume(n - 1);
  ctx.yamabe = std::pow(ratio, 2.0 / n) * sphere_yamabe(n);
  ctx.c = std::pow(4.0 * n * (n - 1) / ctx.yamabe, 0.25 * (n - 2));
  if (n >= 5) {
    // omega = c^2 Gamma(n/2) Gamma((n-4)/2) / (2 Gamma(n-2))
    const double lg = std::lgamma(0.5 * n) + std::lgamma(0.5 * (n - 4)) -
                      std::lgamma(static_cast<double>(n - 2));
    ctx.omega_ = 0.5 * ctx.c * ctx.c * std::exp(lg);
  }
  return ctx;
}

double bubble(const ConeContext& ctx, double r) {
  return ctx.c * std::pow(1.0 + r * r, -0.5 * (ctx.n - 2));
}

double bubble_derivative(const ConeContext& ctx, double r) {
  return -(ctx.n - 2) * ctx.c * r * std::pow(1.0 + r * r, -0.5 * ctx.n);
}

double bubble_second_derivative(const ConeContext& ctx, double r) {
  const double s = 1.0 + r * r;
  return -(ctx.n - 2) * ctx.c * (s - ctx.n * r * r) *
         std::pow(s, -0.5 * ctx.n - 1.0);
}

double dilation_generator(const ConeContext& ctx, double r) {
  return 0.5 * (ctx.n - 2) * ctx.c * (1.0 - r * r) *
         std::pow(1.0 + r * r, -0.5 * ctx.n);
}

double dilation_generator_derivative(const ConeContext& ctx, double r) {
  // d/dr of (n-2)/2 c (1-r^2)(1+r^2)^{-n/2}
  const double s = 1.0 + r * r;
  return 0.5 * (ctx.n - 2) * ctx.c * std::pow(s, -0.5 * ctx.n - 1.0) *
         (-2.0 * r * s - ctx.n * r * (1.0 - r * r));
}

RadialSources radial_sources(const ConeContext& ctx, double r) {
  if (!(r > 0.0)) throw std::domain_error("radial_sources: r must be positive");
  RadialSources out;
  out.q1 = ctx.c / r * std::pow(1.0 + r * r, -0.5 * ctx.n);
  out.q2 = 2.0 * (ctx.n - 1) / (ctx.n - 2) * bubble_derivative(ctx, r) +
           ctx.n * bubble(ctx, r) / r;
  return out;
}

double omega_quadrature(const ConeContext& ctx) {
  const RadialRule rule = radial_rule(500);
  return integrate_radial(rule, ctx.n - 1,
                          [&](double r) { return std::pow(bubble(ctx, r), 2); });
}

IdentityReport verify_radial_identities(const ConeContext& ctx) {
  if (ctx.n < 5)
    throw divergent_constant_error(
        "verify_radial_identities: the quadratic integrals require n >= 5");
  const int n = ctx.n;
  const double omega = ctx.omega();
  const RadialRule rule = radial_rule(500);

  IdentityReport report;
  report.n = n;
  report.omega = omega;

  auto add = [&](const std::string& name, double quad, double closed) {
    IdentityRow row;
    row.name = name;
    row.quadrature = quad;
    row.closed_form = closed;
    row.rel_err = std::abs(quad - closed) / omega;
    report.rows.push_back(row);
    report.max_rel_err = std::max(report.max_rel_err, row.rel_err);
  };

  add("int U^p r^{n+1}",
      integrate_radial(rule, n + 1,
                       [&](double r) { return std::pow(bubble(ctx, r), ctx.p); }),
      n * n * (n - 4) / (ctx.yamabe * (n - 2)) * omega);

  add("int U U' r^n",
      integrate_radial(rule, n,
                       [&](double r) {
                         return bubble(ctx, r) * bubble_derivative(ctx, r);
                       }),
      -0.5 * n * omega);

  add("int (U')^2 r^{n+1}",
      integrate_radial(rule, n + 1,
                       [&](double r) {
                         return std::pow(bubble_derivative(ctx, r), 2);
                       }),
      n * (n * n - 4) / (4.0 * (n - 1)) * omega);

  add("int q1^2 r^{n+1}",
      integrate_radial(rule, n + 1,
                       [&](double r) {
                         return std::pow(radial_sources(ctx, r).q1, 2);
                       }),
      (n - 4) / (4.0 * (n - 1)) * omega);

  add("int q1 q2 r^{n+1}",
      integrate_radial(rule, n + 1,
                       [&](double r) {
                         const RadialSources s = radial_sources(ctx, r);
                         return s.q1 * s.q2;
                       }),
      0.0);

  add("int q2 U' r^{n-1}",
      integrate_radial(rule, n - 1,
                       [&](double r) {
                         return radial_sources(ctx, r).q2 *
                                bubble_derivative(ctx, r);
                       }),
      0.0);

  return report;
}

}  // namespace conic
