#include "conic/expansion_verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include "conic/errors.hpp"
#include "conic/parallel.hpp"

namespace conic {

namespace {

double smoothstep(double v) { return ((6.0 * v - 15.0) * v + 10.0) * v * v * v; }

double smoothstep_derivative(double v) {
  return ((30.0 * v - 60.0) * v + 30.0) * v * v;
}

double cutoff(double s, double delta) {
  if (s <= delta) return 1.0;
  if (s >= 2.0 * delta) return 0.0;
  return 1.0 - smoothstep((s - delta) / delta);
}

double cutoff_derivative(double s, double delta) {
  if (s <= delta || s >= 2.0 * delta) return 0.0;
  return -smoothstep_derivative((s - delta) / delta) / delta;
}

double e_blend(double r) {
  if (r <= 1.0) return 0.0;
  if (r >= 2.0) return 1.0 / r;
  return smoothstep(r - 1.0) / r;
}

double e_blend_derivative(double r) {
  if (r <= 1.0) return 0.0;
  if (r >= 2.0) return -1.0 / (r * r);
  return smoothstep_derivative(r - 1.0) / r - smoothstep(r - 1.0) / (r * r);
}

struct SpectralData {
  LinkSpectrum link;
  XiDecomposition xi;
};

std::string mode_label(int ell) { return "zonal_" + std::to_string(ell); }

SpectralData spectral_data(const ZonalConformalFamily& fam) {
  SpectralData data;
  data.link.n = fam.n;
  data.link.volume = fam.link_volume();
  data.link.is_round_sphere = fam.quotient_order == 1;
  const double root_k = std::sqrt(static_cast<double>(fam.quotient_order));
  for (const auto& mode : fam.f.modes()) {
    LinkMode lm;
    lm.lambda = zonal_eigenvalue(fam.n, mode.ell);
    lm.label = mode_label(mode.ell);
    data.link.modes.push_back(lm);
    data.xi.f_coeffs[lm.label] = 2.0 * mode.amplitude / root_k;
  }
  return data;
}

struct QuotientIntegrals {
  double numerator = 0.0;
  double p_integral = 0.0;
};

QuotientIntegrals quotient_integrals(const ZonalConformalFamily& fam,
                                     const TestFunction& u) {
  const ConeContext& ctx = u.spec.ctx;
  const int n = ctx.n;
  const double eps = u.spec.eps;
  const PolarRule& rule = u.grid.rule;
  const int nr = rule.radial.count();
  const int na = rule.angular_count();
  std::vector<double> row_num(nr, 0.0), row_den(nr, 0.0);
  parallel_for(nr, [&](int i) {
    const double r = rule.radial.r[i];
    const double rpow = std::pow(r, n - 1);
    double acc_n = 0.0, acc_d = 0.0;
    for (int j = 0; j < na; ++j) {
      const double x = rule.x[j];
      const double s = eps * r;
      const double phi = conformal_factor(fam, s, x);
      const double val = u.grid.values[i * na + j];
      const double ddr = u.grid.d_r[i * na + j];
      const double ddx = u.grid.d_x[i * na + j];
      const double grad2 =
          ddr * ddr + (1.0 - x * x) * ddx * ddx / (r * r * phi * phi);
      const double R = eps * eps * scalar_curvature(fam, s, x);
      const double density = std::pow(phi, n - 1);
      acc_n += rule.wx[j] * (ctx.a * grad2 + R * val * val) * density;
      acc_d += rule.wx[j] * std::pow(std::abs(val), ctx.p) * density;
    }
    row_num[i] = rule.radial.w[i] * rpow * acc_n;
    row_den[i] = rule.radial.w[i] * rpow * acc_d;
  });
  const double link_factor = sphere_volume(n - 2) / fam.quotient_order;
  QuotientIntegrals out;
  for (int i = 0; i < nr; ++i) {
    out.numerator += row_num[i];
    out.p_integral += row_den[i];
  }
  out.numerator *= link_factor;
  out.p_integral *= link_factor;
  return out;
}

}  // namespace

double TestFunction::psi_value(double r, double x) const {
  if (spec.mode == CorrectionMode::none) return 0.0;
  const ConeContext& ctx = spec.ctx;
  const double root_k =
      std::sqrt(static_cast<double>(spec.family.quotient_order));
  double acc = psi1_radial(ctx, r) * 2.0 * spec.family.f.value(x);
  for (const auto& m : profiles) {
    if (spec.mode == CorrectionMode::psi)
      acc += m.K * root_k * m.radial.psi_at(r) * m.harmonic.value(x);
    else
      acc += ctx.c * e_blend(r) * m.helmholtz * root_k * m.harmonic.value(x);
  }
  return acc;
}

double TestFunction::psi_dr(double r, double x) const {
  if (spec.mode == CorrectionMode::none) return 0.0;
  const ConeContext& ctx = spec.ctx;
  const double root_k =
      std::sqrt(static_cast<double>(spec.family.quotient_order));
  double acc = psi1_radial_derivative(ctx, r) * 2.0 * spec.family.f.value(x);
  for (const auto& m : profiles) {
    if (spec.mode == CorrectionMode::psi)
      acc += m.K * root_k * m.radial.psi_derivative_at(r) * m.harmonic.value(x);
    else
      acc += ctx.c * e_blend_derivative(r) * m.helmholtz * root_k *
             m.harmonic.value(x);
  }
  return acc;
}

double TestFunction::psi_dx(double r, double x) const {
  if (spec.mode == CorrectionMode::none) return 0.0;
  const ConeContext& ctx = spec.ctx;
  const double root_k =
      std::sqrt(static_cast<double>(spec.family.quotient_order));
  double acc = psi1_radial(ctx, r) * 2.0 * spec.family.f.dx(x);
  for (const auto& m : profiles) {
    if (spec.mode == CorrectionMode::psi)
      acc += m.K * root_k * m.radial.psi_at(r) * m.harmonic.dx(x);
    else
      acc += ctx.c * e_blend(r) * m.helmholtz * root_k * m.harmonic.dx(x);
  }
  return acc;
}

double TestFunction::value(double r, double x) const {
  const double chi = cutoff(spec.eps * r, spec.delta);
  if (chi == 0.0) return 0.0;
  return chi * (bubble(spec.ctx, r) + spec.eps * psi_value(r, x));
}

double TestFunction::dr(double r, double x) const {
  const double s = spec.eps * r;
  const double chi = cutoff(s, spec.delta);
  const double dchi = spec.eps * cutoff_derivative(s, spec.delta);
  if (chi == 0.0 && dchi == 0.0) return 0.0;
  const double W = bubble(spec.ctx, r) + spec.eps * psi_value(r, x);
  const double Wr =
      bubble_derivative(spec.ctx, r) + spec.eps * psi_dr(r, x);
  return dchi * W + chi * Wr;
}

double TestFunction::dx(double r, double x) const {
  const double chi = cutoff(spec.eps * r, spec.delta);
  if (chi == 0.0) return 0.0;
  return chi * spec.eps * psi_dx(r, x);
}

TestFunction build_test_function(const TestFunctionSpec& spec) {
  const ConeContext& ctx = spec.ctx;
  const ZonalConformalFamily& fam = spec.family;
  if (ctx.n != fam.n)
    throw std::invalid_argument("build_test_function: dimension mismatch");
  if (!(spec.eps > 0.0) || !(spec.delta > 0.0))
    throw std::invalid_argument("build_test_function: eps and delta must be positive");
  if (spec.eps > spec.delta / 10.0)
    throw std::invalid_argument(
        "build_test_function: scale separation requires eps <= delta/10");
  if (!(2.0 * spec.delta <= fam.s_max()))
    throw std::invalid_argument(
        "build_test_function: cutoff requires 2 delta <= s_max");
  if (spec.mode == CorrectionMode::psi && ctx.n < 5)
    throw incomplete_input_error(
        "build_test_function: radial mode profiles need n >= 5; use the "
        "Helmholtz correction in dimension 4");
  if (spec.mode == CorrectionMode::psi_hat && ctx.n != 4)
    throw incomplete_input_error(
        "build_test_function: the Helmholtz correction is the n = 4 form");

  TestFunction out;
  out.spec = spec;
  SpectralData data = spectral_data(fam);
  out.link = std::move(data.link);
  out.xi = std::move(data.xi);

  if (spec.mode != CorrectionMode::none) {
    const double root_k =
        std::sqrt(static_cast<double>(fam.quotient_order));
    for (const auto& mode : fam.f.modes()) {
      TestFunction::ModeProfile mp;
      mp.ell = mode.ell;
      mp.lambda = zonal_eigenvalue(ctx.n, mode.ell);
      mp.K = 2.0 * mode.amplitude / root_k;
      mp.harmonic = ZonalProfile(ctx.n, {{mode.ell, 1.0}});
      if (spec.mode == CorrectionMode::psi) {
        ModeProblem problem;
        problem.ctx = ctx;
        problem.lambda = mp.lambda;
        mp.radial = solve_mode(problem);
      } else {
        mp.helmholtz =
            -(2.0 / ctx.a) * mp.lambda / (1.0 + mp.lambda) * mp.K;
      }
      out.profiles.push_back(std::move(mp));
    }
  }

  const double R1 = spec.delta / spec.eps;
  const double R2 = 2.0 * spec.delta / spec.eps;
  const std::vector<double> breaks =
      ctx.n == 4 ? std::vector<double>{0.0, 1.0, 2.0, R1, R2}
                 : std::vector<double>{0.0, R1, R2};
  const PolarRule rule = polar_rule_panels(ctx.n, breaks,
                                           spec.radial_panel_count,
                                           spec.angular_count);
  out.grid = make_grid_function(rule);
  out.grid.d_r.assign(out.grid.values.size(), 0.0);
  out.grid.d_x.assign(out.grid.values.size(), 0.0);
  out.grid.support_s = 2.0 * spec.delta;
  const int na = rule.angular_count();
  parallel_for(rule.radial.count(), [&](int i) {
    const double r = rule.radial.r[i];
    for (int j = 0; j < na; ++j) {
      const double x = rule.x[j];
      out.grid.values[i * na + j] = out.value(r, x);
      out.grid.d_r[i * na + j] = out.dr(r, x);
      out.grid.d_x[i * na + j] = out.dx(r, x);
    }
  });

  for (int i = 0; i < rule.radial.count(); ++i) {
    if (spec.eps * rule.radial.r[i] > spec.delta) continue;
    for (int j = 0; j < na; ++j)
      if (!(out.grid.values[i * na + j] > 0.0))
        throw positivity_error(
            "build_test_function: U + eps Psi loses positivity inside the "
            "cutoff ball; eps is too large");
  }
  return out;
}

QuotientSample yamabe_quotient(const ZonalConformalFamily& fam,
                               const TestFunction& u, double eps) {
  if (eps != u.spec.eps)
    throw std::invalid_argument(
        "yamabe_quotient: eps must match the test function scale");
  if (!(u.grid.support_s <= fam.s_max()))
    throw std::domain_error(
        "yamabe_quotient: support leaves the cone chart");
  const int n = u.spec.ctx.n;
  const QuotientIntegrals ints = quotient_integrals(fam, u);
  QuotientSample sample;
  sample.eps = eps;
  sample.numerator = ints.numerator;
  sample.denominator = std::pow(ints.p_integral, (n - 2.0) / n);
  sample.Q = sample.numerator / sample.denominator;
  return sample;
}

QuotientSample yamabe_quotient_unscaled(const ZonalConformalFamily& fam,
                                        const TestFunction& u, double eps) {
  if (eps != u.spec.eps)
    throw std::invalid_argument(
        "yamabe_quotient_unscaled: eps must match the test function scale");
  if (!(u.grid.support_s <= fam.s_max()))
    throw std::domain_error(
        "yamabe_quotient_unscaled: support leaves the cone chart");
  const ConeContext& ctx = u.spec.ctx;
  const int n = ctx.n;
  const PolarRule& rule = u.grid.rule;
  const int nr = rule.radial.count();
  const int na = rule.angular_count();
  const double pref = std::pow(eps, -(n - 2.0) / 2.0);
  std::vector<double> row_num(nr, 0.0), row_den(nr, 0.0);
  parallel_for(nr, [&](int i) {
    const double r = rule.radial.r[i];
    const double s = eps * r;
    const double spow = std::pow(s, n - 1);
    double acc_n = 0.0, acc_d = 0.0;
    for (int j = 0; j < na; ++j) {
      const double x = rule.x[j];
      const double phi = conformal_factor(fam, s, x);
      const double val = pref * u.value(r, x);
      const double dds = pref * u.dr(r, x) / eps;
      const double ddx = pref * u.dx(r, x);
      const double grad2 =
          dds * dds + (1.0 - x * x) * ddx * ddx / (s * s * phi * phi);
      const double R = scalar_curvature(fam, s, x);
      const double density = std::pow(phi, n - 1);
      acc_n += rule.wx[j] * (ctx.a * grad2 + R * val * val) * density;
      acc_d += rule.wx[j] * std::pow(std::abs(val), ctx.p) * density;
    }
    row_num[i] = eps * rule.radial.w[i] * spow * acc_n;
    row_den[i] = eps * rule.radial.w[i] * spow * acc_d;
  });
  const double link_factor = sphere_volume(n - 2) / fam.quotient_order;
  double num = 0.0, den = 0.0;
  for (int i = 0; i < nr; ++i) {
    num += row_num[i];
    den += row_den[i];
  }
  num *= link_factor;
  den *= link_factor;
  QuotientSample sample;
  sample.eps = eps;
  sample.numerator = num;
  sample.denominator = std::pow(den, (n - 2.0) / n);
  sample.Q = sample.numerator / sample.denominator;
  return sample;
}

ComparisonReport verify_expansion(const ConeContext& ctx,
                                  const ZonalConformalFamily& fam,
                                  std::vector<double> eps_list, double delta,
                                  double fit_tolerance, CorrectionMode mode,
                                  int radial_panel_count, int angular_count) {
  if (ctx.n != 4 && ctx.n != 5)
    throw dimension_error(
        "verify_expansion: end-to-end quadrature covers n in {4, 5}");
  if (ctx.n != fam.n)
    throw std::invalid_argument("verify_expansion: dimension mismatch");
  if (std::abs(ctx.link_volume - fam.link_volume()) >
      1e-12 * std::max(1.0, fam.link_volume()))
    throw std::invalid_argument(
        "verify_expansion: context volume differs from the family link volume");
  if (ctx.n == 4 && mode == CorrectionMode::psi) mode = CorrectionMode::psi_hat;

  std::sort(eps_list.begin(), eps_list.end(), std::greater<double>());

  ComparisonReport report;
  report.n = ctx.n;
  report.yamabe = ctx.yamabe;
  report.delta = delta;
  report.model = ctx.n == 5 ? FitModel::cubic : FitModel::log;

  const SpectralData data = spectral_data(fam);
  if (ctx.n == 5) {
    const BetaProvider provider = [&ctx](double lambda) {
      return beta_value(ctx, lambda, 8000);
    };
    report.predicted =
        expansion_coefficient(ctx, data.link, data.xi, provider).coefficient;
  } else {
    report.predicted = coefficient_n4(data.link, data.xi).coefficient;
  }

  std::vector<std::pair<double, double>> pairs;
  for (double eps : eps_list) {
    TestFunctionSpec spec;
    spec.ctx = ctx;
    spec.family = fam;
    spec.eps = eps;
    spec.delta = delta;
    spec.mode = mode;
    spec.radial_panel_count = radial_panel_count;
    spec.angular_count = angular_count;
    const TestFunction u = build_test_function(spec);
    const QuotientSample sample = yamabe_quotient(fam, u, eps);
    report.samples.push_back(sample);
    pairs.emplace_back(eps, sample.Q);
  }

  const ExpansionFit fit = fit_expansion(pairs, ctx.yamabe, report.model);
  report.fitted = fit.leading();
  report.fitted_secondary =
      fit.coefficients.size() > 1 ? fit.coefficients[1] : 0.0;
  report.fit_residual = fit.residual;

  if (std::abs(report.predicted) > 1e-12)
    report.rel_err = std::abs(report.fitted / report.predicted - 1.0);
  else
    report.rel_err = std::abs(report.fitted);
  report.within_tolerance = report.rel_err <= fit_tolerance;

  double max_dev = 0.0;
  for (const auto& s : report.samples)
    max_dev = std::max(max_dev, std::abs(s.Q - ctx.yamabe));
  report.inconclusive = max_dev > 0.0 && fit.residual > 0.02 * max_dev;

  report.all_below_yamabe = true;
  for (const auto& s : report.samples)
    if (!(s.Q < ctx.yamabe)) report.all_below_yamabe = false;

  report.monotone_approach = true;
  const double floor = 1e-9 * std::max(1.0, std::abs(ctx.yamabe));
  double prev = std::numeric_limits<double>::infinity();
  for (const auto& s : report.samples) {
    const double lead =
        ctx.n == 4 ? report.predicted * s.eps * s.eps * std::log(delta / s.eps)
                   : report.predicted * s.eps * s.eps;
    const double res = std::abs(s.Q - ctx.yamabe - lead);
    if (res > 1.1 * prev + floor) report.monotone_approach = false;
    prev = res;
  }
  return report;
}

DenominatorReport denominator_check(const ConeContext& ctx,
                                    const ZonalConformalFamily& fam,
                                    std::vector<double> eps_list,
                                    double delta) {
  if (ctx.n < 5)
    throw dimension_error("denominator_check: the expansion lemma needs n >= 5");
  if (ctx.n != fam.n)
    throw std::invalid_argument("denominator_check: dimension mismatch");
  std::sort(eps_list.begin(), eps_list.end(), std::greater<double>());
  if (eps_list.empty())
    throw std::invalid_argument("denominator_check: empty eps list");

  const int n = ctx.n;
  DenominatorReport report;

  TestFunctionSpec base_spec;
  base_spec.ctx = ctx;
  base_spec.family = fam;
  base_spec.eps = eps_list.front();
  base_spec.delta = delta;
  base_spec.mode = CorrectionMode::psi;
  const TestFunction shape = build_test_function(base_spec);

  {
    const PolarRule rule = polar_rule(n, 800, base_spec.angular_count);
    const double link_factor = sphere_volume(n - 2) / fam.quotient_order;
    const double c1 = n * (n + 2.0) / ((n - 2.0) * (n - 2.0));
    const double c2 = 2.0 * n / (n - 2.0);
    report.predicted_second_order =
        link_factor *
        integrate_polar(rule, [&](double r, double x) {
          const double U = bubble(ctx, r);
          const double psi = shape.psi_value(r, x);
          const double m1 = measure_first_order(fam, r, x);
          const double m2 = measure_second_order(fam, r, x);
          return c1 * psi * psi * std::pow(U, 4.0 / (n - 2.0)) +
                 c2 * psi * std::pow(U, (n + 2.0) / (n - 2.0)) * m1 +
                 std::pow(U, ctx.p) * m2;
        });
  }

  std::vector<double> xs, ys;
  for (double eps : eps_list) {
    TestFunctionSpec spec = base_spec;
    spec.eps = eps;
    const TestFunction u = build_test_function(spec);
    const QuotientIntegrals ints = quotient_integrals(fam, u);
    QuotientSample sample;
    sample.eps = eps;
    sample.Q = ints.p_integral;
    sample.denominator = std::pow(ints.p_integral, (n - 2.0) / n);
    report.samples.push_back(sample);
    xs.push_back(eps);
    ys.push_back(ints.p_integral - 1.0);
  }

  const std::vector<std::function<double(double)>> basis = {
      [](double e) { return e; },
      [](double e) { return e * e; },
      [](double e) { return e * e * e; }};
  const std::vector<double> coef = least_squares_fit(xs, ys, basis);
  report.fitted_first_order = coef[0];
  report.fitted_second_order = coef[1];
  if (std::abs(report.predicted_second_order) > 1e-12)
    report.rel_err =
        std::abs(report.fitted_second_order / report.predicted_second_order -
                 1.0);
  else
    report.rel_err = std::abs(report.fitted_second_order);
  return report;
}

}  // namespace conic
