#include "conic/stability_form.hpp"

#include <algorithm>
#include <cmath>

#include "conic/errors.hpp"

namespace conic {

namespace {

double mode_lambda(const LinkSpectrum& link, const std::string& label) {
  for (const auto& m : link.modes)
    if (m.label == label) return m.lambda;
  throw incomplete_input_error("unknown mode label: " + label);
}

struct ModeData {
  std::string label;
  double lambda = 0.0;
  double f = 0.0;
  double G = 0.0;
  double K = 0.0;
};

std::vector<ModeData> collect_modes(const LinkSpectrum& link,
                                    const XiDecomposition& xi) {
  std::vector<ModeData> out;
  for (const auto& [label, coeff] : xi.f_coeffs) {
    ModeData d;
    d.label = label;
    d.lambda = mode_lambda(link, label);
    d.f = coeff;
    out.push_back(d);
  }
  for (const auto& [label, coeff] : xi.G_coeffs) {
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const ModeData& d) { return d.label == label; });
    if (it == out.end()) {
      ModeData d;
      d.label = label;
      d.lambda = mode_lambda(link, label);
      d.G = coeff;
      out.push_back(d);
    } else {
      it->G = coeff;
    }
  }
  for (auto& d : out) d.K = d.f - d.G;
  std::sort(out.begin(), out.end(),
            [](const ModeData& a, const ModeData& b) { return a.label < b.label; });
  return out;
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

void validate(const LinkSpectrum& link) {
  if (link.n < 4) throw dimension_error("LinkSpectrum: n must be at least 4");
  if (!(link.volume > 0.0))
    throw incomplete_input_error("LinkSpectrum: volume must be positive");
  for (const auto& m : link.modes) {
    if (!(m.lambda > 0.0))
      throw incomplete_input_error("LinkSpectrum: eigenvalues must be positive");
    if (m.label.empty())
      throw incomplete_input_error("LinkSpectrum: modes need labels");
    if (link.is_round_sphere) {
      bool in_spectrum = false;
      for (int ell = 1; ell * (ell + link.n - 2.0) <= m.lambda + 1.0; ++ell) {
        const double lam = static_cast<double>(ell) * (ell + link.n - 2);
        if (near(m.lambda, lam)) {
          in_spectrum = true;
          break;
        }
      }
      if (!in_spectrum)
        throw incomplete_input_error(
            "LinkSpectrum: round-sphere eigenvalue off the sphere spectrum");
    } else if (!(m.lambda > link.n - 1.0)) {
      throw incomplete_input_error(
          "LinkSpectrum: spectral gap requires lambda > n-1 off the sphere");
    }
  }
}

XiDecomposition normalize_gauge(XiDecomposition xi) {
  xi.f_constant = 0.0;
  return xi;
}

bool xi_condition(const XiDecomposition& xi) {
  if (xi.lie_norm_sq != 0.0 || xi.tt.norm_sq != 0.0) return true;
  auto pure = [&]() {
    for (const auto& [label, f] : xi.f_coeffs) {
      double G = 0.0;
      if (auto it = xi.G_coeffs.find(label); it != xi.G_coeffs.end())
        G = it->second;
      if (std::abs(f - G) > 1e-14 * std::max({1.0, std::abs(f), std::abs(G)}))
        return false;
    }
    for (const auto& [label, G] : xi.G_coeffs) {
      if (xi.f_coeffs.count(label)) continue;
      if (std::abs(G) > 1e-14) return false;
    }
    return true;
  };
  return !pure();
}

double second_variation_EH(const LinkSpectrum& link, const XiDecomposition& xi) {
  validate(link);
  const int n = link.n;
  double sum = 0.0;
  for (const auto& [label, f] : xi.f_coeffs)
    sum += (mode_lambda(link, label) - (n - 1.0)) * f * f;
  const double volpow =
      std::pow(link.volume, -static_cast<double>(n - 3) / (n - 1));
  return 0.5 * (n - 2.0) * (n - 3.0) * volpow * sum + xi.tt.second_variation;
}

double trace_norm_term(const LinkSpectrum& link, const XiDecomposition& xi) {
  validate(link);
  const int n = link.n;
  const auto modes = collect_modes(link, xi);
  double sum_lambda_K = 0.0, sum_gap_f = 0.0;
  for (const auto& d : modes) {
    sum_lambda_K += d.lambda * d.K * d.K;
    sum_gap_f += (d.lambda - (n - 1.0)) * d.f * d.f;
  }
  return (n - 2.0) * (sum_lambda_K - sum_gap_f) - xi.lie_norm_sq -
         xi.tt.norm_sq;
}

StabilityReport expansion_coefficient(const ConeContext& ctx,
                                      const LinkSpectrum& link,
                                      const XiDecomposition& xi,
                                      const BetaProvider& beta) {
  if (ctx.n < 5)
    throw dimension_error("expansion_coefficient: requires n >= 5");
  if (ctx.n != link.n)
    throw std::invalid_argument("expansion_coefficient: dimension mismatch");
  validate(link);
  const XiDecomposition nxi = normalize_gauge(xi);
  const int n = ctx.n;
  const double omega = ctx.omega();
  const auto modes = collect_modes(link, nxi);

  StabilityReport report;
  report.n = n;
  report.gauge_direction = !xi_condition(nxi);

  double reduced = 0.0;
  double B = 0.0;
  double sum_gap_f = 0.0;
  double sum_lambda_K_beta = 0.0;
  for (const auto& d : modes) {
    B += d.lambda * d.K * d.K;
    sum_gap_f += (d.lambda - (n - 1.0)) * d.f * d.f;
    ModeContribution mc;
    mc.label = d.label;
    mc.lambda = d.lambda;
    mc.K = d.K;
    mc.beta = (d.K != 0.0) ? beta(d.lambda) : 0.0;
    if (d.K != 0.0 && !std::isfinite(mc.beta))
      throw incomplete_input_error(
          "expansion_coefficient: beta unavailable for mode " + d.label);
    sum_lambda_K_beta += d.lambda * d.K * d.K * mc.beta;
    mc.value = d.lambda * d.K * d.K * (omega * (n - 2.0) / 4.0 - mc.beta);
    reduced += mc.value;
    report.contributions.push_back(mc);
    if (link.is_round_sphere && near(d.lambda, n - 1.0) && d.K != 0.0)
      report.sphere_first_harmonic = true;
  }
  const double volpow =
      std::pow(link.volume, static_cast<double>(n - 3) / (n - 1));
  report.tt_variation_term = 0.5 * omega * volpow * nxi.tt.second_variation;
  report.lie_tt_penalty = -0.25 * omega * (nxi.lie_norm_sq + nxi.tt.norm_sq);
  reduced += report.tt_variation_term;
  reduced += report.lie_tt_penalty;

  const double psi1_block = (n - 2.0) * (n - 4.0) * omega / 4.0 * sum_gap_f;
  const double raw = -psi1_block - sum_lambda_K_beta +
                     0.5 * omega * volpow * second_variation_EH(link, nxi) +
                     0.25 * omega * trace_norm_term(link, nxi);

  report.B = B;
  report.raw_value = raw;
  report.reduced_value = reduced;
  report.coefficient = reduced;

  const double scale = std::max({std::abs(raw), std::abs(reduced),
                                 std::abs(psi1_block), omega * std::abs(B),
                                 1e-30});
  if (std::abs(raw - reduced) > 1e-10 * scale)
    throw resolution_error(
        "expansion_coefficient: raw and reduced assemblies disagree");

  const double zero_tol = 1e-12 * std::max(scale, 1.0);
  report.verdict_sign =
      (report.coefficient > zero_tol) ? 1 : (report.coefficient < -zero_tol ? -1 : 0);
  return report;
}

StabilityReport coefficient_n4(const LinkSpectrum& link,
                               const XiDecomposition& xi) {
  if (link.n != 4) throw dimension_error("coefficient_n4: requires n = 4");
  validate(link);
  const XiDecomposition nxi = normalize_gauge(xi);
  const auto modes = collect_modes(link, nxi);

  StabilityReport report;
  report.n = 4;
  report.gauge_direction = !xi_condition(nxi);

  double J = 0.0, B = 0.0;
  for (const auto& d : modes) {
    B += d.lambda * d.K * d.K;
    ModeContribution mc;
    mc.label = d.label;
    mc.lambda = d.lambda;
    mc.K = d.K;
    mc.value =
        d.lambda * d.K * d.K * (0.5 - (2.0 / 3.0) * d.lambda / (1.0 + d.lambda));
    J += mc.value;
    report.contributions.push_back(mc);
    if (link.is_round_sphere && near(d.lambda, 3.0) && d.K != 0.0)
      report.sphere_first_harmonic = true;
  }
  report.tt_variation_term =
      0.5 * std::pow(link.volume, 1.0 / 3.0) * nxi.tt.second_variation;
  report.lie_tt_penalty = -0.25 * (nxi.lie_norm_sq + nxi.tt.norm_sq);
  J += report.tt_variation_term;
  J += report.lie_tt_penalty;

  const ConeContext ctx = make_context(4, link.volume);
  report.J = J;
  report.B = B;
  report.coefficient = ctx.c * ctx.c * J;
  report.raw_value = report.coefficient;
  report.reduced_value = report.coefficient;
  const double zero_tol = 1e-12 * std::max(std::abs(B) + nxi.lie_norm_sq +
                                               nxi.tt.norm_sq,
                                           1.0);
  report.verdict_sign =
      (report.coefficient > zero_tol) ? 1 : (report.coefficient < -zero_tol ? -1 : 0);
  return report;
}

}  // namespace conic
