#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "conic/bubble.hpp"

namespace conic {

// Spectral description of the link: the Laplace eigenvalues carrying
// deformation data, with labels used as keys by XiDecomposition.
struct LinkMode {
  double lambda = 0.0;
  std::string label;
};

struct LinkSpectrum {
  int n = 0;
  double volume = 0.0;
  std::vector<LinkMode> modes;
  bool is_round_sphere = false;
};

// Validates positivity of the eigenvalues and the spectral gap:
// min lambda > n-1 off the round sphere, and membership in the
// sphere spectrum l(l+n-2) on it.  Throws incomplete_input_error.
void validate(const LinkSpectrum& link);

// Deformation direction xi = f h0 + Hess G + Lie part + tt part,
// stored spectrally: f and G by mode coefficients, the Lie and
// transverse-traceless parts through their invariant scalars.
struct TTData {
  double norm_sq = 0.0;
  double second_variation = 0.0;
};

struct XiDecomposition {
  std::map<std::string, double> f_coeffs;
  std::map<std::string, double> G_coeffs;
  double f_constant = 0.0;  // constant conformal mode, removed by gauge
  double lie_norm_sq = 0.0;
  TTData tt;
};

// Removes the constant mode of f; everything else unchanged.
XiDecomposition normalize_gauge(XiDecomposition xi);

// False exactly when xi is a pure conformal-gauge direction:
// f_k = G_k for every mode and no Lie or tt part.
bool xi_condition(const XiDecomposition& xi);

// Second variation of the normalized Einstein-Hilbert functional at
// the round link along xi:
//   (n-2)(n-3)/2 Vol^{-(n-3)/(n-1)} sum_k (lambda_k - (n-1)) f_k^2
//     + tt second variation,
// the Hessian and Lie parts contributing zero.
double second_variation_EH(const LinkSpectrum& link, const XiDecomposition& xi);

// int ((tr xi)^2 - |xi|^2) over the link:
//   (n-2)[sum lambda_k K_k^2 - sum (lambda_k-(n-1)) f_k^2]
//     - lie_norm_sq - tt_norm_sq,  K_k = f_k - G_k.
double trace_norm_term(const LinkSpectrum& link, const XiDecomposition& xi);

using BetaProvider = std::function<double(double lambda)>;

struct ModeContribution {
  std::string label;
  double lambda = 0.0;
  double K = 0.0;
  double beta = 0.0;
  double value = 0.0;
};

struct StabilityReport {
  int n = 0;
  double coefficient = 0.0;       // second-order quotient coefficient
  double raw_value = 0.0;         // assembled from the four raw blocks
  double reduced_value = 0.0;     // assembled after the cancellation
  double B = 0.0;                 // sum lambda_k K_k^2
  std::vector<ModeContribution> contributions;
  double lie_tt_penalty = 0.0;    // recorded global contribution
  double tt_variation_term = 0.0; // recorded global contribution
  int verdict_sign = 0;           // sign of the coefficient
  bool gauge_direction = false;   // xi_condition violated
  bool sphere_first_harmonic = false;  // outside-hypotheses flag
  double J = 0.0;                 // n = 4 only: the bracket before c^2
};

// Second-order coefficient for n >= 5, assembled both from the raw
// blocks and from the reduced form; the two must agree to 1e-10
// relative (resolution_error otherwise).  Throws dimension_error for
// n < 5 and incomplete_input_error when beta is unavailable for a
// mode with K != 0.
StabilityReport expansion_coefficient(const ConeContext& ctx,
                                      const LinkSpectrum& link,
                                      const XiDecomposition& xi,
                                      const BetaProvider& beta);

// Dimension-four coefficient: returns c^2 J(xi) with
//   J = sum lambda_k K_k^2 (1/2 - (2/3) lambda_k/(1+lambda_k))
//       - (1/4)(lie + tt) + (1/2) Vol^{1/3} tt_second_variation.
// Throws dimension_error for n != 4.
StabilityReport coefficient_n4(const LinkSpectrum& link,
                               const XiDecomposition& xi);

}  // namespace conic
