#pragma once

#include <optional>
#include <string>
#include <vector>

#include "conic/bubble.hpp"
#include "conic/cone_geometry.hpp"
#include "conic/quadrature.hpp"
#include "conic/radial_solver.hpp"
#include "conic/stability_form.hpp"

namespace conic {

enum class CorrectionMode { none, psi, psi_hat };

struct TestFunctionSpec {
  ConeContext ctx;
  ZonalConformalFamily family;
  double eps = 0.0;
  double delta = 0.0;
  CorrectionMode mode = CorrectionMode::psi;
  int radial_panel_count = 2000;
  int angular_count = 160;
};

// The assembled test function chi(eps r) (U(r) + eps Psi(r, x)),
// carried both as analytic evaluators and sampled on its panel rule.
struct TestFunction {
  TestFunctionSpec spec;
  ZonalGridFunction grid;  // values with analytic d_r, d_x grids
  // Spectral data the corrector realizes, for the prediction bridge.
  LinkSpectrum link;
  XiDecomposition xi;
  double value(double r, double x) const;
  double dr(double r, double x) const;
  double dx(double r, double x) const;

  // Mode profiles: radial corrector factors per link mode.
  struct ModeProfile {
    double lambda = 0.0;
    double K = 0.0;
    int ell = 0;
    RadialSolution radial;   // n >= 5
    double helmholtz = 0.0;  // n = 4 angular amplitude
    ZonalProfile harmonic;   // unit-amplitude zonal harmonic of degree ell
  };
  std::vector<ModeProfile> profiles;
  double psi_value(double r, double x) const;
  double psi_dr(double r, double x) const;
  double psi_dx(double r, double x) const;
};

// Builds the test function for the family's own deformation data
// (xi = 2 f h0, so K = 2 f mode by mode).  Radial mode profiles are
// solved on demand (n >= 5) or assembled from the Helmholtz form
// (n = 4).  Throws positivity_error when U + eps Psi is not positive
// on {r <= delta/eps}, incomplete_input_error when profiles are
// missing, and std::invalid_argument when the scale invariants
// eps <= delta/10 and 2 delta <= s_max fail.
TestFunction build_test_function(const TestFunctionSpec& spec);

struct QuotientSample {
  double eps = 0.0;
  double numerator = 0.0;
  double denominator = 0.0;  // L^{2n/(n-2)} norm squared
  double Q = 0.0;
};

// Evaluates the Yamabe quotient of the test function on the blown-up
// cone g_eps by panel quadrature, in the gradient form.  Throws
// std::domain_error when the grid support leaves {s <= 2 delta}.
QuotientSample yamabe_quotient(const ZonalConformalFamily& fam,
                               const TestFunction& u, double eps);

// Same quotient evaluated in the unscaled coordinates s = eps r; used
// to check the rescaling identity.
QuotientSample yamabe_quotient_unscaled(const ZonalConformalFamily& fam,
                                        const TestFunction& u, double eps);

struct ComparisonReport {
  int n = 0;
  double yamabe = 0.0;      // Y_P baseline
  double predicted = 0.0;   // stability_form coefficient
  double fitted = 0.0;      // leading fitted coefficient
  double fitted_secondary = 0.0;  // second coefficient when present
  double rel_err = 0.0;
  double fit_residual = 0.0;
  bool within_tolerance = false;
  bool inconclusive = false;      // residual budget exceeded
  bool all_below_yamabe = false;  // every sample Q < Y_P
  bool monotone_approach = false;
  std::vector<QuotientSample> samples;
  FitModel model = FitModel::plain;
  double delta = 0.0;
};

// End-to-end comparison for n in {4, 5}: quotient samples at the
// given eps list, fit (cubic model for n = 5, log model for n = 4),
// and comparison against the formula-level prediction.
ComparisonReport verify_expansion(const ConeContext& ctx,
                                  const ZonalConformalFamily& fam,
                                  std::vector<double> eps_list, double delta,
                                  double fit_tolerance = 0.02,
                                  CorrectionMode mode = CorrectionMode::psi,
                                  int radial_panel_count = 2000,
                                  int angular_count = 160);

struct DenominatorReport {
  double predicted_second_order = 0.0;
  double fitted_second_order = 0.0;
  double fitted_first_order = 0.0;
  double rel_err = 0.0;
  std::vector<QuotientSample> samples;  // denominator in the Q slot
};

// Critical-norm expansion check for n >= 5: fits
// denominator(eps) = 1 + c1 eps + c2 eps^2 + c3 eps^3 and compares c2
// against the quadrature of the predicted integrand; c1 must vanish.
DenominatorReport denominator_check(const ConeContext& ctx,
                                    const ZonalConformalFamily& fam,
                                    std::vector<double> eps_list, double delta);

}  // namespace conic
