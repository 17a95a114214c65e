#pragma once

#include <optional>
#include <string>

#include "conic/cone_geometry.hpp"
#include "conic/stability_form.hpp"

namespace conic {

// Parsed contents of a link/deformation spec file:
//   {
//     "dimension": 5,
//     "link": {"kind": "round_sphere" | "sphere_quotient" | "spectral",
//              "volume": ..., "quotient_order": k,
//              "modes": [{"lambda": ..., "label": "..."}]},
//     "xi": {"conformal": [{"label": "...", "coeff": ...}],
//            "hessian":   [{"label": "...", "coeff": ...}],
//            "constant": 0.0, "lie_norm_sq": 0.0,
//            "tt": {"norm_sq": 0.0, "second_variation": 0.0}},
//     "family": {"zonal_profile": [{"ell": 2, "amplitude": 0.1}]}
//   }
// Unknown keys anywhere are rejected.
struct LinkSpecFile {
  int dimension = 0;
  LinkSpectrum link;
  XiDecomposition xi;
  std::optional<ZonalConformalFamily> family;
};

// Throws spec_parse_error on malformed JSON, unknown keys, missing
// required fields, or invariant violations.
LinkSpecFile parse_link_spec(const std::string& json_text);
LinkSpecFile load_link_spec(const std::string& path);

}  // namespace conic
