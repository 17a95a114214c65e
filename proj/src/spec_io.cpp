#include "conic/spec_io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "conic/errors.hpp"

namespace conic {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!allowed.count(key))
      throw spec_parse_error("unknown key \"" + key + "\" in " + where);
  }
}

const json& require(const json& obj, const std::string& key,
                    const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw spec_parse_error("missing key \"" + key + "\" in " + where);
  return *it;
}

double number_at(const json& v, const std::string& where) {
  if (!v.is_number())
    throw spec_parse_error(where + " must be a number");
  return v.get<double>();
}

int integer_at(const json& v, const std::string& where) {
  if (!v.is_number_integer())
    throw spec_parse_error(where + " must be an integer");
  return v.get<int>();
}

std::string string_at(const json& v, const std::string& where) {
  if (!v.is_string())
    throw spec_parse_error(where + " must be a string");
  return v.get<std::string>();
}

std::map<std::string, double> coeff_list(const json& arr,
                                         const LinkSpectrum& link,
                                         const std::string& where) {
  if (!arr.is_array())
    throw spec_parse_error(where + " must be an array");
  std::map<std::string, double> out;
  for (const auto& entry : arr) {
    if (!entry.is_object())
      throw spec_parse_error(where + " entries must be objects");
    check_keys(entry, {"label", "coeff"}, where);
    const std::string label = string_at(require(entry, "label", where),
                                        where + ".label");
    const double coeff =
        number_at(require(entry, "coeff", where), where + ".coeff");
    bool known = false;
    for (const auto& m : link.modes)
      if (m.label == label) known = true;
    if (!known)
      throw spec_parse_error(where + " references unknown mode label \"" +
                             label + "\"");
    if (out.count(label))
      throw spec_parse_error(where + " repeats label \"" + label + "\"");
    out[label] = coeff;
  }
  return out;
}

}  // namespace

LinkSpecFile parse_link_spec(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw spec_parse_error(std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object())
    throw spec_parse_error("spec root must be an object");
  check_keys(root, {"dimension", "link", "xi", "family"}, "spec root");

  LinkSpecFile out;
  out.dimension = integer_at(require(root, "dimension", "spec root"),
                             "dimension");

  const json& link = require(root, "link", "spec root");
  if (!link.is_object()) throw spec_parse_error("link must be an object");
  check_keys(link, {"kind", "volume", "quotient_order", "modes"}, "link");
  const std::string kind = string_at(require(link, "kind", "link"),
                                     "link.kind");
  int quotient_order = 1;
  out.link.n = out.dimension;
  if (kind == "round_sphere") {
    if (link.contains("volume") || link.contains("quotient_order"))
      throw spec_parse_error(
          "round_sphere link fixes its own volume; no volume or "
          "quotient_order keys");
    out.link.volume = sphere_volume(out.dimension - 1);
    out.link.is_round_sphere = true;
  } else if (kind == "sphere_quotient") {
    if (link.contains("volume"))
      throw spec_parse_error(
          "sphere_quotient link takes quotient_order, not volume");
    quotient_order = integer_at(
        require(link, "quotient_order", "link"), "link.quotient_order");
    if (quotient_order < 2)
      throw spec_parse_error("link.quotient_order must be at least 2");
    out.link.volume = sphere_volume(out.dimension - 1) / quotient_order;
    out.link.is_round_sphere = false;
  } else if (kind == "spectral") {
    if (link.contains("quotient_order"))
      throw spec_parse_error("spectral link takes volume, not quotient_order");
    out.link.volume = number_at(require(link, "volume", "link"),
                                "link.volume");
    out.link.is_round_sphere = false;
  } else {
    throw spec_parse_error("link.kind must be round_sphere, sphere_quotient, "
                           "or spectral");
  }

  const json& modes = require(link, "modes", "link");
  if (!modes.is_array())
    throw spec_parse_error("link.modes must be an array");
  for (const auto& entry : modes) {
    if (!entry.is_object())
      throw spec_parse_error("link.modes entries must be objects");
    check_keys(entry, {"lambda", "label"}, "link.modes");
    LinkMode m;
    m.lambda = number_at(require(entry, "lambda", "link.modes"),
                         "link.modes.lambda");
    m.label = string_at(require(entry, "label", "link.modes"),
                        "link.modes.label");
    for (const auto& other : out.link.modes)
      if (other.label == m.label)
        throw spec_parse_error("link.modes repeats label \"" + m.label + "\"");
    out.link.modes.push_back(m);
  }

  const json& xi = require(root, "xi", "spec root");
  if (!xi.is_object()) throw spec_parse_error("xi must be an object");
  check_keys(xi, {"conformal", "hessian", "constant", "lie_norm_sq", "tt"},
             "xi");
  if (xi.contains("conformal"))
    out.xi.f_coeffs = coeff_list(xi["conformal"], out.link, "xi.conformal");
  if (xi.contains("hessian"))
    out.xi.G_coeffs = coeff_list(xi["hessian"], out.link, "xi.hessian");
  if (xi.contains("constant"))
    out.xi.f_constant = number_at(xi["constant"], "xi.constant");
  if (xi.contains("lie_norm_sq")) {
    out.xi.lie_norm_sq = number_at(xi["lie_norm_sq"], "xi.lie_norm_sq");
    if (out.xi.lie_norm_sq < 0.0)
      throw spec_parse_error("xi.lie_norm_sq must be nonnegative");
  }
  if (xi.contains("tt")) {
    const json& tt = xi["tt"];
    if (!tt.is_object()) throw spec_parse_error("xi.tt must be an object");
    check_keys(tt, {"norm_sq", "second_variation"}, "xi.tt");
    if (tt.contains("norm_sq")) {
      out.xi.tt.norm_sq = number_at(tt["norm_sq"], "xi.tt.norm_sq");
      if (out.xi.tt.norm_sq < 0.0)
        throw spec_parse_error("xi.tt.norm_sq must be nonnegative");
    }
    if (tt.contains("second_variation"))
      out.xi.tt.second_variation =
          number_at(tt["second_variation"], "xi.tt.second_variation");
  }

  if (root.contains("family")) {
    if (kind == "spectral")
      throw spec_parse_error(
          "a zonal family needs a sphere or sphere-quotient link");
    const json& fam = root["family"];
    if (!fam.is_object()) throw spec_parse_error("family must be an object");
    check_keys(fam, {"zonal_profile"}, "family");
    const json& prof = require(fam, "zonal_profile", "family");
    if (!prof.is_array())
      throw spec_parse_error("family.zonal_profile must be an array");
    std::vector<ZonalMode> fmodes;
    for (const auto& entry : prof) {
      if (!entry.is_object())
        throw spec_parse_error("family.zonal_profile entries must be objects");
      check_keys(entry, {"ell", "amplitude"}, "family.zonal_profile");
      ZonalMode zm;
      zm.ell = integer_at(require(entry, "ell", "family.zonal_profile"),
                          "family.zonal_profile.ell");
      if (zm.ell < 1)
        throw spec_parse_error("family.zonal_profile.ell must be >= 1");
      zm.amplitude = number_at(
          require(entry, "amplitude", "family.zonal_profile"),
          "family.zonal_profile.amplitude");
      fmodes.push_back(zm);
    }
    try {
      out.family = make_family(out.dimension, fmodes, quotient_order);
    } catch (const std::exception& e) {
      throw spec_parse_error(std::string("invalid family: ") + e.what());
    }
  }

  try {
    validate(out.link);
  } catch (const std::exception& e) {
    throw spec_parse_error(std::string("invalid link spectrum: ") + e.what());
  }
  return out;
}

LinkSpecFile load_link_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw spec_parse_error("cannot read spec file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_link_spec(buf.str());
}

}  // namespace conic
