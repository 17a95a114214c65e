#pragma once

#include <stdexcept>
#include <string>

namespace conic {

struct dimension_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct divergent_constant_error : std::domain_error {
  using std::domain_error::domain_error;
};

struct degenerate_metric_error : std::domain_error {
  using std::domain_error::domain_error;
};

struct unsupported_family_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct incomplete_input_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct fit_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct resolution_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct spec_parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct positivity_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace conic
