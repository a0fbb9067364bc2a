#pragma once

#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "recpipe/rng.hpp"

namespace recpipe {

// Hyperparameter values are numbers or names (e.g. similarity kernels).
using ParamValue = std::variant<double, std::string>;

std::string param_value_text(const ParamValue& v);

// One hyperparameter domain. LogUniform stores the exponent bounds as given
// in the configuration: sampling draws the exponent uniformly and returns
// e^exponent, so the support is [e^lo, e^hi].
struct SearchDomain {
  enum class Kind { Fix, Choice, Uniform, LogUniform, QUniform, Normal };

  Kind kind = Kind::Fix;
  std::vector<ParamValue> values;  // Fix: exactly one; Choice: one or more
  double lo = 0.0, hi = 0.0;       // Uniform/QUniform bounds, LogUniform exponents
  double q = 0.0;                  // QUniform quantum
  double mu = 0.0, sigma = 0.0;    // Normal

  bool operator==(const SearchDomain&) const = default;

  static SearchDomain fix(ParamValue v);
  static SearchDomain choice(std::vector<ParamValue> vs);
  static SearchDomain uniform(double lo, double hi);
  static SearchDomain log_uniform(double lo_exp, double hi_exp);
  static SearchDomain quniform(double lo, double hi, double q);
  static SearchDomain normal(double mu, double sigma);
};

// Ordered by declaration; grid expansion and sampling iterate dimensions in
// lexicographic parameter-name order regardless.
using SearchSpace = std::vector<std::pair<std::string, SearchDomain>>;

// Concrete parameter assignment (ordered map keeps reports deterministic).
using Assignment = std::map<std::string, ParamValue>;

bool domain_finite(const SearchDomain& d);
// Enumerable values of a finite domain (Fix, Choice, QUniform).
std::vector<ParamValue> domain_grid_values(const SearchDomain& d);
// One independent draw.
ParamValue sample_domain(const SearchDomain& d, Rng& rng);

}  // namespace recpipe
