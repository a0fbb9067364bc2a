#include "recpipe/search_space.hpp"

#include <charconv>
#include <cmath>

#include "recpipe/errors.hpp"

namespace recpipe {

std::string param_value_text(const ParamValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), std::get<double>(v));
  return std::string(buf, res.ptr);
}

SearchDomain SearchDomain::fix(ParamValue v) {
  SearchDomain d;
  d.kind = Kind::Fix;
  d.values.push_back(std::move(v));
  return d;
}

SearchDomain SearchDomain::choice(std::vector<ParamValue> vs) {
  SearchDomain d;
  d.kind = Kind::Choice;
  d.values = std::move(vs);
  return d;
}

SearchDomain SearchDomain::uniform(double lo, double hi) {
  SearchDomain d;
  d.kind = Kind::Uniform;
  d.lo = lo;
  d.hi = hi;
  return d;
}

SearchDomain SearchDomain::log_uniform(double lo_exp, double hi_exp) {
  SearchDomain d;
  d.kind = Kind::LogUniform;
  d.lo = lo_exp;
  d.hi = hi_exp;
  return d;
}

SearchDomain SearchDomain::quniform(double lo, double hi, double q) {
  SearchDomain d;
  d.kind = Kind::QUniform;
  d.lo = lo;
  d.hi = hi;
  d.q = q;
  return d;
}

SearchDomain SearchDomain::normal(double mu, double sigma) {
  SearchDomain d;
  d.kind = Kind::Normal;
  d.mu = mu;
  d.sigma = sigma;
  return d;
}

bool domain_finite(const SearchDomain& d) {
  switch (d.kind) {
    case SearchDomain::Kind::Fix:
    case SearchDomain::Kind::Choice:
    case SearchDomain::Kind::QUniform:
      return true;
    default:
      return false;
  }
}

std::vector<ParamValue> domain_grid_values(const SearchDomain& d) {
  switch (d.kind) {
    case SearchDomain::Kind::Fix:
    case SearchDomain::Kind::Choice:
      return d.values;
    case SearchDomain::Kind::QUniform: {
      std::vector<ParamValue> out;
      const long long k_lo = static_cast<long long>(std::ceil(d.lo / d.q - 1e-9));
      const long long k_hi = static_cast<long long>(std::floor(d.hi / d.q + 1e-9));
      for (long long k = k_lo; k <= k_hi; ++k) out.emplace_back(static_cast<double>(k) * d.q);
      return out;
    }
    default:
      throw ConfigError("grid requires finite domains");
  }
}

ParamValue sample_domain(const SearchDomain& d, Rng& rng) {
  switch (d.kind) {
    case SearchDomain::Kind::Fix:
      return d.values.front();
    case SearchDomain::Kind::Choice:
      return d.values[rng.uniform_int(d.values.size())];
    case SearchDomain::Kind::Uniform:
      return rng.uniform(d.lo, d.hi);
    case SearchDomain::Kind::LogUniform:
      return std::exp(rng.uniform(d.lo, d.hi));
    case SearchDomain::Kind::QUniform: {
      const double raw = rng.uniform(d.lo, d.hi);
      double v = std::round(raw / d.q) * d.q;
      if (v < d.lo) v = d.lo;
      if (v > d.hi) v = d.hi;
      return v;
    }
    case SearchDomain::Kind::Normal:
      return rng.normal(d.mu, d.sigma);
  }
  return 0.0;
}

}  // namespace recpipe
