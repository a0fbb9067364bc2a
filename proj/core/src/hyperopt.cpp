#include "recpipe/hyperopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "recpipe/errors.hpp"

namespace recpipe {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

SearchSpace sorted_by_name(const SearchSpace& space) {
  SearchSpace sorted = space;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return sorted;
}

// --- simulated annealing -------------------------------------------------

constexpr double kAnnealT0 = 1.0;
constexpr double kAnnealAlpha = 0.95;
constexpr double kAnnealStepFraction = 0.1;  // of the domain range

Assignment perturb(const SearchSpace& space, const Assignment& current, Rng& rng) {
  // one uniformly chosen non-fixed dimension moves
  std::vector<const std::pair<std::string, SearchDomain>*> movable;
  for (const auto& dim : space) {
    if (dim.second.kind != SearchDomain::Kind::Fix) movable.push_back(&dim);
  }
  Assignment next = current;
  if (movable.empty()) return next;
  const auto& [name, domain] = *movable[rng.uniform_int(movable.size())];
  switch (domain.kind) {
    case SearchDomain::Kind::Choice:
      next[name] = domain.values[rng.uniform_int(domain.values.size())];
      break;
    case SearchDomain::Kind::Uniform: {
      const double step = kAnnealStepFraction * (domain.hi - domain.lo);
      double v = std::get<double>(current.at(name)) + rng.normal(0.0, step);
      next[name] = std::clamp(v, domain.lo, domain.hi);
      break;
    }
    case SearchDomain::Kind::LogUniform: {
      // walk in exponent space
      const double step = kAnnealStepFraction * (domain.hi - domain.lo);
      double e = std::log(std::get<double>(current.at(name))) + rng.normal(0.0, step);
      next[name] = std::exp(std::clamp(e, domain.lo, domain.hi));
      break;
    }
    case SearchDomain::Kind::QUniform: {
      const double direction = rng.uniform() < 0.5 ? -1.0 : 1.0;
      double v = std::get<double>(current.at(name)) + direction * domain.q;
      v = std::round(v / domain.q) * domain.q;
      next[name] = std::clamp(v, domain.lo, domain.hi);
      break;
    }
    case SearchDomain::Kind::Normal: {
      // unbounded; the domain sigma sets the scale
      const double step = kAnnealStepFraction * 6.0 * domain.sigma;
      next[name] = std::get<double>(current.at(name)) + rng.normal(0.0, step);
      break;
    }
    case SearchDomain::Kind::Fix:
      break;
  }
  return next;
}

// --- TPE -------------------------------------------------------------------

struct ParzenComponent {
  double mean = 0.0;
  double bandwidth = 1.0;
};

struct ParzenDensity {
  std::vector<ParzenComponent> components;
  double lo = 0.0, hi = 0.0;
  bool bounded = false;

  double log_pdf(double x) const {
    // mixture of (truncated) Gaussians with equal component weights
    double acc = 0.0;
    for (const auto& c : components) {
      const double z = (x - c.mean) / c.bandwidth;
      double pdf = std::exp(-0.5 * z * z) / (c.bandwidth * std::sqrt(2.0 * kPi));
      if (bounded) {
        const double mass = normal_mass(c);
        if (mass > 1e-12) pdf /= mass;
      }
      acc += pdf;
    }
    acc /= static_cast<double>(components.size());
    return std::log(std::max(acc, 1e-300));
  }

  double sample(Rng& rng) const {
    const auto& c = components[rng.uniform_int(components.size())];
    for (int tries = 0; tries < 100; ++tries) {
      const double x = rng.normal(c.mean, c.bandwidth);
      if (!bounded || (x >= lo && x <= hi)) return x;
    }
    return std::clamp(c.mean, lo, hi);
  }

 private:
  double normal_mass(const ParzenComponent& c) const {
    const auto cdf = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
    return cdf((hi - c.mean) / c.bandwidth) - cdf((lo - c.mean) / c.bandwidth);
  }
};

// observations must be the dimension's values transformed to the working
// space (log space for LogUniform). history_size drives the bandwidth floor
// so the densities sharpen as evidence accumulates.
ParzenDensity build_parzen(std::vector<double> observations, double lo, double hi, bool bounded,
                           std::size_t history_size) {
  std::sort(observations.begin(), observations.end());
  ParzenDensity density;
  density.lo = lo;
  density.hi = hi;
  density.bounded = bounded;
  const double range = bounded ? hi - lo : 1.0;
  const double floor_bw = range / static_cast<double>(std::min<std::size_t>(100, history_size));
  for (std::size_t i = 0; i < observations.size(); ++i) {
    double bw = floor_bw;
    if (i > 0) bw = std::max(bw, observations[i] - observations[i - 1]);
    if (i + 1 < observations.size()) bw = std::max(bw, observations[i + 1] - observations[i]);
    if (bw <= 0.0) bw = 1e-12;
    density.components.push_back({observations[i], bw});
  }
  return density;
}

struct CategoricalDensity {
  std::vector<double> prob;  // over domain.values indices

  double log_pdf(std::size_t index) const { return std::log(prob[index]); }

  std::size_t sample(Rng& rng) const {
    double u = rng.uniform();
    for (std::size_t i = 0; i < prob.size(); ++i) {
      u -= prob[i];
      if (u <= 0.0) return i;
    }
    return prob.size() - 1;
  }
};

// count + 1 smoothing
CategoricalDensity build_categorical(const SearchDomain& domain,
                                     const std::vector<const Trial*>& set,
                                     const std::string& name) {
  CategoricalDensity d;
  d.prob.assign(domain.values.size(), 0.0);
  std::size_t total = 0;
  for (const Trial* t : set) {
    const auto it = t->params.find(name);
    if (it == t->params.end()) continue;
    for (std::size_t i = 0; i < domain.values.size(); ++i) {
      if (domain.values[i] == it->second) {
        d.prob[i] += 1.0;
        ++total;
        break;
      }
    }
  }
  for (auto& p : d.prob) p = (p + 1.0) / (static_cast<double>(total) + static_cast<double>(d.prob.size()));
  return d;
}

double to_working_space(const SearchDomain& domain, double value) {
  return domain.kind == SearchDomain::Kind::LogUniform ? std::log(value) : value;
}

double from_working_space(const SearchDomain& domain, double value) {
  switch (domain.kind) {
    case SearchDomain::Kind::LogUniform:
      return std::exp(value);
    case SearchDomain::Kind::QUniform: {
      double v = std::round(value / domain.q) * domain.q;
      return std::clamp(v, domain.lo, domain.hi);
    }
    default:
      return value;
  }
}

void working_bounds(const SearchDomain& domain, double& lo, double& hi, bool& bounded) {
  switch (domain.kind) {
    case SearchDomain::Kind::Uniform:
    case SearchDomain::Kind::QUniform:
    case SearchDomain::Kind::LogUniform:  // bounds are already exponents
      lo = domain.lo;
      hi = domain.hi;
      bounded = true;
      break;
    case SearchDomain::Kind::Normal:
      lo = domain.mu - 6.0 * domain.sigma;  // scale reference only
      hi = domain.mu + 6.0 * domain.sigma;
      bounded = false;
      break;
    default:
      lo = hi = 0.0;
      bounded = false;
  }
}

}  // namespace

std::vector<Assignment> grid_expand(const SearchSpace& space) {
  const SearchSpace sorted = sorted_by_name(space);
  std::vector<std::vector<ParamValue>> axes;
  for (const auto& [name, domain] : sorted) {
    if (!domain_finite(domain)) {
      throw ConfigError("grid requires finite domains (parameter '" + name + "')");
    }
    axes.push_back(domain_grid_values(domain));
    if (axes.back().empty()) {
      throw ConfigError("parameter '" + name + "' has an empty domain");
    }
  }
  std::vector<Assignment> out;
  Assignment current;
  const std::function<void(std::size_t)> expand = [&](std::size_t dim) {
    if (dim == sorted.size()) {
      out.push_back(current);
      return;
    }
    for (const auto& value : axes[dim]) {
      current[sorted[dim].first] = value;
      expand(dim + 1);
    }
  };
  expand(0);
  return out;
}

Assignment sample_space(const SearchSpace& space, Rng& rng) {
  Assignment out;
  for (const auto& [name, domain] : sorted_by_name(space)) {
    out[name] = sample_domain(domain, rng);
  }
  return out;
}

Assignment tpe_suggest(const SearchSpace& space, std::span<const Trial> history, Rng& rng) {
  std::vector<const Trial*> ok;
  for (const auto& t : history) {
    if (!t.failed) ok.push_back(&t);
  }
  if (ok.size() < kTpeStartupTrials) return sample_space(space, rng);

  // split at the top objective quantile (maximising)
  std::vector<std::size_t> order(ok.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ok[a]->objective > ok[b]->objective;
  });
  const std::size_t n_good = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(kTpeGoodQuantile * static_cast<double>(ok.size()))));
  std::vector<const Trial*> good, bad;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_good ? good : bad).push_back(ok[order[i]]);
  }
  if (bad.empty()) return sample_space(space, rng);

  // per-dimension densities
  const SearchSpace sorted = sorted_by_name(space);
  struct DimModel {
    bool categorical = false;
    ParzenDensity g, b;
    CategoricalDensity cg, cb;
  };
  std::map<std::string, DimModel> models;
  for (const auto& [name, domain] : sorted) {
    if (domain.kind == SearchDomain::Kind::Fix) continue;
    DimModel dm;
    if (domain.kind == SearchDomain::Kind::Choice) {
      dm.categorical = true;
      dm.cg = build_categorical(domain, good, name);
      dm.cb = build_categorical(domain, bad, name);
    } else {
      const auto observations = [&](const std::vector<const Trial*>& set) {
        std::vector<double> obs;
        for (const Trial* t : set) {
          const auto it = t->params.find(name);
          if (it == t->params.end()) continue;
          if (const auto* v = std::get_if<double>(&it->second)) {
            obs.push_back(to_working_space(domain, *v));
          }
        }
        return obs;
      };
      double lo = 0.0, hi = 0.0;
      bool bounded = false;
      working_bounds(domain, lo, hi, bounded);
      auto g_obs = observations(good);
      auto b_obs = observations(bad);
      if (g_obs.empty() || b_obs.empty()) return sample_space(space, rng);
      dm.g = build_parzen(std::move(g_obs), lo, hi, bounded, ok.size());
      dm.b = build_parzen(std::move(b_obs), lo, hi, bounded, ok.size());
    }
    models.emplace(name, std::move(dm));
  }

  // draw candidates from the good densities, keep the best density ratio
  Assignment best;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < kTpeCandidates; ++c) {
    Assignment cand;
    double score = 0.0;
    for (const auto& [name, domain] : sorted) {
      if (domain.kind == SearchDomain::Kind::Fix) {
        cand[name] = domain.values.front();
        continue;
      }
      DimModel& dm = models.at(name);
      if (dm.categorical) {
        const std::size_t idx = dm.cg.sample(rng);
        cand[name] = domain.values[idx];
        score += dm.cg.log_pdf(idx) - dm.cb.log_pdf(idx);
      } else {
        const double x = dm.g.sample(rng);
        cand[name] = from_working_space(domain, x);
        score += dm.g.log_pdf(x) - dm.b.log_pdf(x);
      }
    }
    if (score > best_score) {
      best_score = score;
      best = std::move(cand);
    }
  }
  return best;
}

SearchResult run_search(HyperOptAlg alg, const SearchSpace& space, int max_evals,
                        std::uint64_t seed, const ObjectiveFn& objective) {
  SearchResult result;
  const auto record = [&](Assignment params, std::size_t index) -> Trial& {
    Trial trial;
    trial.params = std::move(params);
    trial.seed = derive_seed(seed, "trial", index);
    const double obj = objective(trial.params, index);
    if (std::isnan(obj)) {
      trial.failed = true;
      trial.objective = -std::numeric_limits<double>::infinity();
    } else {
      trial.objective = obj;
    }
    result.trials.push_back(std::move(trial));
    Trial& stored = result.trials.back();
    if (!stored.failed &&
        (!result.has_best || stored.objective > result.trials[result.best_index].objective)) {
      result.best_index = result.trials.size() - 1;
      result.has_best = true;
    }
    return stored;
  };

  switch (alg) {
    case HyperOptAlg::Grid: {
      const std::vector<Assignment> assignments = grid_expand(space);
      for (std::size_t i = 0; i < assignments.size(); ++i) record(assignments[i], i);
      break;
    }
    case HyperOptAlg::RandomSearch: {
      for (std::size_t i = 0; i < static_cast<std::size_t>(max_evals); ++i) {
        Rng rng(derive_seed(seed, "sample", i));
        record(sample_space(space, rng), i);
      }
      break;
    }
    case HyperOptAlg::Annealing: {
      Rng rng(derive_seed(seed, "anneal"));
      Assignment current = sample_space(space, rng);
      const Trial& first = record(current, 0);
      double current_obj = first.objective;
      for (std::size_t i = 1; i < static_cast<std::size_t>(max_evals); ++i) {
        Assignment candidate = perturb(space, current, rng);
        const Trial& t = record(candidate, i);
        const double temperature =
            kAnnealT0 * std::pow(kAnnealAlpha, static_cast<double>(i));
        const double delta = t.objective - current_obj;
        if (delta > 0.0 || rng.uniform() < std::exp(delta / temperature)) {
          current = t.params;
          current_obj = t.objective;
        }
      }
      break;
    }
    case HyperOptAlg::Tpe: {
      Rng rng(derive_seed(seed, "tpe"));
      for (std::size_t i = 0; i < static_cast<std::size_t>(max_evals); ++i) {
        Assignment params = tpe_suggest(space, result.trials, rng);
        record(std::move(params), i);
      }
      break;
    }
  }
  return result;
}

}  // namespace recpipe
