#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "recpipe/config.hpp"
#include "recpipe/search_space.hpp"

namespace recpipe {

struct Trial {
  Assignment params;
  double objective = 0.0;  // maximised; mean of fold_scores
  std::vector<double> fold_scores;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
};

// Full cartesian product of finite domains, in lexicographic order of
// parameter names and then values. Raises ConfigError when a continuous
// domain is present.
std::vector<Assignment> grid_expand(const SearchSpace& space);

// One independent draw per dimension, iterating dimensions in sorted
// parameter-name order.
Assignment sample_space(const SearchSpace& space, Rng& rng);

// Tree-of-Parzen-Estimators suggestion. Fewer than `kTpeStartupTrials`
// history entries fall back to the prior sample; afterwards the history is
// split at the objective's top quantile into good and bad sets, per-dimension
// Parzen densities are built, and the best of the candidates drawn from the
// good density under the density ratio g/b is returned.
Assignment tpe_suggest(const SearchSpace& space, std::span<const Trial> history, Rng& rng);

inline constexpr std::size_t kTpeStartupTrials = 10;
inline constexpr double kTpeGoodQuantile = 0.25;
inline constexpr std::size_t kTpeCandidates = 24;

// objective(params, trial_index) -> score to maximise; NaN marks a failed
// trial. Returns all trials in evaluation order.
using ObjectiveFn = std::function<double(const Assignment&, std::size_t)>;

struct SearchResult {
  std::vector<Trial> trials;
  std::size_t best_index = 0;  // earliest trial on ties
  bool has_best = false;
};

// Runs one search strategy. Grid evaluates the whole product regardless of
// max_evals; the other strategies evaluate exactly max_evals trials.
SearchResult run_search(HyperOptAlg alg, const SearchSpace& space, int max_evals,
                        std::uint64_t seed, const ObjectiveFn& objective);

}  // namespace recpipe
