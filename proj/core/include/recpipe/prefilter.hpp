#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "recpipe/dataset.hpp"

namespace recpipe {

enum class PrefilterStrategy {
  GlobalThreshold,
  GlobalAverage,
  UserAverage,
  UserKCore,
  ItemKCore,
  IterativeKCore,
  IterNRounds,
  ColdUsers,
};

std::optional<PrefilterStrategy> parse_prefilter_strategy(std::string_view name);
std::string_view prefilter_strategy_name(PrefilterStrategy s);
const std::vector<std::string>& prefilter_strategy_names();

struct PrefilterStep {
  PrefilterStrategy strategy = PrefilterStrategy::GlobalThreshold;
  std::optional<double> threshold;    // global_threshold
  std::optional<int> core;            // k-core family
  std::optional<int> rounds;          // iter_n_rounds
  std::optional<int> max_profile;     // cold_users

  bool operator==(const PrefilterStep&) const = default;
};

enum class RatingFilterMode { Numerical, GlobalAverage, UserAverage };
enum class KCoreTarget { User, Item };

// Keep interactions with rating >= threshold, where the threshold is fixed
// (Numerical), the global rating mean, or the interacting user's mean.
// Entities left with zero interactions disappear and indices are rebuilt.
Dataset filter_by_rating(const Dataset& ds, RatingFilterMode mode,
                         std::optional<double> threshold = std::nullopt);

// Single pass: drop users (or items) with fewer than k interactions.
Dataset k_core(const Dataset& ds, KCoreTarget target, int k);

struct IterativeKCoreResult {
  Dataset dataset;
  int rounds = 0;  // full user+item alternations executed
};

// Alternate user and item passes until every remaining user and item has at
// least k interactions, or until max_rounds alternations.
IterativeKCoreResult iterative_k_core(const Dataset& ds, int k,
                                      std::optional<int> max_rounds = std::nullopt);

// Keep only users whose profile size is <= max_profile.
Dataset cold_users(const Dataset& ds, int max_profile);

Dataset apply_prefilter(const Dataset& ds, const PrefilterStep& step);
Dataset apply_prefilters(const Dataset& ds, const std::vector<PrefilterStep>& steps);

}  // namespace recpipe
