#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "recpipe/dataset.hpp"

namespace recpipe {

enum class SplitStrategy {
  TemporalHoldOut,
  TemporalLeaveNOut,
  FixedTimestamp,
  BestTimestamp,
  RandomSubsampling,
  RandomCrossValidation,
  Fix,
};

std::optional<SplitStrategy> parse_split_strategy(std::string_view name);
std::string_view split_strategy_name(SplitStrategy s);
const std::vector<std::string>& split_strategy_names();

struct SplitSpec {
  SplitStrategy strategy = SplitStrategy::RandomSubsampling;
  std::optional<double> test_ratio;         // fraction in (0,1)
  std::optional<int> leave_n_out;           // >= 1
  int folds = 1;                            // repeats (subsampling) / fold count (CV)
  std::optional<std::int64_t> timestamp;    // fixed_timestamp
  std::optional<std::filesystem::path> train_path, test_path;  // fix

  bool operator==(const SplitSpec&) const = default;
};

struct SplittingConfig {
  SplitSpec test;
  std::optional<SplitSpec> validation;

  bool operator==(const SplittingConfig&) const = default;
};

struct ValidationFold {
  std::vector<Event> train;
  std::vector<Event> validation;
};

struct Fold {
  std::vector<Event> train;
  std::vector<Event> test;
  std::vector<ValidationFold> validation_folds;
};

struct SplitPlan {
  std::vector<Fold> folds;
};

// One train/test partition of `events` (dense against the base dataset).
struct EventSplit {
  std::vector<Event> train;
  std::vector<Event> test;
};

// Applies one split spec to an event set; returns one partition per fold.
// Pure given the seed: identical inputs produce identical plans.
std::vector<EventSplit> split_events(const Dataset& base, std::span<const Event> events,
                                     const SplitSpec& spec, std::uint64_t seed);

// Observed timestamp T minimising sum_u |test_ratio_u(T) - target|, ties
// broken toward smaller T. test_ratio_u(T) = fraction of u's events with
// timestamp > T.
std::int64_t find_best_timestamp(std::span<const Event> events, double target_ratio);

// Test split (+ nested validation splits of each fold's train set).
SplitPlan build_split_plan(const Dataset& base, const SplittingConfig& cfg, std::uint64_t seed);

// Fix strategy: the plan is exactly the two files; vocabularies are built
// from their union. Overlapping (user, item) pairs across the files are a
// fatal consistency error.
struct FixedSplitResult {
  Dataset base;
  EventSplit split;
};
FixedSplitResult fixed_split(const std::filesystem::path& train_path,
                             const std::filesystem::path& test_path);

void dump_split_plan(const std::filesystem::path& dir, const Dataset& base, const SplitPlan& plan);

}  // namespace recpipe
