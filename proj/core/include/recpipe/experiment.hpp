#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "recpipe/config.hpp"
#include "recpipe/dataset.hpp"
#include "recpipe/hyperopt.hpp"
#include "recpipe/metrics.hpp"
#include "recpipe/stats.hpp"

namespace recpipe {

struct RunOptions {
  unsigned workers = 0;  // 0 = hardware concurrency
  std::optional<std::uint64_t> seed_override;
  std::optional<std::filesystem::path> dump_splits;
};

struct ModelOutcome {
  std::string name;
  ModelConfig config;
  bool failed = false;
  std::string error;
  std::vector<Trial> trials;
  std::size_t best_trial = 0;
  RecommendationLists lists;  // test lists (length top_k)
  MetricReport report;
};

struct ExperimentResult {
  ExperimentConfig resolved;  // seed override applied
  std::uint64_t seed = 0;
  Dataset base;               // post-prefiltering vocabulary
  std::vector<ModelOutcome> models;
  std::vector<TestResult> stats;
  std::vector<std::string> metric_labels;  // table column order
  double wall_seconds = 0.0;
};

// Executes the full pipeline: load, attribute filter, prefilter chain, split
// (with nested validation), per-model tuning, test evaluation at every
// cutoff, and statistical tests. Per-model failures are isolated; data- and
// split-level impossibilities raise.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

// Writes the report files into out_dir and returns the manifest (paths
// relative to out_dir). Identical results produce identical bytes.
std::vector<std::filesystem::path> write_reports(const ExperimentResult& result,
                                                 const std::filesystem::path& out_dir);

// Column label of a complex metric.
std::string complex_metric_label(const ComplexMetricConfig& cm);

}  // namespace recpipe
