#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "recpipe/prefilter.hpp"
#include "recpipe/search_space.hpp"
#include "recpipe/split.hpp"

namespace recpipe {

enum class HyperOptAlg { Grid, RandomSearch, Annealing, Tpe };

std::optional<HyperOptAlg> parse_hyper_opt_alg(std::string_view name);
std::string_view hyper_opt_alg_name(HyperOptAlg alg);

struct DataConfig {
  enum class Strategy { Dataset, Fixed } strategy = Strategy::Dataset;
  std::filesystem::path dataset_path;
  std::optional<std::filesystem::path> attribute_path;

  bool operator==(const DataConfig&) const = default;
};

struct ValidationMetric {
  std::string metric;  // canonical name
  int cutoff = 10;

  bool operator==(const ValidationMetric&) const = default;
  std::string text() const { return metric + "@" + std::to_string(cutoff); }
};

struct MetaConfig {
  HyperOptAlg alg = HyperOptAlg::Grid;
  int max_evals = 10;  // ignored by grid (full product)
  bool save_recs = false;
  ValidationMetric validation_metric;

  bool operator==(const MetaConfig&) const = default;
};

struct ModelConfig {
  MetaConfig meta;
  SearchSpace params;  // declaration order

  bool operator==(const ModelConfig&) const = default;
};

struct ComplexMetricConfig {
  std::string metric;  // canonical MAD variant
  std::string clustering_name;
  std::filesystem::path clustering_file;

  bool operator==(const ComplexMetricConfig&) const = default;
};

struct EvaluationConfig {
  std::vector<int> cutoffs;  // defaults to [top_k]
  std::vector<std::string> simple_metrics;  // canonical names
  std::vector<ComplexMetricConfig> complex_metrics;
  double relevance_threshold = 0.0;
  bool wilcoxon_test = false;
  bool paired_ttest = false;

  bool operator==(const EvaluationConfig&) const = default;
};

struct ExperimentConfig {
  std::string dataset_name;
  DataConfig data;
  std::vector<PrefilterStep> prefiltering;
  SplittingConfig splitting;
  std::vector<std::pair<std::string, ModelConfig>> models;  // declaration order
  EvaluationConfig evaluation;
  int top_k = 10;
  std::uint64_t random_seed = 42;

  bool operator==(const ExperimentConfig&) const = default;
};

struct ParsedExperiment {
  ExperimentConfig config;
  std::vector<std::string> warnings;
  // model name -> enumeration error message; these models are excluded from
  // the plan but the parse itself succeeds
  std::vector<std::pair<std::string, std::string>> rejected_models;
};

// Pure: identical text yields an identical plan. Unknown keys warn rather
// than error; unregistered models are rejected per model (see
// `rejected_models`); unknown strategy and metric names raise ConfigError
// listing the valid values.
ParsedExperiment parse_config(const std::string& text);

// parse_config + relative paths resolved against the config file's directory.
ParsedExperiment load_config_file(const std::filesystem::path& path);

// Existence checks for every referenced file (dataset, attributes, clusters,
// fixed splits). Raises ConfigError.
void validate_paths(const ExperimentConfig& config);

// Canonical YAML rendering; parse_config(render_config(c)).config == c.
std::string render_config(const ExperimentConfig& config);

// Search-domain node parser, exposed for direct testing. `text` is a single
// YAML value (scalar or flow list), `path` names the node in error messages.
SearchDomain parse_search_domain_text(const std::string& text, const std::string& path = "value");

}  // namespace recpipe
