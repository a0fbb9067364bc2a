#include "recpipe/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "recpipe/errors.hpp"
#include "recpipe/metrics.hpp"
#include "recpipe/recommender.hpp"
#include "recpipe/similarity.hpp"

namespace recpipe {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string join(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ", ";
    out += names[i];
  }
  return out;
}

[[noreturn]] void missing(const std::string& path) { throw ConfigError(path + " required"); }

bool parse_double(std::string_view text, double& out) {
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(out);
}

// Plain YAML scalars that parse as numbers become doubles; quoted scalars
// (tag "!") and everything else stay strings.
ParamValue scalar_value(const YAML::Node& node) {
  const std::string text = node.Scalar();
  if (node.Tag() != "!") {
    double v = 0.0;
    if (parse_double(text, v)) return v;
  }
  return text;
}

double require_number(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) throw ConfigError(path + ": expected a number");
  double v = 0.0;
  if (!parse_double(node.Scalar(), v)) throw ConfigError(path + ": expected a number");
  return v;
}

long long require_integer(const YAML::Node& node, const std::string& path) {
  const double v = require_number(node, path);
  const long long i = static_cast<long long>(std::llround(v));
  if (static_cast<double>(i) != v) throw ConfigError(path + ": expected an integer");
  return i;
}

bool require_bool(const YAML::Node& node, const std::string& path) {
  if (node.IsScalar()) {
    const std::string v = lower(node.Scalar());
    if (v == "true" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "no" || v == "off") return false;
  }
  throw ConfigError(path + ": expected a boolean");
}

std::string require_string(const YAML::Node& node, const std::string& path) {
  if (!node.IsScalar()) throw ConfigError(path + ": expected a string");
  return node.Scalar();
}

void warn_unknown_keys(const YAML::Node& map, const std::set<std::string>& known,
                       const std::string& path, std::vector<std::string>& warnings) {
  if (!map.IsMap()) return;
  for (const auto& kv : map) {
    const std::string key = kv.first.Scalar();
    if (!known.count(key)) warnings.push_back("unknown key " + path + "." + key + " ignored");
  }
}

SearchDomain parse_domain_node(const YAML::Node& node, const std::string& path) {
  if (node.IsScalar()) return SearchDomain::fix(scalar_value(node));
  if (!node.IsSequence() || node.size() == 0) {
    throw ConfigError(path + ": expected a scalar or a list");
  }
  std::string tag;
  if (node[0].IsScalar()) tag = lower(node[0].Scalar());
  const bool tagged = tag == "uniform" || tag == "loguniform" || tag == "quniform" ||
                      tag == "normal" || tag == "choice";
  if (!tagged) {
    std::vector<ParamValue> values;
    for (const auto& el : node) {
      if (!el.IsScalar()) throw ConfigError(path + ": list values must be scalars");
      values.push_back(scalar_value(el));
    }
    return SearchDomain::choice(std::move(values));
  }
  if (tag == "choice") {
    std::vector<ParamValue> values;
    for (std::size_t i = 1; i < node.size(); ++i) {
      if (!node[i].IsScalar()) throw ConfigError(path + ": choice values must be scalars");
      values.push_back(scalar_value(node[i]));
    }
    if (values.empty()) throw ConfigError(path + ": choice requires at least one value");
    return SearchDomain::choice(std::move(values));
  }
  if (tag == "uniform" || tag == "loguniform") {
    if (node.size() != 3) throw ConfigError(path + ": [" + tag + ", lo, hi] expected");
    const double lo = require_number(node[1], path);
    const double hi = require_number(node[2], path);
    if (!(lo < hi)) throw ConfigError(path + ": " + tag + " requires lo < hi");
    return tag == "uniform" ? SearchDomain::uniform(lo, hi) : SearchDomain::log_uniform(lo, hi);
  }
  if (tag == "quniform") {
    if (node.size() != 4) throw ConfigError(path + ": [quniform, lo, hi, q] expected");
    const double lo = require_number(node[1], path);
    const double hi = require_number(node[2], path);
    const double q = require_number(node[3], path);
    if (!(lo <= hi)) throw ConfigError(path + ": quniform requires lo <= hi");
    if (!(q > 0)) throw ConfigError(path + ": quniform requires q > 0");
    return SearchDomain::quniform(lo, hi, q);
  }
  // normal
  if (node.size() != 3) throw ConfigError(path + ": [normal, mu, sigma] expected");
  const double mu = require_number(node[1], path);
  const double sigma = require_number(node[2], path);
  if (!(sigma > 0)) throw ConfigError(path + ": normal requires sigma > 0");
  return SearchDomain::normal(mu, sigma);
}

ValidationMetric parse_validation_metric(const std::string& text, int top_k,
                                         const std::string& path) {
  ValidationMetric vm;
  std::string metric = text;
  vm.cutoff = top_k;
  const std::size_t at = text.rfind('@');
  if (at != std::string::npos) {
    metric = text.substr(0, at);
    const std::string cut = text.substr(at + 1);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(cut.data(), cut.data() + cut.size(), value);
    if (ec != std::errc() || ptr != cut.data() + cut.size() || value < 1) {
      throw ConfigError(path + ": malformed cutoff in '" + text + "'");
    }
    vm.cutoff = value;
  }
  const auto canonical = canonical_metric_name(metric);
  if (!canonical) {
    std::vector<std::string> names;
    for (const auto& info : metric_registry()) names.push_back(info.name);
    throw ConfigError(path + ": unknown metric '" + metric + "'; registered metrics: " +
                      join(names));
  }
  vm.metric = *canonical;
  return vm;
}

PrefilterStep parse_prefilter_step(const YAML::Node& node, const std::string& path,
                                   std::vector<std::string>& warnings) {
  if (!node.IsMap()) throw ConfigError(path + ": expected a map with 'strategy'");
  warn_unknown_keys(node, {"strategy", "threshold", "core", "rounds", "max_profile"}, path,
                    warnings);
  if (!node["strategy"]) missing(path + ".strategy");
  const std::string name = require_string(node["strategy"], path + ".strategy");
  const auto strategy = parse_prefilter_strategy(name);
  if (!strategy) {
    throw ConfigError(path + ".strategy: unknown prefiltering strategy '" + name +
                      "'; valid strategies: " + join(prefilter_strategy_names()));
  }
  PrefilterStep step;
  step.strategy = *strategy;
  if (node["threshold"]) step.threshold = require_number(node["threshold"], path + ".threshold");
  if (node["core"]) step.core = static_cast<int>(require_integer(node["core"], path + ".core"));
  if (node["rounds"])
    step.rounds = static_cast<int>(require_integer(node["rounds"], path + ".rounds"));
  if (node["max_profile"])
    step.max_profile =
        static_cast<int>(require_integer(node["max_profile"], path + ".max_profile"));

  switch (step.strategy) {
    case PrefilterStrategy::GlobalThreshold:
      if (!step.threshold) missing(path + ".threshold");
      break;
    case PrefilterStrategy::UserKCore:
    case PrefilterStrategy::ItemKCore:
    case PrefilterStrategy::IterativeKCore:
      if (!step.core) missing(path + ".core");
      if (*step.core < 1) throw ConfigError(path + ".core must be >= 1");
      break;
    case PrefilterStrategy::IterNRounds:
      if (!step.core) missing(path + ".core");
      if (!step.rounds) missing(path + ".rounds");
      if (*step.core < 1) throw ConfigError(path + ".core must be >= 1");
      if (*step.rounds < 1) throw ConfigError(path + ".rounds must be >= 1");
      break;
    case PrefilterStrategy::ColdUsers:
      if (!step.max_profile) step.max_profile = 5;  // documented default cap
      if (*step.max_profile < 1) throw ConfigError(path + ".max_profile must be >= 1");
      break;
    default:
      break;
  }
  return step;
}

SplitSpec parse_split_spec(const YAML::Node& node, const std::string& path,
                           std::vector<std::string>& warnings) {
  if (!node.IsMap()) throw ConfigError(path + ": expected a map with 'strategy'");
  warn_unknown_keys(node,
                    {"strategy", "test_ratio", "leave_n_out", "folds", "timestamp", "train_path",
                     "test_path"},
                    path, warnings);
  if (!node["strategy"]) missing(path + ".strategy");
  const std::string name = require_string(node["strategy"], path + ".strategy");
  const auto strategy = parse_split_strategy(name);
  if (!strategy) {
    throw ConfigError(path + ".strategy: unknown splitting strategy '" + name +
                      "'; valid strategies: " + join(split_strategy_names()));
  }
  SplitSpec spec;
  spec.strategy = *strategy;
  if (node["test_ratio"]) {
    spec.test_ratio = require_number(node["test_ratio"], path + ".test_ratio");
    if (!(*spec.test_ratio > 0.0 && *spec.test_ratio < 1.0)) {
      throw ConfigError(path + ".test_ratio must lie in (0, 1)");
    }
  }
  if (node["leave_n_out"]) {
    spec.leave_n_out =
        static_cast<int>(require_integer(node["leave_n_out"], path + ".leave_n_out"));
    if (*spec.leave_n_out < 1) throw ConfigError(path + ".leave_n_out must be >= 1");
  }
  if (node["folds"]) {
    spec.folds = static_cast<int>(require_integer(node["folds"], path + ".folds"));
    if (spec.folds < 1) throw ConfigError(path + ".folds must be >= 1");
  }
  if (node["timestamp"]) {
    spec.timestamp = require_integer(node["timestamp"], path + ".timestamp");
  }
  if (node["train_path"]) spec.train_path = require_string(node["train_path"], path + ".train_path");
  if (node["test_path"]) spec.test_path = require_string(node["test_path"], path + ".test_path");

  const auto forbid = [&](bool present, const char* key) {
    if (present) {
      throw ConfigError(path + "." + key + " is not applicable to strategy '" +
                        std::string(split_strategy_name(spec.strategy)) + "'");
    }
  };
  switch (spec.strategy) {
    case SplitStrategy::TemporalHoldOut:
      if (!spec.test_ratio) missing(path + ".test_ratio");
      forbid(spec.leave_n_out.has_value(), "leave_n_out");
      forbid(spec.timestamp.has_value(), "timestamp");
      forbid(spec.train_path.has_value() || spec.test_path.has_value(), "train_path/test_path");
      forbid(node["folds"] && spec.folds != 1, "folds");
      break;
    case SplitStrategy::TemporalLeaveNOut:
      if (!spec.leave_n_out) missing(path + ".leave_n_out");
      forbid(spec.test_ratio.has_value(), "test_ratio");
      forbid(spec.timestamp.has_value(), "timestamp");
      forbid(spec.train_path.has_value() || spec.test_path.has_value(), "train_path/test_path");
      forbid(node["folds"] && spec.folds != 1, "folds");
      break;
    case SplitStrategy::FixedTimestamp:
      if (!spec.timestamp) missing(path + ".timestamp");
      forbid(spec.test_ratio.has_value(), "test_ratio");
      forbid(spec.leave_n_out.has_value(), "leave_n_out");
      forbid(spec.train_path.has_value() || spec.test_path.has_value(), "train_path/test_path");
      forbid(node["folds"] && spec.folds != 1, "folds");
      break;
    case SplitStrategy::BestTimestamp:
      if (!spec.test_ratio) missing(path + ".test_ratio");
      forbid(spec.leave_n_out.has_value(), "leave_n_out");
      forbid(spec.timestamp.has_value(), "timestamp");
      forbid(spec.train_path.has_value() || spec.test_path.has_value(), "train_path/test_path");
      forbid(node["folds"] && spec.folds != 1, "folds");
      break;
    case SplitStrategy::RandomSubsampling:
      if (spec.test_ratio.has_value() == spec.leave_n_out.has_value()) {
        throw ConfigError(path + ": random_subsampling requires exactly one of test_ratio and "
                          "leave_n_out");
      }
      forbid(spec.timestamp.has_value(), "timestamp");
      forbid(spec.train_path.has_value() || spec.test_path.has_value(), "train_path/test_path");
      break;
    case SplitStrategy::RandomCrossValidation:
      if (!node["folds"]) missing(path + ".folds");
      if (spec.folds < 2) throw ConfigError(path + ".folds must be >= 2 for cross-validation");
      forbid(spec.test_ratio.has_value(), "test_ratio");
      forbid(spec.leave_n_out.has_value(), "leave_n_out");
      forbid(spec.timestamp.has_value(), "timestamp");
      forbid(spec.train_path.has_value() || spec.test_path.has_value(), "train_path/test_path");
      break;
    case SplitStrategy::Fix:
      if (!spec.train_path) missing(path + ".train_path");
      if (!spec.test_path) missing(path + ".test_path");
      forbid(spec.test_ratio.has_value(), "test_ratio");
      forbid(spec.leave_n_out.has_value(), "leave_n_out");
      forbid(spec.timestamp.has_value(), "timestamp");
      forbid(node["folds"] && spec.folds != 1, "folds");
      break;
  }
  return spec;
}

const std::vector<std::string>& registered_metric_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& info : metric_registry()) out.push_back(info.name);
    return out;
  }();
  return names;
}

std::string canonical_or_throw(const std::string& name, const std::string& path) {
  const auto canonical = canonical_metric_name(name);
  if (!canonical) {
    throw ConfigError(path + ": unknown metric '" + name + "'; registered metrics: " +
                      join(registered_metric_names()));
  }
  return *canonical;
}

EvaluationConfig parse_evaluation(const YAML::Node& node, int top_k,
                                  std::vector<std::string>& warnings) {
  EvaluationConfig eval;
  if (!node) {
    warnings.push_back("experiment.evaluation missing; defaulting to simple_metrics: [nDCG]");
    eval.simple_metrics = {"nDCG"};
    eval.cutoffs = {top_k};
    return eval;
  }
  if (!node.IsMap()) throw ConfigError("experiment.evaluation: expected a map");
  warn_unknown_keys(node,
                    {"cutoffs", "simple_metrics", "evaluation", "complex_metrics",
                     "relevance_threshold", "wilcoxon_test", "paired_ttest"},
                    "experiment.evaluation", warnings);

  if (node["cutoffs"]) {
    const YAML::Node cuts = node["cutoffs"];
    const auto add = [&](const YAML::Node& n) {
      const int k = static_cast<int>(require_integer(n, "experiment.evaluation.cutoffs"));
      if (k < 1) throw ConfigError("experiment.evaluation.cutoffs must be positive");
      eval.cutoffs.push_back(k);
    };
    if (cuts.IsSequence()) {
      for (const auto& n : cuts) add(n);
    } else {
      add(cuts);
    }
  }
  if (eval.cutoffs.empty()) eval.cutoffs = {top_k};
  for (const int k : eval.cutoffs) {
    if (k > top_k) {
      throw ConfigError("experiment.top_k (" + std::to_string(top_k) +
                        ") must be >= every evaluation cutoff (got " + std::to_string(k) + ")");
    }
  }

  // `evaluation` is accepted as an alias of `simple_metrics`.
  YAML::Node simple = node["simple_metrics"] ? node["simple_metrics"] : node["evaluation"];
  if (simple) {
    if (!simple.IsSequence()) {
      throw ConfigError("experiment.evaluation.simple_metrics: expected a list");
    }
    for (const auto& n : simple) {
      const std::string canonical = canonical_or_throw(
          require_string(n, "experiment.evaluation.simple_metrics"),
          "experiment.evaluation.simple_metrics");
      if (metric_info(canonical)->complex_) {
        throw ConfigError("experiment.evaluation.simple_metrics: '" + canonical +
                          "' requires clustering parameters; configure it under complex_metrics");
      }
      eval.simple_metrics.push_back(canonical);
    }
  }
  if (node["complex_metrics"]) {
    const YAML::Node list = node["complex_metrics"];
    if (!list.IsSequence()) {
      throw ConfigError("experiment.evaluation.complex_metrics: expected a list");
    }
    std::size_t idx = 0;
    for (const auto& entry : list) {
      const std::string path =
          "experiment.evaluation.complex_metrics[" + std::to_string(idx++) + "]";
      if (!entry.IsMap()) throw ConfigError(path + ": expected a map");
      warn_unknown_keys(entry, {"metric", "clustering_name", "clustering_file"}, path, warnings);
      if (!entry["metric"]) missing(path + ".metric");
      ComplexMetricConfig cm;
      cm.metric = canonical_or_throw(require_string(entry["metric"], path + ".metric"),
                                     path + ".metric");
      if (!metric_info(cm.metric)->complex_) {
        throw ConfigError(path + ": '" + cm.metric +
                          "' takes no clustering parameters; list it under simple_metrics");
      }
      if (!entry["clustering_name"]) missing(path + ".clustering_name");
      if (!entry["clustering_file"]) missing(path + ".clustering_file");
      cm.clustering_name = require_string(entry["clustering_name"], path + ".clustering_name");
      cm.clustering_file = require_string(entry["clustering_file"], path + ".clustering_file");
      eval.complex_metrics.push_back(std::move(cm));
    }
  }
  if (node["relevance_threshold"]) {
    eval.relevance_threshold =
        require_number(node["relevance_threshold"], "experiment.evaluation.relevance_threshold");
  }
  if (node["wilcoxon_test"]) {
    eval.wilcoxon_test = require_bool(node["wilcoxon_test"], "experiment.evaluation.wilcoxon_test");
  }
  if (node["paired_ttest"]) {
    eval.paired_ttest = require_bool(node["paired_ttest"], "experiment.evaluation.paired_ttest");
  }
  if (eval.simple_metrics.empty() && eval.complex_metrics.empty()) {
    warnings.push_back("experiment.evaluation lists no metrics; defaulting to [nDCG]");
    eval.simple_metrics = {"nDCG"};
  }
  return eval;
}

void validate_similarity_params(const ModelConfig& model, const std::string& path) {
  for (const auto& [name, domain] : model.params) {
    if (name != "similarity") continue;
    if (domain.kind != SearchDomain::Kind::Fix && domain.kind != SearchDomain::Kind::Choice) {
      throw ConfigError(path + ".similarity must be a name or a list of names");
    }
    for (const auto& value : domain.values) {
      const auto* text = std::get_if<std::string>(&value);
      if (!text || !parse_similarity(*text)) {
        throw ConfigError(path + ".similarity: unknown similarity '" + param_value_text(value) +
                          "'; valid kinds: " + join(similarity_names()));
      }
    }
  }
}

ModelConfig parse_model(const YAML::Node& node, const std::string& path, int top_k,
                        std::vector<std::string>& warnings) {
  ModelConfig model;
  bool explicit_validation_metric = false;
  if (node && !node.IsNull()) {
    if (!node.IsMap()) throw ConfigError(path + ": expected a map");
    for (const auto& kv : node) {
      const std::string key = kv.first.Scalar();
      if (key == "meta") {
        const YAML::Node meta = kv.second;
        if (!meta.IsMap()) throw ConfigError(path + ".meta: expected a map");
        warn_unknown_keys(meta,
                          {"hyper_opt_alg", "hyper_max_evals", "save_recs", "validation_metric"},
                          path + ".meta", warnings);
        if (meta["hyper_opt_alg"]) {
          const std::string alg =
              require_string(meta["hyper_opt_alg"], path + ".meta.hyper_opt_alg");
          const auto parsed = parse_hyper_opt_alg(alg);
          if (!parsed) {
            throw ConfigError(path + ".meta.hyper_opt_alg: unknown strategy '" + alg +
                              "'; valid strategies: grid, random, annealing, tpe");
          }
          model.meta.alg = *parsed;
        }
        if (meta["hyper_max_evals"]) {
          model.meta.max_evals = static_cast<int>(
              require_integer(meta["hyper_max_evals"], path + ".meta.hyper_max_evals"));
          if (model.meta.max_evals < 1) {
            throw ConfigError(path + ".meta.hyper_max_evals must be >= 1");
          }
        }
        if (meta["save_recs"]) {
          model.meta.save_recs = require_bool(meta["save_recs"], path + ".meta.save_recs");
        }
        if (meta["validation_metric"]) {
          model.meta.validation_metric = parse_validation_metric(
              require_string(meta["validation_metric"], path + ".meta.validation_metric"), top_k,
              path + ".meta.validation_metric");
          explicit_validation_metric = true;
        }
      } else {
        model.params.emplace_back(key, parse_domain_node(kv.second, path + "." + key));
      }
    }
  }
  if (!explicit_validation_metric) {
    model.meta.validation_metric = ValidationMetric{"nDCG", top_k};
  }
  if (model.meta.alg == HyperOptAlg::Grid) {
    for (const auto& [name, domain] : model.params) {
      if (!domain_finite(domain)) {
        throw ConfigError(path + "." + name + ": grid requires finite domains");
      }
    }
  }
  validate_similarity_params(model, path);
  return model;
}

}  // namespace

std::optional<HyperOptAlg> parse_hyper_opt_alg(std::string_view name) {
  const std::string n = lower(name);
  if (n == "grid") return HyperOptAlg::Grid;
  if (n == "random") return HyperOptAlg::RandomSearch;
  if (n == "annealing") return HyperOptAlg::Annealing;
  if (n == "tpe") return HyperOptAlg::Tpe;
  return std::nullopt;
}

std::string_view hyper_opt_alg_name(HyperOptAlg alg) {
  switch (alg) {
    case HyperOptAlg::Grid: return "grid";
    case HyperOptAlg::RandomSearch: return "random";
    case HyperOptAlg::Annealing: return "annealing";
    case HyperOptAlg::Tpe: return "tpe";
  }
  return "grid";
}

ParsedExperiment parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  if (!root.IsMap() || !root["experiment"]) missing("experiment");
  const YAML::Node ex = root["experiment"];
  if (!ex.IsMap()) throw ConfigError("experiment: expected a map");

  ParsedExperiment parsed;
  auto& config = parsed.config;
  auto& warnings = parsed.warnings;

  for (const auto& kv : root) {
    if (kv.first.Scalar() != "experiment") {
      warnings.push_back("unknown key " + kv.first.Scalar() + " ignored");
    }
  }
  warn_unknown_keys(ex,
                    {"dataset", "data_config", "prefiltering", "splitting", "models", "evaluation",
                     "top_k", "random_seed", "external_models_path"},
                    "experiment", warnings);
  if (ex["external_models_path"]) {
    warnings.push_back(
        "experiment.external_models_path ignored: dynamic model loading is not supported");
  }

  if (!ex["dataset"]) missing("experiment.dataset");
  config.dataset_name = require_string(ex["dataset"], "experiment.dataset");

  if (!ex["top_k"]) missing("experiment.top_k");
  config.top_k = static_cast<int>(require_integer(ex["top_k"], "experiment.top_k"));
  if (config.top_k < 1) throw ConfigError("experiment.top_k must be a positive integer");

  if (ex["random_seed"]) {
    const long long seed = require_integer(ex["random_seed"], "experiment.random_seed");
    if (seed < 0) throw ConfigError("experiment.random_seed must be non-negative");
    config.random_seed = static_cast<std::uint64_t>(seed);
  }

  // splitting (parsed before data_config so the fixed strategy can be checked)
  if (!ex["splitting"]) missing("experiment.splitting");
  const YAML::Node splitting = ex["splitting"];
  if (!splitting.IsMap()) throw ConfigError("experiment.splitting: expected a map");
  warn_unknown_keys(splitting, {"test_splitting", "validation_splitting"}, "experiment.splitting",
                    warnings);
  if (!splitting["test_splitting"]) missing("experiment.splitting.test_splitting");
  config.splitting.test = parse_split_spec(splitting["test_splitting"],
                                           "experiment.splitting.test_splitting", warnings);
  if (splitting["validation_splitting"]) {
    config.splitting.validation = parse_split_spec(
        splitting["validation_splitting"], "experiment.splitting.validation_splitting", warnings);
    if (config.splitting.validation->strategy == SplitStrategy::Fix) {
      throw ConfigError("experiment.splitting.validation_splitting: fix is not supported");
    }
  }

  // data_config
  const YAML::Node data = ex["data_config"];
  if (data) {
    if (!data.IsMap()) throw ConfigError("experiment.data_config: expected a map");
    warn_unknown_keys(data, {"strategy", "dataset_path", "side_information", "dataloader"},
                      "experiment.data_config", warnings);
    if (data["dataloader"]) {
      warnings.push_back(
          "experiment.data_config.dataloader ignored: the generic attribute loader is used");
    }
    if (data["strategy"]) {
      const std::string strategy =
          lower(require_string(data["strategy"], "experiment.data_config.strategy"));
      if (strategy == "dataset") {
        config.data.strategy = DataConfig::Strategy::Dataset;
      } else if (strategy == "fixed") {
        config.data.strategy = DataConfig::Strategy::Fixed;
      } else {
        throw ConfigError("experiment.data_config.strategy: unknown strategy '" + strategy +
                          "'; valid strategies: dataset, fixed");
      }
    }
    if (data["dataset_path"]) {
      config.data.dataset_path =
          require_string(data["dataset_path"], "experiment.data_config.dataset_path");
    }
    if (data["side_information"]) {
      const YAML::Node side = data["side_information"];
      if (!side.IsMap()) {
        throw ConfigError("experiment.data_config.side_information: expected a map");
      }
      warn_unknown_keys(side, {"attribute_path"}, "experiment.data_config.side_information",
                        warnings);
      if (side["attribute_path"]) {
        config.data.attribute_path = require_string(
            side["attribute_path"], "experiment.data_config.side_information.attribute_path");
      }
    }
  }
  if (config.data.strategy == DataConfig::Strategy::Fixed &&
      config.splitting.test.strategy != SplitStrategy::Fix) {
    throw ConfigError(
        "experiment.data_config.strategy 'fixed' requires splitting.test_splitting.strategy "
        "'fix'");
  }
  if (config.splitting.test.strategy != SplitStrategy::Fix) {
    if (!data) missing("experiment.data_config");
    if (config.data.dataset_path.empty()) missing("experiment.data_config.dataset_path");
  }

  // prefiltering: single map or list of maps
  if (ex["prefiltering"]) {
    const YAML::Node pre = ex["prefiltering"];
    if (pre.IsMap()) {
      config.prefiltering.push_back(
          parse_prefilter_step(pre, "experiment.prefiltering", warnings));
    } else if (pre.IsSequence()) {
      std::size_t idx = 0;
      for (const auto& step : pre) {
        config.prefiltering.push_back(parse_prefilter_step(
            step, "experiment.prefiltering[" + std::to_string(idx++) + "]", warnings));
      }
    } else {
      throw ConfigError("experiment.prefiltering: expected a map or a list of maps");
    }
  }

  // models
  if (!ex["models"]) missing("experiment.models");
  const YAML::Node models = ex["models"];
  if (!models.IsMap() || models.size() == 0) missing("experiment.models");
  for (const auto& kv : models) {
    const std::string name = kv.first.Scalar();
    if (name.rfind("external.", 0) == 0) {
      const std::string msg = "model '" + name +
                              "' skipped: external models are not supported; registered models: " +
                              join(registered_model_names());
      parsed.rejected_models.emplace_back(name, msg);
      warnings.push_back(msg);
      continue;
    }
    const auto kind = parse_model_kind(name);
    if (!kind) {
      const std::string msg = "unknown model '" + name + "'; registered models: " +
                              join(registered_model_names());
      parsed.rejected_models.emplace_back(name, msg);
      warnings.push_back(msg);
      continue;
    }
    const std::string canonical(model_kind_name(*kind));
    for (const auto& [existing, cfg] : config.models) {
      if (existing == canonical) {
        throw ConfigError("experiment.models." + canonical + " configured twice");
      }
    }
    config.models.emplace_back(
        canonical, parse_model(kv.second, "experiment.models." + canonical, config.top_k, warnings));
  }
  if (config.models.empty()) {
    throw ConfigError("experiment.models requires at least one registered model; registered "
                      "models: " +
                      join(registered_model_names()));
  }

  config.evaluation = parse_evaluation(ex["evaluation"], config.top_k, warnings);
  return parsed;
}

ParsedExperiment load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  ParsedExperiment parsed = parse_config(buffer.str());

  const std::filesystem::path base = std::filesystem::absolute(path).parent_path();
  const auto resolve = [&](std::filesystem::path& p) {
    if (!p.empty() && p.is_relative()) p = (base / p).lexically_normal();
  };
  resolve(parsed.config.data.dataset_path);
  if (parsed.config.data.attribute_path) resolve(*parsed.config.data.attribute_path);
  for (auto& cm : parsed.config.evaluation.complex_metrics) resolve(cm.clustering_file);
  if (parsed.config.splitting.test.train_path) resolve(*parsed.config.splitting.test.train_path);
  if (parsed.config.splitting.test.test_path) resolve(*parsed.config.splitting.test.test_path);
  return parsed;
}

void validate_paths(const ExperimentConfig& config) {
  const auto check = [](const std::filesystem::path& p, const std::string& what) {
    if (!std::filesystem::exists(p)) {
      throw ConfigError(what + " does not exist: " + p.string());
    }
  };
  if (config.splitting.test.strategy == SplitStrategy::Fix) {
    check(*config.splitting.test.train_path, "train split file");
    check(*config.splitting.test.test_path, "test split file");
  } else {
    check(config.data.dataset_path, "dataset file");
  }
  if (config.data.attribute_path) check(*config.data.attribute_path, "attribute file");
  for (const auto& cm : config.evaluation.complex_metrics) {
    check(cm.clustering_file, "clustering file");
  }
}

namespace {

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

bool needs_quotes(const std::string& s) {
  if (s.empty()) return true;
  double dummy = 0.0;
  if (parse_double(s, dummy)) return true;  // numeric-looking strings stay strings
  const std::string l = lower(s);
  if (l == "true" || l == "false" || l == "yes" || l == "no" || l == "on" || l == "off" ||
      l == "null" || l == "~") {
    return true;
  }
  if (s.front() == ' ' || s.back() == ' ') return true;
  return s.find_first_of(":#{}[],&*!|>'\"%@`\n\t") != std::string::npos;
}

std::string yaml_scalar(const std::string& s) {
  if (!needs_quotes(s)) return s;
  std::string out = "'";
  for (const char c : s) {
    out += c;
    if (c == '\'') out += '\'';
  }
  out += '\'';
  return out;
}

std::string param_value_yaml(const ParamValue& v) {
  if (const auto* s = std::get_if<std::string>(&v)) return yaml_scalar(*s);
  return format_double(std::get<double>(v));
}

std::string domain_yaml(const SearchDomain& d) {
  switch (d.kind) {
    case SearchDomain::Kind::Fix:
      return param_value_yaml(d.values.front());
    case SearchDomain::Kind::Choice: {
      std::string out = "[";
      for (std::size_t i = 0; i < d.values.size(); ++i) {
        if (i) out += ", ";
        out += param_value_yaml(d.values[i]);
      }
      return out + "]";
    }
    case SearchDomain::Kind::Uniform:
      return "[uniform, " + format_double(d.lo) + ", " + format_double(d.hi) + "]";
    case SearchDomain::Kind::LogUniform:
      return "[loguniform, " + format_double(d.lo) + ", " + format_double(d.hi) + "]";
    case SearchDomain::Kind::QUniform:
      return "[quniform, " + format_double(d.lo) + ", " + format_double(d.hi) + ", " +
             format_double(d.q) + "]";
    case SearchDomain::Kind::Normal:
      return "[normal, " + format_double(d.mu) + ", " + format_double(d.sigma) + "]";
  }
  return "";
}

void render_split_spec(std::ostream& out, const SplitSpec& spec, const std::string& key) {
  out << "    " << key << ":\n";
  out << "      strategy: " << split_strategy_name(spec.strategy) << "\n";
  if (spec.test_ratio) out << "      test_ratio: " << format_double(*spec.test_ratio) << "\n";
  if (spec.leave_n_out) out << "      leave_n_out: " << *spec.leave_n_out << "\n";
  if (spec.strategy == SplitStrategy::RandomSubsampling ||
      spec.strategy == SplitStrategy::RandomCrossValidation) {
    if (spec.folds != 1) out << "      folds: " << spec.folds << "\n";
  }
  if (spec.timestamp) out << "      timestamp: " << *spec.timestamp << "\n";
  if (spec.train_path) out << "      train_path: " << yaml_scalar(spec.train_path->string()) << "\n";
  if (spec.test_path) out << "      test_path: " << yaml_scalar(spec.test_path->string()) << "\n";
}

}  // namespace

std::string render_config(const ExperimentConfig& config) {
  std::ostringstream out;
  out << "experiment:\n";
  out << "  dataset: " << yaml_scalar(config.dataset_name) << "\n";
  if (config.splitting.test.strategy != SplitStrategy::Fix || !config.data.dataset_path.empty()) {
    out << "  data_config:\n";
    out << "    strategy: "
        << (config.data.strategy == DataConfig::Strategy::Fixed ? "fixed" : "dataset") << "\n";
    if (!config.data.dataset_path.empty()) {
      out << "    dataset_path: " << yaml_scalar(config.data.dataset_path.string()) << "\n";
    }
    if (config.data.attribute_path) {
      out << "    side_information:\n";
      out << "      attribute_path: " << yaml_scalar(config.data.attribute_path->string()) << "\n";
    }
  }
  if (!config.prefiltering.empty()) {
    out << "  prefiltering:\n";
    for (const auto& step : config.prefiltering) {
      out << "  - strategy: " << prefilter_strategy_name(step.strategy) << "\n";
      if (step.threshold) out << "    threshold: " << format_double(*step.threshold) << "\n";
      if (step.core) out << "    core: " << *step.core << "\n";
      if (step.rounds) out << "    rounds: " << *step.rounds << "\n";
      if (step.max_profile) out << "    max_profile: " << *step.max_profile << "\n";
    }
  }
  out << "  splitting:\n";
  render_split_spec(out, config.splitting.test, "test_splitting");
  if (config.splitting.validation) {
    render_split_spec(out, *config.splitting.validation, "validation_splitting");
  }
  out << "  models:\n";
  for (const auto& [name, model] : config.models) {
    out << "    " << name << ":\n";
    out << "      meta:\n";
    out << "        hyper_opt_alg: " << hyper_opt_alg_name(model.meta.alg) << "\n";
    out << "        hyper_max_evals: " << model.meta.max_evals << "\n";
    out << "        save_recs: " << (model.meta.save_recs ? "true" : "false") << "\n";
    out << "        validation_metric: " << model.meta.validation_metric.text() << "\n";
    for (const auto& [param, domain] : model.params) {
      out << "      " << param << ": " << domain_yaml(domain) << "\n";
    }
  }
  out << "  evaluation:\n";
  out << "    cutoffs: [";
  for (std::size_t i = 0; i < config.evaluation.cutoffs.size(); ++i) {
    if (i) out << ", ";
    out << config.evaluation.cutoffs[i];
  }
  out << "]\n";
  out << "    simple_metrics: [";
  for (std::size_t i = 0; i < config.evaluation.simple_metrics.size(); ++i) {
    if (i) out << ", ";
    out << config.evaluation.simple_metrics[i];
  }
  out << "]\n";
  if (!config.evaluation.complex_metrics.empty()) {
    out << "    complex_metrics:\n";
    for (const auto& cm : config.evaluation.complex_metrics) {
      out << "    - metric: " << cm.metric << "\n";
      out << "      clustering_name: " << yaml_scalar(cm.clustering_name) << "\n";
      out << "      clustering_file: " << yaml_scalar(cm.clustering_file.string()) << "\n";
    }
  }
  out << "    relevance_threshold: " << format_double(config.evaluation.relevance_threshold)
      << "\n";
  out << "    wilcoxon_test: " << (config.evaluation.wilcoxon_test ? "true" : "false") << "\n";
  out << "    paired_ttest: " << (config.evaluation.paired_ttest ? "true" : "false") << "\n";
  out << "  top_k: " << config.top_k << "\n";
  out << "  random_seed: " << config.random_seed << "\n";
  return out.str();
}

SearchDomain parse_search_domain_text(const std::string& text, const std::string& path) {
  YAML::Node node;
  try {
    node = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return parse_domain_node(node, path);
}

}  // namespace recpipe
