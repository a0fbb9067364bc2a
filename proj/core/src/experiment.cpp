#include "recpipe/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "recpipe/errors.hpp"
#include "recpipe/logging.hpp"
#include "recpipe/parallel.hpp"
#include "recpipe/prefilter.hpp"
#include "recpipe/recommender.hpp"
#include "recpipe/rng.hpp"

namespace recpipe {

namespace {

// Everything needed to score one fit against one evaluation slice.
struct FoldEval {
  RatingMatrix matrix;                // training side
  EvalContext ctx;                    // relevance from the evaluation side
  std::vector<std::uint32_t> users;   // users with >= 1 evaluation event
};

FoldEval make_fold_eval(const Dataset& base, std::span<const Event> train,
                        std::span<const Event> eval_events, double relevance_threshold) {
  FoldEval fe;
  fe.matrix = RatingMatrix::build(train, base.num_users(), base.num_items());
  fe.ctx = EvalContext::build(base, train, eval_events, relevance_threshold);
  std::vector<bool> seen(base.num_users(), false);
  for (const auto& ev : eval_events) seen[ev.user] = true;
  for (std::uint32_t u = 0; u < base.num_users(); ++u) {
    if (seen[u]) fe.users.push_back(u);
  }
  return fe;
}

PredictFn predict_fn(const Recommender& model) {
  return [&model](std::uint32_t u, std::uint32_t i) { return model.predict_rating(u, i); };
}

Dataset remap_fixed_split(const Dataset& attributed, EventSplit& split, const Dataset& original) {
  // after attribute filtering the vocabulary changed; re-express the fixed
  // split against the new dense ids, dropping vanished items
  const auto remap = [&](std::vector<Event>& events) {
    std::vector<Event> kept;
    kept.reserve(events.size());
    for (const auto& ev : events) {
      const auto user = attributed.user_index(original.user_ids()[ev.user]);
      const auto item = attributed.item_index(original.item_ids()[ev.item]);
      if (user && item) {
        Event out = ev;
        out.user = *user;
        out.item = *item;
        kept.push_back(out);
      }
    }
    events = std::move(kept);
  };
  remap(split.train);
  remap(split.test);
  return attributed;
}

std::string format_g10(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return std::string(buf);
}

}  // namespace

std::string complex_metric_label(const ComplexMetricConfig& cm) {
  return cm.metric + "_" + cm.clustering_name;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult result;
  result.resolved = config;
  result.seed = options.seed_override.value_or(config.random_seed);
  result.resolved.random_seed = result.seed;
  const unsigned workers = options.workers == 0 ? default_workers() : options.workers;

  validate_paths(config);

  // ---- LOAD ----------------------------------------------------------------
  Dataset base;
  std::optional<EventSplit> fixed;
  if (config.splitting.test.strategy == SplitStrategy::Fix) {
    auto fs = fixed_split(*config.splitting.test.train_path, *config.splitting.test.test_path);
    base = std::move(fs.base);
    fixed = std::move(fs.split);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "fixed split: %zu users, %zu items, %zu train + %zu test",
                  base.num_users(), base.num_items(), fixed->train.size(), fixed->test.size());
    log_line(Stage::Load, buf);
    if (config.data.attribute_path) {
      const Dataset original = base;
      base = remap_fixed_split(load_attributes(base, *config.data.attribute_path), *fixed,
                               original);
    }
  } else {
    base = load_interactions(config.data.dataset_path);
    if (config.data.attribute_path) {
      base = load_attributes(base, *config.data.attribute_path);
    }
  }

  // ---- FILTER ---------------------------------------------------------------
  if (!config.prefiltering.empty()) {
    if (fixed) throw ConfigError("prefiltering is not supported with a fixed split");
    base = apply_prefilters(base, config.prefiltering);
    if (base.empty()) throw DataError("prefiltering removed every interaction");
  }
  result.base = base;

  // ---- SPLIT ----------------------------------------------------------------
  SplitPlan plan;
  const std::uint64_t split_seed = derive_seed(result.seed, "split");
  if (fixed) {
    Fold fold;
    fold.train = std::move(fixed->train);
    fold.test = std::move(fixed->test);
    if (config.splitting.validation) {
      auto vsplits = split_events(base, fold.train, *config.splitting.validation,
                                  derive_seed(split_seed, "validation_split", 0));
      for (auto& vs : vsplits) {
        fold.validation_folds.push_back({std::move(vs.train), std::move(vs.test)});
      }
    }
    plan.folds.push_back(std::move(fold));
  } else {
    plan = build_split_plan(base, config.splitting, split_seed);
  }
  if (options.dump_splits) dump_split_plan(*options.dump_splits, base, plan);
  if (plan.folds.empty()) throw SplitError("splitting produced no folds");
  if (plan.folds.size() > 1) {
    warn("split plan has " + std::to_string(plan.folds.size()) +
         " folds; tuning and evaluation use fold 0 only");
  }
  const Fold& fold = plan.folds[0];
  if (fold.train.empty()) throw SplitError("fold 0 has an empty training set");
  if (fold.test.empty()) throw SplitError("fold 0 has an empty test set");
  {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "fold 0: %zu train, %zu test, %zu validation fold(s)",
                  fold.train.size(), fold.test.size(), fold.validation_folds.size());
    log_line(Stage::Split, buf);
  }

  const double threshold = config.evaluation.relevance_threshold;

  // validation slices shared by every model
  std::vector<FoldEval> validation;
  if (!fold.validation_folds.empty()) {
    for (const auto& vf : fold.validation_folds) {
      validation.push_back(make_fold_eval(base, vf.train, vf.validation, threshold));
    }
  } else {
    warn("no validation_splitting configured: hyperparameters are scored on the TEST fold");
    validation.push_back(make_fold_eval(base, fold.train, fold.test, threshold));
  }
  FoldEval test_eval = make_fold_eval(base, fold.train, fold.test, threshold);

  // complex metric clusters
  std::vector<ComplexMetricRequest> complex_requests;
  for (const auto& cm : config.evaluation.complex_metrics) {
    const auto raw = load_cluster_map(cm.clustering_file);
    const bool user_based = cm.metric == "UserMADrating" || cm.metric == "UserMADranking";
    ComplexMetricRequest request;
    request.metric = cm.metric;
    request.label = complex_metric_label(cm);
    request.clusters = map_clusters(user_based ? base.user_ids() : base.item_ids(), raw);
    complex_requests.push_back(std::move(request));
  }

  result.metric_labels = config.evaluation.simple_metrics;
  for (const auto& cm : config.evaluation.complex_metrics) {
    result.metric_labels.push_back(complex_metric_label(cm));
  }

  // ---- per-model TUNE + EVAL --------------------------------------------------
  for (const auto& [name, model_config] : config.models) {
    ModelOutcome outcome;
    outcome.name = name;
    outcome.config = model_config;
    const ModelKind kind = *parse_model_kind(name);
    const std::uint64_t model_seed = derive_seed(result.seed, "model:" + name);

    try {
      const ValidationMetric& vm = model_config.meta.validation_metric;
      const ClusterAssignment* vm_clusters = nullptr;
      if (metric_info(vm.metric)->family == MetricFamily::Fairness) {
        for (const auto& request : complex_requests) {
          if (request.metric == vm.metric) {
            vm_clusters = &request.clusters;
            break;
          }
        }
        if (!vm_clusters) {
          throw ConfigError("validation metric " + vm.metric +
                            " requires a matching complex_metrics entry");
        }
      }

      std::vector<std::vector<double>> fold_scores_by_trial;
      const ObjectiveFn objective = [&](const Assignment& params, std::size_t trial_idx) {
        const std::uint64_t trial_seed = derive_seed(model_seed, "trial", trial_idx);
        std::vector<double> fold_scores;
        double sum = 0.0;
        for (std::size_t v = 0; v < validation.size(); ++v) {
          const auto fit = fit_recommender(kind, params, validation[v].matrix, base,
                                           derive_seed(trial_seed, "fold", v), workers);
          const auto lists = recommend(*fit, validation[v].matrix, validation[v].users, vm.cutoff,
                                       true, workers);
          const MetricResult score = evaluate_single_metric(vm.metric, lists, validation[v].ctx,
                                                            vm.cutoff, predict_fn(*fit),
                                                            vm_clusters);
          if (score.absent) {
            fold_scores.clear();
            break;
          }
          fold_scores.push_back(score.value);
          sum += score.value;
        }
        if (fold_scores_by_trial.size() <= trial_idx) fold_scores_by_trial.resize(trial_idx + 1);
        fold_scores_by_trial[trial_idx] = fold_scores;
        if (fold_scores.empty()) return std::numeric_limits<double>::quiet_NaN();
        return sum / static_cast<double>(fold_scores.size());
      };

      log_line(Stage::Tune, name + ": " + std::string(hyper_opt_alg_name(model_config.meta.alg)) +
                                " search on " + vm.text());
      SearchResult search =
          run_search(model_config.meta.alg, model_config.params, model_config.meta.max_evals,
                     model_seed, objective);
      for (std::size_t t = 0; t < search.trials.size() && t < fold_scores_by_trial.size(); ++t) {
        search.trials[t].fold_scores = std::move(fold_scores_by_trial[t]);
      }
      if (!search.has_best) {
        throw ModelError("zero successful trials for model " + name);
      }
      outcome.trials = std::move(search.trials);
      outcome.best_trial = search.best_index;
      const Trial& best = outcome.trials[outcome.best_trial];
      {
        std::string params_text;
        for (const auto& [p, v] : best.params) {
          params_text += params_text.empty() ? "" : ", ";
          params_text += p + "=" + param_value_text(v);
        }
        log_line(Stage::Tune, name + ": best " + vm.text() + " = " + format_g10(best.objective) +
                                  " with {" + params_text + "}");
      }

      // The winning trial's validation-fold-0 fit is reused for the test
      // evaluation (no refit on train+validation); refitting with the same
      // seed reproduces it bit for bit.
      const std::uint64_t best_seed =
          derive_seed(derive_seed(model_seed, "trial", outcome.best_trial), "fold", 0);
      const auto fit =
          fit_recommender(kind, best.params, validation[0].matrix, base, best_seed, workers);

      outcome.lists =
          recommend(*fit, test_eval.matrix, test_eval.users, config.top_k, true, workers);
      outcome.report =
          evaluate_metrics(outcome.lists, test_eval.ctx, config.evaluation.simple_metrics,
                           complex_requests, config.evaluation.cutoffs, predict_fn(*fit));
      log_line(Stage::Eval, name + ": evaluated " + std::to_string(test_eval.users.size()) +
                                " users at " + std::to_string(config.evaluation.cutoffs.size()) +
                                " cutoff(s)");
    } catch (const std::exception& e) {
      outcome.failed = true;
      outcome.error = e.what();
      warn("model " + name + " failed: " + outcome.error);
    }
    result.models.push_back(std::move(outcome));
  }

  // ---- STATS ------------------------------------------------------------------
  const StatsFlags flags{config.evaluation.wilcoxon_test, config.evaluation.paired_ttest};
  if (flags.wilcoxon || flags.paired_t) {
    for (const auto& label : result.metric_labels) {
      const MetricInfo* info = metric_info(label);  // complex labels: nullptr
      if (!info || !info->per_user) continue;
      for (const int k : config.evaluation.cutoffs) {
        PerUserVectors vectors;
        for (const auto& model : result.models) {
          if (model.failed) continue;
          const auto metric_it = model.report.find(label);
          if (metric_it == model.report.end()) continue;
          const auto cutoff_it = metric_it->second.find(k);
          if (cutoff_it == metric_it->second.end() || cutoff_it->second.absent) continue;
          if (cutoff_it->second.per_user.empty()) continue;
          vectors.emplace_back(model.name, &cutoff_it->second.per_user);
        }
        if (vectors.size() < 2) continue;
        auto tests = pairwise_tests(vectors, label, k, flags);
        result.stats.insert(result.stats.end(), tests.begin(), tests.end());
      }
    }
    log_line(Stage::Stats, std::to_string(result.stats.size()) + " pairwise test result(s)");
  }

  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace recpipe
