#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "recpipe/recommender.hpp"

namespace recpipe {

enum class MetricFamily { Accuracy, Error, Coverage, Novelty, Diversity, Bias, Fairness };

struct MetricInfo {
  std::string name;  // canonical config spelling
  MetricFamily family;
  bool per_user;   // retains a per-user vector usable by the statistical tests
  bool complex_;   // requires clustering parameters
};

const std::vector<MetricInfo>& metric_registry();
std::optional<std::string> canonical_metric_name(std::string_view name);  // case-insensitive
const MetricInfo* metric_info(std::string_view canonical);

// Everything the metric computations need besides the lists themselves.
// Popularity, catalog and the long-tail boundary come from the fold's
// training events; relevance comes from the fold's test events.
struct EvalContext {
  std::size_t catalog_size = 0;
  std::size_t num_users = 0;

  // per user: sorted relevant test items (test rating >= relevance_threshold)
  std::vector<std::vector<std::uint32_t>> relevance;
  // all test pairs, for the error metrics
  std::vector<Event> test_events;

  std::vector<std::uint32_t> train_counts;  // per item
  std::uint32_t max_train_count = 0;
  std::uint64_t total_train_count = 0;
  // items outside the top 20% by training count (boundary ties go to the head)
  std::vector<bool> long_tail;

  static EvalContext build(const Dataset& base, std::span<const Event> train,
                           std::span<const Event> test, double relevance_threshold);
};

// Dense cluster assignment: id per entity (-1 = absent from the cluster
// file), plus the sorted group names.
struct ClusterAssignment {
  std::vector<int> cluster;
  std::vector<std::string> names;
};
ClusterAssignment map_clusters(const std::vector<std::string>& ids,
                               const std::unordered_map<std::string, std::string>& map);

struct MetricResult {
  double value = 0.0;
  bool absent = false;
  // (user, value) sorted by user; only for per-user (user-averaged) metrics
  std::vector<std::pair<std::uint32_t, double>> per_user;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};

// metric label -> cutoff -> result
using MetricReport = std::map<std::string, std::map<int, MetricResult>>;

using PredictFn = std::function<std::optional<double>(std::uint32_t, std::uint32_t)>;

// Individual families (cutoff = list prefix length k).
std::map<std::string, MetricResult> accuracy_metrics(const RecommendationLists& lists,
                                                     const EvalContext& ctx, int k);
std::map<std::string, MetricResult> error_metrics(const PredictFn& predict, const EvalContext& ctx);
std::map<std::string, MetricResult> coverage_metrics(const RecommendationLists& lists,
                                                     const EvalContext& ctx, int k);
std::map<std::string, MetricResult> novelty_metrics(const RecommendationLists& lists,
                                                    const EvalContext& ctx, int k);
std::map<std::string, MetricResult> diversity_metrics(const RecommendationLists& lists,
                                                      const EvalContext& ctx, int k);
std::map<std::string, MetricResult> bias_metrics(const RecommendationLists& lists,
                                                 const EvalContext& ctx, int k);
MetricResult fairness_metric(const RecommendationLists& lists, const EvalContext& ctx, int k,
                             std::string_view variant, const ClusterAssignment& clusters);

struct ComplexMetricRequest {
  std::string metric;  // canonical MAD variant
  std::string label;   // column label (metric + clustering name)
  ClusterAssignment clusters;
};

// One metric at one cutoff (drives hyperparameter selection). Fairness
// variants need their matching complex request.
MetricResult evaluate_single_metric(std::string_view canonical, const RecommendationLists& lists,
                                    const EvalContext& ctx, int k, const PredictFn& predict,
                                    const ClusterAssignment* clusters = nullptr);

// Full report over the requested metrics and cutoffs.
MetricReport evaluate_metrics(const RecommendationLists& lists, const EvalContext& ctx,
                              const std::vector<std::string>& simple_metrics,
                              const std::vector<ComplexMetricRequest>& complex_metrics,
                              const std::vector<int>& cutoffs, const PredictFn& predict);

}  // namespace recpipe
