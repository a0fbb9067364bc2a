#include "recpipe/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "recpipe/errors.hpp"

namespace recpipe {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Kahan-compensated accumulator so aggregation is insensitive to magnitude.
struct MeanAccumulator {
  double sum = 0.0;
  double carry = 0.0;
  std::size_t count = 0;

  void add(double v) {
    const double y = v - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
    ++count;
  }

  double mean() const { return count == 0 ? 0.0 : sum / static_cast<double>(count); }
};

double log2_discount(std::size_t rank) {  // rank is 1-based
  return 1.0 / std::log2(static_cast<double>(rank) + 1.0);
}

bool is_relevant(const std::vector<std::uint32_t>& relevance, std::uint32_t item) {
  return std::binary_search(relevance.begin(), relevance.end(), item);
}

// Builds a user-averaged MetricResult from per-user values.
MetricResult user_averaged(std::vector<std::pair<std::uint32_t, double>> per_user,
                           std::size_t skipped) {
  MetricResult r;
  MeanAccumulator acc;
  for (const auto& [user, value] : per_user) acc.add(value);
  r.per_user = std::move(per_user);
  r.evaluated = acc.count;
  r.skipped = skipped;
  if (acc.count == 0) {
    r.absent = true;
  } else {
    r.value = acc.mean();
  }
  return r;
}

}  // namespace

const std::vector<MetricInfo>& metric_registry() {
  static const std::vector<MetricInfo> registry = {
      {"Precision", MetricFamily::Accuracy, true, false},
      {"Recall", MetricFamily::Accuracy, true, false},
      {"F1", MetricFamily::Accuracy, true, false},
      {"HitRate", MetricFamily::Accuracy, true, false},
      {"MRR", MetricFamily::Accuracy, true, false},
      {"MAP", MetricFamily::Accuracy, true, false},
      {"nDCG", MetricFamily::Accuracy, true, false},
      {"MAE", MetricFamily::Error, false, false},
      {"MSE", MetricFamily::Error, false, false},
      {"RMSE", MetricFamily::Error, false, false},
      {"ItemCoverage", MetricFamily::Coverage, false, false},
      {"UserCoverage", MetricFamily::Coverage, false, false},
      {"NumRetrieved", MetricFamily::Coverage, false, false},
      {"EPC", MetricFamily::Novelty, true, false},
      {"EFD", MetricFamily::Novelty, true, false},
      {"Gini", MetricFamily::Diversity, false, false},
      {"ShannonEntropy", MetricFamily::Diversity, false, false},
      {"ARP", MetricFamily::Bias, true, false},
      {"APLT", MetricFamily::Bias, true, false},
      {"ACLT", MetricFamily::Bias, true, false},
      {"UserMADrating", MetricFamily::Fairness, false, true},
      {"UserMADranking", MetricFamily::Fairness, false, true},
      {"ItemMADrating", MetricFamily::Fairness, false, true},
      {"ItemMADranking", MetricFamily::Fairness, false, true},
  };
  return registry;
}

std::optional<std::string> canonical_metric_name(std::string_view name) {
  const std::string n = lower(name);
  for (const auto& info : metric_registry()) {
    if (lower(info.name) == n) return info.name;
  }
  return std::nullopt;
}

const MetricInfo* metric_info(std::string_view canonical) {
  for (const auto& info : metric_registry()) {
    if (info.name == canonical) return &info;
  }
  return nullptr;
}

EvalContext EvalContext::build(const Dataset& base, std::span<const Event> train,
                               std::span<const Event> test, double relevance_threshold) {
  EvalContext ctx;
  ctx.catalog_size = base.num_items();
  ctx.num_users = base.num_users();
  ctx.relevance.resize(base.num_users());
  ctx.test_events.assign(test.begin(), test.end());
  for (const auto& ev : test) {
    if (ev.rating >= relevance_threshold) ctx.relevance[ev.user].push_back(ev.item);
  }
  for (auto& items : ctx.relevance) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
  }

  ctx.train_counts.assign(base.num_items(), 0);
  for (const auto& ev : train) ctx.train_counts[ev.item]++;
  ctx.max_train_count = 0;
  ctx.total_train_count = 0;
  for (const auto c : ctx.train_counts) {
    ctx.max_train_count = std::max(ctx.max_train_count, c);
    ctx.total_train_count += c;
  }

  // Short head: top 20% of items by training count; ties at the boundary go
  // to the head. Everything else is the long tail.
  ctx.long_tail.assign(base.num_items(), true);
  if (base.num_items() > 0) {
    std::vector<std::uint32_t> order(base.num_items());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
      if (ctx.train_counts[a] != ctx.train_counts[b])
        return ctx.train_counts[a] > ctx.train_counts[b];
      return a < b;
    });
    const std::size_t head = static_cast<std::size_t>(
        std::ceil(0.2 * static_cast<double>(base.num_items())));
    const std::uint32_t boundary = ctx.train_counts[order[head - 1]];
    for (std::uint32_t i = 0; i < base.num_items(); ++i) {
      if (ctx.train_counts[i] >= boundary && boundary > 0) ctx.long_tail[i] = false;
    }
    if (boundary == 0) {
      // degenerate: boundary item has no interactions; head = counted items
      for (std::uint32_t i = 0; i < base.num_items(); ++i) {
        ctx.long_tail[i] = ctx.train_counts[i] == 0;
      }
    }
  }
  return ctx;
}

ClusterAssignment map_clusters(const std::vector<std::string>& ids,
                               const std::unordered_map<std::string, std::string>& map) {
  ClusterAssignment out;
  out.cluster.assign(ids.size(), -1);
  std::map<std::string, int> name_to_id;
  std::set<std::string> sorted_names;
  for (const auto& id : ids) {
    const auto it = map.find(id);
    if (it != map.end()) sorted_names.insert(it->second);
  }
  for (const auto& name : sorted_names) {
    name_to_id[name] = static_cast<int>(out.names.size());
    out.names.push_back(name);
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto it = map.find(ids[i]);
    if (it != map.end()) out.cluster[i] = name_to_id[it->second];
  }
  return out;
}

std::map<std::string, MetricResult> accuracy_metrics(const RecommendationLists& lists,
                                                     const EvalContext& ctx, int k) {
  std::vector<std::pair<std::uint32_t, double>> precision, recall, f1, hit_rate, mrr, map_metric,
      ndcg;
  std::size_t skipped = 0;
  for (std::size_t idx = 0; idx < lists.users.size(); ++idx) {
    const std::uint32_t user = lists.users[idx];
    const auto& relevance = ctx.relevance[user];
    if (relevance.empty()) {
      ++skipped;
      continue;
    }
    const auto& list = lists.lists[idx];
    const std::size_t len = std::min<std::size_t>(list.size(), static_cast<std::size_t>(k));
    std::size_t hits = 0;
    double first_hit_rank = 0.0;
    double ap_sum = 0.0;
    double dcg = 0.0;
    for (std::size_t r = 0; r < len; ++r) {
      if (!is_relevant(relevance, list[r].item)) continue;
      ++hits;
      if (first_hit_rank == 0.0) first_hit_rank = static_cast<double>(r + 1);
      ap_sum += static_cast<double>(hits) / static_cast<double>(r + 1);
      dcg += log2_discount(r + 1);
    }
    const double p = static_cast<double>(hits) / static_cast<double>(k);
    const double rec = static_cast<double>(hits) / static_cast<double>(relevance.size());
    const std::size_t ideal_len =
        std::min<std::size_t>(static_cast<std::size_t>(k), relevance.size());
    double idcg = 0.0;
    for (std::size_t r = 1; r <= ideal_len; ++r) idcg += log2_discount(r);

    precision.emplace_back(user, p);
    recall.emplace_back(user, rec);
    f1.emplace_back(user, (p + rec) > 0.0 ? 2.0 * p * rec / (p + rec) : 0.0);
    hit_rate.emplace_back(user, hits > 0 ? 1.0 : 0.0);
    mrr.emplace_back(user, first_hit_rank > 0.0 ? 1.0 / first_hit_rank : 0.0);
    map_metric.emplace_back(user, ap_sum / static_cast<double>(ideal_len));
    ndcg.emplace_back(user, idcg > 0.0 ? dcg / idcg : 0.0);
  }
  std::map<std::string, MetricResult> out;
  out["Precision"] = user_averaged(std::move(precision), skipped);
  out["Recall"] = user_averaged(std::move(recall), skipped);
  out["F1"] = user_averaged(std::move(f1), skipped);
  out["HitRate"] = user_averaged(std::move(hit_rate), skipped);
  out["MRR"] = user_averaged(std::move(mrr), skipped);
  out["MAP"] = user_averaged(std::move(map_metric), skipped);
  out["nDCG"] = user_averaged(std::move(ndcg), skipped);
  return out;
}

std::map<std::string, MetricResult> error_metrics(const PredictFn& predict,
                                                  const EvalContext& ctx) {
  MeanAccumulator abs_err, sq_err;
  std::size_t skipped = 0;
  for (const auto& ev : ctx.test_events) {
    const auto prediction = predict(ev.user, ev.item);
    if (!prediction) {
      ++skipped;
      continue;
    }
    const double e = *prediction - ev.rating;
    abs_err.add(std::fabs(e));
    sq_err.add(e * e);
  }
  std::map<std::string, MetricResult> out;
  MetricResult mae, mse, rmse;
  mae.evaluated = mse.evaluated = rmse.evaluated = abs_err.count;
  mae.skipped = mse.skipped = rmse.skipped = skipped;
  if (abs_err.count == 0) {
    mae.absent = mse.absent = rmse.absent = true;
  } else {
    mae.value = abs_err.mean();
    mse.value = sq_err.mean();
    rmse.value = std::sqrt(sq_err.mean());
  }
  out["MAE"] = std::move(mae);
  out["MSE"] = std::move(mse);
  out["RMSE"] = std::move(rmse);
  return out;
}

std::map<std::string, MetricResult> coverage_metrics(const RecommendationLists& lists,
                                                     const EvalContext& ctx, int k) {
  (void)ctx;
  std::set<std::uint32_t> distinct;
  std::size_t non_empty = 0;
  MeanAccumulator length;
  for (const auto& list : lists.lists) {
    const std::size_t len = std::min<std::size_t>(list.size(), static_cast<std::size_t>(k));
    if (len > 0) ++non_empty;
    length.add(static_cast<double>(len));
    for (std::size_t r = 0; r < len; ++r) distinct.insert(list[r].item);
  }
  std::map<std::string, MetricResult> out;
  MetricResult item_cov, user_cov, retrieved;
  item_cov.value = static_cast<double>(distinct.size());
  item_cov.evaluated = lists.users.size();
  user_cov.value = static_cast<double>(non_empty);
  user_cov.evaluated = lists.users.size();
  retrieved.value = length.mean();
  retrieved.evaluated = lists.users.size();
  if (lists.users.empty()) {
    retrieved.value = 0.0;
  }
  out["ItemCoverage"] = std::move(item_cov);
  out["UserCoverage"] = std::move(user_cov);
  out["NumRetrieved"] = std::move(retrieved);
  return out;
}

std::map<std::string, MetricResult> novelty_metrics(const RecommendationLists& lists,
                                                    const EvalContext& ctx, int k) {
  std::vector<std::pair<std::uint32_t, double>> epc, efd;
  std::size_t skipped = 0;
  const double max_count = static_cast<double>(ctx.max_train_count);
  const double total = static_cast<double>(ctx.total_train_count);
  for (std::size_t idx = 0; idx < lists.users.size(); ++idx) {
    const std::uint32_t user = lists.users[idx];
    const auto& list = lists.lists[idx];
    const std::size_t len = std::min<std::size_t>(list.size(), static_cast<std::size_t>(k));
    if (ctx.relevance[user].empty() || len == 0 || total == 0.0) {
      ++skipped;
      continue;
    }
    MeanAccumulator epc_acc, efd_acc;
    for (std::size_t r = 0; r < len; ++r) {
      const double count = static_cast<double>(ctx.train_counts[list[r].item]);
      const double pop = max_count > 0.0 ? count / max_count : 0.0;
      epc_acc.add(1.0 - pop);
      // never-interacted items are smoothed to count 1
      efd_acc.add(-std::log2(std::max(count, 1.0) / total));
    }
    epc.emplace_back(user, epc_acc.mean());
    efd.emplace_back(user, efd_acc.mean());
  }
  std::map<std::string, MetricResult> out;
  out["EPC"] = user_averaged(std::move(epc), skipped);
  out["EFD"] = user_averaged(std::move(efd), skipped);
  return out;
}

std::map<std::string, MetricResult> diversity_metrics(const RecommendationLists& lists,
                                                      const EvalContext& ctx, int k) {
  std::map<std::string, MetricResult> out;
  MetricResult gini, entropy;
  if (ctx.catalog_size < 2) {
    gini.absent = entropy.absent = true;
    out["Gini"] = std::move(gini);
    out["ShannonEntropy"] = std::move(entropy);
    return out;
  }
  // exposure shares over the full catalog, zero-exposure items included
  std::vector<double> exposure(ctx.catalog_size, 0.0);
  double total = 0.0;
  for (const auto& list : lists.lists) {
    const std::size_t len = std::min<std::size_t>(list.size(), static_cast<std::size_t>(k));
    for (std::size_t r = 0; r < len; ++r) {
      exposure[list[r].item] += 1.0;
      total += 1.0;
    }
  }
  if (total == 0.0) {
    gini.absent = entropy.absent = true;
    out["Gini"] = std::move(gini);
    out["ShannonEntropy"] = std::move(entropy);
    return out;
  }
  for (auto& e : exposure) e /= total;
  std::sort(exposure.begin(), exposure.end());
  const double n = static_cast<double>(ctx.catalog_size);
  double gini_sum = 0.0;
  double entropy_sum = 0.0;
  for (std::size_t j = 0; j < exposure.size(); ++j) {
    gini_sum += (2.0 * static_cast<double>(j + 1) - n - 1.0) * exposure[j];
    if (exposure[j] > 0.0) entropy_sum -= exposure[j] * std::log2(exposure[j]);
  }
  gini.value = gini_sum / (n - 1.0);
  entropy.value = entropy_sum;
  gini.evaluated = entropy.evaluated = lists.users.size();
  out["Gini"] = std::move(gini);
  out["ShannonEntropy"] = std::move(entropy);
  return out;
}

std::map<std::string, MetricResult> bias_metrics(const RecommendationLists& lists,
                                                 const EvalContext& ctx, int k) {
  std::vector<std::pair<std::uint32_t, double>> arp, aplt, aclt;
  std::size_t skipped = 0;
  for (std::size_t idx = 0; idx < lists.users.size(); ++idx) {
    const std::uint32_t user = lists.users[idx];
    const auto& list = lists.lists[idx];
    const std::size_t len = std::min<std::size_t>(list.size(), static_cast<std::size_t>(k));
    if (ctx.relevance[user].empty() || len == 0) {
      ++skipped;
      continue;
    }
    MeanAccumulator pop;
    std::size_t tail_count = 0;
    for (std::size_t r = 0; r < len; ++r) {
      pop.add(static_cast<double>(ctx.train_counts[list[r].item]));
      if (ctx.long_tail[list[r].item]) ++tail_count;
    }
    arp.emplace_back(user, pop.mean());
    aplt.emplace_back(user, static_cast<double>(tail_count) / static_cast<double>(len));
    aclt.emplace_back(user, static_cast<double>(tail_count));
  }
  std::map<std::string, MetricResult> out;
  out["ARP"] = user_averaged(std::move(arp), skipped);
  out["APLT"] = user_averaged(std::move(aplt), skipped);
  out["ACLT"] = user_averaged(std::move(aclt), skipped);
  return out;
}

MetricResult fairness_metric(const RecommendationLists& lists, const EvalContext& ctx, int k,
                             std::string_view variant, const ClusterAssignment& clusters) {
  const bool user_based = variant == "UserMADrating" || variant == "UserMADranking";
  const bool rating_based = variant == "UserMADrating" || variant == "ItemMADrating";
  const auto& cluster = clusters.cluster;
  const auto& cluster_names = clusters.names;

  MetricResult result;
  if (cluster_names.size() < 2) {
    result.absent = true;
    return result;
  }

  // Base quantity per entity.
  std::vector<MeanAccumulator> base(user_based ? ctx.num_users : ctx.catalog_size);
  std::vector<bool> scored(base.size(), false);
  std::size_t skipped = 0;
  for (std::size_t idx = 0; idx < lists.users.size(); ++idx) {
    const std::uint32_t user = lists.users[idx];
    const auto& list = lists.lists[idx];
    const std::size_t len = std::min<std::size_t>(list.size(), static_cast<std::size_t>(k));
    if (user_based) {
      if (variant == "UserMADrating") {
        // mean predicted score of the user's top-k entries
        if (len == 0) {
          ++skipped;
          continue;
        }
        MeanAccumulator acc;
        for (std::size_t r = 0; r < len; ++r) acc.add(list[r].score);
        base[user].add(acc.mean());
        scored[user] = true;
      } else {  // UserMADranking: the user's nDCG at this cutoff
        const auto& relevance = ctx.relevance[user];
        if (relevance.empty()) {
          ++skipped;
          continue;
        }
        double dcg = 0.0;
        for (std::size_t r = 0; r < len; ++r) {
          if (is_relevant(relevance, list[r].item)) dcg += log2_discount(r + 1);
        }
        const std::size_t ideal_len =
            std::min<std::size_t>(static_cast<std::size_t>(k), relevance.size());
        double idcg = 0.0;
        for (std::size_t r = 1; r <= ideal_len; ++r) idcg += log2_discount(r);
        base[user].add(idcg > 0.0 ? dcg / idcg : 0.0);
        scored[user] = true;
      }
    } else {
      for (std::size_t r = 0; r < len; ++r) {
        const std::uint32_t item = list[r].item;
        base[item].add(rating_based ? list[r].score : log2_discount(r + 1));
        scored[item] = true;
      }
    }
  }

  // Group means by cluster; entities without a cluster are excluded.
  std::vector<MeanAccumulator> groups(cluster_names.size());
  std::size_t excluded = 0;
  for (std::size_t e = 0; e < base.size(); ++e) {
    if (!scored[e]) continue;
    if (cluster[e] < 0) {
      ++excluded;
      continue;
    }
    groups[static_cast<std::size_t>(cluster[e])].add(base[e].mean());
  }
  std::vector<double> means;
  for (const auto& g : groups) {
    if (g.count > 0) means.push_back(g.mean());
  }
  if (means.size() < 2) {
    result.absent = true;
    return result;
  }
  MeanAccumulator mad;
  for (std::size_t a = 0; a < means.size(); ++a) {
    for (std::size_t b = a + 1; b < means.size(); ++b) {
      mad.add(std::fabs(means[a] - means[b]));
    }
  }
  result.value = mad.mean();
  result.evaluated = base.size() - excluded;
  result.skipped = skipped + excluded;
  return result;
}

MetricResult evaluate_single_metric(std::string_view canonical, const RecommendationLists& lists,
                                    const EvalContext& ctx, int k, const PredictFn& predict,
                                    const ClusterAssignment* clusters) {
  const MetricInfo* info = metric_info(canonical);
  if (!info) throw Error("unknown metric '" + std::string(canonical) + "'");
  const std::string name(canonical);
  switch (info->family) {
    case MetricFamily::Accuracy:
      return accuracy_metrics(lists, ctx, k).at(name);
    case MetricFamily::Error:
      return error_metrics(predict, ctx).at(name);
    case MetricFamily::Coverage:
      return coverage_metrics(lists, ctx, k).at(name);
    case MetricFamily::Novelty:
      return novelty_metrics(lists, ctx, k).at(name);
    case MetricFamily::Diversity:
      return diversity_metrics(lists, ctx, k).at(name);
    case MetricFamily::Bias:
      return bias_metrics(lists, ctx, k).at(name);
    case MetricFamily::Fairness:
      if (!clusters) throw Error("'" + name + "' requires clustering parameters");
      return fairness_metric(lists, ctx, k, name, *clusters);
  }
  throw Error("unknown metric family");
}

MetricReport evaluate_metrics(const RecommendationLists& lists, const EvalContext& ctx,
                              const std::vector<std::string>& simple_metrics,
                              const std::vector<ComplexMetricRequest>& complex_metrics,
                              const std::vector<int>& cutoffs, const PredictFn& predict) {
  MetricReport report;
  // error metrics are cutoff-independent; compute them once
  std::map<std::string, MetricResult> error;
  bool error_needed = false;
  for (const auto& m : simple_metrics) {
    if (metric_info(m)->family == MetricFamily::Error) error_needed = true;
  }
  if (error_needed) error = error_metrics(predict, ctx);

  for (const int k : cutoffs) {
    std::map<MetricFamily, std::map<std::string, MetricResult>> families;
    for (const auto& m : simple_metrics) {
      const MetricFamily family = metric_info(m)->family;
      if (family == MetricFamily::Error) {
        report[m][k] = error.at(m);
        continue;
      }
      if (!families.count(family)) {
        switch (family) {
          case MetricFamily::Accuracy: families[family] = accuracy_metrics(lists, ctx, k); break;
          case MetricFamily::Coverage: families[family] = coverage_metrics(lists, ctx, k); break;
          case MetricFamily::Novelty: families[family] = novelty_metrics(lists, ctx, k); break;
          case MetricFamily::Diversity: families[family] = diversity_metrics(lists, ctx, k); break;
          case MetricFamily::Bias: families[family] = bias_metrics(lists, ctx, k); break;
          default: break;
        }
      }
      report[m][k] = families[family].at(m);
    }
    for (const auto& cm : complex_metrics) {
      report[cm.label][k] = fairness_metric(lists, ctx, k, cm.metric, cm.clusters);
    }
  }
  return report;
}

}  // namespace recpipe
