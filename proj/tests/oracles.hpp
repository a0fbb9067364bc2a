#pragma once

// Independent brute-force metric implementations used to cross-check the
// production code. Everything here is written from the metric definitions
// directly, with plain loops and no shared code with the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

struct Instance {
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  // lists[u] = ranked (item, score), already truncated to the experiment top_k
  std::vector<std::vector<std::pair<std::uint32_t, double>>> lists;
  std::vector<std::set<std::uint32_t>> relevant;       // per user
  std::vector<std::uint32_t> train_counts;             // per item
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> test_ratings;
  std::vector<int> user_cluster, item_cluster;         // -1 = unknown
};

inline double discount(std::size_t rank1) { return 1.0 / std::log2(double(rank1) + 1.0); }

// Users that enter user-averaged metrics: non-empty relevance and, because
// every per-list mean needs entries, a non-empty list prefix.
inline bool counted(const Instance& in, std::size_t u, int k) {
  const std::size_t len = std::min<std::size_t>(in.lists[u].size(), std::size_t(k));
  return !in.relevant[u].empty() && len > 0;
}

inline double mean_over_users(const Instance& in, int k,
                              double (*fn)(const Instance&, std::size_t, int)) {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t u = 0; u < in.num_users; ++u) {
    if (!in.relevant[u].empty()) {
      sum += fn(in, u, k);
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / double(n);
}

inline double precision_u(const Instance& in, std::size_t u, int k) {
  const std::size_t len = std::min<std::size_t>(in.lists[u].size(), std::size_t(k));
  std::size_t hits = 0;
  for (std::size_t r = 0; r < len; ++r) hits += in.relevant[u].count(in.lists[u][r].first);
  return double(hits) / double(k);
}

inline double recall_u(const Instance& in, std::size_t u, int k) {
  const std::size_t len = std::min<std::size_t>(in.lists[u].size(), std::size_t(k));
  std::size_t hits = 0;
  for (std::size_t r = 0; r < len; ++r) hits += in.relevant[u].count(in.lists[u][r].first);
  return double(hits) / double(in.relevant[u].size());
}

inline double f1_u(const Instance& in, std::size_t u, int k) {
  const double p = precision_u(in, u, k);
  const double r = recall_u(in, u, k);
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

inline double hitrate_u(const Instance& in, std::size_t u, int k) {
  const std::size_t len = std::min<std::size_t>(in.lists[u].size(), std::size_t(k));
  for (std::size_t r = 0; r < len; ++r) {
    if (in.relevant[u].count(in.lists[u][r].first)) return 1.0;
  }
  return 0.0;
}

inline double mrr_u(const Instance& in, std::size_t u, int k) {
  const std::size_t len = std::min<std::size_t>(in.lists[u].size(), std::size_t(k));
  for (std::size_t r = 0; r < len; ++r) {
    if (in.relevant[u].count(in.lists[u][r].first)) return 1.0 / double(r + 1);
  }
  return 0.0;
}

inline double map_u(const Instance& in, std::size_t u, int k) {
  const std::size_t len = std::min<std::size_t>(in.lists[u].size(), std::size_t(k));
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t r = 0; r < len; ++r) {
    if (in.relevant[u].count(in.lists[u][r].first)) {
      ++hits;
      sum += double(hits) / double(r + 1);
    }
  }
  return sum / double(std::min<std::size_t>(std::size_t(k), in.relevant[u].size()));
}

inline double ndcg_u(const Instance& in, std::size_t u, int k) {
  const std::size_t len = std::min<std::size_t>(in.lists[u].size(), std::size_t(k));
  double dcg = 0.0;
  for (std::size_t r = 0; r < len; ++r) {
    if (in.relevant[u].count(in.lists[u][r].first)) dcg += discount(r + 1);
  }
  double idcg = 0.0;
  for (std::size_t r = 1; r <= std::min<std::size_t>(std::size_t(k), in.relevant[u].size()); ++r) {
    idcg += discount(r);
  }
  return idcg > 0 ? dcg / idcg : 0.0;
}

inline double item_coverage(const Instance& in, int k) {
  std::set<std::uint32_t> distinct;
  for (const auto& list : in.lists) {
    for (std::size_t r = 0; r < std::min<std::size_t>(list.size(), std::size_t(k)); ++r) {
      distinct.insert(list[r].first);
    }
  }
  return double(distinct.size());
}

inline double user_coverage(const Instance& in, int k) {
  std::size_t n = 0;
  for (const auto& list : in.lists) {
    if (std::min<std::size_t>(list.size(), std::size_t(k)) > 0) ++n;
  }
  return double(n);
}

inline double num_retrieved(const Instance& in, int k) {
  if (in.lists.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& list : in.lists) sum += double(std::min<std::size_t>(list.size(), std::size_t(k)));
  return sum / double(in.lists.size());
}

inline std::uint32_t max_count(const Instance& in) {
  std::uint32_t m = 0;
  for (const auto c : in.train_counts) m = std::max(m, c);
  return m;
}

inline std::uint64_t total_count(const Instance& in) {
  std::uint64_t t = 0;
  for (const auto c : in.train_counts) t += c;
  return t;
}

inline double epc_u(const Instance& in, std::size_t u, int k) {
  const std::size_t len = std::min<std::size_t>(in.lists[u].size(), std::size_t(k));
  const double mc = double(max_count(in));
  double sum = 0.0;
  for (std::size_t r = 0; r < len; ++r) {
    const double pop = mc > 0 ? double(in.train_counts[in.lists[u][r].first]) / mc : 0.0;
    sum += 1.0 - pop;
  }
  return sum / double(len);
}

inline double efd_u(const Instance& in, std::size_t u, int k) {
  const std::size_t len = std::min<std::size_t>(in.lists[u].size(), std::size_t(k));
  const double total = double(total_count(in));
  double sum = 0.0;
  for (std::size_t r = 0; r < len; ++r) {
    const double c = std::max<double>(1.0, double(in.train_counts[in.lists[u][r].first]));
    sum += -std::log2(c / total);
  }
  return sum / double(len);
}

// long tail: items outside the top 20% by count, boundary ties to the head
inline std::vector<bool> long_tail(const Instance& in) {
  std::vector<std::uint32_t> order(in.num_items);
  for (std::uint32_t i = 0; i < in.num_items; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (in.train_counts[a] != in.train_counts[b]) return in.train_counts[a] > in.train_counts[b];
    return a < b;
  });
  std::vector<bool> tail(in.num_items, true);
  const std::size_t head = std::size_t(std::ceil(0.2 * double(in.num_items)));
  const std::uint32_t boundary = in.train_counts[order[head - 1]];
  for (std::uint32_t i = 0; i < in.num_items; ++i) {
    if (boundary > 0) {
      if (in.train_counts[i] >= boundary) tail[i] = false;
    } else {
      tail[i] = in.train_counts[i] == 0;
    }
  }
  return tail;
}

inline double arp_u(const Instance& in, std::size_t u, int k) {
  const std::size_t len = std::min<std::size_t>(in.lists[u].size(), std::size_t(k));
  double sum = 0.0;
  for (std::size_t r = 0; r < len; ++r) sum += double(in.train_counts[in.lists[u][r].first]);
  return sum / double(len);
}

inline double aplt_u(const Instance& in, std::size_t u, int k, const std::vector<bool>& tail) {
  const std::size_t len = std::min<std::size_t>(in.lists[u].size(), std::size_t(k));
  double n = 0.0;
  for (std::size_t r = 0; r < len; ++r) n += tail[in.lists[u][r].first] ? 1.0 : 0.0;
  return n / double(len);
}

inline double aclt_u(const Instance& in, std::size_t u, int k, const std::vector<bool>& tail) {
  const std::size_t len = std::min<std::size_t>(in.lists[u].size(), std::size_t(k));
  double n = 0.0;
  for (std::size_t r = 0; r < len; ++r) n += tail[in.lists[u][r].first] ? 1.0 : 0.0;
  return n;
}

inline double gini(const Instance& in, int k) {
  std::vector<double> exposure(in.num_items, 0.0);
  double total = 0.0;
  for (const auto& list : in.lists) {
    for (std::size_t r = 0; r < std::min<std::size_t>(list.size(), std::size_t(k)); ++r) {
      exposure[list[r].first] += 1.0;
      total += 1.0;
    }
  }
  for (auto& e : exposure) e /= total;
  std::sort(exposure.begin(), exposure.end());
  const double n = double(in.num_items);
  double sum = 0.0;
  for (std::size_t j = 0; j < exposure.size(); ++j) {
    sum += (2.0 * double(j + 1) - n - 1.0) * exposure[j];
  }
  return sum / (n - 1.0);
}

inline double shannon_entropy(const Instance& in, int k) {
  std::vector<double> exposure(in.num_items, 0.0);
  double total = 0.0;
  for (const auto& list : in.lists) {
    for (std::size_t r = 0; r < std::min<std::size_t>(list.size(), std::size_t(k)); ++r) {
      exposure[list[r].first] += 1.0;
      total += 1.0;
    }
  }
  double h = 0.0;
  for (const auto e : exposure) {
    if (e > 0) h -= (e / total) * std::log2(e / total);
  }
  return h;
}

// error metrics over a prediction table; absent predictions are skipped
inline std::optional<std::array<double, 3>> error_metrics(
    const Instance& in,
    const std::map<std::pair<std::uint32_t, std::uint32_t>, double>& predictions) {
  double abs_sum = 0.0, sq_sum = 0.0;
  std::size_t n = 0;
  for (const auto& [u, i, rating] : in.test_ratings) {
    const auto it = predictions.find({u, i});
    if (it == predictions.end()) continue;
    const double e = it->second - rating;
    abs_sum += std::fabs(e);
    sq_sum += e * e;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return std::array<double, 3>{abs_sum / double(n), sq_sum / double(n),
                               std::sqrt(sq_sum / double(n))};
}

// MAD fairness variants
inline std::optional<double> mad(const Instance& in, int k, const std::string& variant) {
  const bool user_based = variant == "UserMADrating" || variant == "UserMADranking";
  const auto& cluster = user_based ? in.user_cluster : in.item_cluster;
  std::map<int, std::pair<double, std::size_t>> groups;

  if (user_based) {
    for (std::size_t u = 0; u < in.num_users; ++u) {
      const std::size_t len = std::min<std::size_t>(in.lists[u].size(), std::size_t(k));
      std::optional<double> value;
      if (variant == "UserMADrating") {
        if (len > 0) {
          double s = 0.0;
          for (std::size_t r = 0; r < len; ++r) s += in.lists[u][r].second;
          value = s / double(len);
        }
      } else {
        if (!in.relevant[u].empty()) value = ndcg_u(in, u, k);
      }
      if (value && cluster[u] >= 0) {
        groups[cluster[u]].first += *value;
        groups[cluster[u]].second += 1;
      }
    }
  } else {
    std::vector<double> sums(in.num_items, 0.0);
    std::vector<std::size_t> counts(in.num_items, 0);
    for (std::size_t u = 0; u < in.num_users; ++u) {
      const std::size_t len = std::min<std::size_t>(in.lists[u].size(), std::size_t(k));
      for (std::size_t r = 0; r < len; ++r) {
        const auto item = in.lists[u][r].first;
        sums[item] += variant == "ItemMADrating" ? in.lists[u][r].second : discount(r + 1);
        counts[item] += 1;
      }
    }
    for (std::uint32_t i = 0; i < in.num_items; ++i) {
      if (counts[i] > 0 && cluster[i] >= 0) {
        groups[cluster[i]].first += sums[i] / double(counts[i]);
        groups[cluster[i]].second += 1;
      }
    }
  }

  std::vector<double> means;
  for (const auto& [id, acc] : groups) {
    if (acc.second > 0) means.push_back(acc.first / double(acc.second));
  }
  if (means.size() < 2) return std::nullopt;
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < means.size(); ++a) {
    for (std::size_t b = a + 1; b < means.size(); ++b) {
      sum += std::fabs(means[a] - means[b]);
      ++pairs;
    }
  }
  return sum / double(pairs);
}

}  // namespace oracle
