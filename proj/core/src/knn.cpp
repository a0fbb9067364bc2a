#include <algorithm>
#include <cmath>

#include "models_impl.hpp"
#include "recpipe/errors.hpp"
#include "recpipe/parallel.hpp"

namespace recpipe::detail {

namespace {

// Per-entity aggregates cached before the pairwise sweep.
struct EntityAggregates {
  std::vector<double> sum, abs_sum, sumsq;
  std::vector<std::uint32_t> support;
};

EntityAggregates aggregate(const std::vector<std::vector<SparseEntry>>& profiles) {
  EntityAggregates agg;
  const std::size_t n = profiles.size();
  agg.sum.assign(n, 0.0);
  agg.abs_sum.assign(n, 0.0);
  agg.sumsq.assign(n, 0.0);
  agg.support.assign(n, 0);
  for (std::size_t e = 0; e < n; ++e) {
    for (const auto& [idx, v] : profiles[e]) {
      agg.sum[e] += v;
      agg.abs_sum[e] += std::fabs(v);
      agg.sumsq[e] += v * v;
    }
    agg.support[e] = static_cast<std::uint32_t>(profiles[e].size());
  }
  return agg;
}

// Row-local accumulators for one entity against every co-engaged entity.
// Epoch marking avoids clearing the dense arrays between rows.
struct RowScratch {
  std::vector<std::uint32_t> epoch;
  std::uint32_t current = 0;
  std::vector<std::uint32_t> touched;
  std::vector<double> dot, co_sum_x, co_sum_y, co_sumsq_x, co_sumsq_y;
  std::vector<double> abs_diff, sq_diff, co_abs_x, co_abs_y;
  std::vector<std::uint32_t> cnt;

  void resize(std::size_t n) {
    epoch.assign(n, 0);
    dot.resize(n);
    co_sum_x.resize(n);
    co_sum_y.resize(n);
    co_sumsq_x.resize(n);
    co_sumsq_y.resize(n);
    abs_diff.resize(n);
    sq_diff.resize(n);
    co_abs_x.resize(n);
    co_abs_y.resize(n);
    cnt.resize(n);
  }

  void begin_row() {
    ++current;
    touched.clear();
  }

  void touch(std::uint32_t j) {
    if (epoch[j] != current) {
      epoch[j] = current;
      touched.push_back(j);
      dot[j] = co_sum_x[j] = co_sum_y[j] = co_sumsq_x[j] = co_sumsq_y[j] = 0.0;
      abs_diff[j] = sq_diff[j] = co_abs_x[j] = co_abs_y[j] = 0.0;
      cnt[j] = 0;
    }
  }
};

double kernel(SimilarityKind kind, const RowScratch& s, const EntityAggregates& agg,
              std::uint32_t e, std::uint32_t j) {
  switch (kind) {
    case SimilarityKind::Cosine:
    case SimilarityKind::AdjustedCosine: {
      const double nx = std::sqrt(agg.sumsq[e]);
      const double ny = std::sqrt(agg.sumsq[j]);
      if (nx == 0.0 || ny == 0.0) return 0.0;
      return s.dot[j] / (nx * ny);
    }
    case SimilarityKind::Jaccard: {
      const std::uint32_t uni = agg.support[e] + agg.support[j] - s.cnt[j];
      if (uni == 0) return 0.0;
      return static_cast<double>(s.cnt[j]) / static_cast<double>(uni);
    }
    case SimilarityKind::Dice: {
      const std::uint32_t total = agg.support[e] + agg.support[j];
      if (total == 0) return 0.0;
      return 2.0 * static_cast<double>(s.cnt[j]) / static_cast<double>(total);
    }
    case SimilarityKind::Pearson: {
      if (s.cnt[j] < 2) return 0.0;
      const double n = static_cast<double>(s.cnt[j]);
      const double num = s.dot[j] - s.co_sum_x[j] * s.co_sum_y[j] / n;
      const double var_x = s.co_sumsq_x[j] - s.co_sum_x[j] * s.co_sum_x[j] / n;
      const double var_y = s.co_sumsq_y[j] - s.co_sum_y[j] * s.co_sum_y[j] / n;
      if (var_x <= 0.0 || var_y <= 0.0) return 0.0;
      return num / std::sqrt(var_x * var_y);
    }
    case SimilarityKind::Euclidean: {
      const double d2 = s.sq_diff[j] + (agg.sumsq[e] - s.co_sumsq_x[j]) +
                        (agg.sumsq[j] - s.co_sumsq_y[j]);
      return 1.0 / (1.0 + std::sqrt(std::max(0.0, d2)));
    }
    case SimilarityKind::Manhattan: {
      const double d = s.abs_diff[j] + (agg.abs_sum[e] - s.co_abs_x[j]) +
                       (agg.abs_sum[j] - s.co_abs_y[j]);
      return 1.0 / (1.0 + d);
    }
    case SimilarityKind::BrayCurtis: {
      const double den = agg.sum[e] + agg.sum[j];
      if (den == 0.0) return 0.0;
      const double num = s.abs_diff[j] + (agg.abs_sum[e] - s.co_abs_x[j]) +
                         (agg.abs_sum[j] - s.co_abs_y[j]);
      return 1.0 - num / den;
    }
  }
  return 0.0;
}

// Top-`neighbors` similarity lists over entity profiles. index_profiles is
// the transpose; only co-engaged pairs are evaluated.
std::vector<std::vector<Neighbor>> neighborhoods(
    const std::vector<std::vector<SparseEntry>>& entity_profiles,
    const std::vector<std::vector<SparseEntry>>& index_profiles, SimilarityKind kind,
    int neighbors, unsigned workers) {
  const std::size_t n = entity_profiles.size();
  std::vector<std::vector<Neighbor>> result(n);
  std::vector<RowScratch> scratch(workers == 0 ? 1 : workers);
  const EntityAggregates agg = aggregate(entity_profiles);

  parallel_for(n, workers, [&](unsigned worker, std::size_t e) {
    RowScratch& s = scratch[worker];
    if (s.epoch.size() != n) s.resize(n);
    s.begin_row();
    for (const auto& [idx, x] : entity_profiles[e]) {
      for (const auto& [other, y] : index_profiles[idx]) {
        if (other == e) continue;
        s.touch(other);
        s.dot[other] += x * y;
        s.cnt[other]++;
        s.co_sum_x[other] += x;
        s.co_sum_y[other] += y;
        s.co_sumsq_x[other] += x * x;
        s.co_sumsq_y[other] += y * y;
        s.abs_diff[other] += std::fabs(x - y);
        s.sq_diff[other] += (x - y) * (x - y);
        s.co_abs_x[other] += std::fabs(x);
        s.co_abs_y[other] += std::fabs(y);
      }
    }
    std::vector<Neighbor>& row = result[e];
    row.reserve(s.touched.size());
    for (const std::uint32_t j : s.touched) {
      const double sim = kernel(kind, s, agg, static_cast<std::uint32_t>(e), j);
      if (sim != 0.0) row.push_back({j, sim});
    }
    std::sort(row.begin(), row.end(), [](const Neighbor& a, const Neighbor& b) {
      if (a.sim != b.sim) return a.sim > b.sim;
      return a.entity < b.entity;
    });
    if (row.size() > static_cast<std::size_t>(neighbors)) {
      row.resize(static_cast<std::size_t>(neighbors));
    }
    row.shrink_to_fit();
  });
  return result;
}

// Subtract each user's mean rating from their entries (adjusted cosine).
void center_by_user(std::vector<std::vector<SparseEntry>>& user_profiles,
                    std::vector<std::vector<SparseEntry>>& item_profiles) {
  std::vector<double> mean(user_profiles.size(), 0.0);
  for (std::size_t u = 0; u < user_profiles.size(); ++u) {
    if (user_profiles[u].empty()) continue;
    double sum = 0.0;
    for (const auto& [item, r] : user_profiles[u]) sum += r;
    mean[u] = sum / static_cast<double>(user_profiles[u].size());
    for (auto& [item, r] : user_profiles[u]) r -= mean[u];
  }
  for (auto& profile : item_profiles) {
    for (auto& [user, r] : profile) r -= mean[user];
  }
}

}  // namespace

KnnModel::KnnModel(ModelKind kind, int neighbors, SimilarityKind similarity,
                   const RatingMatrix& train, const Dataset& dataset, unsigned workers)
    : kind_(kind), num_items_(train.num_items), user_profiles_(train.user_profiles) {
  if (kind == ModelKind::AttributeItemKNN) {
    // binary item-feature vectors; attributes come from the base dataset
    const auto& features = dataset.item_features();
    std::vector<std::vector<SparseEntry>> item_vecs(train.num_items);
    std::size_t num_features = dataset.feature_ids().size();
    std::vector<std::vector<SparseEntry>> feature_vecs(num_features);
    for (std::size_t i = 0; i < train.num_items && i < features.size(); ++i) {
      for (const std::uint32_t f : features[i]) {
        item_vecs[i].emplace_back(f, 1.0);
        feature_vecs[f].emplace_back(static_cast<std::uint32_t>(i), 1.0);
      }
    }
    neighbors_ = neighborhoods(item_vecs, feature_vecs, similarity, neighbors, workers);
  } else {
    std::vector<std::vector<SparseEntry>> users = train.user_profiles;
    std::vector<std::vector<SparseEntry>> items = train.item_profiles;
    if (similarity == SimilarityKind::AdjustedCosine) center_by_user(users, items);
    if (kind == ModelKind::ItemKNN) {
      neighbors_ = neighborhoods(items, users, similarity, neighbors, workers);
    } else {
      neighbors_ = neighborhoods(users, items, similarity, neighbors, workers);
    }
  }

  if (kind_ != ModelKind::UserKNN) {
    reverse_.resize(num_items_);
    for (std::uint32_t i = 0; i < neighbors_.size(); ++i) {
      for (const Neighbor& nb : neighbors_[i]) {
        reverse_[nb.entity].push_back({i, nb.sim});
      }
    }
  }
}

void KnnModel::score_user(std::uint32_t user, std::vector<double>& out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (user >= user_profiles_.size()) return;
  if (kind_ == ModelKind::UserKNN) {
    // score(u, i) = sum over neighbor users v rating i of sim(u, v) * r(v, i)
    for (const Neighbor& nb : neighbors_[user]) {
      for (const auto& [item, r] : user_profiles_[nb.entity]) {
        out[item] += nb.sim * r;
      }
    }
    return;
  }
  // score(u, i) = sum over j in N(i) rated by u of sim(i, j) * r(u, j)
  for (const auto& [j, r] : user_profiles_[user]) {
    for (const Neighbor& nb : reverse_[j]) {
      out[nb.entity] += nb.sim * r;
    }
  }
}

std::optional<double> KnnModel::predict_rating(std::uint32_t user, std::uint32_t item) const {
  // AttributeItemKNN ranks well but is not a rating predictor.
  if (kind_ == ModelKind::AttributeItemKNN) return std::nullopt;
  if (user >= user_profiles_.size() || item >= num_items_) return std::nullopt;
  double num = 0.0, den = 0.0;
  std::size_t overlaps = 0;
  const auto rating_of = [](const std::vector<SparseEntry>& profile,
                            std::uint32_t key) -> std::optional<double> {
    const auto it = std::lower_bound(
        profile.begin(), profile.end(), key,
        [](const SparseEntry& e, std::uint32_t value) { return e.first < value; });
    if (it != profile.end() && it->first == key) return it->second;
    return std::nullopt;
  };
  if (kind_ == ModelKind::ItemKNN) {
    for (const Neighbor& nb : neighbors_[item]) {
      if (const auto r = rating_of(user_profiles_[user], nb.entity)) {
        num += nb.sim * *r;
        den += std::fabs(nb.sim);
        ++overlaps;
      }
    }
  } else {  // UserKNN
    for (const Neighbor& nb : neighbors_[user]) {
      if (const auto r = rating_of(user_profiles_[nb.entity], item)) {
        num += nb.sim * *r;
        den += std::fabs(nb.sim);
        ++overlaps;
      }
    }
  }
  if (overlaps == 0 || den == 0.0) return std::nullopt;
  return num / den;
}

}  // namespace recpipe::detail
