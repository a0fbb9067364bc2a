#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "recpipe/rating_matrix.hpp"
#include "recpipe/search_space.hpp"

namespace recpipe {

enum class ModelKind { Random, MostPop, ItemKNN, UserKNN, AttributeItemKNN, PureSVD, BPRMF };

std::optional<ModelKind> parse_model_kind(std::string_view name);  // case-insensitive
std::string_view model_kind_name(ModelKind kind);
const std::vector<std::string>& registered_model_names();

struct ScoredItem {
  std::uint32_t item = 0;
  double score = 0.0;

  bool operator==(const ScoredItem&) const = default;
};

// Per-user ranked lists, aligned with `users`. Entries are ordered by
// (score desc, item id asc) and never contain the user's training items.
struct RecommendationLists {
  std::vector<std::uint32_t> users;
  std::vector<std::vector<ScoredItem>> lists;
};

// A fitted model. Immutable after fit; scoring is deterministic and safe to
// call from multiple threads.
class Recommender {
 public:
  virtual ~Recommender() = default;

  virtual ModelKind kind() const = 0;

  // Writes a score for every catalog item into `out` (resized by caller).
  virtual void score_user(std::uint32_t user, std::vector<double>& out) const = 0;

  // Rating prediction for the error metrics; absent for ranking-only models
  // and when no neighbor overlaps.
  virtual std::optional<double> predict_rating(std::uint32_t user, std::uint32_t item) const {
    (void)user;
    (void)item;
    return std::nullopt;
  }
};

// Trains a model. `dataset` supplies side information (attributes) where the
// model needs it; `train` is the fold's rating matrix. Deterministic given
// the seed, for any worker count.
std::unique_ptr<Recommender> fit_recommender(ModelKind kind, const Assignment& params,
                                             const RatingMatrix& train, const Dataset& dataset,
                                             std::uint64_t seed, unsigned workers);

// Full-catalog ranking minus each user's training items, truncated to top_k.
// Users without a training profile receive the popularity ranking.
// `exclusion` supplies both the excluded profiles and the fallback counts
// (usually the same matrix the model was fitted on).
RecommendationLists recommend(const Recommender& model, const RatingMatrix& exclusion,
                              std::span<const std::uint32_t> users, int top_k, bool exclude_train,
                              unsigned workers);

// BPR step objective and its analytic gradient, exposed so the finite
// difference check exercises the exact code the SGD loop uses.
struct BprGradient {
  double loss = 0.0;
  std::vector<double> d_user, d_pos, d_neg;
};
BprGradient bpr_loss_gradient(std::span<const double> user_factors,
                              std::span<const double> pos_factors,
                              std::span<const double> neg_factors, double reg);

// Converged singular values of a fitted PureSVD model (test hook).
std::vector<double> pure_svd_singular_values(const Recommender& model);

}  // namespace recpipe
