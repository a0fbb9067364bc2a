#pragma once

// Internal model classes shared by the recommender translation units.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "recpipe/rating_matrix.hpp"
#include "recpipe/recommender.hpp"
#include "recpipe/search_space.hpp"
#include "recpipe/similarity.hpp"

namespace recpipe::detail {

double get_number_param(const Assignment& params, const std::string& name, double fallback);
long long get_int_param(const Assignment& params, const std::string& name, long long fallback,
                        long long min_value);
std::string get_string_param(const Assignment& params, const std::string& name,
                             const std::string& fallback);
void warn_unknown_params(const Assignment& params, std::initializer_list<const char*> known,
                         const char* model);

class RandomModel final : public Recommender {
 public:
  explicit RandomModel(std::uint64_t seed) : seed_(seed) {}
  ModelKind kind() const override { return ModelKind::Random; }
  void score_user(std::uint32_t user, std::vector<double>& out) const override;

 private:
  std::uint64_t seed_;
};

class MostPopModel final : public Recommender {
 public:
  explicit MostPopModel(const RatingMatrix& train);
  ModelKind kind() const override { return ModelKind::MostPop; }
  void score_user(std::uint32_t user, std::vector<double>& out) const override;

 private:
  std::vector<double> scores_;
};

struct Neighbor {
  std::uint32_t entity = 0;
  double sim = 0.0;
};

// Shared by ItemKNN, UserKNN and AttributeItemKNN. The neighborhood is built
// over entity profiles (item columns, user rows, or item attribute vectors);
// scoring always weights train ratings.
class KnnModel final : public Recommender {
 public:
  KnnModel(ModelKind kind, int neighbors, SimilarityKind similarity, const RatingMatrix& train,
           const Dataset& dataset, unsigned workers);
  ModelKind kind() const override { return kind_; }
  void score_user(std::uint32_t user, std::vector<double>& out) const override;
  std::optional<double> predict_rating(std::uint32_t user, std::uint32_t item) const override;

  const std::vector<std::vector<Neighbor>>& neighbor_lists() const { return neighbors_; }

 private:
  ModelKind kind_;
  std::size_t num_items_ = 0;
  std::vector<std::vector<SparseEntry>> user_profiles_;  // train ratings
  std::vector<std::vector<Neighbor>> neighbors_;         // per entity, sim desc
  std::vector<std::vector<Neighbor>> reverse_;           // rev[j]: (i, sim) with j in N(i)
};

class PureSvdModel final : public Recommender {
 public:
  PureSvdModel(int factors, const RatingMatrix& train, std::uint64_t seed, unsigned workers);
  ModelKind kind() const override { return ModelKind::PureSVD; }
  void score_user(std::uint32_t user, std::vector<double>& out) const override;
  std::optional<double> predict_rating(std::uint32_t user, std::uint32_t item) const override;

  const std::vector<double>& singular_values() const { return singular_values_; }

 private:
  std::size_t factors_ = 0;
  std::size_t num_items_ = 0;
  std::vector<double> user_factors_;  // R*V, row-major (num_users x f)
  std::vector<double> item_factors_;  // V, row-major (num_items x f)
  std::vector<double> singular_values_;
};

class BprmfModel final : public Recommender {
 public:
  BprmfModel(int factors, double lr, int epochs, double reg, const RatingMatrix& train,
             std::uint64_t seed);
  ModelKind kind() const override { return ModelKind::BPRMF; }
  void score_user(std::uint32_t user, std::vector<double>& out) const override;

 private:
  std::size_t factors_ = 0;
  std::size_t num_items_ = 0;
  std::vector<double> user_factors_;  // row-major (num_users x f)
  std::vector<double> item_factors_;  // row-major (num_items x f)
};

}  // namespace recpipe::detail
