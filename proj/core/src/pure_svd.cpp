#include <algorithm>
#include <cmath>

#include "models_impl.hpp"
#include "recpipe/logging.hpp"
#include "recpipe/parallel.hpp"
#include "recpipe/rng.hpp"

namespace recpipe::detail {

namespace {

// Modified Gram-Schmidt over the f columns of a row-major (n x f) matrix.
// Degenerate columns are replaced with deterministic canonical vectors.
void orthonormalize(std::vector<double>& m, std::size_t n, std::size_t f) {
  std::size_t fallback = 0;
  for (std::size_t k = 0; k < f; ++k) {
    for (std::size_t prev = 0; prev < k; ++prev) {
      double proj = 0.0;
      for (std::size_t r = 0; r < n; ++r) proj += m[r * f + k] * m[r * f + prev];
      for (std::size_t r = 0; r < n; ++r) m[r * f + k] -= proj * m[r * f + prev];
    }
    double norm = 0.0;
    for (std::size_t r = 0; r < n; ++r) norm += m[r * f + k] * m[r * f + k];
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
      // replace with the next canonical basis vector and retry this column
      for (std::size_t r = 0; r < n; ++r) m[r * f + k] = 0.0;
      m[(fallback % n) * f + k] = 1.0;
      ++fallback;
      --k;
      continue;
    }
    for (std::size_t r = 0; r < n; ++r) m[r * f + k] /= norm;
  }
}

}  // namespace

PureSvdModel::PureSvdModel(int factors, const RatingMatrix& train, std::uint64_t seed,
                           unsigned workers)
    : num_items_(train.num_items) {
  const std::size_t max_rank = std::min(train.num_users, train.num_items);
  factors_ = static_cast<std::size_t>(factors);
  if (factors_ > max_rank && max_rank > 0) {
    warn("PureSVD factors clamped to " + std::to_string(max_rank));
    factors_ = max_rank;
  }
  const std::size_t u_n = train.num_users;
  const std::size_t i_n = train.num_items;
  const std::size_t f = factors_;

  // Orthogonal (block power) iteration on R^T R: V <- orth(R^T (R V)).
  std::vector<double> v(i_n * f);
  Rng rng(seed);
  for (auto& x : v) x = rng.normal();
  orthonormalize(v, i_n, f);

  std::vector<double> t(u_n * f);  // R V
  std::vector<double> w(i_n * f);  // R^T T
  std::vector<double> v_prev;

  const auto multiply_rv = [&](const std::vector<double>& vin) {
    parallel_for(u_n, workers, [&](unsigned, std::size_t u) {
      double* row = &t[u * f];
      std::fill(row, row + f, 0.0);
      for (const auto& [item, r] : train.user_profiles[u]) {
        const double* vrow = &vin[item * f];
        for (std::size_t k = 0; k < f; ++k) row[k] += r * vrow[k];
      }
    });
  };

  const int max_iterations = 300;
  for (int iter = 1; iter <= max_iterations; ++iter) {
    multiply_rv(v);
    parallel_for(i_n, workers, [&](unsigned, std::size_t i) {
      double* row = &w[i * f];
      std::fill(row, row + f, 0.0);
      for (const auto& [user, r] : train.item_profiles[i]) {
        const double* trow = &t[user * f];
        for (std::size_t k = 0; k < f; ++k) row[k] += r * trow[k];
      }
    });
    v_prev = v;
    v = w;
    orthonormalize(v, i_n, f);

    // Subspace residual: ||V_new - V_old (V_old^T V_new)||_F^2 = f - ||P||_F^2.
    double p_norm2 = 0.0;
    for (std::size_t a = 0; a < f; ++a) {
      for (std::size_t b = 0; b < f; ++b) {
        double p = 0.0;
        for (std::size_t r = 0; r < i_n; ++r) p += v_prev[r * f + a] * v[r * f + b];
        p_norm2 += p * p;
      }
    }
    const double residual =
        std::sqrt(std::max(0.0, (static_cast<double>(f) - p_norm2) / static_cast<double>(f)));
    if (iter >= 10 && residual < 1e-6) break;
  }

  multiply_rv(v);
  singular_values_.assign(f, 0.0);
  for (std::size_t k = 0; k < f; ++k) {
    double norm = 0.0;
    for (std::size_t u = 0; u < u_n; ++u) norm += t[u * f + k] * t[u * f + k];
    singular_values_[k] = std::sqrt(norm);
  }
  user_factors_ = std::move(t);  // R V = U Sigma
  item_factors_ = std::move(v);
}

void PureSvdModel::score_user(std::uint32_t user, std::vector<double>& out) const {
  const double* urow = &user_factors_[user * factors_];
  for (std::size_t i = 0; i < num_items_; ++i) {
    const double* irow = &item_factors_[i * factors_];
    double s = 0.0;
    for (std::size_t k = 0; k < factors_; ++k) s += urow[k] * irow[k];
    out[i] = s;
  }
}

std::optional<double> PureSvdModel::predict_rating(std::uint32_t user, std::uint32_t item) const {
  if (user * factors_ >= user_factors_.size() || item >= num_items_) return std::nullopt;
  const double* urow = &user_factors_[user * factors_];
  const double* irow = &item_factors_[item * factors_];
  double s = 0.0;
  for (std::size_t k = 0; k < factors_; ++k) s += urow[k] * irow[k];
  return s;
}

}  // namespace recpipe::detail
