#include <cmath>

#include "models_impl.hpp"
#include "recpipe/rng.hpp"

namespace recpipe {

namespace {

// sigma(-x) = 1 / (1 + e^x), evaluated without overflow.
double sigmoid_neg(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

}  // namespace

BprGradient bpr_loss_gradient(std::span<const double> user_factors,
                              std::span<const double> pos_factors,
                              std::span<const double> neg_factors, double reg) {
  const std::size_t f = user_factors.size();
  BprGradient g;
  g.d_user.resize(f);
  g.d_pos.resize(f);
  g.d_neg.resize(f);
  double x = 0.0;
  double sq = 0.0;
  for (std::size_t k = 0; k < f; ++k) {
    x += user_factors[k] * (pos_factors[k] - neg_factors[k]);
    sq += user_factors[k] * user_factors[k] + pos_factors[k] * pos_factors[k] +
          neg_factors[k] * neg_factors[k];
  }
  const double s = sigmoid_neg(x);
  // ln sigma(x) computed stably
  g.loss = (x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x))) - 0.5 * reg * sq;
  for (std::size_t k = 0; k < f; ++k) {
    g.d_user[k] = s * (pos_factors[k] - neg_factors[k]) - reg * user_factors[k];
    g.d_pos[k] = s * user_factors[k] - reg * pos_factors[k];
    g.d_neg[k] = -s * user_factors[k] - reg * neg_factors[k];
  }
  return g;
}

namespace detail {

BprmfModel::BprmfModel(int factors, double lr, int epochs, double reg, const RatingMatrix& train,
                       std::uint64_t seed)
    : factors_(static_cast<std::size_t>(factors)), num_items_(train.num_items) {
  const std::size_t f = factors_;
  user_factors_.resize(train.num_users * f);
  item_factors_.resize(train.num_items * f);
  Rng rng(seed);
  for (auto& v : user_factors_) v = rng.normal(0.0, 0.01);
  for (auto& v : item_factors_) v = rng.normal(0.0, 0.01);

  // flattened (user, positive item) pairs in user order
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  pairs.reserve(train.num_events);
  for (std::uint32_t u = 0; u < train.num_users; ++u) {
    for (const auto& [item, r] : train.user_profiles[u]) pairs.emplace_back(u, item);
  }
  if (pairs.empty() || train.num_items < 2) return;

  const std::size_t steps_per_epoch = pairs.size();
  for (int epoch = 0; epoch < epochs; ++epoch) {
    for (std::size_t step = 0; step < steps_per_epoch; ++step) {
      const auto& [u, pos] = pairs[rng.uniform_int(pairs.size())];
      // negative item uniform over the items outside the user's profile
      std::uint32_t neg = 0;
      bool found = false;
      for (int tries = 0; tries < 1000; ++tries) {
        neg = static_cast<std::uint32_t>(rng.uniform_int(train.num_items));
        if (!train.user_has_item(u, neg)) {
          found = true;
          break;
        }
      }
      if (!found) continue;  // user interacted with the whole catalog

      double* pu = &user_factors_[u * f];
      double* qi = &item_factors_[pos * f];
      double* qj = &item_factors_[neg * f];
      double x = 0.0;
      for (std::size_t k = 0; k < f; ++k) x += pu[k] * (qi[k] - qj[k]);
      const double s = sigmoid_neg(x);
      for (std::size_t k = 0; k < f; ++k) {
        const double puk = pu[k];
        const double qik = qi[k];
        const double qjk = qj[k];
        pu[k] += lr * (s * (qik - qjk) - reg * puk);
        qi[k] += lr * (s * puk - reg * qik);
        qj[k] += lr * (-s * puk - reg * qjk);
      }
    }
  }
}

void BprmfModel::score_user(std::uint32_t user, std::vector<double>& out) const {
  const double* pu = &user_factors_[user * factors_];
  for (std::size_t i = 0; i < num_items_; ++i) {
    const double* qi = &item_factors_[i * factors_];
    double s = 0.0;
    for (std::size_t k = 0; k < factors_; ++k) s += pu[k] * qi[k];
    out[i] = s;
  }
}

}  // namespace detail

std::vector<double> pure_svd_singular_values(const Recommender& model) {
  const auto* svd = dynamic_cast<const detail::PureSvdModel*>(&model);
  if (!svd) return {};
  return svd->singular_values();
}

}  // namespace recpipe
