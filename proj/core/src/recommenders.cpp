#include "recpipe/recommender.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "models_impl.hpp"
#include "recpipe/errors.hpp"
#include "recpipe/logging.hpp"
#include "recpipe/parallel.hpp"
#include "recpipe/rng.hpp"

namespace recpipe {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  const std::string n = lower(name);
  if (n == "random") return ModelKind::Random;
  if (n == "mostpop") return ModelKind::MostPop;
  if (n == "itemknn") return ModelKind::ItemKNN;
  if (n == "userknn") return ModelKind::UserKNN;
  if (n == "attributeitemknn") return ModelKind::AttributeItemKNN;
  if (n == "puresvd") return ModelKind::PureSVD;
  if (n == "bprmf") return ModelKind::BPRMF;
  return std::nullopt;
}

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Random: return "Random";
    case ModelKind::MostPop: return "MostPop";
    case ModelKind::ItemKNN: return "ItemKNN";
    case ModelKind::UserKNN: return "UserKNN";
    case ModelKind::AttributeItemKNN: return "AttributeItemKNN";
    case ModelKind::PureSVD: return "PureSVD";
    case ModelKind::BPRMF: return "BPRMF";
  }
  return "Random";
}

const std::vector<std::string>& registered_model_names() {
  static const std::vector<std::string> names = {"Random",  "MostPop", "ItemKNN", "UserKNN",
                                                 "AttributeItemKNN", "PureSVD", "BPRMF"};
  return names;
}

namespace detail {

double get_number_param(const Assignment& params, const std::string& name, double fallback) {
  const auto it = params.find(name);
  if (it == params.end()) return fallback;
  const auto* v = std::get_if<double>(&it->second);
  if (!v) throw ModelError("hyperparameter '" + name + "' must be numeric");
  return *v;
}

long long get_int_param(const Assignment& params, const std::string& name, long long fallback,
                        long long min_value) {
  const auto it = params.find(name);
  long long value = fallback;
  if (it != params.end()) {
    const auto* v = std::get_if<double>(&it->second);
    if (!v) throw ModelError("hyperparameter '" + name + "' must be numeric");
    value = static_cast<long long>(std::llround(*v));
  }
  if (value < min_value) {
    throw ModelError("hyperparameter '" + name + "' must be >= " + std::to_string(min_value));
  }
  return value;
}

std::string get_string_param(const Assignment& params, const std::string& name,
                             const std::string& fallback) {
  const auto it = params.find(name);
  if (it == params.end()) return fallback;
  if (const auto* s = std::get_if<std::string>(&it->second)) return *s;
  return param_value_text(it->second);
}

void warn_unknown_params(const Assignment& params, std::initializer_list<const char*> known,
                         const char* model) {
  for (const auto& [name, value] : params) {
    bool found = false;
    for (const char* k : known) {
      if (name == k) {
        found = true;
        break;
      }
    }
    if (!found) warn(std::string(model) + ": hyperparameter '" + name + "' is not used");
  }
}

void RandomModel::score_user(std::uint32_t user, std::vector<double>& out) const {
  Rng rng(derive_seed(seed_, "user", user));
  for (auto& score : out) score = rng.uniform();
}

MostPopModel::MostPopModel(const RatingMatrix& train) {
  scores_.assign(train.item_counts.begin(), train.item_counts.end());
}

void MostPopModel::score_user(std::uint32_t user, std::vector<double>& out) const {
  (void)user;
  std::copy(scores_.begin(), scores_.end(), out.begin());
}

}  // namespace detail

std::unique_ptr<Recommender> fit_recommender(ModelKind kind, const Assignment& params,
                                             const RatingMatrix& train, const Dataset& dataset,
                                             std::uint64_t seed, unsigned workers) {
  using namespace detail;
  switch (kind) {
    case ModelKind::Random:
      warn_unknown_params(params, {}, "Random");
      return std::make_unique<RandomModel>(seed);
    case ModelKind::MostPop:
      warn_unknown_params(params, {}, "MostPop");
      return std::make_unique<MostPopModel>(train);
    case ModelKind::ItemKNN:
    case ModelKind::UserKNN:
    case ModelKind::AttributeItemKNN: {
      warn_unknown_params(params, {"neighbors", "similarity"}, "kNN");
      const int neighbors = static_cast<int>(get_int_param(params, "neighbors", 40, 1));
      const std::string sim_name = get_string_param(params, "similarity", "cosine");
      const auto sim = parse_similarity(sim_name);
      if (!sim) {
        std::string names;
        for (const auto& n : similarity_names()) names += names.empty() ? n : ", " + n;
        throw ModelError("unknown similarity '" + sim_name + "'; valid kinds: " + names);
      }
      if (kind == ModelKind::AttributeItemKNN && !dataset.has_attributes()) {
        throw ModelError("AttributeItemKNN requires side information (attribute_path)");
      }
      return std::make_unique<KnnModel>(kind, neighbors, *sim, train, dataset, workers);
    }
    case ModelKind::PureSVD: {
      warn_unknown_params(params, {"factors"}, "PureSVD");
      const int factors = static_cast<int>(get_int_param(params, "factors", 10, 1));
      return std::make_unique<PureSvdModel>(factors, train, seed, workers);
    }
    case ModelKind::BPRMF: {
      warn_unknown_params(params, {"factors", "lr", "epochs", "reg"}, "BPRMF");
      const int factors = static_cast<int>(get_int_param(params, "factors", 10, 1));
      const int epochs = static_cast<int>(get_int_param(params, "epochs", 10, 1));
      const double lr = get_number_param(params, "lr", 0.05);
      const double reg = get_number_param(params, "reg", 0.01);
      if (!(lr > 0)) throw ModelError("hyperparameter 'lr' must be > 0");
      if (reg < 0) throw ModelError("hyperparameter 'reg' must be >= 0");
      return std::make_unique<BprmfModel>(factors, lr, epochs, reg, train, seed);
    }
  }
  throw ModelError("unknown model kind");
}

RecommendationLists recommend(const Recommender& model, const RatingMatrix& exclusion,
                              std::span<const std::uint32_t> users, int top_k, bool exclude_train,
                              unsigned workers) {
  if (top_k <= 0) throw ModelError("top_k must be positive");
  RecommendationLists out;
  out.users.assign(users.begin(), users.end());
  out.lists.resize(users.size());
  const std::size_t num_items = exclusion.num_items;

  std::vector<std::vector<double>> scratch(workers == 0 ? 1 : workers);
  std::vector<std::vector<ScoredItem>> candidates(workers == 0 ? 1 : workers);

  parallel_for(users.size(), workers, [&](unsigned worker, std::size_t idx) {
    const std::uint32_t user = users[idx];
    auto& scores = scratch[worker];
    scores.assign(num_items, 0.0);
    const bool cold = user >= exclusion.user_profiles.size() ||
                      exclusion.user_profiles[user].empty();
    if (cold) {
      // unknown and cold users receive the popularity ranking
      for (std::size_t i = 0; i < num_items; ++i) {
        scores[i] = static_cast<double>(exclusion.item_counts[i]);
      }
    } else {
      model.score_user(user, scores);
    }

    auto& cand = candidates[worker];
    cand.clear();
    cand.reserve(num_items);
    static const std::vector<SparseEntry> kEmptyProfile;
    const auto& profile = user < exclusion.user_profiles.size() ? exclusion.user_profiles[user]
                                                                : kEmptyProfile;
    std::size_t p = 0;
    for (std::uint32_t item = 0; item < num_items; ++item) {
      while (p < profile.size() && profile[p].first < item) ++p;
      if (exclude_train && p < profile.size() && profile[p].first == item) continue;
      cand.push_back({item, scores[item]});
    }
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(top_k), cand.size());
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end(),
                      [](const ScoredItem& a, const ScoredItem& b) {
                        if (a.score != b.score) return a.score > b.score;
                        return a.item < b.item;
                      });
    out.lists[idx].assign(cand.begin(), cand.begin() + k);
  });
  return out;
}

}  // namespace recpipe
