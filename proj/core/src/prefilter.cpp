#include "recpipe/prefilter.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "recpipe/errors.hpp"
#include "recpipe/logging.hpp"

namespace recpipe {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

Dataset rebuild(const Dataset& ds, const std::vector<bool>& keep) {
  std::vector<Interaction> rows;
  rows.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    if (keep[i]) rows.push_back(ds.interactions()[i]);
  }
  Dataset out = Dataset::from_interactions(std::move(rows));
  out.inherit_attributes(ds);
  if (out.empty()) warn("prefiltering produced an empty dataset");
  return out;
}

}  // namespace

std::optional<PrefilterStrategy> parse_prefilter_strategy(std::string_view name) {
  const std::string n = lower(name);
  if (n == "global_threshold") return PrefilterStrategy::GlobalThreshold;
  if (n == "global_average") return PrefilterStrategy::GlobalAverage;
  if (n == "user_average") return PrefilterStrategy::UserAverage;
  if (n == "user_k_core") return PrefilterStrategy::UserKCore;
  if (n == "item_k_core") return PrefilterStrategy::ItemKCore;
  if (n == "iterative_k_core") return PrefilterStrategy::IterativeKCore;
  if (n == "iter_n_rounds") return PrefilterStrategy::IterNRounds;
  if (n == "cold_users") return PrefilterStrategy::ColdUsers;
  return std::nullopt;
}

std::string_view prefilter_strategy_name(PrefilterStrategy s) {
  switch (s) {
    case PrefilterStrategy::GlobalThreshold: return "global_threshold";
    case PrefilterStrategy::GlobalAverage: return "global_average";
    case PrefilterStrategy::UserAverage: return "user_average";
    case PrefilterStrategy::UserKCore: return "user_k_core";
    case PrefilterStrategy::ItemKCore: return "item_k_core";
    case PrefilterStrategy::IterativeKCore: return "iterative_k_core";
    case PrefilterStrategy::IterNRounds: return "iter_n_rounds";
    case PrefilterStrategy::ColdUsers: return "cold_users";
  }
  return "global_threshold";
}

const std::vector<std::string>& prefilter_strategy_names() {
  static const std::vector<std::string> names = {
      "global_threshold", "global_average", "user_average",     "user_k_core",
      "item_k_core",      "iterative_k_core", "iter_n_rounds", "cold_users"};
  return names;
}

Dataset filter_by_rating(const Dataset& ds, RatingFilterMode mode,
                         std::optional<double> threshold) {
  if (ds.empty()) return ds;
  std::vector<double> cut_per_user;
  double cut = 0.0;
  switch (mode) {
    case RatingFilterMode::Numerical:
      if (!threshold) throw ConfigError("global_threshold prefilter requires 'threshold'");
      cut = *threshold;
      break;
    case RatingFilterMode::GlobalAverage: {
      double sum = 0.0;
      for (const auto& ev : ds.events()) sum += ev.rating;
      cut = sum / static_cast<double>(ds.size());
      break;
    }
    case RatingFilterMode::UserAverage: {
      std::vector<double> sums(ds.num_users(), 0.0);
      for (const auto& ev : ds.events()) sums[ev.user] += ev.rating;
      cut_per_user.resize(ds.num_users());
      for (std::size_t u = 0; u < ds.num_users(); ++u) {
        cut_per_user[u] = sums[u] / static_cast<double>(ds.user_profile_size()[u]);
      }
      break;
    }
  }
  std::vector<bool> keep(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Event& ev = ds.events()[i];
    const double c = mode == RatingFilterMode::UserAverage ? cut_per_user[ev.user] : cut;
    keep[i] = ev.rating >= c;
  }
  return rebuild(ds, keep);
}

Dataset k_core(const Dataset& ds, KCoreTarget target, int k) {
  if (k < 1) throw ConfigError("k-core requires core >= 1");
  std::vector<bool> keep(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const Event& ev = ds.events()[i];
    const std::uint32_t degree = target == KCoreTarget::User ? ds.user_profile_size()[ev.user]
                                                             : ds.item_popularity()[ev.item];
    keep[i] = degree >= static_cast<std::uint32_t>(k);
  }
  return rebuild(ds, keep);
}

IterativeKCoreResult iterative_k_core(const Dataset& ds, int k, std::optional<int> max_rounds) {
  if (k < 1) throw ConfigError("iterative k-core requires core >= 1");
  if (max_rounds && *max_rounds < 1) throw ConfigError("iter_n_rounds requires rounds >= 1");
  IterativeKCoreResult result;
  result.dataset = ds;
  while (true) {
    ++result.rounds;
    const std::size_t before = result.dataset.size();
    result.dataset = k_core(result.dataset, KCoreTarget::User, k);
    result.dataset = k_core(result.dataset, KCoreTarget::Item, k);
    const bool changed = result.dataset.size() != before;
    if (!changed) break;  // fixpoint: one full verification round executed
    if (max_rounds && result.rounds >= *max_rounds) break;
    if (result.dataset.empty()) break;
  }
  return result;
}

Dataset cold_users(const Dataset& ds, int max_profile) {
  if (max_profile < 1) throw ConfigError("cold_users requires max_profile >= 1");
  std::vector<bool> keep(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    keep[i] = ds.user_profile_size()[ds.events()[i].user] <= static_cast<std::uint32_t>(max_profile);
  }
  return rebuild(ds, keep);
}

Dataset apply_prefilter(const Dataset& ds, const PrefilterStep& step) {
  switch (step.strategy) {
    case PrefilterStrategy::GlobalThreshold:
      return filter_by_rating(ds, RatingFilterMode::Numerical, step.threshold);
    case PrefilterStrategy::GlobalAverage:
      return filter_by_rating(ds, RatingFilterMode::GlobalAverage);
    case PrefilterStrategy::UserAverage:
      return filter_by_rating(ds, RatingFilterMode::UserAverage);
    case PrefilterStrategy::UserKCore:
      return k_core(ds, KCoreTarget::User, step.core.value_or(0));
    case PrefilterStrategy::ItemKCore:
      return k_core(ds, KCoreTarget::Item, step.core.value_or(0));
    case PrefilterStrategy::IterativeKCore:
      return iterative_k_core(ds, step.core.value_or(0)).dataset;
    case PrefilterStrategy::IterNRounds:
      return iterative_k_core(ds, step.core.value_or(0), step.rounds).dataset;
    case PrefilterStrategy::ColdUsers:
      return cold_users(ds, step.max_profile.value_or(5));
  }
  return ds;
}

Dataset apply_prefilters(const Dataset& ds, const std::vector<PrefilterStep>& steps) {
  Dataset current = ds;
  for (const auto& step : steps) {
    current = apply_prefilter(current, step);
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%s: %zu users, %zu items, %zu interactions remain",
                  std::string(prefilter_strategy_name(step.strategy)).c_str(),
                  current.num_users(), current.num_items(), current.size());
    log_line(Stage::Filter, buf);
  }
  return current;
}

}  // namespace recpipe
