#include "recpipe/split.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <unordered_set>

#include "recpipe/errors.hpp"
#include "recpipe/logging.hpp"
#include "recpipe/rng.hpp"

namespace recpipe {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Event indices grouped per user, in event order.
std::vector<std::vector<std::size_t>> profiles_of(const Dataset& base,
                                                  std::span<const Event> events) {
  std::vector<std::vector<std::size_t>> profiles(base.num_users());
  for (std::size_t i = 0; i < events.size(); ++i) profiles[events[i].user].push_back(i);
  return profiles;
}

void require_timestamps(std::span<const Event> events, SplitStrategy strategy) {
  for (const auto& ev : events) {
    if (!ev.has_timestamp) {
      throw SplitError(std::string(split_strategy_name(strategy)) +
                       " requires timestamps on every interaction");
    }
  }
}

// Emit a partition preserving the original event order on both sides.
EventSplit emit(std::span<const Event> events, const std::vector<bool>& to_test) {
  EventSplit split;
  for (std::size_t i = 0; i < events.size(); ++i) {
    (to_test[i] ? split.test : split.train).push_back(events[i]);
  }
  return split;
}

// Per-user test size for ratio strategies: ceil toward test, but a user
// always keeps at least one training interaction.
std::size_t ratio_test_count(std::size_t n, double ratio, std::size_t& clamped) {
  std::size_t m = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n)));
  if (m >= n) {
    m = n - 1;
    ++clamped;
  }
  return m;
}

// Sort a user's event indices by (timestamp, external item id).
void sort_temporal(const Dataset& base, std::span<const Event> events,
                   std::vector<std::size_t>& idx) {
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (events[a].timestamp != events[b].timestamp)
      return events[a].timestamp < events[b].timestamp;
    return base.item_ids()[events[a].item] < base.item_ids()[events[b].item];
  });
}

EventSplit temporal_split(const Dataset& base, std::span<const Event> events,
                          const SplitSpec& spec) {
  require_timestamps(events, spec.strategy);
  std::vector<bool> to_test(events.size(), false);
  std::size_t clamped = 0;
  std::size_t singletons = 0;
  auto profiles = profiles_of(base, events);
  for (auto& idx : profiles) {
    if (idx.empty()) continue;
    sort_temporal(base, events, idx);
    std::size_t m = 0;
    if (spec.strategy == SplitStrategy::TemporalHoldOut) {
      m = ratio_test_count(idx.size(), *spec.test_ratio, clamped);
    } else {  // TemporalLeaveNOut
      m = static_cast<std::size_t>(*spec.leave_n_out);
      if (m >= idx.size()) {
        if (idx.size() == 1) ++singletons;
        m = idx.size() - 1;
      }
    }
    for (std::size_t j = idx.size() - m; j < idx.size(); ++j) to_test[idx[j]] = true;
  }
  if (singletons > 0) {
    warn(std::to_string(singletons) + " user(s) with a single interaction kept entirely in train");
  }
  if (clamped > 0) {
    warn(std::to_string(clamped) + " user(s) clamped to keep one training interaction");
  }
  return emit(events, to_test);
}

EventSplit timestamp_split(std::span<const Event> events, std::int64_t cut) {
  std::vector<bool> to_test(events.size(), false);
  for (std::size_t i = 0; i < events.size(); ++i) to_test[i] = events[i].timestamp > cut;
  return emit(events, to_test);
}

EventSplit subsample_per_user(const Dataset& base, std::span<const Event> events,
                              const SplitSpec& spec, Rng& rng) {
  std::vector<bool> to_test(events.size(), false);
  std::size_t clamped = 0;
  auto profiles = profiles_of(base, events);
  for (auto& idx : profiles) {
    if (idx.empty()) continue;
    rng.shuffle(idx);
    std::size_t m = 0;
    if (spec.test_ratio) {
      m = ratio_test_count(idx.size(), *spec.test_ratio, clamped);
    } else {
      m = std::min(static_cast<std::size_t>(*spec.leave_n_out), idx.size() - 1);
    }
    for (std::size_t j = 0; j < m; ++j) to_test[idx[j]] = true;
  }
  if (clamped > 0) {
    warn(std::to_string(clamped) + " user(s) clamped to keep one training interaction");
  }
  return emit(events, to_test);
}

// K-repeated by-ratio hold-out samples interactions globally, ignoring user
// boundaries; all other ratio strategies are per-user.
EventSplit subsample_system_wide(std::span<const Event> events, double ratio, Rng& rng) {
  std::vector<std::size_t> idx(events.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  rng.shuffle(idx);
  const std::size_t m = std::min(
      events.size(), static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(events.size()))));
  std::vector<bool> to_test(events.size(), false);
  for (std::size_t j = 0; j < m; ++j) to_test[idx[j]] = true;
  return emit(events, to_test);
}

std::vector<EventSplit> cross_validation(const Dataset& base, std::span<const Event> events,
                                         int folds, Rng& rng) {
  std::vector<std::vector<bool>> fold_test(folds, std::vector<bool>(events.size(), false));
  std::size_t deficient = 0;
  auto profiles = profiles_of(base, events);
  for (auto& idx : profiles) {
    if (idx.empty()) continue;
    if (idx.size() < static_cast<std::size_t>(folds)) ++deficient;
    rng.shuffle(idx);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      fold_test[j % folds][idx[j]] = true;
    }
  }
  if (deficient > 0) {
    warn(std::to_string(deficient) +
         " user(s) have fewer interactions than folds; they stay in train for the deficient folds");
  }
  std::vector<EventSplit> splits;
  splits.reserve(folds);
  for (int f = 0; f < folds; ++f) splits.push_back(emit(events, fold_test[f]));
  return splits;
}

}  // namespace

std::optional<SplitStrategy> parse_split_strategy(std::string_view name) {
  const std::string n = lower(name);
  if (n == "temporal_hold_out") return SplitStrategy::TemporalHoldOut;
  if (n == "temporal_leave_n_out") return SplitStrategy::TemporalLeaveNOut;
  if (n == "fixed_timestamp") return SplitStrategy::FixedTimestamp;
  if (n == "best_timestamp") return SplitStrategy::BestTimestamp;
  if (n == "random_subsampling") return SplitStrategy::RandomSubsampling;
  if (n == "random_cross_validation") return SplitStrategy::RandomCrossValidation;
  if (n == "fix") return SplitStrategy::Fix;
  return std::nullopt;
}

std::string_view split_strategy_name(SplitStrategy s) {
  switch (s) {
    case SplitStrategy::TemporalHoldOut: return "temporal_hold_out";
    case SplitStrategy::TemporalLeaveNOut: return "temporal_leave_n_out";
    case SplitStrategy::FixedTimestamp: return "fixed_timestamp";
    case SplitStrategy::BestTimestamp: return "best_timestamp";
    case SplitStrategy::RandomSubsampling: return "random_subsampling";
    case SplitStrategy::RandomCrossValidation: return "random_cross_validation";
    case SplitStrategy::Fix: return "fix";
  }
  return "random_subsampling";
}

const std::vector<std::string>& split_strategy_names() {
  static const std::vector<std::string> names = {
      "temporal_hold_out", "temporal_leave_n_out",   "fixed_timestamp", "best_timestamp",
      "random_subsampling", "random_cross_validation", "fix"};
  return names;
}

std::int64_t find_best_timestamp(std::span<const Event> events, double target_ratio) {
  require_timestamps(events, SplitStrategy::BestTimestamp);
  // Per-user sorted timestamp arrays; candidates are the observed timestamps.
  std::map<std::uint32_t, std::vector<std::int64_t>> per_user;
  std::set<std::int64_t> candidate_set;
  for (const auto& ev : events) {
    per_user[ev.user].push_back(ev.timestamp);
    candidate_set.insert(ev.timestamp);
  }
  for (auto& [user, times] : per_user) std::sort(times.begin(), times.end());

  std::int64_t best_t = *candidate_set.begin();
  double best_obj = 0.0;
  bool first = true;
  for (const std::int64_t t : candidate_set) {
    double obj = 0.0;
    for (const auto& [user, times] : per_user) {
      const auto beyond = times.end() - std::upper_bound(times.begin(), times.end(), t);
      const double ratio = static_cast<double>(beyond) / static_cast<double>(times.size());
      obj += std::fabs(ratio - target_ratio);
    }
    if (first || obj < best_obj) {  // ties keep the smaller (earlier) timestamp
      best_obj = obj;
      best_t = t;
      first = false;
    }
  }
  return best_t;
}

std::vector<EventSplit> split_events(const Dataset& base, std::span<const Event> events,
                                     const SplitSpec& spec, std::uint64_t seed) {
  switch (spec.strategy) {
    case SplitStrategy::TemporalHoldOut:
    case SplitStrategy::TemporalLeaveNOut:
      return {temporal_split(base, events, spec)};
    case SplitStrategy::FixedTimestamp:
      require_timestamps(events, spec.strategy);
      return {timestamp_split(events, *spec.timestamp)};
    case SplitStrategy::BestTimestamp: {
      const std::int64_t t = find_best_timestamp(events, *spec.test_ratio);
      log_line(Stage::Split, "best_timestamp selected t=" + std::to_string(t));
      return {timestamp_split(events, t)};
    }
    case SplitStrategy::RandomSubsampling: {
      std::vector<EventSplit> folds;
      folds.reserve(spec.folds);
      for (int f = 0; f < spec.folds; ++f) {
        Rng rng(derive_seed(seed, "subsampling", static_cast<std::uint64_t>(f)));
        if (spec.folds > 1 && spec.test_ratio) {
          folds.push_back(subsample_system_wide(events, *spec.test_ratio, rng));
        } else {
          folds.push_back(subsample_per_user(base, events, spec, rng));
        }
      }
      return folds;
    }
    case SplitStrategy::RandomCrossValidation: {
      Rng rng(derive_seed(seed, "cross_validation"));
      return cross_validation(base, events, spec.folds, rng);
    }
    case SplitStrategy::Fix:
      throw SplitError("fix strategy is resolved before split_events");
  }
  throw SplitError("unknown split strategy");
}

SplitPlan build_split_plan(const Dataset& base, const SplittingConfig& cfg, std::uint64_t seed) {
  SplitPlan plan;
  std::vector<EventSplit> test_folds =
      split_events(base, base.events(), cfg.test, derive_seed(seed, "test_split"));
  for (std::size_t f = 0; f < test_folds.size(); ++f) {
    Fold fold;
    fold.train = std::move(test_folds[f].train);
    fold.test = std::move(test_folds[f].test);
    if (cfg.validation) {
      if (cfg.validation->strategy == SplitStrategy::Fix) {
        throw ConfigError("fix strategy is not supported for validation_splitting");
      }
      auto validation_folds = split_events(base, fold.train, *cfg.validation,
                                           derive_seed(seed, "validation_split", f));
      for (auto& vs : validation_folds) {
        fold.validation_folds.push_back({std::move(vs.train), std::move(vs.test)});
      }
    }
    plan.folds.push_back(std::move(fold));
  }
  return plan;
}

FixedSplitResult fixed_split(const std::filesystem::path& train_path,
                             const std::filesystem::path& test_path) {
  // Dedup each side independently, then check for cross-file overlap.
  Dataset train_ds = Dataset::from_interactions(read_interactions_tsv(train_path));
  Dataset test_ds = Dataset::from_interactions(read_interactions_tsv(test_path));
  if (train_ds.empty()) throw DataError("empty train split: " + train_path.string());
  if (test_ds.empty()) throw DataError("empty test split: " + test_path.string());

  std::unordered_set<std::string> train_pairs;
  for (const auto& row : train_ds.interactions()) train_pairs.insert(row.user + '\t' + row.item);
  for (const auto& row : test_ds.interactions()) {
    if (train_pairs.count(row.user + '\t' + row.item)) {
      throw SplitError("fixed split: pair (" + row.user + ", " + row.item +
                       ") appears in both train and test");
    }
  }

  std::vector<Interaction> all = train_ds.interactions();
  all.insert(all.end(), test_ds.interactions().begin(), test_ds.interactions().end());
  FixedSplitResult result;
  result.base = Dataset::from_interactions(std::move(all));
  const std::size_t n_train = train_ds.size();
  for (std::size_t i = 0; i < result.base.events().size(); ++i) {
    (i < n_train ? result.split.train : result.split.test).push_back(result.base.events()[i]);
  }
  std::size_t cold = 0;
  std::vector<bool> in_train(result.base.num_users(), false);
  for (const auto& ev : result.split.train) in_train[ev.user] = true;
  for (std::size_t u = 0; u < result.base.num_users(); ++u) {
    if (!in_train[u]) ++cold;
  }
  if (cold > 0) {
    warn(std::to_string(cold) + " cold-start user(s) appear only in the fixed test split");
  }
  return result;
}

void dump_split_plan(const std::filesystem::path& dir, const Dataset& base, const SplitPlan& plan) {
  std::filesystem::create_directories(dir);
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    write_events_tsv(dir / ("train_" + std::to_string(f) + ".tsv"), base, plan.folds[f].train);
    write_events_tsv(dir / ("test_" + std::to_string(f) + ".tsv"), base, plan.folds[f].test);
  }
  log_line(Stage::Split, "split plan written to " + dir.string());
}

}  // namespace recpipe
