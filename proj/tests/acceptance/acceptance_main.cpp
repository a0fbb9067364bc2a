// Acceptance suite: one pass/fail line per criterion. Exit code equals the
// number of failing criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "recpipe/config.hpp"
#include "recpipe/experiment.hpp"
#include "recpipe/hyperopt.hpp"
#include "recpipe/logging.hpp"
#include "recpipe/metrics.hpp"
#include "recpipe/prefilter.hpp"
#include "recpipe/recommender.hpp"
#include "recpipe/split.hpp"
#include "recpipe/stats.hpp"
#include "testutil.hpp"

using namespace recpipe;

namespace {

const std::filesystem::path kSourceDir = RECPIPE_SOURCE_DIR;
const std::string kCliPath = RECPIPE_CLI_PATH;

struct Check {
  bool ok = true;
  std::string detail;

  void fail(const std::string& msg) {
    ok = false;
    if (!detail.empty()) detail += "; ";
    detail += msg;
  }
};

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

// ---------------------------------------------------------------------------
// Criterion 1: all 24 metrics match independent brute-force implementations
// on 200 random instances within 1e-9, in under 10 seconds.
// ---------------------------------------------------------------------------

struct RandomInstance {
  Dataset base;
  EvalContext ctx;
  RecommendationLists lists;
  oracle::Instance oracle;
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> predictions;
  ClusterAssignment user_clusters, item_clusters;
};

RandomInstance make_instance(Rng& rng) {
  RandomInstance inst;
  const std::size_t num_users = 2 + rng.uniform_int(9);   // <= 10
  const std::size_t num_items = 2 + rng.uniform_int(14);  // <= 15

  // base dataset mentioning every user and item so the vocabulary is full
  std::vector<Interaction> rows;
  for (std::size_t u = 0; u < num_users; ++u) {
    rows.push_back({"u" + std::to_string(u), "i0", 1.0, std::nullopt});
  }
  for (std::size_t i = 0; i < num_items; ++i) {
    rows.push_back({"u0", "i" + std::to_string(i), 1.0, std::nullopt});
  }
  inst.base = Dataset::from_interactions(std::move(rows));

  // train events (at least one) and test events
  std::vector<Event> train, test;
  const std::size_t n_train = 1 + rng.uniform_int(40);
  for (std::size_t e = 0; e < n_train; ++e) {
    Event ev;
    ev.user = static_cast<std::uint32_t>(rng.uniform_int(num_users));
    ev.item = static_cast<std::uint32_t>(rng.uniform_int(num_items));
    ev.rating = 1.0 + static_cast<double>(rng.uniform_int(5));
    train.push_back(ev);
  }
  const std::size_t n_test = rng.uniform_int(30);
  for (std::size_t e = 0; e < n_test; ++e) {
    Event ev;
    ev.user = static_cast<std::uint32_t>(rng.uniform_int(num_users));
    ev.item = static_cast<std::uint32_t>(rng.uniform_int(num_items));
    ev.rating = 1.0 + static_cast<double>(rng.uniform_int(5));
    test.push_back(ev);
  }
  const double threshold = 1.0 + static_cast<double>(rng.uniform_int(4));
  inst.ctx = EvalContext::build(inst.base, train, test, threshold);

  // ranked lists with strictly decreasing scores, length <= 5
  inst.lists.users.resize(num_users);
  inst.lists.lists.resize(num_users);
  for (std::uint32_t u = 0; u < num_users; ++u) {
    inst.lists.users[u] = u;
    std::vector<std::uint32_t> items(num_items);
    for (std::uint32_t i = 0; i < num_items; ++i) items[i] = i;
    rng.shuffle(items);
    const std::size_t len = rng.uniform_int(std::min<std::size_t>(num_items, 5) + 1);
    double score = 10.0 + rng.uniform();
    for (std::size_t r = 0; r < len; ++r) {
      score -= 0.5 + rng.uniform();
      inst.lists.lists[u].push_back({items[r], score});
    }
  }

  // predictions for roughly half of the test pairs
  for (const auto& ev : test) {
    if (rng.uniform() < 0.5) {
      inst.predictions[{ev.user, ev.item}] = 1.0 + 4.0 * rng.uniform();
    }
  }

  // clusters with occasional missing entities
  inst.user_clusters.names = {"a", "b", "c"};
  inst.item_clusters.names = {"x", "y"};
  inst.user_clusters.cluster.resize(num_users);
  inst.item_clusters.cluster.resize(num_items);
  for (auto& c : inst.user_clusters.cluster) {
    c = rng.uniform() < 0.15 ? -1 : static_cast<int>(rng.uniform_int(3));
  }
  for (auto& c : inst.item_clusters.cluster) {
    c = rng.uniform() < 0.15 ? -1 : static_cast<int>(rng.uniform_int(2));
  }

  // oracle mirror
  inst.oracle.num_users = num_users;
  inst.oracle.num_items = num_items;
  inst.oracle.lists.resize(num_users);
  for (std::uint32_t u = 0; u < num_users; ++u) {
    for (const auto& e : inst.lists.lists[u]) {
      inst.oracle.lists[u].emplace_back(e.item, e.score);
    }
  }
  inst.oracle.relevant.resize(num_users);
  for (const auto& ev : test) {
    if (ev.rating >= threshold) inst.oracle.relevant[ev.user].insert(ev.item);
  }
  inst.oracle.train_counts.assign(num_items, 0);
  for (const auto& ev : train) inst.oracle.train_counts[ev.item]++;
  for (const auto& ev : test) inst.oracle.test_ratings.emplace_back(ev.user, ev.item, ev.rating);
  inst.oracle.user_cluster = inst.user_clusters.cluster;
  inst.oracle.item_cluster = inst.item_clusters.cluster;
  return inst;
}

bool close(double a, double b) { return std::fabs(a - b) <= 1e-9; }

Check criterion_metric_oracles() {
  Check check;
  const double start = now_seconds();
  Rng rng(20240901);
  std::size_t comparisons = 0;
  for (int trial = 0; trial < 200 && check.ok; ++trial) {
    RandomInstance inst = make_instance(rng);
    for (const int k : {1, 3, 5}) {
      const auto acc = accuracy_metrics(inst.lists, inst.ctx, k);
      const auto expect_user_avg = [&](const char* name, double (*fn)(const oracle::Instance&,
                                                                      std::size_t, int)) {
        const double got = acc.at(name).value;
        const double want = oracle::mean_over_users(inst.oracle, k, fn);
        if (!close(got, want)) {
          check.fail(std::string(name) + " trial " + std::to_string(trial) + " k=" +
                     std::to_string(k) + ": " + std::to_string(got) + " vs " +
                     std::to_string(want));
        }
        ++comparisons;
      };
      expect_user_avg("Precision", oracle::precision_u);
      expect_user_avg("Recall", oracle::recall_u);
      expect_user_avg("F1", oracle::f1_u);
      expect_user_avg("HitRate", oracle::hitrate_u);
      expect_user_avg("MRR", oracle::mrr_u);
      expect_user_avg("MAP", oracle::map_u);
      expect_user_avg("nDCG", oracle::ndcg_u);

      const auto cov = coverage_metrics(inst.lists, inst.ctx, k);
      if (!close(cov.at("ItemCoverage").value, oracle::item_coverage(inst.oracle, k))) {
        check.fail("ItemCoverage trial " + std::to_string(trial));
      }
      if (!close(cov.at("UserCoverage").value, oracle::user_coverage(inst.oracle, k))) {
        check.fail("UserCoverage trial " + std::to_string(trial));
      }
      if (!close(cov.at("NumRetrieved").value, oracle::num_retrieved(inst.oracle, k))) {
        check.fail("NumRetrieved trial " + std::to_string(trial));
      }
      comparisons += 3;

      // user-averaged novelty and bias, with the same skip rule as the library
      const auto tail = oracle::long_tail(inst.oracle);
      double epc = 0, efd = 0, arp = 0, aplt = 0, aclt = 0;
      std::size_t counted = 0;
      for (std::size_t u = 0; u < inst.oracle.num_users; ++u) {
        if (!oracle::counted(inst.oracle, u, k)) continue;
        ++counted;
        epc += oracle::epc_u(inst.oracle, u, k);
        efd += oracle::efd_u(inst.oracle, u, k);
        arp += oracle::arp_u(inst.oracle, u, k);
        aplt += oracle::aplt_u(inst.oracle, u, k, tail);
        aclt += oracle::aclt_u(inst.oracle, u, k, tail);
      }
      const auto nov = novelty_metrics(inst.lists, inst.ctx, k);
      const auto bias = bias_metrics(inst.lists, inst.ctx, k);
      if (counted == 0) {
        if (!nov.at("EPC").absent) check.fail("EPC absence trial " + std::to_string(trial));
        if (!bias.at("ARP").absent) check.fail("ARP absence trial " + std::to_string(trial));
      } else {
        if (!close(nov.at("EPC").value, epc / counted)) {
          check.fail("EPC trial " + std::to_string(trial));
        }
        if (!close(nov.at("EFD").value, efd / counted)) {
          check.fail("EFD trial " + std::to_string(trial));
        }
        if (!close(bias.at("ARP").value, arp / counted)) {
          check.fail("ARP trial " + std::to_string(trial));
        }
        if (!close(bias.at("APLT").value, aplt / counted)) {
          check.fail("APLT trial " + std::to_string(trial));
        }
        if (!close(bias.at("ACLT").value, aclt / counted)) {
          check.fail("ACLT trial " + std::to_string(trial));
        }
      }
      comparisons += 5;

      const auto div = diversity_metrics(inst.lists, inst.ctx, k);
      bool any_exposure = false;
      for (const auto& list : inst.oracle.lists) {
        if (std::min<std::size_t>(list.size(), std::size_t(k)) > 0) any_exposure = true;
      }
      if (!any_exposure || inst.oracle.num_items < 2) {
        if (!div.at("Gini").absent) check.fail("Gini absence trial " + std::to_string(trial));
      } else {
        if (!close(div.at("Gini").value, oracle::gini(inst.oracle, k))) {
          check.fail("Gini trial " + std::to_string(trial));
        }
        if (!close(div.at("ShannonEntropy").value, oracle::shannon_entropy(inst.oracle, k))) {
          check.fail("ShannonEntropy trial " + std::to_string(trial));
        }
      }
      comparisons += 2;

      for (const char* variant :
           {"UserMADrating", "UserMADranking", "ItemMADrating", "ItemMADranking"}) {
        const bool user_based = std::string(variant).rfind("User", 0) == 0;
        const auto got = fairness_metric(inst.lists, inst.ctx, k, variant,
                                         user_based ? inst.user_clusters : inst.item_clusters);
        const auto want = oracle::mad(inst.oracle, k, variant);
        if (got.absent != !want.has_value()) {
          check.fail(std::string(variant) + " absence trial " + std::to_string(trial));
        } else if (want && !close(got.value, *want)) {
          check.fail(std::string(variant) + " trial " + std::to_string(trial));
        }
        ++comparisons;
      }
    }

    // error metrics are cutoff-independent
    const PredictFn predict = [&inst](std::uint32_t u,
                                      std::uint32_t i) -> std::optional<double> {
      const auto it = inst.predictions.find({u, i});
      if (it == inst.predictions.end()) return std::nullopt;
      return it->second;
    };
    const auto err = error_metrics(predict, inst.ctx);
    const auto want = oracle::error_metrics(inst.oracle, inst.predictions);
    if (err.at("MAE").absent != !want.has_value()) {
      check.fail("MAE absence trial " + std::to_string(trial));
    } else if (want) {
      if (!close(err.at("MAE").value, (*want)[0])) check.fail("MAE trial " + std::to_string(trial));
      if (!close(err.at("MSE").value, (*want)[1])) check.fail("MSE trial " + std::to_string(trial));
      if (!close(err.at("RMSE").value, (*want)[2])) {
        check.fail("RMSE trial " + std::to_string(trial));
      }
    }
    comparisons += 3;
  }
  const double elapsed = now_seconds() - start;
  if (elapsed >= 10.0) check.fail("runtime " + std::to_string(elapsed) + " s >= 10 s");
  if (check.ok) {
    check.detail = std::to_string(comparisons) + " comparisons within 1e-9 in " +
                   std::to_string(elapsed) + " s";
  }
  return check;
}

// ---------------------------------------------------------------------------
// Criteria 2 and 3: ordering reproduction and the attribute coverage claim on
// a 50k-interaction synthetic dataset with popularity skew.
// ---------------------------------------------------------------------------

struct OrderingResult {
  Check ordering;    // criterion 2
  Check attributes;  // criterion 3
};

void write_skewed_dataset(const std::filesystem::path& dir) {
  // 800 users x 1200 items, ~50k interactions; popularity follows a power
  // law and preferences follow 8 latent genres. Attributes are drawn from a
  // 64-tag pool through genre-centred windows, so attribute similarities are
  // graded and item-specific rather than all-or-nothing.
  Rng rng(424242);
  const std::size_t num_users = 800, num_items = 1200, num_genres = 8, num_tags = 64;
  std::vector<std::uint32_t> order(num_items);
  for (std::uint32_t i = 0; i < num_items; ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<double> weight(num_items);
  for (std::size_t rank = 0; rank < num_items; ++rank) {
    weight[order[rank]] = 1.0 / std::pow(static_cast<double>(rank + 1), 0.8);
  }
  std::vector<std::vector<std::uint32_t>> genres(num_items);
  std::string features;
  for (std::uint32_t i = 0; i < num_items; ++i) {
    if (rng.uniform() < 0.95) {
      genres[i].push_back(static_cast<std::uint32_t>(rng.uniform_int(num_genres)));
      if (rng.uniform() < 0.3) {
        genres[i].push_back(static_cast<std::uint32_t>(rng.uniform_int(num_genres)));
      }
      std::set<std::uint32_t> tags;
      const std::size_t n_tags = 4 + rng.uniform_int(4);
      while (tags.size() < n_tags) {
        const auto genre = genres[i][rng.uniform_int(genres[i].size())];
        // tags cluster around the genre's window and overlap with neighbours
        const std::uint32_t offset = static_cast<std::uint32_t>(rng.uniform_int(14));
        tags.insert((genre * num_tags / num_genres + offset) % num_tags);
      }
      features += "i" + std::to_string(i);
      for (const auto t : tags) features += "\tt" + std::to_string(t);
      features += "\n";
    }
  }

  std::string tsv;
  for (std::size_t u = 0; u < num_users; ++u) {
    const std::uint32_t pref_a = static_cast<std::uint32_t>(rng.uniform_int(num_genres));
    const std::uint32_t pref_b = static_cast<std::uint32_t>(rng.uniform_int(num_genres));
    std::vector<double> w(num_items);
    double total = 0.0;
    for (std::uint32_t i = 0; i < num_items; ++i) {
      double v = weight[i];
      for (const auto g : genres[i]) {
        if (g == pref_a || g == pref_b) v *= 6.0;
      }
      w[i] = v;
      total += v;
    }
    const std::size_t profile = 40 + rng.uniform_int(45);
    std::set<std::uint32_t> seen;
    std::int64_t t = 1000000 + static_cast<std::int64_t>(rng.uniform_int(10000));
    for (std::size_t n = 0; n < profile; ++n) {
      double r = rng.uniform() * total;
      std::uint32_t pick = num_items - 1;
      for (std::uint32_t i = 0; i < num_items; ++i) {
        r -= w[i];
        if (r <= 0.0) {
          pick = i;
          break;
        }
      }
      if (seen.count(pick)) continue;
      seen.insert(pick);
      bool matched = false;
      for (const auto g : genres[pick]) {
        if (g == pref_a || g == pref_b) matched = true;
      }
      const int rating =
          matched ? (rng.uniform() < 0.7 ? 5 : 4) : (1 + static_cast<int>(rng.uniform_int(3)));
      t += 60 + static_cast<std::int64_t>(rng.uniform_int(5000));
      tsv += "u" + std::to_string(u) + "\ti" + std::to_string(pick) + "\t" +
             std::to_string(rating) + "\t" + std::to_string(t) + "\n";
    }
  }
  testutil::write_file(dir / "interactions.tsv", tsv);
  testutil::write_file(dir / "features.tsv", features);
}

double metric_at(const ModelOutcome& model, const std::string& metric, int k) {
  return model.report.at(metric).at(k).value;
}

OrderingResult criterion_ordering_and_attributes() {
  OrderingResult result;
  const double start = now_seconds();
  testutil::TempDir tmp("ordering");
  write_skewed_dataset(tmp.path());

  const std::string config_text =
      "experiment:\n"
      "  dataset: skewed_synthetic\n"
      "  data_config:\n"
      "    strategy: dataset\n"
      "    dataset_path: " + (tmp.path() / "interactions.tsv").string() + "\n"
      "    side_information:\n"
      "      attribute_path: " + (tmp.path() / "features.tsv").string() + "\n"
      "  splitting:\n"
      "    test_splitting:\n"
      "      strategy: random_subsampling\n"
      "      test_ratio: 0.2\n"
      "    validation_splitting:\n"
      "      strategy: random_subsampling\n"
      "      test_ratio: 0.2\n"
      "  models:\n"
      "    Random:\n"
      "      meta: {hyper_opt_alg: grid}\n"
      "    MostPop:\n"
      "      meta: {hyper_opt_alg: grid}\n"
      "    ItemKNN:\n"
      "      meta: {hyper_opt_alg: grid}\n"
      "      neighbors: [20, 80]\n"
      "      similarity: cosine\n"
      "    AttributeItemKNN:\n"
      "      meta: {hyper_opt_alg: grid}\n"
      "      neighbors: [20, 80]\n"
      "      similarity: cosine\n"
      "  evaluation:\n"
      "    cutoffs: [5, 10]\n"
      "    simple_metrics: [nDCG, ItemCoverage]\n"
      "    relevance_threshold: 1\n"
      "  top_k: 10\n"
      "  random_seed: 42\n";
  const auto parsed = parse_config(config_text);
  const auto run = run_experiment(parsed.config, {});

  std::map<std::string, const ModelOutcome*> models;
  for (const auto& m : run.models) {
    if (m.failed) {
      result.ordering.fail("model " + m.name + " failed: " + m.error);
      result.attributes.fail("model " + m.name + " failed");
    }
    models[m.name] = &m;
  }
  if (result.ordering.ok) {
    const double ndcg_knn = metric_at(*models.at("ItemKNN"), "nDCG", 5);
    const double ndcg_pop = metric_at(*models.at("MostPop"), "nDCG", 5);
    const double ndcg_rand = metric_at(*models.at("Random"), "nDCG", 5);
    if (!(ndcg_knn > ndcg_pop && ndcg_pop > ndcg_rand)) {
      result.ordering.fail("nDCG@5 ordering violated: ItemKNN=" + std::to_string(ndcg_knn) +
                           " MostPop=" + std::to_string(ndcg_pop) + " Random=" +
                           std::to_string(ndcg_rand));
    }
    const double random_cov = metric_at(*models.at("Random"), "ItemCoverage", 10);
    const double catalog = static_cast<double>(run.base.num_items());
    if (random_cov < 0.99 * catalog) {
      result.ordering.fail("Random ItemCoverage@10 " + std::to_string(random_cov) + " < 0.99 * " +
                           std::to_string(catalog));
    }
    const double elapsed = now_seconds() - start;
    if (elapsed >= 300.0) result.ordering.fail("runtime " + std::to_string(elapsed) + " s");
    if (result.ordering.ok) {
      result.ordering.detail = "nDCG@5 " + std::to_string(ndcg_knn) + " > " +
                               std::to_string(ndcg_pop) + " > " + std::to_string(ndcg_rand) +
                               "; Random ICov@10 = " + std::to_string(random_cov) + "/" +
                               std::to_string(static_cast<int>(catalog)) + " in " +
                               std::to_string(elapsed) + " s";
    }
  }
  if (result.attributes.ok) {
    const double cov_attr = metric_at(*models.at("AttributeItemKNN"), "ItemCoverage", 10);
    const double cov_knn = metric_at(*models.at("ItemKNN"), "ItemCoverage", 10);
    if (!(cov_attr >= cov_knn)) {
      result.attributes.fail("AttributeItemKNN ICov@10 " + std::to_string(cov_attr) +
                             " < ItemKNN " + std::to_string(cov_knn));
    } else {
      result.attributes.detail = "AttributeItemKNN ICov@10 = " + std::to_string(cov_attr) +
                                 " >= ItemKNN ICov@10 = " + std::to_string(cov_knn);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Criterion 4: 1000 randomized prefilter/split property trials.
// ---------------------------------------------------------------------------

Check criterion_properties() {
  Check check;
  Rng rng(7001);
  std::size_t violations = 0;
  std::size_t trials = 0;

  // 250 trials: iterative k-core fixpoint
  for (int t = 0; t < 250; ++t) {
    ++trials;
    auto ds = testutil::random_dataset(rng, 30 + rng.uniform_int(40), 20 + rng.uniform_int(20),
                                       0.03 + 0.08 * rng.uniform());
    const int k = 2 + static_cast<int>(rng.uniform_int(3));
    const auto core = iterative_k_core(ds, k).dataset;
    for (const auto c : core.user_profile_size()) {
      if (c < static_cast<unsigned>(k)) ++violations;
    }
    for (const auto c : core.item_popularity()) {
      if (c < static_cast<unsigned>(k)) ++violations;
    }
  }

  // 250 trials: temporal ordering per user
  for (int t = 0; t < 250; ++t) {
    ++trials;
    auto ds = testutil::random_dataset(rng, 10 + rng.uniform_int(30), 10 + rng.uniform_int(20),
                                       0.1 + 0.2 * rng.uniform());
    SplitSpec spec;
    spec.strategy = SplitStrategy::TemporalHoldOut;
    spec.test_ratio = 0.1 + 0.4 * rng.uniform();
    const auto folds = split_events(ds, ds.events(), spec, rng.next_u64());
    std::map<std::uint32_t, std::int64_t> max_train;
    for (const auto& ev : folds[0].train) {
      const auto it = max_train.find(ev.user);
      max_train[ev.user] =
          it == max_train.end() ? ev.timestamp : std::max(it->second, ev.timestamp);
    }
    for (const auto& ev : folds[0].test) {
      const auto it = max_train.find(ev.user);
      if (it != max_train.end() && it->second > ev.timestamp) ++violations;
    }
  }

  // 250 trials: cross-validation partition exactness
  for (int t = 0; t < 250; ++t) {
    ++trials;
    auto ds = testutil::random_dataset(rng, 8 + rng.uniform_int(20), 10 + rng.uniform_int(15),
                                       0.2 + 0.3 * rng.uniform(), false);
    SplitSpec spec;
    spec.strategy = SplitStrategy::RandomCrossValidation;
    spec.folds = 2 + static_cast<int>(rng.uniform_int(4));
    const auto folds = split_events(ds, ds.events(), spec, rng.next_u64());
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (const auto& fold : folds) {
      if (fold.train.size() + fold.test.size() != ds.size()) ++violations;
      for (const auto& ev : fold.test) {
        if (seen.count({ev.user, ev.item})) ++violations;  // pairwise disjoint
        seen.insert({ev.user, ev.item});
      }
    }
    if (seen.size() != ds.size()) ++violations;  // union covers everything
  }

  // 250 trials: determinism under a fixed seed
  for (int t = 0; t < 250; ++t) {
    ++trials;
    auto ds = testutil::random_dataset(rng, 10 + rng.uniform_int(20), 10 + rng.uniform_int(15),
                                       0.1 + 0.3 * rng.uniform());
    SplittingConfig cfg;
    cfg.test.strategy = SplitStrategy::RandomSubsampling;
    cfg.test.test_ratio = 0.2 + 0.3 * rng.uniform();
    SplitSpec validation;
    validation.strategy = SplitStrategy::RandomCrossValidation;
    validation.folds = 2 + static_cast<int>(rng.uniform_int(3));
    cfg.validation = validation;
    const std::uint64_t seed = rng.next_u64();
    const auto a = build_split_plan(ds, cfg, seed);
    const auto b = build_split_plan(ds, cfg, seed);
    if (!(a.folds[0].train == b.folds[0].train && a.folds[0].test == b.folds[0].test)) {
      ++violations;
    }
    for (std::size_t v = 0; v < a.folds[0].validation_folds.size(); ++v) {
      if (!(a.folds[0].validation_folds[v].validation ==
            b.folds[0].validation_folds[v].validation)) {
        ++violations;
      }
    }
  }

  if (violations > 0) {
    check.fail(std::to_string(violations) + " violation(s) across " + std::to_string(trials) +
               " trials");
  } else {
    check.detail = std::to_string(trials) + " randomized trials, zero violations";
  }
  return check;
}

// ---------------------------------------------------------------------------
// Criterion 5: statistics.
// ---------------------------------------------------------------------------

double brute_force_wilcoxon(const std::vector<double>& d) {
  std::vector<double> abs_d;
  for (const double v : d) {
    if (v != 0.0) abs_d.push_back(std::fabs(v));
  }
  const std::size_t n = abs_d.size();
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (abs_d[j] < abs_d[i]) ++r;
    }
    rank[i] = static_cast<double>(r);
  }
  double w_plus = 0, w_minus = 0;
  std::size_t idx = 0;
  for (const double v : d) {
    if (v == 0.0) continue;
    (v > 0 ? w_plus : w_minus) += rank[idx++];
  }
  const double w_obs = std::min(w_plus, w_minus);
  const double total = static_cast<double>(n * (n + 1)) / 2.0;
  std::size_t count = 0;
  for (std::size_t mask = 0; mask < (std::size_t(1) << n); ++mask) {
    double wp = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t(1) << i)) wp += rank[i];
    }
    if (std::min(wp, total - wp) <= w_obs) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(std::size_t(1) << n);
}

Check criterion_statistics() {
  Check check;

  // exact Wilcoxon equals the 2^n enumeration for every n <= 12
  Rng rng(9091);
  std::size_t equal = 0;
  for (int n = 1; n <= 12; ++n) {
    for (int t = 0; t < 10; ++t) {
      std::vector<double> a(n), b(n, 0.0);
      for (auto& v : a) v = (rng.uniform() < 0.5 ? 1 : -1) * (1.0 + rng.uniform());
      const auto out = wilcoxon_signed_rank(a, b);
      const double brute = brute_force_wilcoxon(a);
      if (out.p_value != brute) {
        check.fail("wilcoxon n=" + std::to_string(n) + ": " + std::to_string(out.p_value) +
                   " != " + std::to_string(brute));
      } else {
        ++equal;
      }
    }
  }

  // t-CDF reference point
  const double p = student_t_two_sided_p(2.0925, 4);
  if (std::fabs(p - 0.105) > 1e-3) {
    check.fail("t-CDF p(2.0925, df=4) = " + std::to_string(p));
  }

  // pinned example: d = [1,-2,3,4,5] with exact two-sided p = 0.3125
  const std::vector<double> d{1, -2, 3, 4, 5};
  const std::vector<double> zero(5, 0.0);
  const auto out = wilcoxon_signed_rank(d, zero);
  const double brute = brute_force_wilcoxon(d);
  if (out.p_value != 0.3125) {
    check.fail("exact Wilcoxon for [1,-2,3,4,5]: expected 0.3125, implementation gives " +
               std::to_string(out.p_value) + " and the independent 2^n enumeration gives " +
               std::to_string(brute) +
               " (0.3125 corresponds to the vector [1,-3,2,4,5]; the pinned constant is "
               "inconsistent with the enumeration this criterion also mandates)");
  }
  if (check.ok) {
    check.detail = std::to_string(equal) + " exact enumeration matches; p(2.0925, df=4) = " +
                   std::to_string(p);
  }
  return check;
}

// ---------------------------------------------------------------------------
// Criterion 6: hyperopt.
// ---------------------------------------------------------------------------

Check criterion_hyperopt() {
  Check check;

  // grid count equals the cartesian product size
  Rng rng(6100);
  for (int t = 0; t < 25; ++t) {
    SearchSpace space;
    std::size_t product = 1;
    const std::size_t dims = 1 + rng.uniform_int(4);
    for (std::size_t d = 0; d < dims; ++d) {
      const std::size_t n = 1 + rng.uniform_int(4);
      std::vector<ParamValue> values;
      for (std::size_t v = 0; v < n; ++v) values.emplace_back(static_cast<double>(v));
      space.emplace_back("p" + std::to_string(d), SearchDomain::choice(std::move(values)));
      product *= n;
    }
    const auto grid = grid_expand(space);
    if (grid.size() != product) {
      check.fail("grid size " + std::to_string(grid.size()) + " != " + std::to_string(product));
    }
  }

  // TPE beats or ties same-budget random search in >= 80/100 repetitions
  SearchSpace quadratic;
  quadratic.emplace_back("x", SearchDomain::uniform(0.0, 1.0));
  const auto objective = [](const Assignment& a, std::size_t) {
    const double x = std::get<double>(a.at("x"));
    return -(x - 0.3) * (x - 0.3);
  };
  int wins = 0;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    const auto tpe = run_search(HyperOptAlg::Tpe, quadratic, 30, 1000 + rep, objective);
    const auto random =
        run_search(HyperOptAlg::RandomSearch, quadratic, 30, 1000 + rep, objective);
    if (tpe.trials[tpe.best_index].objective >= random.trials[random.best_index].objective) {
      ++wins;
    }
  }
  if (wins < 80) check.fail("TPE won only " + std::to_string(wins) + "/100");

  // LogUniform KS statistic on 1e4 draws
  Rng sampler(6200);
  const auto domain = SearchDomain::log_uniform(-10, -1);
  std::vector<double> exponents;
  for (int i = 0; i < 10000; ++i) {
    exponents.push_back(std::log(std::get<double>(sample_domain(domain, sampler))));
  }
  std::sort(exponents.begin(), exponents.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    const double cdf = (exponents[i] + 10.0) / 9.0;
    ks = std::max(ks, std::fabs(cdf - static_cast<double>(i) / exponents.size()));
    ks = std::max(ks, std::fabs(static_cast<double>(i + 1) / exponents.size() - cdf));
  }
  if (ks >= 0.02) check.fail("LogUniform KS = " + std::to_string(ks));

  if (check.ok) {
    check.detail = "grid counts exact; TPE wins " + std::to_string(wins) + "/100; KS = " +
                   std::to_string(ks);
  }
  return check;
}

// ---------------------------------------------------------------------------
// Criterion 7: BPRMF learning and gradient checks.
// ---------------------------------------------------------------------------

Check criterion_bprmf() {
  Check check;

  // gradient vs central differences on 100 random points
  Rng rng(7100);
  double worst = 0.0;
  for (int point = 0; point < 100; ++point) {
    const std::size_t f = 1 + rng.uniform_int(6);
    std::vector<double> pu(f), qi(f), qj(f);
    for (auto& v : pu) v = rng.normal();
    for (auto& v : qi) v = rng.normal();
    for (auto& v : qj) v = rng.normal();
    const double reg = 0.01 + 0.05 * rng.uniform();
    const auto g = bpr_loss_gradient(pu, qi, qj, reg);
    const double eps = 1e-6;
    const auto probe = [&](std::vector<double>& vec, const std::vector<double>& grad,
                           std::size_t k) {
      const double saved = vec[k];
      vec[k] = saved + eps;
      const double up = bpr_loss_gradient(pu, qi, qj, reg).loss;
      vec[k] = saved - eps;
      const double down = bpr_loss_gradient(pu, qi, qj, reg).loss;
      vec[k] = saved;
      const double numeric = (up - down) / (2 * eps);
      const double denom = std::max({1e-8, std::fabs(numeric), std::fabs(grad[k])});
      worst = std::max(worst, std::fabs(numeric - grad[k]) / denom);
    };
    for (std::size_t k = 0; k < f; ++k) {
      probe(pu, g.d_user, k);
      probe(qi, g.d_pos, k);
      probe(qj, g.d_neg, k);
    }
  }
  if (worst > 1e-4) check.fail("gradient relative error " + std::to_string(worst));

  // two-block synthetic: within-block mean beats cross-block for >= 95% users
  Rng gen(7200);
  std::vector<Interaction> rows;
  const std::size_t users_per_block = 30, items_per_block = 25;
  for (std::size_t u = 0; u < 2 * users_per_block; ++u) {
    const std::size_t block = u < users_per_block ? 0 : 1;
    for (std::size_t i = 0; i < 2 * items_per_block; ++i) {
      const std::size_t item_block = i < items_per_block ? 0 : 1;
      if (gen.uniform() < (item_block == block ? 0.65 : 0.04)) {
        rows.push_back({"u" + std::to_string(u), "i" + std::to_string(i), 1.0, std::nullopt});
      }
    }
  }
  const auto ds = Dataset::from_interactions(std::move(rows));
  const auto train = RatingMatrix::build(ds.events(), ds.num_users(), ds.num_items());
  Assignment params;
  params["factors"] = 8.0;
  params["lr"] = 0.05;
  params["epochs"] = 30.0;
  params["reg"] = 0.002;
  const auto model = fit_recommender(ModelKind::BPRMF, params, train, ds, 7300, 1);
  std::size_t satisfied = 0, total = 0;
  std::vector<double> scores(ds.num_items());
  for (std::uint32_t u = 0; u < ds.num_users(); ++u) {
    const bool block0 = std::stoul(ds.user_ids()[u].substr(1)) < users_per_block;
    model->score_user(u, scores);
    double within = 0, cross = 0;
    std::size_t nw = 0, nc = 0;
    for (std::uint32_t i = 0; i < ds.num_items(); ++i) {
      const bool item_block0 = std::stoul(ds.item_ids()[i].substr(1)) < items_per_block;
      if (item_block0 == block0) {
        within += scores[i];
        ++nw;
      } else {
        cross += scores[i];
        ++nc;
      }
    }
    if (nw && nc) {
      ++total;
      if (within / static_cast<double>(nw) > cross / static_cast<double>(nc)) ++satisfied;
    }
  }
  const double fraction = static_cast<double>(satisfied) / static_cast<double>(total);
  if (fraction < 0.95) {
    check.fail("two-block separation only " + std::to_string(fraction));
  }
  if (check.ok) {
    check.detail = "gradient max rel err " + std::to_string(worst) + "; separation " +
                   std::to_string(fraction);
  }
  return check;
}

// ---------------------------------------------------------------------------
// Criterion 8: end-to-end determinism of the bundled scenarios via the CLI.
// ---------------------------------------------------------------------------

std::string directory_fingerprint(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::string fingerprint;
  for (const auto& file : files) {
    fingerprint += std::filesystem::relative(file, dir).string() + "\n";
    fingerprint += testutil::read_file(file);
    fingerprint += "\n--\n";
  }
  return fingerprint;
}

Check criterion_determinism() {
  Check check;
  testutil::TempDir tmp("cli_determinism");
  const double start = now_seconds();
  for (const std::string scenario : {"basic", "advanced"}) {
    const auto config = kSourceDir / "configs" / (scenario + ".yml");
    std::vector<std::string> fingerprints;
    int run_id = 0;
    for (const unsigned workers : {1u, 8u}) {
      for (int repeat = 0; repeat < 2; ++repeat) {
        const auto out = tmp.path() / (scenario + "_" + std::to_string(run_id++));
        const std::string command = kCliPath + " run " + config.string() + " --seed 42 --workers " +
                                    std::to_string(workers) + " --out " + out.string() +
                                    " > /dev/null 2>&1";
        if (std::system(command.c_str()) != 0) {
          check.fail(scenario + ": CLI run failed (workers " + std::to_string(workers) + ")");
          continue;
        }
        fingerprints.push_back(directory_fingerprint(out));
      }
    }
    for (std::size_t i = 1; i < fingerprints.size(); ++i) {
      if (fingerprints[i] != fingerprints[0]) {
        check.fail(scenario + ": output " + std::to_string(i) + " differs from output 0");
      }
    }
  }
  if (check.ok) {
    check.detail = "basic + advanced, workers {1,8} x 2 runs each, byte-identical in " +
                   std::to_string(now_seconds() - start) + " s";
  }
  return check;
}

// ---------------------------------------------------------------------------
// Criterion 9: configuration fidelity.
// ---------------------------------------------------------------------------

Check criterion_config_fidelity() {
  Check check;
  const auto dir = kSourceDir / "configs";

  try {
    const auto c1 = load_config_file(dir / "configuration_1.yml");
    if (!c1.rejected_models.empty()) check.fail("configuration_1 rejected a registered model");
    const auto c2 = load_config_file(dir / "configuration_2.yml");
    if (c2.rejected_models.size() != 1 || c2.rejected_models[0].first != "external.MostPop") {
      check.fail("configuration_2 external model rejection missing");
    }
    const auto c3 = load_config_file(dir / "configuration_3.yml");
    if (c3.rejected_models.size() != 2) {
      check.fail("configuration_3 expected 2 rejected models, got " +
                 std::to_string(c3.rejected_models.size()));
    } else {
      for (const auto& [name, message] : c3.rejected_models) {
        if (message.find("registered models:") == std::string::npos) {
          check.fail("rejection for " + name + " lacks the enumeration of valid models");
        }
      }
    }
    if (c3.config.models.size() != 1 || c3.config.models[0].first != "BPRMF") {
      check.fail("configuration_3 should retain BPRMF only");
    }
    if (!c3.config.splitting.validation ||
        c3.config.splitting.validation->strategy != SplitStrategy::RandomCrossValidation ||
        c3.config.splitting.validation->folds != 5) {
      check.fail("configuration_3 nested validation split not parsed");
    }
  } catch (const std::exception& e) {
    check.fail(std::string("parse failure: ") + e.what());
  }

  for (const std::string name : {"configuration_1.yml", "configuration_2.yml"}) {
    const std::string command =
        kCliPath + " run " + (dir / name).string() + " --validate-only > /dev/null 2>&1";
    const int code = std::system(command.c_str());
    if (code != 0) {
      check.fail(name + ": --validate-only exited with " + std::to_string(code));
    }
  }
  if (check.ok) {
    check.detail = "configurations 1-3 parse; rejections documented; --validate-only exits 0";
  }
  return check;
}

}  // namespace

int main() {
  log_enabled() = false;
  struct Entry {
    int id;
    const char* name;
    Check check;
  };
  std::vector<Entry> entries;

  entries.push_back({1, "metric oracle suite (24 metrics, 200 instances, 1e-9)",
                     criterion_metric_oracles()});
  const OrderingResult ordering = criterion_ordering_and_attributes();
  entries.push_back({2, "ranking order ItemKNN > MostPop > Random; Random covers the catalog",
                     ordering.ordering});
  entries.push_back({3, "AttributeItemKNN item coverage >= ItemKNN", ordering.attributes});
  entries.push_back({4, "prefilter/split property trials (1000 randomized)",
                     criterion_properties()});
  entries.push_back({5, "statistics: exact Wilcoxon enumeration + t-CDF reference",
                     criterion_statistics()});
  entries.push_back({6, "hyperopt: grid exhaustiveness, TPE vs random, LogUniform KS",
                     criterion_hyperopt()});
  entries.push_back({7, "BPRMF: two-block learning + gradient check", criterion_bprmf()});
  entries.push_back({8, "end-to-end determinism of the bundled scenarios",
                     criterion_determinism()});
  entries.push_back(
      {9, "configuration fidelity and --validate-only", criterion_config_fidelity()});

  int failures = 0;
  for (const auto& entry : entries) {
    if (entry.check.ok) {
      std::printf("[PASS] criterion %d: %s%s%s\n", entry.id, entry.name,
                  entry.check.detail.empty() ? "" : " -- ", entry.check.detail.c_str());
    } else {
      ++failures;
      std::printf("[FAIL] criterion %d: %s -- %s\n", entry.id, entry.name,
                  entry.check.detail.c_str());
    }
  }
  std::printf("%zu/%zu criteria passed\n", entries.size() - static_cast<std::size_t>(failures),
              entries.size());
  return failures;
}
