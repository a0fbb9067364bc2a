#include <benchmark/benchmark.h>

#include <vector>

#include "recpipe/hyperopt.hpp"
#include "recpipe/metrics.hpp"
#include "recpipe/prefilter.hpp"
#include "recpipe/recommender.hpp"
#include "recpipe/rng.hpp"
#include "recpipe/stats.hpp"

namespace {

using namespace recpipe;

Dataset synthetic_dataset(std::size_t users, std::size_t items, double density) {
  Rng rng(1234);
  std::vector<Interaction> rows;
  for (std::size_t u = 0; u < users; ++u) {
    std::int64_t t = 1000;
    for (std::size_t i = 0; i < items; ++i) {
      if (rng.uniform() >= density) continue;
      t += 1 + static_cast<std::int64_t>(rng.uniform_int(500));
      rows.push_back({"u" + std::to_string(u), "i" + std::to_string(i),
                      1.0 + static_cast<double>(rng.uniform_int(5)), t});
    }
  }
  return Dataset::from_interactions(std::move(rows));
}

const Dataset& bench_dataset() {
  static const Dataset ds = synthetic_dataset(600, 800, 0.06);
  return ds;
}

const RatingMatrix& bench_matrix() {
  static const RatingMatrix m =
      RatingMatrix::build(bench_dataset().events(), bench_dataset().num_users(),
                          bench_dataset().num_items());
  return m;
}

void BM_KnnFit(benchmark::State& state) {
  const auto kind = static_cast<SimilarityKind>(state.range(0));
  Assignment params;
  params["neighbors"] = 50.0;
  params["similarity"] = std::string(similarity_name(kind));
  for (auto _ : state) {
    auto model = fit_recommender(ModelKind::ItemKNN, params, bench_matrix(), bench_dataset(),
                                 7, 1);
    benchmark::DoNotOptimize(model);
  }
}
BENCHMARK(BM_KnnFit)
    ->Arg(static_cast<int>(SimilarityKind::Cosine))
    ->Arg(static_cast<int>(SimilarityKind::Jaccard))
    ->Arg(static_cast<int>(SimilarityKind::Pearson))
    ->Arg(static_cast<int>(SimilarityKind::BrayCurtis))
    ->Unit(benchmark::kMillisecond);

void BM_Recommend(benchmark::State& state) {
  Assignment params;
  params["neighbors"] = 50.0;
  const auto model =
      fit_recommender(ModelKind::ItemKNN, params, bench_matrix(), bench_dataset(), 7, 1);
  std::vector<std::uint32_t> users(bench_dataset().num_users());
  for (std::uint32_t u = 0; u < users.size(); ++u) users[u] = u;
  const unsigned workers = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    auto lists = recommend(*model, bench_matrix(), users, 50, true, workers);
    benchmark::DoNotOptimize(lists);
  }
}
BENCHMARK(BM_Recommend)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_BprmfEpoch(benchmark::State& state) {
  Assignment params;
  params["factors"] = 16.0;
  params["epochs"] = 1.0;
  for (auto _ : state) {
    auto model = fit_recommender(ModelKind::BPRMF, params, bench_matrix(), bench_dataset(), 9, 1);
    benchmark::DoNotOptimize(model);
  }
}
BENCHMARK(BM_BprmfEpoch)->Unit(benchmark::kMillisecond);

void BM_IterativeKCore(benchmark::State& state) {
  for (auto _ : state) {
    auto result = iterative_k_core(bench_dataset(), 5);
    benchmark::DoNotOptimize(result);
  }
}
BENCHMARK(BM_IterativeKCore)->Unit(benchmark::kMillisecond);

void BM_AccuracyMetrics(benchmark::State& state) {
  const auto& ds = bench_dataset();
  std::vector<Event> train, test;
  for (std::size_t i = 0; i < ds.events().size(); ++i) {
    (i % 5 == 0 ? test : train).push_back(ds.events()[i]);
  }
  const auto ctx = EvalContext::build(ds, train, test, 1.0);
  Rng rng(11);
  RecommendationLists lists;
  for (std::uint32_t u = 0; u < ds.num_users(); ++u) {
    lists.users.push_back(u);
    std::vector<ScoredItem> list;
    for (int r = 0; r < 50; ++r) {
      list.push_back({static_cast<std::uint32_t>(rng.uniform_int(ds.num_items())),
                      50.0 - r});
    }
    lists.lists.push_back(std::move(list));
  }
  for (auto _ : state) {
    auto acc = accuracy_metrics(lists, ctx, 50);
    benchmark::DoNotOptimize(acc);
  }
}
BENCHMARK(BM_AccuracyMetrics)->Unit(benchmark::kMillisecond);

void BM_WilcoxonExact(benchmark::State& state) {
  Rng rng(21);
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  std::vector<double> a(n), b(n, 0.0);
  for (auto& v : a) v = (rng.uniform() < 0.5 ? 1 : -1) * (1.0 + rng.uniform());
  for (auto _ : state) {
    auto out = wilcoxon_signed_rank(a, b);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_WilcoxonExact)->Arg(12)->Arg(25);

void BM_TpeSuggest(benchmark::State& state) {
  SearchSpace space;
  space.emplace_back("x", SearchDomain::uniform(0.0, 1.0));
  space.emplace_back("lr", SearchDomain::log_uniform(-8, -1));
  std::vector<Trial> history;
  Rng gen(31);
  for (int i = 0; i < 40; ++i) {
    Trial t;
    t.params["x"] = gen.uniform();
    t.params["lr"] = std::exp(gen.uniform(-8.0, -1.0));
    t.objective = gen.uniform();
    history.push_back(std::move(t));
  }
  Rng rng(41);
  for (auto _ : state) {
    auto a = tpe_suggest(space, history, rng);
    benchmark::DoNotOptimize(a);
  }
}
BENCHMARK(BM_TpeSuggest);

}  // namespace

BENCHMARK_MAIN();
