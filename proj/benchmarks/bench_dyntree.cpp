#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "dyncore/dyntree.hpp"
#include "dyncore/mergereduce.hpp"
#include "dyncore/oracle.hpp"

using namespace dyncore;

namespace {

Point random_point(std::mt19937_64& rng, PointId id) {
  std::uniform_real_distribution<double> u(0.0, 1000.0);
  return Point{id, {u(rng), u(rng)}};
}

TreeConfig tree_config(const std::string& ctor) {
  TreeConfig cfg;
  cfg.constructor = ctor;
  if (ctor != "passthrough") {
    cfg.threshold_override = 128;
    cfg.outer_target_override = 128;
  }
  return cfg;
}

// Alternating delete/insert at steady size n.
void churn(benchmark::State& state, const std::string& ctor) {
  const auto n = static_cast<std::size_t>(state.range(0));
  DynamicCoresetTree t(tree_config(ctor));
  std::mt19937_64 rng(7);
  std::vector<PointId> ids;
  PointId next = 1;
  for (std::size_t i = 0; i < n; ++i) {
    t.insert(random_point(rng, next), 1);
    ids.push_back(next++);
  }
  std::uint64_t calls = 0;
  for (auto _ : state) {
    const std::size_t j = rng() % ids.size();
    calls += t.erase(ids[j]).static_calls_nonouter;
    ids[j] = next;
    calls += t.insert(random_point(rng, next++), 1).static_calls_nonouter;
  }
  state.counters["calls/update"] = benchmark::Counter(static_cast<double>(calls) / (2.0 * state.iterations()));
  state.SetItemsProcessed(2 * state.iterations());
}

void BM_ChurnPassthrough(benchmark::State& state) { churn(state, "passthrough"); }
void BM_ChurnSensitivity(benchmark::State& state) { churn(state, "sensitivity"); }
void BM_ChurnRings(benchmark::State& state) { churn(state, "rings"); }

void BM_MergeReduceInsert(benchmark::State& state) {
  MergeReduceConfig cfg;
  cfg.constructor = "sensitivity";
  cfg.threshold_override = 128;
  cfg.n_max = std::uint64_t{1} << 30;
  MergeReduce mr(cfg);
  std::mt19937_64 rng(9);
  PointId next = 1;
  for (auto _ : state) mr.insert(random_point(rng, next++), 1);
  state.SetItemsProcessed(state.iterations());
}

void BM_CertifyExhaustive(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(11);
  std::vector<WeightedPoint> x;
  for (PointId i = 1; i <= n; ++i) x.push_back(WeightedPoint{random_point(rng, i), BoundedRational::from_rational(1)});
  std::vector<WeightedPoint> c(x.begin(), x.begin() + static_cast<long>(n / 4));
  for (auto _ : state) {
    benchmark::DoNotOptimize(certify_coreset(c, x, 1.0, 2, 2, Metric::euclidean(2)).worst_deviation);
  }
}

}  // namespace

BENCHMARK(BM_ChurnPassthrough)->RangeMultiplier(4)->Range(1 << 8, 1 << 14);
BENCHMARK(BM_ChurnSensitivity)->RangeMultiplier(4)->Range(1 << 8, 1 << 14);
BENCHMARK(BM_ChurnRings)->RangeMultiplier(4)->Range(1 << 8, 1 << 12);
BENCHMARK(BM_MergeReduceInsert);
BENCHMARK(BM_CertifyExhaustive)->Arg(100)->Arg(200);

BENCHMARK_MAIN();
