// Serial reference vs OpenMP kernels. Set OMP_NUM_THREADS to vary threads.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "porcelain/kernels.hpp"

namespace k = porcelain::kernels;

namespace {

std::vector<int> labels(std::size_t n, int c, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<int> v(n);
  for (auto& e : v) e = static_cast<int>(gen() % static_cast<std::uint64_t>(c));
  return v;
}

Eigen::MatrixXd matrix(Eigen::Index n, Eigen::Index d) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd(0, 1);
  Eigen::MatrixXd x(n, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = nd(gen);
  return x;
}

template <bool Parallel>
void BM_ConfusionTally(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto t = labels(n, 20, 1), p = labels(n, 20, 2);
  for (auto _ : state) {
    auto r = Parallel ? k::parallel::confusion_tally(t, p, 20) : k::serial::confusion_tally(t, p, 20);
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}

template <bool Parallel>
void BM_WeightedNll(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::size_t c = 16;
  std::vector<double> probs(n * c, 1.0 / c);
  const auto y = labels(n, static_cast<int>(c), 4);
  const std::vector<double> w(c, 1.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? k::parallel::weighted_nll_sum(probs, c, y, w, 1e-12)
                                      : k::serial::weighted_nll_sum(probs, c, y, w, 1e-12));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}

template <bool Parallel>
void BM_AbsDiffSum(benchmark::State& state) {
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  std::mt19937_64 gen(5);
  for (auto& v : x) v = static_cast<double>(gen() % 10000);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? k::parallel::abs_diff_sum(x) : k::serial::abs_diff_sum(x));
  }
}

template <bool Parallel>
void BM_Covariance(benchmark::State& state) {
  const auto x = matrix(state.range(0), 64);
  for (auto _ : state) {
    const auto m = Parallel ? k::parallel::column_means(x) : k::serial::column_means(x);
    auto s = Parallel ? k::parallel::scatter(x, m) : k::serial::scatter(x, m);
    benchmark::DoNotOptimize(s.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * state.range(0));
}

}  // namespace

BENCHMARK(BM_ConfusionTally<false>)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_ConfusionTally<true>)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_WeightedNll<false>)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(BM_WeightedNll<true>)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(BM_AbsDiffSum<false>)->Arg(1000)->Arg(4000);
BENCHMARK(BM_AbsDiffSum<true>)->Arg(1000)->Arg(4000);
BENCHMARK(BM_Covariance<false>)->Arg(2048)->Arg(16384);
BENCHMARK(BM_Covariance<true>)->Arg(2048)->Arg(16384);

BENCHMARK_MAIN();
