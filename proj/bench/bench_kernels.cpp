// Serial reference kernels against their OpenMP versions, plus a small
// sweep run both ways. Thread count comes from OMP_NUM_THREADS.
#include <benchmark/benchmark.h>

#include "disent/kernels.hpp"
#include "disent/nn.hpp"
#include "disent/sweep.hpp"

using namespace disent;

namespace {

struct Inputs {
  Mat probs;
  std::vector<int> labels;
  std::vector<std::size_t> perm;
  std::vector<double> v;
};

const Inputs& inputs(std::size_t n) {
  static std::map<std::size_t, Inputs> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  Rng rng(n);
  Inputs in;
  Mat logits(static_cast<Eigen::Index>(n), 5);
  for (Eigen::Index i = 0; i < logits.size(); ++i) logits.data()[i] = rng.normal();
  in.probs = softmax_rows(logits);
  in.labels.resize(n);
  for (auto& y : in.labels) y = static_cast<int>(rng.below(5));
  in.perm = rng.permutation(n);
  in.v.resize(n);
  for (auto& x : in.v) x = rng.normal();
  return cache.emplace(n, std::move(in)).first->second;
}

template <bool Parallel>
void BM_ColumnMeans(benchmark::State& s) {
  const auto& in = inputs(static_cast<std::size_t>(s.range(0)));
  for (auto _ : s) {
    benchmark::DoNotOptimize(Parallel ? kernels::column_means(in.probs) : kernels::column_means_serial(in.probs));
  }
  s.SetItemsProcessed(s.iterations() * s.range(0));
}

template <bool Parallel>
void BM_MeanLogContrast(benchmark::State& s) {
  const auto& in = inputs(static_cast<std::size_t>(s.range(0)));
  for (auto _ : s) {
    benchmark::DoNotOptimize(Parallel ? kernels::mean_log_contrast(in.probs, in.labels, in.perm)
                                      : kernels::mean_log_contrast_serial(in.probs, in.labels, in.perm));
  }
  s.SetItemsProcessed(s.iterations() * s.range(0));
}

template <bool Parallel>
void BM_LogMeanExp(benchmark::State& s) {
  const auto& in = inputs(static_cast<std::size_t>(s.range(0)));
  for (auto _ : s) {
    benchmark::DoNotOptimize(Parallel ? kernels::log_mean_exp(in.v, 0.5) : kernels::log_mean_exp_serial(in.v, 0.5));
  }
  s.SetItemsProcessed(s.iterations() * s.range(0));
}

SweepConfig bench_sweep() {
  SweepConfig c;
  c.lambdas = {0.0, 1.0};
  c.estimators = {EstimatorSpec::kl(), EstimatorSpec::renyi(1.5)};
  c.seeds = {1, 2};
  c.base.encoder_steps = 50;
  c.base.hidden = 32;
  c.base.unroll = 2;
  c.n_encoder = c.n_aux = c.n_test = 500;
  c.attacker.steps = 100;
  c.attacker.hidden = 32;
  c.probe_seeds = 1;
  return c;
}

template <bool Parallel>
void BM_Sweep(benchmark::State& s) {
  const auto c = bench_sweep();
  for (auto _ : s) benchmark::DoNotOptimize(Parallel ? sweep(c) : sweep_serial(c));
}

}  // namespace

#define SIZES ->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20)
BENCHMARK(BM_ColumnMeans<false>) SIZES;
BENCHMARK(BM_ColumnMeans<true>) SIZES;
BENCHMARK(BM_MeanLogContrast<false>) SIZES;
BENCHMARK(BM_MeanLogContrast<true>) SIZES;
BENCHMARK(BM_LogMeanExp<false>) SIZES;
BENCHMARK(BM_LogMeanExp<true>) SIZES;
BENCHMARK(BM_Sweep<false>)->Unit(benchmark::kMillisecond)->Iterations(1);
BENCHMARK(BM_Sweep<true>)->Unit(benchmark::kMillisecond)->Iterations(1);

BENCHMARK_MAIN();
