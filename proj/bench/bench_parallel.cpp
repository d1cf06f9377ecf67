// Parallel kernels against their serial references.

#include <random>

#include <benchmark/benchmark.h>

#include "deepkrein/analysis.hpp"
#include "deepkrein/kreinkernel.hpp"
#include "deepkrein/pushforward.hpp"

using namespace deepkrein;

namespace {

Eigen::MatrixXd points(int n, int dim, double scale) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-scale, scale);
  Eigen::MatrixXd x(n, dim);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
  return x;
}

Architecture tanh_net() {
  return Architecture(3, {8, 8, 1}, {ActivationSpec::tanh(), ActivationSpec::tanh(), ActivationSpec::linear()});
}

template <bool Parallel>
void BM_Gram(benchmark::State& state) {
  const KernelDefinition def(tanh_net(), KernelVariant::Krein);
  const Eigen::MatrixXd x = points(static_cast<int>(state.range(0)), 3, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(Parallel ? gram(def, x) : gram_serial(def, x));
}

template <bool Parallel>
void BM_FlatBatch(benchmark::State& state) {
  const Architecture arch(2, {2, 1}, {ActivationSpec::erf(), ActivationSpec::linear()});
  const FlatSpace space = FlatSpace::build(arch, 9);
  const WeightSet w = initial_weights(arch, 3);
  auto c = space.flat_weight(arch, w);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= space.metric()[k];
  const Eigen::MatrixXd x = points(static_cast<int>(state.range(0)), 2, 0.5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? space.evaluate_batch(x, c) : space.evaluate_batch_serial(x, c));
  }
}

template <bool Parallel>
void BM_Empirical(benchmark::State& state) {
  const Architecture arch(2, {2, 1}, {ActivationSpec::tanh(), ActivationSpec::tanh()});
  const Eigen::MatrixXd x = points(50, 2, 0.3);
  const int trials = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? empirical_rademacher(arch, 1.0, x, trials, 100, 5)
                                      : empirical_rademacher_serial(arch, 1.0, x, trials, 100, 5));
  }
}

}  // namespace

BENCHMARK(BM_Gram<true>)->Arg(64)->Arg(256);
BENCHMARK(BM_Gram<false>)->Arg(64)->Arg(256);
BENCHMARK(BM_FlatBatch<true>)->Arg(256)->Arg(1024);
BENCHMARK(BM_FlatBatch<false>)->Arg(256)->Arg(1024);
BENCHMARK(BM_Empirical<true>)->Arg(50);
BENCHMARK(BM_Empirical<false>)->Arg(50);

BENCHMARK_MAIN();
