#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "hierglm/comparison.hpp"
#include "hierglm/kernels.hpp"

using namespace hierglm;

namespace {

ParameterVector truth(ModelKind kind) {
  switch (kind) {
    case ModelKind::Simple: return reference_truth();
    case ModelKind::Hierarchical: return ParameterVector(kind, {0.2, 0.5, -0.15, 0.55, 0.6, -0.642, -3.879});
    case ModelKind::Interaction: return ParameterVector(kind, {-0.15, 0.6, -0.642, -3.879, 0.7, 0.3, -0.3});
  }
  return reference_truth();
}

struct Fixture {
  ModelKind kind;
  PreparedData data;
  std::vector<double> coef;

  Fixture(ModelKind k, std::size_t n) : kind(k) {
    const auto records = simulate_dataset(ModelSpec::for_kind(k), truth(k), n, CovariateProfile{}, 1);
    data = prepare(records);
    coef.resize(kernels::coefficient_count(k));
    kernels::coefficients(truth(k), coef);
  }
};

ModelKind kind_arg(const benchmark::State& state) { return static_cast<ModelKind>(state.range(1)); }

template <bool Parallel>
void BM_LogLikAndGrad(benchmark::State& state) {
  const Fixture f(kind_arg(state), static_cast<std::size_t>(state.range(0)));
  std::vector<double> grad(f.coef.size());
  for (auto _ : state) {
    const double v = Parallel ? kernels::log_lik_and_grad(f.kind, f.coef, f.data, grad)
                              : kernels::log_lik_and_grad_serial(f.kind, f.coef, f.data, grad);
    benchmark::DoNotOptimize(v);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

template <bool Parallel>
void BM_Pointwise(benchmark::State& state) {
  const Fixture f(kind_arg(state), static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(f.data.size());
  for (auto _ : state) {
    if (Parallel) {
      kernels::log_lik_pointwise(f.kind, f.coef, f.data, out);
    } else {
      kernels::log_lik_pointwise_serial(f.kind, f.coef, f.data, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

ChainDraws jittered_draws(ModelKind kind, std::size_t draws) {
  const auto spec = ModelSpec::for_kind(kind);
  ChainDraws d;
  d.chains = 1;
  d.draws = draws;
  d.param_names = spec.parameter_names();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.03);
  const auto t = truth(kind);
  for (std::size_t s = 0; s < draws; ++s) {
    for (std::size_t p = 0; p < d.params(); ++p) d.values.push_back(t[p] + std::abs(noise(rng)));
  }
  d.stats.resize(draws);
  return d;
}

template <bool Streamed>
void BM_Waic(benchmark::State& state) {
  const Fixture f(ModelKind::Interaction, static_cast<std::size_t>(state.range(0)));
  const auto spec = ModelSpec::for_kind(f.kind);
  const auto draws = jittered_draws(f.kind, 1000);
  for (auto _ : state) {
    const auto r = Streamed ? waic_from_draws(spec, draws, f.data) : waic(pointwise_log_lik(spec, draws, f.data));
    benchmark::DoNotOptimize(r.elpd_waic);
  }
}

void kernel_args(benchmark::internal::Benchmark* b) {
  for (long n : {5000, 100000}) {
    for (long k : {0, 1, 2}) b->Args({n, k});
  }
}

}  // namespace

BENCHMARK(BM_LogLikAndGrad<false>)->Name("log_lik_and_grad/serial")->Apply(kernel_args);
BENCHMARK(BM_LogLikAndGrad<true>)->Name("log_lik_and_grad/openmp")->Apply(kernel_args);
BENCHMARK(BM_Pointwise<false>)->Name("log_lik_pointwise/serial")->Apply(kernel_args);
BENCHMARK(BM_Pointwise<true>)->Name("log_lik_pointwise/openmp")->Apply(kernel_args);
BENCHMARK(BM_Waic<false>)->Name("waic/matrix")->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Waic<true>)->Name("waic/streamed")->Arg(5000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
