// Serial reference vs OpenMP kernels.

#include <benchmark/benchmark.h>

#include "ovfit/kernels.hpp"
#include "ovfit/synthetic_linear.hpp"

namespace {

using namespace ovfit;

synthetic::LinearModel model_for(const synthetic::MixtureSpec& spec) {
  Eigen::VectorXd w = Eigen::VectorXd::Constant(spec.dim, 0.01);
  w[0] = 1.0;
  return {w, 0.0};
}

void adversarial_outcomes(benchmark::State& state, kernels::Exec exec) {
  const synthetic::MixtureSpec spec;
  const auto data = synthetic::sample_dataset(spec, static_cast<std::size_t>(state.range(0)), 1);
  const auto model = model_for(spec);
  const synthetic::GradientAeg aeg(model, spec, 10.0);
  const std::span<const synthetic::Example> s(data);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernels::adversarial_outcomes<synthetic::Point>(model, aeg, s, exec));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void holdout(benchmark::State& state, kernels::Exec exec) {
  const synthetic::MixtureSpec spec;
  const auto model = model_for(spec);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        kernels::holdout_error_rate(spec, model, static_cast<std::size_t>(state.range(0)), 3, exec));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK_CAPTURE(adversarial_outcomes, serial, kernels::Exec::Serial)->Arg(1000)->Arg(10000);
BENCHMARK_CAPTURE(adversarial_outcomes, omp, kernels::Exec::Parallel)->Arg(1000)->Arg(10000);
BENCHMARK_CAPTURE(holdout, serial, kernels::Exec::Serial)->Arg(100000);
BENCHMARK_CAPTURE(holdout, omp, kernels::Exec::Parallel)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
