#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "cslearn/bounds.hpp"
#include "cslearn/fairness.hpp"
#include "cslearn/lagrangian.hpp"
#include "cslearn/model.hpp"
#include "cslearn/optimizer.hpp"

using namespace cslearn;

namespace {

Dataset make_data(std::size_t n, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> coin(0, 1);
  std::vector<Sample> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Sample s;
    s.features.resize(d);
    for (std::size_t j = 0; j + 1 < d; ++j) s.features[j] = normal(rng);
    s.features[d - 1] = coin(rng);
    s.label = coin(rng);
    samples.push_back(std::move(s));
  }
  Dataset data(std::move(samples), d);
  data.set_protected_slot(d - 1);
  return data;
}

ConstrainedProblem fair_problem() { return make_fair_problem(1e-3); }

}  // namespace

static void BM_ForwardMlp(benchmark::State& state) {
  const std::size_t hidden = static_cast<std::size_t>(state.range(0));
  const Parameterization model = init_params(ModelConfig::mlp(16, hidden), 1);
  std::vector<double> x(16, 0.3);
  ForwardTrace trace;
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(model, x, trace));
  }
}
BENCHMARK(BM_ForwardMlp)->Arg(16)->Arg(256);

static void BM_ForwardBackwardMlp(benchmark::State& state) {
  const std::size_t hidden = static_cast<std::size_t>(state.range(0));
  const Parameterization model = init_params(ModelConfig::mlp(16, hidden), 1);
  std::vector<double> x(16, 0.3);
  std::vector<double> grad(model.param_count(), 0.0);
  ForwardTrace trace;
  for (auto _ : state) {
    forward(model, x, trace);
    backward_accumulate(model, trace, 1.0, grad);
    benchmark::DoNotOptimize(grad.data());
  }
}
BENCHMARK(BM_ForwardBackwardMlp)->Arg(16)->Arg(256);

static void BM_EmpiricalStats(benchmark::State& state) {
  const Dataset data = make_data(static_cast<std::size_t>(state.range(0)), 8, 2);
  const Parameterization model = init_params(ModelConfig::mlp(8, 16), 2);
  const ConstrainedProblem problem = fair_problem();
  for (auto _ : state) {
    benchmark::DoNotOptimize(empirical_stats(problem, model, data));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EmpiricalStats)->Arg(1000);

static void BM_LagrangianGradient(benchmark::State& state) {
  const Dataset data = make_data(static_cast<std::size_t>(state.range(0)), 8, 3);
  const Parameterization model = init_params(ModelConfig::mlp(8, 16), 3);
  const ConstrainedProblem problem = fair_problem();
  const DualState duals({0.65});
  for (auto _ : state) {
    benchmark::DoNotOptimize(lagrangian_gradient_theta(problem, model, duals, data));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LagrangianGradient)->Arg(1000);

static void BM_DualAscentEpoch(benchmark::State& state) {
  const Dataset data = make_data(500, 8, 4);
  const ConstrainedProblem problem = fair_problem();
  const Parameterization init = init_params(ModelConfig::mlp(8, 16), 4);
  TrainConfig config;
  config.mode = TrainMode::DualAscent;
  config.epochs = 1;
  config.inner_steps = 20;
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_dual(problem, init, data, config));
  }
}
BENCHMARK(BM_DualAscentEpoch);

static void BM_VnFormula(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(v_n(16.118, 32561, 5000, 0.05));
  }
}
BENCHMARK(BM_VnFormula);

BENCHMARK_MAIN();
