#include <benchmark/benchmark.h>

#include "clsrivc/analysis.hpp"
#include "clsrivc/estimator.hpp"
#include "clsrivc/sim.hpp"

using namespace clsrivc;

namespace {

constexpr double kPeriod = 0.1;
const ThetaVector kThetaTrue{{0.5, 1.5}, {1.0}};

ClosedLoopSystem benchmark_loop(ControllerKind kind) {
  return ClosedLoopSystem::make(
      TransferFunction(Polynomial({1.0}), Polynomial({0.5, 1.5, 1.0})),
      Polynomial({2.0, 2.0}), Polynomial({1.0, 10.0}), kind, kPeriod);
}

SampledSignal reference(int n) {
  return gen_piecewise_constant({-1.0, 1.0}, 5, n, 7, kPeriod);
}

SampledSignal zeros(int n) {
  return SampledSignal{std::vector<double>(static_cast<std::size_t>(n), 0.0),
                       kPeriod, Hold::kZoh};
}

void bm_filter_signal(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  SampledSignal r = reference(n);
  DiscreteFilter f = discretize(
      TransferFunction(Polynomial::one(), kThetaTrue.a_poly()), kPeriod,
      Hold::kZoh);
  for (auto _ : state) {
    benchmark::DoNotOptimize(filter_signal(f, r));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bm_filter_signal)->Arg(10000)->Arg(100000);

void bm_simulate(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ClosedLoopSystem sys = benchmark_loop(ControllerKind::kContinuous);
  SampledSignal r = reference(n);
  SampledSignal v = zeros(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate(sys, r, v));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bm_simulate)->Arg(10000)->Arg(100000);

void bm_estimator_iteration(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ClosedLoopSystem sys = benchmark_loop(ControllerKind::kDiscreteWithHold);
  Dataset data = simulate(sys, reference(n), zeros(n));
  for (auto _ : state) {
    auto [phi, y_f] = build_regressor(data.u, data.y, kThetaTrue, Hold::kZoh);
    Eigen::MatrixXd phi_hat =
        build_instruments(data.r, kThetaTrue, sys.f, sys.l, Hold::kZoh);
    benchmark::DoNotOptimize(clsrivc_step(phi_hat, phi, y_f, 2, 0));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bm_estimator_iteration)->Arg(10000)->Arg(40000);

void bm_decompose_normal_matrix(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  ClosedLoopSystem sys = benchmark_loop(ControllerKind::kContinuous);
  SampledSignal r = reference(n);
  SampledSignal v = zeros(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(decompose_normal_matrix(sys, r, v, kThetaTrue));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(bm_decompose_normal_matrix)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
