#include <benchmark/benchmark.h>

#include <vector>

#include "costplan/billing_model.hpp"
#include "costplan/coupling_planner.hpp"
#include "costplan/energy_model.hpp"
#include "costplan/ingest_fit.hpp"
#include "costplan/numerics.hpp"
#include "costplan/simulator.hpp"

using namespace costplan;

static void BM_LambertW0(benchmark::State& state) {
  double x = -0.3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lambert_w0(x));
    x = x > 50.0 ? -0.3 : x + 0.37;
  }
}
BENCHMARK(BM_LambertW0);

static void BM_EnergyGenericPareto(benchmark::State& state) {
  const EnergyConfig cfg{RateCard::reference(), 1.0, VolumeModel::pareto(81920.0, 4.0)};
  for (auto _ : state) benchmark::DoNotOptimize(energy_generic(cfg));
}
BENCHMARK(BM_EnergyGenericPareto);

static void BM_BillingGenericExponential(benchmark::State& state) {
  const VolumeModel m = VolumeModel::exponential(1638400.0);
  for (auto _ : state) benchmark::DoNotOptimize(billing_generic(m, RateCard::reference(), 2e6));
}
BENCHMARK(BM_BillingGenericExponential);

static void BM_PlanUniform(benchmark::State& state) {
  PlanTargets t;
  t.e_mean = 0.1583104;
  t.e_updev = 0.0595297;
  t.b_mean = 4.358144e-4;
  for (auto _ : state) benchmark::DoNotOptimize(plan(RateCard::reference(), t));
}
BENCHMARK(BM_PlanUniform);

static void BM_SimulationRun(benchmark::State& state) {
  SimConfig cfg;
  cfg.device_model = VolumeModel::pareto(81920.0, 4.0);
  cfg.n_devices = 10;
  cfg.rates = RateCard::reference();
  cfg.c_b = 1e6;
  cfg.n_intervals = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run(cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulationRun)->Arg(10000)->Arg(100000);

static void BM_FitModel(benchmark::State& state) {
  const VolumeLog log{60.0, sample(VolumeModel::pareto(1e5, 3.5), static_cast<std::size_t>(state.range(0)), 1)};
  for (auto _ : state) benchmark::DoNotOptimize(fit_model(log));
}
BENCHMARK(BM_FitModel)->Arg(1000)->Arg(100000);

BENCHMARK_MAIN();
