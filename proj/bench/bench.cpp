// serial reference vs OpenMP kernels
#include <benchmark/benchmark.h>

#include <random>

#include "nvdiss/channels.hpp"
#include "nvdiss/measurement.hpp"
#include "nvdiss/pulse.hpp"

using namespace nvdiss;

namespace {

SpinRegister full_register() { return {kReferenceFieldGauss, kGamma13C_kHzPerGauss, survey_spins()}; }

std::vector<double> tau_grid(int n) {
  std::vector<double> t;
  for (int i = 0; i < n; ++i) t.push_back(100.0 + 2.0 * i);
  return t;
}

template <bool Parallel>
void cpmg(benchmark::State& st) {
  const auto reg = full_register();
  const auto taus = tau_grid(static_cast<int>(st.range(0)));
  for (auto _ : st) {
    auto v = Parallel ? cpmg_signal(reg, taus, 32) : cpmg_signal_serial(reg, taus, 32);
    benchmark::DoNotOptimize(v.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void grid(benchmark::State& st) {
  const auto reg = full_register().subregister({"1", "2", "4"});
  auto s = default_search(GateKind::ConditionalXHalf);
  s.tau_step_ns = static_cast<double>(st.range(0));
  const GateTarget t{GateKind::ConditionalXHalf, "2"};
  for (auto _ : st) {
    auto v = Parallel ? scan_gate_grid(t, reg, s) : scan_gate_grid_serial(t, reg, s);
    benchmark::DoNotOptimize(v.data());
  }
}

template <bool Parallel>
void channel_batch(benchmark::State& st) {
  std::mt19937_64 rng(1);
  std::vector<DensityMatrix> states;
  for (int i = 0; i < st.range(0); ++i) states.push_back(random_density_matrix(4, rng));
  const auto ch = compose(build_Ez(), build_Ex());
  for (auto _ : st) {
    auto v = Parallel ? apply_channel_batch(ch, states) : apply_channel_batch_serial(ch, states);
    benchmark::DoNotOptimize(v.data());
  }
  st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <bool Parallel>
void tomography(benchmark::State& st) {
  const IdealGateSet gates(3);
  std::mt19937_64 rng(2);
  const auto full = embed_nuclear_state(random_density_matrix(4, rng), gates);
  const auto model = ReadoutModel::symmetric(0.765);
  for (auto _ : st) {
    auto v = Parallel ? simulate_tomography(full, gates, {}, model, 3)
                      : simulate_tomography_serial(full, gates, {}, model, 3);
    benchmark::DoNotOptimize(v.data());
  }
}

}  // namespace

BENCHMARK(cpmg<false>)->Name("cpmg_signal/serial")->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(cpmg<true>)->Name("cpmg_signal/omp")->Arg(4000)->Unit(benchmark::kMillisecond);
BENCHMARK(grid<false>)->Name("scan_gate_grid/serial")->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(grid<true>)->Name("scan_gate_grid/omp")->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK(channel_batch<false>)->Name("apply_channel_batch/serial")->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(channel_batch<true>)->Name("apply_channel_batch/omp")->Arg(4096)->Unit(benchmark::kMillisecond);
BENCHMARK(tomography<false>)->Name("simulate_tomography/serial")->Unit(benchmark::kMillisecond);
BENCHMARK(tomography<true>)->Name("simulate_tomography/omp")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
