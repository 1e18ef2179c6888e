#include "clvkit/kernels.hpp"
#include "clvkit/simulate.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace clvkit;

const BgnbdCoefficients kTruth{0.25, 4.5, 0.8, 2.4};

std::vector<RfmRow> synthetic_rfm(std::size_t n) {
    SimulationConfig config;
    config.n_customers = n;
    config.horizon = 78.0;
    config.bgnbd = kTruth;
    config.seed = 7;
    return simulation_rfm(simulate_customers(config), 78.0);
}

void BM_BgnbdTermsSerial(benchmark::State& state) {
    const auto rows = synthetic_rfm(static_cast<std::size_t>(state.range(0)));
    std::vector<double> out(rows.size());
    for (auto _ : state) {
        kernels::bgnbd_terms_serial(kTruth, rows, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BgnbdTermsParallel(benchmark::State& state) {
    const auto rows = synthetic_rfm(static_cast<std::size_t>(state.range(0)));
    std::vector<double> out(rows.size());
    for (auto _ : state) {
        kernels::bgnbd_terms_parallel(kTruth, rows, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SimulateSerial(benchmark::State& state) {
    SimulationConfig config;
    config.horizon = 78.0;
    config.bgnbd = kTruth;
    std::vector<SimulatedCustomer> out(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        kernels::simulate_serial(config, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_SimulateParallel(benchmark::State& state) {
    SimulationConfig config;
    config.horizon = 78.0;
    config.bgnbd = kTruth;
    std::vector<SimulatedCustomer> out(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        kernels::simulate_parallel(config, out);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

} // namespace

BENCHMARK(BM_BgnbdTermsSerial)->Arg(20000);
BENCHMARK(BM_BgnbdTermsParallel)->Arg(20000);
BENCHMARK(BM_SimulateSerial)->Arg(20000);
BENCHMARK(BM_SimulateParallel)->Arg(20000);

BENCHMARK_MAIN();
