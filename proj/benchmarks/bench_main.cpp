#include <benchmark/benchmark.h>

#include "hmae/envelope.hpp"
#include "hmae/geodesic.hpp"
#include "hmae/potential.hpp"

namespace {

hmae::GlobalFunction make_phi(int n) {
    hmae::BumpProfile alpha;
    hmae::ChartGrid wg(hmae::Chart::W, 4.0, n);
    const auto consts = hmae::select_constants(wg, alpha);
    return hmae::build_phi(consts, n, 4.0, alpha);
}

void bm_envelope_sweep(benchmark::State& state) {
    const int n = int(state.range(0));
    const hmae::GlobalFunction phi = make_phi(n);
    hmae::EnvelopeSolverOptions opt;
    for (auto _ : state) {
        opt.max_iter = 50;
        try {
            benchmark::DoNotOptimize(hmae::solve_psi_t(phi, 0.5, opt));
        } catch (const std::runtime_error&) {
            // capped iteration count; only the sweep cost is measured
        }
    }
    state.SetItemsProcessed(state.iterations() * 50 * 2 * n * n);
}
BENCHMARK(bm_envelope_sweep)->Arg(65)->Arg(129)->Unit(benchmark::kMillisecond);

void bm_envelope_full_solve(benchmark::State& state) {
    const int n = int(state.range(0));
    const hmae::GlobalFunction phi = make_phi(n);
    for (auto _ : state) benchmark::DoNotOptimize(hmae::solve_psi_t(phi, 0.5));
}
BENCHMARK(bm_envelope_full_solve)->Arg(65)->Unit(benchmark::kMillisecond);

void bm_legendre_build(benchmark::State& state) {
    const int n = int(state.range(0));
    const hmae::GlobalFunction phi = make_phi(n);
    const auto fam = hmae::solve_family(phi, hmae::make_t_grid(9));
    const auto s_grid = hmae::make_s_grid(9, 8.0, 4);
    for (auto _ : state) benchmark::DoNotOptimize(hmae::legendre_build(fam, s_grid));
}
BENCHMARK(bm_legendre_build)->Arg(65)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
