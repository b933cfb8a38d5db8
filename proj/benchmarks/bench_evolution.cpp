// Microbenchmarks for the stencil hot path and the grid quadratures.

#include <benchmark/benchmark.h>

#include "dqbm/constants.hpp"
#include "dqbm/evolution.hpp"
#include "dqbm/observables.hpp"
#include "dqbm/potentials.hpp"
#include "dqbm/states.hpp"

using namespace dqbm;

namespace {

struct Fixture {
    SpatialGrid grid;
    DensityField rho;
    DensityField out;
    PotentialSpec spec;
    EvolutionParams params;
    std::vector<double> profile;

    explicit Fixture(int n)
        : grid(make_grid(8.0, n)),
          rho(double_gaussian(2.5, 0.35, grid)),
          out(grid),
          spec(make_quartic_double_well(0.025, 2.5, constants::proton_mass)),
          params{constants::hbar, constants::proton_mass, 2.5e-4, 1.0, constants::kT_room},
          profile(potential_profile(grid, spec, params.damping())) {}
};

void bm_rhs(benchmark::State& state) {
    Fixture f(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        me_rhs_into(f.rho, f.out, f.params, f.profile);
        benchmark::DoNotOptimize(f.out.data());
    }
    const auto cells = static_cast<int64_t>(f.grid.n_points - 2) * (f.grid.n_points - 2);
    state.SetItemsProcessed(state.iterations() * cells);
}

void bm_step(benchmark::State& state) {
    Fixture f(static_cast<int>(state.range(0)));
    DensityField current = f.rho;
    for (auto _ : state) {
        current = step(current, 0.05, f.params, f.spec);
        benchmark::DoNotOptimize(current.data());
    }
}

void bm_l1_coherence(benchmark::State& state) {
    Fixture f(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(l1_coherence(f.rho));
    }
}

void bm_quadrant_additivity(benchmark::State& state) {
    Fixture f(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        double total = quadrant_integral(f.rho, Quadrant::LowerRight) +
                       quadrant_integral(f.rho, Quadrant::UpperLeft) +
                       quadrant_integral(f.rho, Quadrant::DiagonalLeft) +
                       quadrant_integral(f.rho, Quadrant::DiagonalRight);
        benchmark::DoNotOptimize(total);
    }
}

}  // namespace

BENCHMARK(bm_rhs)->Arg(129)->Arg(257)->Arg(513)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_step)->Arg(129)->Arg(257)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_l1_coherence)->Arg(257)->Unit(benchmark::kMicrosecond);
BENCHMARK(bm_quadrant_additivity)->Arg(257)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
