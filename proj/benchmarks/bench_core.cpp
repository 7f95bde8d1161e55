#include <benchmark/benchmark.h>

#include "tidecore/basis.hpp"
#include "tidecore/diagnostics.hpp"
#include "tidecore/operators.hpp"
#include "tidecore/rng.hpp"
#include "tidecore/timestepper.hpp"

namespace {

using namespace tidal;

DomainSpec domain(int modes) {
    DomainSpec d;
    d.modes_x1 = d.modes_x2 = modes;
    d.grid_x1 = d.grid_x2 = 2 * modes + 3;
    return d;
}

ModelParams default_params(const SpectralBasis& basis) {
    ScalarField depth(basis.spec().grid_x1, basis.spec().grid_x2);
    for (double& v : depth.v) v = 1.2;
    return ModelParams(basis, ModelCoefficients{}, std::move(depth), BackgroundFlow{}, Forcing{});
}

void BM_project(benchmark::State& state) {
    SpectralBasis basis(domain(static_cast<int>(state.range(0))));
    Rng rng = Rng::from_seed(1);
    const ScalarField f = basis.synthesize(
        random_modal(rng, basis.spec().modes_x1, basis.spec().modes_x2));
    for (auto _ : state) benchmark::DoNotOptimize(basis.project(f));
}
BENCHMARK(BM_project)->Arg(8)->Arg(16)->Arg(32);

void BM_synthesize(benchmark::State& state) {
    SpectralBasis basis(domain(static_cast<int>(state.range(0))));
    Rng rng = Rng::from_seed(1);
    const ScalarModal c = random_modal(rng, basis.spec().modes_x1, basis.spec().modes_x2);
    for (auto _ : state) benchmark::DoNotOptimize(basis.synthesize(c));
}
BENCHMARK(BM_synthesize)->Arg(8)->Arg(16)->Arg(32);

void BM_step(benchmark::State& state) {
    SpectralBasis basis(domain(static_cast<int>(state.range(0))));
    ModelParams params = default_params(basis);
    NoiseModel noise;
    noise.wiener = WienerSpec::power_spectrum(basis, 0.02, 2.0, 1.0, 0.0);
    noise.jumps.total_intensity = 2.0;
    noise.jumps.amp_add = 0.05;
    noise.jumps.shape = basis.zero_vector();
    noise.jumps.shape.c1.at(1, 1) = 1.0;
    SimConfig cfg;
    Rng rng = Rng::from_seed(2);
    State s{0.0, random_vector_modal(rng, basis.spec().modes_x1, basis.spec().modes_x2),
            basis.zero_field()};
    for (auto _ : state) {
        const NoiseDraw draw = sample_draw(cfg.dt, noise.wiener, noise.jumps, rng);
        s = step(basis, s, draw, noise, params, cfg);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_step)->Arg(8)->Arg(16);

void BM_wiener_sample(benchmark::State& state) {
    SpectralBasis basis(domain(static_cast<int>(state.range(0))));
    const WienerSpec spec = WienerSpec::power_spectrum(basis, 0.02, 2.0, 1.0, 0.0);
    Rng rng = Rng::from_seed(3);
    for (auto _ : state) benchmark::DoNotOptimize(sample_wiener(1e-3, spec, rng));
}
BENCHMARK(BM_wiener_sample)->Arg(8)->Arg(16);

void BM_cadlag_modulus(benchmark::State& state) {
    SpectralBasis basis(domain(4));
    Rng rng = Rng::from_seed(4);
    TrajectoryRecord traj;
    const int n = static_cast<int>(state.range(0));
    for (int i = 0; i <= n; ++i) {
        traj.times.push_back(i / static_cast<double>(n));
        traj.states.push_back(
            {traj.times.back(), random_vector_modal(rng, 4, 4), basis.zero_field()});
    }
    for (auto _ : state) benchmark::DoNotOptimize(cadlag_modulus(basis, traj, 0.13));
}
BENCHMARK(BM_cadlag_modulus)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
