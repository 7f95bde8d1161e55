#include <cmath>

#include <doctest.h>

#include "tidecore/timestepper.hpp"

using namespace tidal;

namespace {

DomainSpec square(int modes, int grid) {
    DomainSpec d;
    d.modes_x1 = d.modes_x2 = modes;
    d.grid_x1 = d.grid_x2 = grid;
    return d;
}

ScalarField constant_depth(const SpectralBasis& basis, double value) {
    ScalarField h = basis.zero_field();
    for (double& v : h.v) v = value;
    return h;
}

ModelParams linear_params(const SpectralBasis& basis, double alpha, double beta) {
    // gamma = 0, g = 0: pure diffusion plus rotation
    return ModelParams(basis, {alpha, beta, 0.0, 0.0}, constant_depth(basis, 1.0), {}, {});
}

ModelParams full_params(const SpectralBasis& basis) {
    return ModelParams(basis, {1.0, 1.0, 1.5, 0.05}, constant_depth(basis, 1.2), {}, {});
}

NoiseModel no_noise(const SpectralBasis& basis) {
    NoiseModel n;
    n.wiener = WienerSpec::power_spectrum(basis, 0.0, 2.0, 0.0, 0.0);
    n.jumps.total_intensity = 0.0;
    n.jumps.shape = basis.zero_vector();
    return n;
}

NoiseModel small_noise(const SpectralBasis& basis) {
    NoiseModel n;
    n.wiener = WienerSpec::power_spectrum(basis, 0.02, 2.0, 1.0, 0.0);
    n.jumps.total_intensity = 2.0;
    n.jumps.marks.kind = MarkDistribution::Kind::uniform;
    n.jumps.marks.lower = -1.0;
    n.jumps.marks.upper = 1.0;
    n.jumps.amp_add = 0.05;
    n.jumps.shape = basis.zero_vector();
    n.jumps.shape.c1.at(1, 1) = 1.0;
    return n;
}

}  // namespace

TEST_SUITE("timestepper") {

TEST_CASE("sim config validation") {
    SimConfig c;
    c.dt = 0.0;
    CHECK_THROWS_AS(c.validate(), ContractError);
    c.dt = 0.3;
    c.horizon = 1.0;  // not a multiple
    CHECK_THROWS_AS(c.validate(), ContractError);
    c.dt = 0.25;
    CHECK_NOTHROW(c.validate());
    CHECK(c.steps() == 4);
    c.record_stride = 0;
    CHECK_THROWS_AS(c.validate(), ContractError);
}

TEST_CASE("zero state is a fixed point without forcing or noise") {
    SpectralBasis basis(square(3, 9));
    ModelParams p = full_params(basis);
    SimConfig cfg;
    cfg.dt = 0.01;
    cfg.horizon = 0.1;
    const TrajectoryRecord traj =
        simulate(basis, basis.zero_vector(), basis.zero_field(), p, no_noise(basis), cfg);
    CHECK(traj.energies.back().u_l2_sq == 0.0);
    CHECK(traj.energies.back().z_l2_sq == 0.0);
}

TEST_CASE("single mode decays at the implicit Euler rate") {
    SpectralBasis basis(square(2, 7));
    ModelParams p = linear_params(basis, 0.9, 0.0);
    SimConfig cfg;
    cfg.dt = 1e-3;
    cfg.horizon = 0.25;
    VectorModal u0 = basis.zero_vector();
    u0.c1.at(1, 2) = 0.8;
    const TrajectoryRecord traj =
        simulate(basis, u0, basis.zero_field(), p, no_noise(basis), cfg);
    const double lam = basis.lambda(1, 2);
    const double expected = 0.8 * std::pow(1.0 + cfg.dt * 0.9 * lam, -250.0);
    const double got = traj.final_state().u.c1.at(1, 2);
    CHECK(got == doctest::Approx(expected).epsilon(1e-10));
    // other modes stay silent
    CHECK(traj.final_state().u.c2.at(1, 2) == 0.0);
    CHECK(traj.final_state().u.c1.at(2, 2) == 0.0);
}

TEST_CASE("implicit rotation solve matches the closed-form 2x2 inverse") {
    SpectralBasis basis(square(2, 7));
    const double alpha = 1e-6, beta = 2.5, dt = 0.125;
    ModelParams p = linear_params(basis, alpha, beta);
    SimConfig cfg;
    cfg.dt = dt;
    cfg.horizon = dt;
    State s{0.0, basis.zero_vector(), basis.zero_field()};
    s.u.c1.at(2, 1) = 0.3;
    s.u.c2.at(2, 1) = -1.1;
    NoiseDraw draw;
    draw.wiener = basis.zero_vector();
    const State out = step(basis, s, draw, no_noise(basis), p, cfg);

    const double a = dt * alpha * basis.lambda(2, 1);
    const double b = dt * beta;
    const double det = (1.0 + a) * (1.0 + a) + b * b;
    const double e1 = ((1.0 + a) * 0.3 + b * (-1.1)) / det;
    const double e2 = (-b * 0.3 + (1.0 + a) * (-1.1)) / det;
    CHECK(out.u.c1.at(2, 1) == doctest::Approx(e1).epsilon(1e-14));
    CHECK(out.u.c2.at(2, 1) == doctest::Approx(e2).epsilon(1e-14));

    // the pure rotation block is a contraction
    const double in_norm = std::hypot(0.3, -1.1);
    const double out_norm = std::hypot(out.u.c1.at(2, 1), out.u.c2.at(2, 1));
    CHECK(out_norm <= in_norm);
}

TEST_CASE("simulate is bitwise deterministic in the seed") {
    SpectralBasis basis(square(3, 9));
    ModelParams p = full_params(basis);
    SimConfig cfg;
    cfg.dt = 1e-2;
    cfg.horizon = 0.3;
    cfg.seed = 99;
    VectorModal u0 = basis.zero_vector();
    u0.c1.at(1, 1) = 1.0;
    const TrajectoryRecord a = simulate(basis, u0, basis.zero_field(), p, small_noise(basis), cfg);
    const TrajectoryRecord b = simulate(basis, u0, basis.zero_field(), p, small_noise(basis), cfg);
    REQUIRE(a.energies.size() == b.energies.size());
    for (std::size_t i = 0; i < a.energies.size(); ++i) {
        CHECK(a.energies[i].u_l2_sq == b.energies[i].u_l2_sq);
        CHECK(a.energies[i].wiener_channel == b.energies[i].wiener_channel);
        CHECK(a.energies[i].jump_channel == b.energies[i].jump_channel);
    }
    for (std::size_t i = 0; i < a.final_state().u.c1.c.size(); ++i)
        CHECK(a.final_state().u.c1.c[i] == b.final_state().u.c1.c[i]);
    CHECK(a.jump_counts == b.jump_counts);
}

TEST_CASE("no step grows the velocity in the pure-diffusion configuration") {
    SpectralBasis basis(square(4, 11));
    ModelParams p = linear_params(basis, 0.6, 0.8);
    SimConfig cfg;
    cfg.dt = 5e-3;
    cfg.horizon = 0.5;
    Rng rng = Rng::from_seed(12);
    const VectorModal u0 = random_vector_modal(rng, 4, 4);
    const TrajectoryRecord traj =
        simulate(basis, u0, basis.zero_field(), p, no_noise(basis), cfg);
    for (std::size_t m = 1; m < traj.energies.size(); ++m)
        CHECK(traj.energies[m].u_l2_sq <= traj.energies[m - 1].u_l2_sq + 1e-14);
}

TEST_CASE("discrete energy step inequality of the implicit scheme") {
    SpectralBasis basis(square(3, 9));
    ModelParams p = full_params(basis);
    SimConfig cfg;
    cfg.dt = 1e-2;
    cfg.horizon = 0.1;
    Rng rng = Rng::from_seed(9);
    State s{0.0, random_vector_modal(rng, 3, 3), basis.synthesize(random_modal(rng, 3, 3))};
    NoiseDraw draw;
    draw.wiener = basis.zero_vector();
    for (int m = 0; m < 10; ++m) {
        // E = -B(u) - G(z) + f evaluated like the step does
        VectorModal explicit_terms = apply_B(basis, s.u, s.t, p);
        scale(explicit_terms, -1.0);
        axpy(-1.0, pressure_gradient(basis, s.zhat, p), explicit_terms);
        const State next = step(basis, s, draw, no_noise(basis), p, cfg);
        const double lhs = dot(next.u, next.u) +
                           2.0 * cfg.dt * p.alpha() * std::pow(basis.norm(next.u, Norm::H10), 2);
        const double rhs =
            dot(s.u, s.u) + 2.0 * cfg.dt * dot(explicit_terms, next.u);
        CHECK(lhs <= rhs + 1e-8);
        s = next;
    }
}

TEST_CASE("elevation update is linear in the velocity") {
    SpectralBasis basis(square(3, 9));
    ModelParams p = full_params(basis);
    Rng rng = Rng::from_seed(14);
    const VectorModal u = random_vector_modal(rng, 3, 3);
    VectorModal u2 = u;
    scale(u2, 2.0);
    const ScalarField f1 = divergence_flux(basis, u, p);
    const ScalarField f2 = divergence_flux(basis, u2, p);
    for (std::size_t i = 0; i < f1.v.size(); ++i) CHECK(f2.v[i] == 2.0 * f1.v[i]);
}

TEST_CASE("elevation update switch changes which velocity drives z") {
    SpectralBasis basis(square(2, 7));
    ModelParams p = full_params(basis);
    SimConfig cfg;
    cfg.dt = 0.05;
    cfg.horizon = 0.05;
    State s{0.0, basis.zero_vector(), basis.zero_field()};
    s.u.c1.at(1, 1) = 1.0;
    NoiseDraw draw;
    draw.wiener = basis.zero_vector();
    const State implicit_z = step(basis, s, draw, no_noise(basis), p, cfg);
    cfg.elevation_update = SimConfig::ElevationUpdate::explicit_velocity;
    const State explicit_z = step(basis, s, draw, no_noise(basis), p, cfg);
    double diff = 0.0;
    for (std::size_t i = 0; i < implicit_z.zhat.v.size(); ++i)
        diff = std::max(diff, std::abs(implicit_z.zhat.v[i] - explicit_z.zhat.v[i]));
    CHECK(diff > 0.0);
}

TEST_CASE("divergence raises an error carrying the step index and partial path") {
    SpectralBasis basis(square(2, 7));
    Forcing forcing;
    forcing.amplitude = basis.zero_vector();
    forcing.amplitude.c1.at(1, 1) = 1e16;
    ModelParams p(basis, {1.0, 0.0, 0.0, 0.0}, constant_depth(basis, 1.0), {}, forcing);
    SimConfig cfg;
    cfg.dt = 1.0;
    cfg.horizon = 3.0;
    bool thrown = false;
    try {
        simulate(basis, basis.zero_vector(), basis.zero_field(), p, no_noise(basis), cfg);
    } catch (const DivergenceError& e) {
        thrown = true;
        CHECK(e.step_index == 0);
        REQUIRE(e.partial != nullptr);
        CHECK(e.partial->energies.size() == 1);  // only the initial sample
    }
    CHECK(thrown);
}

TEST_CASE("common-noise pairs: identical data stay identical, linear difference is noise-free") {
    SpectralBasis basis(square(3, 9));
    SimConfig cfg;
    cfg.dt = 1e-2;
    cfg.horizon = 0.2;
    cfg.seed = 7;
    Rng rng = Rng::from_seed(2);
    const VectorModal u0 = random_vector_modal(rng, 3, 3);

    ModelParams p = full_params(basis);
    const auto [a, b] =
        simulate_pair(basis, u0, u0, basis.zero_field(), p, small_noise(basis), cfg);
    for (std::size_t i = 0; i < a.final_state().u.c1.c.size(); ++i)
        CHECK(a.final_state().u.c1.c[i] == b.final_state().u.c1.c[i]);

    // gamma = 0 and additive noise: the difference follows the linear flow
    // regardless of the noise realization.
    ModelParams lin = linear_params(basis, 1.0, 0.7);
    VectorModal delta = basis.zero_vector();
    delta.c1.at(2, 2) = 1e-3;
    VectorModal u0b = u0;
    axpy(1.0, delta, u0b);
    for (std::uint64_t seed : {11ULL, 22ULL}) {
        cfg.seed = seed;
        const auto [pa, pb] =
            simulate_pair(basis, u0, u0b, basis.zero_field(), lin, small_noise(basis), cfg);
        VectorModal w = pb.final_state().u;
        axpy(-1.0, pa.final_state().u, w);
        // per step the difference contracts by the scaled-rotation factor
        const double lam = basis.lambda(2, 2);
        const double a = 1.0 + cfg.dt * lam, b2 = cfg.dt * 0.7;
        const double expected = 1e-3 * std::pow(a * a + b2 * b2, -10.0);
        CHECK(basis.norm(w, Norm::L2) == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("refinement: identical levels coincide, dt halving converges at order one") {
    const DomainSpec fine = square(4, 11);
    auto params_const_depth = [](const SpectralBasis& b) {
        ScalarField h(b.spec().grid_x1, b.spec().grid_x2);
        for (double& v : h.v) v = 1.0;
        return ModelParams(b, {1.0, 0.4, 0.0, 0.0}, std::move(h), {}, {});
    };
    auto noise_for = [](const SpectralBasis& b) {
        NoiseModel n;
        n.wiener = WienerSpec::power_spectrum(b, 0.0, 2.0, 0.0, 0.0);
        n.jumps.shape = b.zero_vector();
        return n;
    };
    SimConfig base;
    base.dt = 1e-2;
    base.horizon = 0.4;
    base.seed = 5;
    SpectralBasis fb(fine);
    Rng rng = Rng::from_seed(10);
    const VectorModal u0 = random_vector_modal(rng, 4, 4);
    const ScalarModal z0(4, 4);

    const auto same = refinement_study(u0, z0, params_const_depth, noise_for, base, fine,
                                       {4, 4}, {1e-2, 1e-2});
    REQUIRE(same.size() == 1);
    CHECK(same[0].distance == 0.0);

    // no-noise linear case against dt halving: order ~1 means consecutive
    // distances to the next-finer level shrink by about 2
    const auto ladder = refinement_study(u0, z0, params_const_depth, noise_for, base, fine,
                                         {4}, {4e-2, 2e-2, 1e-2, 5e-3});
    REQUIRE(ladder.size() == 3);
    CHECK(ladder[0].distance / ladder[1].distance == doctest::Approx(2.0).epsilon(0.3));
    CHECK(ladder[1].distance / ladder[2].distance == doctest::Approx(2.0).epsilon(0.3));

    CHECK_THROWS_AS(refinement_study(u0, z0, params_const_depth, noise_for, base, fine,
                                     {4, 2}, {1e-2}),
                    ContractError);  // modes must ascend
    CHECK_THROWS_AS(refinement_study(u0, z0, params_const_depth, noise_for, base, fine,
                                     {2, 3, 4}, {4e-2, 2e-2}),
                    ContractError);  // incompatible level lists
}

TEST_CASE("refinement with jumps: identical levels still coincide, halving converges") {
    const DomainSpec fine = square(3, 9);
    auto params_const_depth = [](const SpectralBasis& b) {
        ScalarField h(b.spec().grid_x1, b.spec().grid_x2);
        for (double& v : h.v) v = 1.0;
        return ModelParams(b, {1.0, 0.4, 1.0, 0.1}, std::move(h), {}, {});
    };
    auto noise_for = [](const SpectralBasis& b) {
        NoiseModel n;
        n.wiener = WienerSpec::power_spectrum(b, 0.02, 2.0, 1.0, 0.0);
        n.jumps.total_intensity = 8.0;
        n.jumps.marks.kind = MarkDistribution::Kind::uniform;
        n.jumps.marks.lower = -1.0;
        n.jumps.marks.upper = 1.0;
        n.jumps.amp_add = 0.1;
        n.jumps.amp_mult = 0.05;
        n.jumps.shape = b.zero_vector();
        n.jumps.shape.c1.at(1, 1) = 1.0;
        return n;
    };
    SimConfig base;
    base.dt = 2e-2;
    base.horizon = 0.4;
    base.seed = 21;
    SpectralBasis fb(fine);
    Rng rng = Rng::from_seed(6);
    const VectorModal u0 = random_vector_modal(rng, 3, 3);
    const ScalarModal z0(3, 3);

    const auto same = refinement_study(u0, z0, params_const_depth, noise_for, base, fine,
                                       {3, 3}, {1e-2, 1e-2});
    REQUIRE(same.size() == 1);
    CHECK(same[0].distance == 0.0);

    const auto ladder = refinement_study(u0, z0, params_const_depth, noise_for, base, fine,
                                         {3}, {2e-2, 1e-2, 5e-3, 2.5e-3});
    REQUIRE(ladder.size() == 3);
    // jump-driven error still contracts with dt, roughly first order
    CHECK(ladder[0].distance > ladder[1].distance);
    CHECK(ladder[1].distance > ladder[2].distance);
}

TEST_CASE("mode refinement distances shrink for smooth data") {
    const DomainSpec fine = square(8, 19);
    auto params_const_depth = [](const SpectralBasis& b) {
        ScalarField h(b.spec().grid_x1, b.spec().grid_x2);
        for (double& v : h.v) v = 1.0;
        return ModelParams(b, {0.5, 0.4, 1.0, 0.1}, std::move(h), {}, {});
    };
    auto noise_for = [](const SpectralBasis& b) {
        NoiseModel n;
        n.wiener = WienerSpec::power_spectrum(b, 0.01, 2.0, 1.0, 0.0);
        n.jumps.shape = b.zero_vector();
        return n;
    };
    SimConfig base;
    base.dt = 1e-2;
    base.horizon = 0.2;
    base.seed = 8;
    SpectralBasis fb(fine);
    // smooth initial data: fast modal decay
    VectorModal u0 = fb.zero_vector();
    for (int j = 1; j <= 8; ++j)
        for (int k = 1; k <= 8; ++k) {
            u0.c1.at(j, k) = std::pow(fb.lambda(j, k), -2.0);
            u0.c2.at(j, k) = 0.5 * std::pow(fb.lambda(j, k), -2.0);
        }
    const ScalarModal z0(8, 8);
    const auto rows = refinement_study(u0, z0, params_const_depth, noise_for, base, fine,
                                       {2, 4, 8}, {1e-2});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].distance >= 1.5 * rows[1].distance);
}

TEST_CASE("ensemble seeds derive from the master and are thread invariant") {
    SpectralBasis basis(square(2, 7));
    ModelParams p = full_params(basis);
    SimConfig cfg;
    cfg.dt = 1e-2;
    cfg.horizon = 0.1;
    cfg.seed = 51;
    VectorModal u0 = basis.zero_vector();
    u0.c1.at(1, 1) = 0.5;
    const auto serial =
        simulate_ensemble(basis, u0, basis.zero_field(), p, small_noise(basis), cfg, 6, 1);
    const auto threaded =
        simulate_ensemble(basis, u0, basis.zero_field(), p, small_noise(basis), cfg, 6, 2);
    REQUIRE(serial.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(serial[i].seed == Rng::path_seed(51, i));
        CHECK(serial[i].final_state().u.c1.c == threaded[i].final_state().u.c1.c);
    }
}

}  // TEST_SUITE
