#include <cmath>

#include <doctest.h>

#include "tidecore/control.hpp"
#include "tidecore/rng.hpp"

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

NoiseModel no_noise(const SpectralBasis& basis) {
    NoiseModel n;
    n.wiener = WienerSpec::power_spectrum(basis, 0.0, 2.0, 0.0, 0.0);
    n.jumps.shape = basis.zero_vector();
    return n;
}

NoiseModel additive_noise(const SpectralBasis& basis, double q0) {
    NoiseModel n;
    n.wiener = WienerSpec::power_spectrum(basis, q0, 2.0, 1.0, 0.0);
    n.jumps.total_intensity = 1.0;
    n.jumps.marks.kind = MarkDistribution::Kind::uniform;
    n.jumps.marks.lower = -1.0;
    n.jumps.marks.upper = 1.0;
    n.jumps.amp_add = 0.02;
    n.jumps.shape = basis.zero_vector();
    n.jumps.shape.c1.at(1, 1) = 1.0;
    return n;
}

// Pure-decay setup: gamma = 0, beta = 0, g = 0 so a 1-mode problem is exactly
// the scalar recursion a_{m+1} = a_m / (1 + dt alpha lambda).
ControlProblem decay_problem(const SpectralBasis& basis, const CostSpec& cost,
                             const NoiseModel& noise, int ensemble, double bound = 25.0) {
    ModelParams params(basis, {1.0, 0.0, 0.0, 0.0}, constant_depth(basis, 1.0), {}, {});
    SimConfig sim;
    sim.dt = 1e-2;
    sim.horizon = 0.5;
    sim.seed = 4321;
    return ControlProblem(basis, basis.zero_vector(), basis.zero_field(), 1, bound, cost,
                          std::move(params), noise, sim, ensemble, sim.seed);
}

}  // namespace

TEST_SUITE("control") {

TEST_CASE("cost spec validation enforces coercivity") {
    CostSpec ok;
    ok.w_reg = 0.5;
    CHECK_NOTHROW(ok.validate());
    CostSpec bad;
    bad.w_reg = 0.0;
    CHECK_THROWS_AS(bad.validate(), ContractError);
    CostSpec neg;
    neg.w_track = -1.0;
    CHECK_THROWS_AS(neg.validate(), ContractError);
}

TEST_CASE("pure regularization cost is exact and minimized at zero") {
    SpectralBasis basis(square(2, 7));
    CostSpec cost;
    cost.w_track = 0.0;
    cost.w_reg = 0.3;
    const ControlProblem prob = decay_problem(basis, cost, no_noise(basis), 1);

    const std::vector<double> u{0.8, -0.6};
    const CostValue v = evaluate_cost(basis, u, prob);
    CHECK(v.j_hat == doctest::Approx(0.3 * (0.64 + 0.36) * 0.5).epsilon(1e-14));
    CHECK(v.stderr_mean == 0.0);

    const OptimizationTrace trace = optimize(basis, prob, OptimizeMethod::fd_gradient, 50);
    CHECK(std::hypot(trace.best_control[0], trace.best_control[1]) <= 1e-6);
}

TEST_CASE("self-tracking reference yields zero cost at zero control") {
    SpectralBasis basis(square(2, 7));
    ModelParams params(basis, {1.0, 0.0, 0.0, 0.0}, constant_depth(basis, 1.0), {}, {});
    SimConfig sim;
    sim.dt = 1e-2;
    sim.horizon = 0.5;
    sim.record_stride = 1;
    VectorModal u0 = basis.zero_vector();
    u0.c1.at(1, 1) = 1.3;
    const NoiseModel off = no_noise(basis);
    const TrajectoryRecord ref = simulate(basis, u0, basis.zero_field(), params, off, sim);

    CostSpec cost;
    cost.w_track = 1.0;
    cost.w_reg = 0.1;
    for (const State& s : ref.states) cost.u_ref.push_back(s.u);
    ControlProblem prob(basis, u0, basis.zero_field(), 1, 10.0, cost, params, off, sim, 1, 1);
    const CostValue v = evaluate_cost(basis, std::vector<double>{0.0, 0.0}, prob);
    CHECK(v.j_hat == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("cost evaluation is bitwise deterministic under common seeds") {
    SpectralBasis basis(square(2, 7));
    CostSpec cost;
    cost.w_track = 1.0;
    cost.w_reg = 0.05;
    const ControlProblem prob = decay_problem(basis, cost, additive_noise(basis, 0.05), 6);
    const std::vector<double> u{0.4, 0.2};
    const CostValue a = evaluate_cost(basis, u, prob);
    const CostValue b = evaluate_cost(basis, u, prob);
    CHECK(a.j_hat == b.j_hat);
    CHECK(a.stderr_mean == b.stderr_mean);
    CHECK(prob.seed_set().size() == 6);
}

TEST_CASE("projection clamps the control onto the admissible ball") {
    SpectralBasis basis(square(2, 7));
    CostSpec cost;
    cost.w_reg = 1.0;
    const ControlProblem prob = decay_problem(basis, cost, no_noise(basis), 1, 2.0);
    const auto projected = prob.project_onto_bound({3.0, 4.0});
    CHECK(prob.control_l2_sq(projected) == doctest::Approx(2.0).epsilon(1e-12));
    const auto inside = prob.project_onto_bound({0.3, 0.4});
    CHECK(inside[0] == 0.3);
    CHECK(inside[1] == 0.4);
}

TEST_CASE("moving mass between u0 and the control changes only the regularizer") {
    SpectralBasis basis(square(2, 7));
    ModelParams params(basis, {1.0, 0.5, 1.0, 0.1}, constant_depth(basis, 1.0), {}, {});
    SimConfig sim;
    sim.dt = 1e-2;
    sim.horizon = 0.3;
    sim.seed = 9;
    const NoiseModel noise = additive_noise(basis, 0.02);
    CostSpec cost;
    cost.w_track = 1.0;
    cost.w_reg = 0.4;

    VectorModal u0 = basis.zero_vector();
    u0.c1.at(1, 1) = 0.5;
    VectorModal u0_shifted = u0;
    u0_shifted.c1.at(1, 1) += 0.25;

    ControlProblem base(basis, u0, basis.zero_field(), 1, 25.0, cost, params, noise, sim, 4, 5);
    ControlProblem shifted(basis, u0_shifted, basis.zero_field(), 1, 25.0, cost, params, noise,
                           sim, 4, 5);
    // u(0) = 0.5 + (c + 0.25) in both; tracking parts coincide exactly.
    const double c = 0.4;
    const CostValue ja = evaluate_cost(basis, {c + 0.25, 0.0}, base);
    const CostValue jb = evaluate_cost(basis, {c, 0.0}, shifted);
    const double reg_a = cost.w_reg * (c + 0.25) * (c + 0.25) * sim.horizon;
    const double reg_b = cost.w_reg * c * c * sim.horizon;
    CHECK(ja.j_hat - reg_a == doctest::Approx(jb.j_hat - reg_b).epsilon(1e-12));
}

TEST_CASE("admissibility checks pass for coercive costs") {
    SpectralBasis basis(square(3, 9));
    CostSpec cost;
    cost.w_track = 0.7;
    cost.w_reg = 0.2;
    const auto reports = check_admissibility(basis, cost, 200, 5);
    REQUIRE(reports.size() == 2);
    for (const OperatorReport& r : reports) {
        INFO(r.name);
        CHECK(r.satisfied);
    }
}

TEST_CASE("one-mode tracking recovery matches a brute-force grid search") {
    SpectralBasis basis(square(2, 7));
    // target: decay trajectory of amplitude 1.5 in mode (1,1), component 1
    ModelParams params(basis, {1.0, 0.0, 0.0, 0.0}, constant_depth(basis, 1.0), {}, {});
    SimConfig sim;
    sim.dt = 1e-2;
    sim.horizon = 0.5;
    sim.record_stride = 1;
    const NoiseModel off = no_noise(basis);
    VectorModal target0 = basis.zero_vector();
    target0.c1.at(1, 1) = 1.5;
    const TrajectoryRecord ref = simulate(basis, target0, basis.zero_field(), params, off, sim);

    CostSpec cost;
    cost.w_track = 1.0;
    cost.w_reg = 0.05;
    for (const State& s : ref.states) cost.u_ref.push_back(s.u);
    ControlProblem prob(basis, basis.zero_vector(), basis.zero_field(), 1, 25.0, cost, params,
                        off, sim, 1, 1);

    // brute force over the first coefficient, second fixed at 0
    double best_c = 0.0, best_j = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 2000; ++i) {
        const double c = -2.0 + 4.0 * i / 2000.0;
        const double j = evaluate_cost(basis, {c, 0.0}, prob).j_hat;
        if (j < best_j) {
            best_j = j;
            best_c = c;
        }
    }

    for (OptimizeMethod method :
         {OptimizeMethod::fd_gradient, OptimizeMethod::coordinate_search}) {
        const OptimizationTrace trace = optimize(basis, prob, method, 400);
        CHECK(std::abs(trace.best_control[0] - best_c) <= 1e-3);
        CHECK(std::abs(trace.best_control[1]) <= 1e-3);
        CHECK(trace.best_j <= best_j + 1e-9);
        for (std::size_t i = 1; i < trace.iterates.size(); ++i)
            CHECK(trace.iterates[i].j_value <= trace.iterates[i - 1].j_value);
    }
}

TEST_CASE("noisy optimization keeps the accepted cost monotone and beats zero") {
    SpectralBasis basis(square(2, 7));
    ModelParams params(basis, {1.0, 0.3, 1.0, 0.1}, constant_depth(basis, 1.0), {}, {});
    SimConfig sim;
    sim.dt = 1e-2;
    sim.horizon = 0.3;
    sim.seed = 31;
    const NoiseModel noise = additive_noise(basis, 0.05);
    VectorModal target0 = basis.zero_vector();
    target0.c1.at(1, 1) = 1.0;
    NoiseModel off = no_noise(basis);
    SimConfig ref_sim = sim;
    ref_sim.record_stride = 1;
    const TrajectoryRecord ref =
        simulate(basis, target0, basis.zero_field(), params, off, ref_sim);
    CostSpec cost;
    cost.w_track = 1.0;
    cost.w_reg = 0.02;
    for (const State& s : ref.states) cost.u_ref.push_back(s.u);
    ControlProblem prob(basis, basis.zero_vector(), basis.zero_field(), 2, 25.0, cost, params,
                        noise, sim, 4, 77);

    const CostValue at_zero =
        evaluate_cost(basis, std::vector<double>(prob.dimension(), 0.0), prob);
    const OptimizationTrace trace = optimize(basis, prob, OptimizeMethod::coordinate_search, 120);
    CHECK(trace.best_j <= at_zero.j_hat);
    for (std::size_t i = 1; i < trace.iterates.size(); ++i)
        CHECK(trace.iterates[i].j_value <= trace.iterates[i - 1].j_value);
    CHECK(trace.evaluations <= 120);
}

TEST_CASE("optimizer budget exhaustion returns the best so far") {
    SpectralBasis basis(square(2, 7));
    CostSpec cost;
    cost.w_track = 0.0;
    cost.w_reg = 1.0;
    const ControlProblem prob = decay_problem(basis, cost, no_noise(basis), 1);
    const OptimizationTrace trace = optimize(basis, prob, OptimizeMethod::fd_gradient, 3);
    CHECK(trace.budget_exhausted);
    CHECK(trace.evaluations <= 3);
    CHECK(!trace.iterates.empty());
    CHECK_THROWS_AS(optimize(basis, prob, OptimizeMethod::fd_gradient, 0), ContractError);
}

}  // TEST_SUITE
