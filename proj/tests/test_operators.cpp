#include <cmath>
#include <numbers>

#include <doctest.h>

#include "tidecore/operators.hpp"
#include "tidecore/rng.hpp"

using namespace tidal;

namespace {

constexpr double kPi = std::numbers::pi;

DomainSpec unit_square(int modes, int grid) {
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

ModelParams make_params(const SpectralBasis& basis, ModelCoefficients coeffs,
                        double depth_value = 1.0, BackgroundFlow flow = {},
                        Forcing forcing = {}) {
    return ModelParams(basis, coeffs, constant_depth(basis, depth_value), std::move(flow),
                       std::move(forcing));
}

}  // namespace

TEST_SUITE("operators") {

TEST_CASE("model params derive depth bounds and gamma") {
    SpectralBasis basis(unit_square(3, 9));
    ScalarField h = basis.zero_field();
    for (int i1 = 0; i1 < 9; ++i1)
        for (int i2 = 0; i2 < 9; ++i2)
            h.at(i1, i2) = 1.0 + 0.5 * basis.grid_x1_at(i1);
    ModelParams p(basis, {1.0, 0.5, 2.0, 0.3}, h, {}, {});
    CHECK(p.depth_min() == doctest::Approx(1.0));
    CHECK(p.depth_max() == doctest::Approx(1.5));
    CHECK(p.grad_depth_max() == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(p.gamma_sup() == doctest::Approx(0.3));
    CHECK(p.gamma().at(0, 0) == doctest::Approx(0.3));

    ScalarField bad = constant_depth(basis, 1.0);
    bad.at(4, 4) = 0.0;
    CHECK_THROWS_AS(ModelParams(basis, {1.0, 0.5, 2.0, 0.3}, bad, {}, {}), ContractError);
}

TEST_CASE("apply_A diagonal action and zero") {
    SpectralBasis basis(unit_square(3, 9));
    ModelParams p = make_params(basis, {1.0, 0.0, 1.5, 0.05});
    VectorModal u = basis.zero_vector();
    u.c1.at(1, 1) = 1.0;
    const VectorModal out = apply_A(basis, u, p);
    CHECK(out.c1.at(1, 1) == doctest::Approx(2.0 * kPi * kPi).epsilon(1e-14));
    CHECK(out.c2.at(1, 1) == 0.0);
    const VectorModal zero = apply_A(basis, basis.zero_vector(), p);
    CHECK(basis.norm(zero, Norm::L2) == 0.0);
}

TEST_CASE("apply_A with rotation couples the components") {
    SpectralBasis basis(unit_square(2, 7));
    ModelParams p = make_params(basis, {0.7, 1.3, 1.5, 0.05});
    VectorModal u = basis.zero_vector();
    u.c1.at(2, 1) = 2.0;
    u.c2.at(2, 1) = -1.0;
    const double lam = basis.lambda(2, 1);
    const VectorModal out = apply_A(basis, u, p);
    CHECK(out.c1.at(2, 1) == doctest::Approx(0.7 * lam * 2.0 - 1.3 * (-1.0)));
    CHECK(out.c2.at(2, 1) == doctest::Approx(1.3 * 2.0 + 0.7 * lam * (-1.0)));
}

TEST_CASE("bilinear form matches the operator pairing and is coercive") {
    SpectralBasis basis(unit_square(5, 13));
    ModelParams p = make_params(basis, {0.8, 0.6, 1.5, 0.05});
    Rng rng = Rng::from_seed(3);
    for (int rep = 0; rep < 100; ++rep) {
        // smooth scaling keeps the sums O(1) so absolute tolerances are honest
        VectorModal u = random_vector_modal(rng, 5, 5);
        VectorModal v = random_vector_modal(rng, 5, 5);
        for (int j = 1; j <= 5; ++j)
            for (int k = 1; k <= 5; ++k) {
                const double lam = basis.lambda(j, k);
                u.c1.at(j, k) /= lam;
                u.c2.at(j, k) /= lam;
                v.c1.at(j, k) /= lam;
                v.c2.at(j, k) /= lam;
            }
        const double pairing = dot(apply_A(basis, u, p), v);
        const double form = bilinear_a(basis, u, v, p);
        CHECK(std::abs(pairing - form) < 1e-10);

        const double uh = basis.norm(u, Norm::H10), vh = basis.norm(v, Norm::H10);
        CHECK(std::abs(bilinear_a(basis, u, u, p) - p.alpha() * uh * uh) <= 1e-12 * uh * uh);
        CHECK(std::abs(form) <= p.continuity_c1() * uh * vh + 1e-10);
        CHECK(bilinear_a(basis, u, basis.zero_vector(), p) == 0.0);
    }
}

TEST_CASE("rotation part cancels exactly in a(u,u)") {
    SpectralBasis basis(unit_square(4, 11));
    ModelParams with_rot = make_params(basis, {1.0, 7.3, 1.5, 0.05});
    ModelParams no_rot = make_params(basis, {1.0, 0.0, 1.5, 0.05});
    Rng rng = Rng::from_seed(5);
    for (int rep = 0; rep < 50; ++rep) {
        const VectorModal u = random_vector_modal(rng, 4, 4);
        CHECK(bilinear_a(basis, u, u, with_rot) == bilinear_a(basis, u, u, no_rot));
    }
}

TEST_CASE("friction pointwise value") {
    const auto v = friction_value(2.0, 3.0, 4.0);
    CHECK(v[0] == doctest::Approx(30.0));
    CHECK(v[1] == doctest::Approx(40.0));

    // through the nodal path: gamma = r/h = 2, w0 = (3,4) uniform
    SpectralBasis basis(unit_square(2, 7));
    BackgroundFlow flow;
    flow.mean = {3.0, 4.0};
    ModelParams p(basis, {1.0, 0.0, 1.5, 2.0}, constant_depth(basis, 1.0), flow, {});
    const VectorField nodal = friction_nodal(basis, basis.zero_vector(), 0.0, p);
    CHECK(nodal.c1.at(3, 3) == doctest::Approx(30.0));
    CHECK(nodal.c2.at(3, 3) == doctest::Approx(40.0));
}

TEST_CASE("B vanishes when u cancels the background flow") {
    SpectralBasis basis(unit_square(3, 9));
    BackgroundFlow flow;
    flow.profile = basis.zero_vector();
    flow.profile.c1.at(1, 2) = 0.8;
    flow.profile.c2.at(2, 1) = -0.4;
    ModelParams p(basis, {1.0, 0.0, 1.5, 0.2}, constant_depth(basis, 1.0), flow, {});
    VectorModal u = flow.profile;
    scale(u, -1.0);
    const VectorModal b = apply_B(basis, u, 0.0, p);
    CHECK(basis.norm(b, Norm::L2) < 1e-12);
}

TEST_CASE("B is monotone on sampled pairs") {
    SpectralBasis basis(unit_square(4, 11));
    BackgroundFlow flow;
    flow.mean = {0.3, -0.2};
    ModelParams p(basis, {1.0, 0.5, 1.5, 0.4}, constant_depth(basis, 0.8), flow, {});
    const OperatorReport rep = monotonicity_check(basis, p, 1000, 99);
    CHECK(rep.satisfied);
    CHECK(rep.lhs <= 1e-9);  // lhs is -min pairing
}

TEST_CASE("pressure gradient closed form and duality") {
    SpectralBasis basis(unit_square(2, 41));
    ModelParams p = make_params(basis, {1.0, 0.0, 1.5, 0.05});

    CHECK(basis.norm(pressure_gradient(basis, basis.zero_field(), p), Norm::L2) == 0.0);

    ScalarModal zc = basis.zero_scalar();
    zc.at(1, 1) = 1.0;
    const ScalarField z = basis.synthesize(zc);
    const VectorModal g = pressure_gradient(basis, z, p);
    // odd symmetry kills the (1,1) x1 component
    CHECK(std::abs(g.c1.at(1, 1)) < 1e-10);
    // closed form: -g int phi_11 d1 phi_21 = 8 g / 3 on the unit square
    const double expected = 8.0 * p.gravity() / 3.0;
    CHECK(g.c1.at(2, 1) == doctest::Approx(expected).epsilon(2e-3));

    // pairing consistency against every basis vector, both components
    for (int j = 1; j <= 2; ++j)
        for (int k = 1; k <= 2; ++k) {
            ScalarModal comp = basis.zero_scalar();
            comp.at(j, k) = 1.0;
            const ScalarField div1 = basis.synthesize_dx1(comp);
            const ScalarField div2 = basis.synthesize_dx2(comp);
            ScalarField prod1(div1.n1, div1.n2), prod2(div2.n1, div2.n2);
            for (std::size_t i = 0; i < prod1.v.size(); ++i) {
                prod1.v[i] = z.v[i] * div1.v[i];
                prod2.v[i] = z.v[i] * div2.v[i];
            }
            CHECK(g.c1.at(j, k) ==
                  doctest::Approx(-p.gravity() * basis.integral(prod1)).epsilon(1e-10));
            CHECK(g.c2.at(j, k) ==
                  doctest::Approx(-p.gravity() * basis.integral(prod2)).epsilon(1e-10));
        }
}

TEST_CASE("pressure gradient dual norm bound") {
    SpectralBasis basis(unit_square(5, 13));
    ModelParams p = make_params(basis, {1.0, 0.0, 2.5, 0.05});
    Rng rng = Rng::from_seed(21);
    for (int rep = 0; rep < 100; ++rep) {
        const ScalarField z = basis.synthesize(random_modal(rng, 5, 5));
        const VectorModal g = pressure_gradient(basis, z, p);
        CHECK(basis.norm(g, Norm::Hminus1) <=
              p.gravity() * basis.norm(z, Norm::L2) + 1e-8);
    }
}

TEST_CASE("divergence flux: zero, linearity in h, closed form") {
    SpectralBasis basis(unit_square(2, 41));
    ModelParams p1 = make_params(basis, {1.0, 0.0, 1.5, 0.05}, 1.0);
    ModelParams p3 = make_params(basis, {1.0, 0.0, 1.5, 0.05}, 3.0);

    CHECK(basis.norm(divergence_flux(basis, basis.zero_vector(), p1), Norm::L2) == 0.0);

    VectorModal u = basis.zero_vector();
    u.c1.at(1, 1) = 1.0;
    const ScalarField d1 = divergence_flux(basis, u, p1);
    const ScalarField d3 = divergence_flux(basis, u, p3);
    for (std::size_t i = 0; i < d1.v.size(); ++i)
        CHECK(d3.v[i] == doctest::Approx(3.0 * d1.v[i]).epsilon(1e-12));

    // at (0.25, 0.5): d1 phi_11 = 2 pi cos(pi/4) sin(pi/2)
    const int i1 = 10, i2 = 20;  // grid 41 points, spacing 1/40
    CHECK(basis.grid_x1_at(i1) == doctest::Approx(0.25));
    CHECK(d1.at(i1, i2) == doctest::Approx(4.442882938158366).epsilon(1e-12));
}

TEST_CASE("divergence flux picks up the depth gradient") {
    SpectralBasis basis(unit_square(2, 21));
    ScalarField h = basis.zero_field();
    for (int i1 = 0; i1 < 21; ++i1)
        for (int i2 = 0; i2 < 21; ++i2) h.at(i1, i2) = 1.0 + 0.25 * basis.grid_x1_at(i1);
    ModelParams p(basis, {1.0, 0.0, 1.5, 0.05}, h, {}, {});
    VectorModal u = basis.zero_vector();
    u.c1.at(1, 1) = 1.0;
    const ScalarField flux = divergence_flux(basis, u, p);
    // Div(hu) = h d1(u1) + dh/dx1 u1; evaluate midgrid with closed forms.
    const double x1 = basis.grid_x1_at(5), x2 = basis.grid_x2_at(10);
    const double expected = (1.0 + 0.25 * x1) * 2.0 * kPi * std::cos(kPi * x1) *
                                std::sin(kPi * x2) +
                            0.25 * 2.0 * std::sin(kPi * x1) * std::sin(kPi * x2);
    CHECK(flux.at(5, 10) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("friction bounds hold on sampled states") {
    SpectralBasis basis(unit_square(4, 11));
    BackgroundFlow flow;
    flow.mean = {0.5, 0.1};
    ModelParams p(basis, {1.0, 0.5, 1.5, 0.25}, constant_depth(basis, 1.25), flow, {});
    const auto reports = b_bound_checks(basis, p, 500, 1234);
    REQUIRE(reports.size() == 2);
    for (const OperatorReport& r : reports) {
        INFO(r.name, " lhs=", r.lhs, " rhs=", r.rhs);
        CHECK(r.satisfied);
    }
    CHECK_THROWS_AS(b_bound_checks(basis, p, 0, 1), ContractError);
}

TEST_CASE("reports expose enough fields to recompute the verdict") {
    SpectralBasis basis(unit_square(3, 9));
    ModelParams p = make_params(basis, {1.0, 0.5, 1.5, 0.3});
    auto reports = b_bound_checks(basis, p, 100, 77);
    reports.push_back(monotonicity_check(basis, p, 100, 78));
    for (const OperatorReport& r : reports) {
        CHECK(r.satisfied == (r.lhs <= r.rhs + r.tolerance));
        CHECK(r.margin == r.rhs - r.lhs);
    }
}

TEST_CASE("e1 bound degenerates to zero at equal arguments") {
    SpectralBasis basis(unit_square(3, 9));
    ModelParams p = make_params(basis, {1.0, 0.0, 1.5, 0.3});
    Rng rng = Rng::from_seed(8);
    const VectorModal u = random_vector_modal(rng, 3, 3);
    const VectorField bu = friction_nodal(basis, u, 0.0, p);
    const VectorField bv = friction_nodal(basis, u, 0.0, p);
    double max_diff = 0.0;
    for (std::size_t i = 0; i < bu.c1.v.size(); ++i)
        max_diff = std::max(max_diff, std::abs(bu.c1.v[i] - bv.c1.v[i]) +
                                          std::abs(bu.c2.v[i] - bv.c2.v[i]));
    CHECK(max_diff == 0.0);
}

}  // TEST_SUITE
