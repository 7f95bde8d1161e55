#include "tidecore/operators.hpp"

#include <algorithm>

#include "tidecore/rng.hpp"

namespace tidal {

namespace {

// Centered differences inside, second-order one-sided at the boundary.
ScalarField finite_difference(const ScalarField& f, double h, bool along_x1) {
    ScalarField out(f.n1, f.n2);
    const int n1 = f.n1, n2 = f.n2;
    auto get = [&](int i1, int i2) { return f.at(i1, i2); };
    for (int i1 = 0; i1 < n1; ++i1)
        for (int i2 = 0; i2 < n2; ++i2) {
            const int i = along_x1 ? i1 : i2;
            const int n = along_x1 ? n1 : n2;
            auto shift = [&](int d) {
                return along_x1 ? get(i1 + d, i2) : get(i1, i2 + d);
            };
            double d;
            if (i == 0)
                d = (-3.0 * shift(0) + 4.0 * shift(1) - shift(2)) / (2.0 * h);
            else if (i == n - 1)
                d = (3.0 * shift(0) - 4.0 * shift(-1) + shift(-2)) / (2.0 * h);
            else
                d = (shift(1) - shift(-1)) / (2.0 * h);
            out.at(i1, i2) = d;
        }
    return out;
}

}  // namespace

ScalarField fd_dx1(const ScalarField& f, double spacing) {
    return finite_difference(f, spacing, true);
}

ScalarField fd_dx2(const ScalarField& f, double spacing) {
    return finite_difference(f, spacing, false);
}

ModelParams::ModelParams(const SpectralBasis& basis, ModelCoefficients coeffs, ScalarField depth,
                         BackgroundFlow flow, Forcing forcing)
    : coeffs_(coeffs), depth_(std::move(depth)), flow_(std::move(flow)),
      forcing_(std::move(forcing)) {
    const DomainSpec& spec = basis.spec();
    if (depth_.n1 != spec.grid_x1 || depth_.n2 != spec.grid_x2)
        throw DimensionError("ModelParams: depth grid does not match the domain");
    if (!(coeffs_.alpha > 0.0)) throw ContractError("ModelParams: alpha must be positive");
    // gravity and friction admit the degenerate value 0 so that the linear
    // verification configurations (no pressure coupling, no friction) exist.
    if (!(coeffs_.gravity >= 0.0)) throw ContractError("ModelParams: gravity must be >= 0");
    if (!(coeffs_.friction >= 0.0)) throw ContractError("ModelParams: friction must be >= 0");
    if (!all_finite(depth_)) throw ContractError("ModelParams: depth has non-finite values");

    depth_min_ = *std::min_element(depth_.v.begin(), depth_.v.end());
    depth_max_ = *std::max_element(depth_.v.begin(), depth_.v.end());
    if (!(depth_min_ > 0.0))
        throw ContractError("ModelParams: depth must be strictly positive everywhere");

    gamma_ = ScalarField(depth_.n1, depth_.n2);
    for (std::size_t i = 0; i < depth_.v.size(); ++i)
        gamma_.v[i] = coeffs_.friction / depth_.v[i];
    gamma_sup_ = coeffs_.friction / depth_min_;

    depth_dx1_ = finite_difference(depth_, basis.cell_dx1(), true);
    depth_dx2_ = finite_difference(depth_, basis.cell_dx2(), false);
    grad_depth_max_ = 0.0;
    for (std::size_t i = 0; i < depth_.v.size(); ++i) {
        const double g2 = depth_dx1_.v[i] * depth_dx1_.v[i] + depth_dx2_.v[i] * depth_dx2_.v[i];
        grad_depth_max_ = std::max(grad_depth_max_, std::sqrt(g2));
    }
    poincare_ = basis.poincare_constant();

    has_flow_ = !flow_.trivially_zero();
    if (has_flow_) {
        if (flow_.profile.c1.size() > 0 && (flow_.profile.c1.m1 != spec.modes_x1 ||
                                            flow_.profile.c1.m2 != spec.modes_x2))
            throw DimensionError("ModelParams: background flow profile shape mismatch");
        flow_base_ = VectorField(spec.grid_x1, spec.grid_x2);
        if (flow_.profile.c1.size() > 0) flow_base_ = basis.synthesize(flow_.profile);
        for (double& x : flow_base_.c1.v) x += flow_.mean[0];
        for (double& x : flow_base_.c2.v) x += flow_.mean[1];
        flow_l4_base_ = basis.norm(flow_base_, Norm::L4);
    }

    has_forcing_ = forcing_.amplitude.c1.size() > 0;
    if (has_forcing_) {
        if (forcing_.amplitude.c1.m1 != spec.modes_x1 || forcing_.amplitude.c1.m2 != spec.modes_x2)
            throw DimensionError("ModelParams: forcing amplitude shape mismatch");
        forcing_l2_base_ = basis.norm(forcing_.amplitude, Norm::L2);
    }
}

VectorModal ModelParams::forcing_at(double t, const SpectralBasis& basis) const {
    VectorModal f = basis.zero_vector();
    if (!has_forcing_) return f;
    const double fac = forcing_factor(t);
    axpy(fac, forcing_.amplitude, f);
    return f;
}

OperatorReport make_report(std::string name, double lhs, double rhs, double tolerance) {
    OperatorReport r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.tolerance = tolerance;
    r.margin = rhs - lhs;
    r.satisfied = lhs <= rhs + tolerance;
    return r;
}

VectorModal apply_A(const SpectralBasis& basis, const VectorModal& u, const ModelParams& p) {
    const int m1 = basis.spec().modes_x1, m2 = basis.spec().modes_x2;
    if (u.c1.m1 != m1 || u.c1.m2 != m2)
        throw DimensionError("apply_A: modal shape mismatch");
    VectorModal out(m1, m2);
    const double alpha = p.alpha(), beta = p.beta();
    for (int j = 1; j <= m1; ++j)
        for (int k = 1; k <= m2; ++k) {
            const double lam = basis.lambda(j, k);
            const double u1 = u.c1.at(j, k), u2 = u.c2.at(j, k);
            out.c1.at(j, k) = alpha * lam * u1 - beta * u2;
            out.c2.at(j, k) = beta * u1 + alpha * lam * u2;
        }
    return out;
}

double bilinear_a(const SpectralBasis& basis, const VectorModal& u, const VectorModal& v,
                  const ModelParams& p) {
    const int m1 = basis.spec().modes_x1, m2 = basis.spec().modes_x2;
    double grad = 0.0, rot = 0.0;
    for (int j = 1; j <= m1; ++j)
        for (int k = 1; k <= m2; ++k) {
            const double lam = basis.lambda(j, k);
            grad += lam * (u.c1.at(j, k) * v.c1.at(j, k) + u.c2.at(j, k) * v.c2.at(j, k));
            rot += u.c1.at(j, k) * v.c2.at(j, k) - u.c2.at(j, k) * v.c1.at(j, k);
        }
    return p.alpha() * grad + p.beta() * rot;
}

VectorField friction_nodal(const SpectralBasis& basis, const VectorModal& u, double t,
                           const ModelParams& p) {
    VectorField v = basis.synthesize(u);
    if (p.has_flow()) {
        const double fac = p.flow_factor(t);
        const VectorField& base = p.flow_base();
        for (std::size_t i = 0; i < v.c1.v.size(); ++i) {
            v.c1.v[i] += fac * base.c1.v[i];
            v.c2.v[i] += fac * base.c2.v[i];
        }
    }
    const ScalarField& gamma = p.gamma();
    VectorField out(v.c1.n1, v.c1.n2);
    for (std::size_t i = 0; i < v.c1.v.size(); ++i) {
        const double speed = std::sqrt(v.c1.v[i] * v.c1.v[i] + v.c2.v[i] * v.c2.v[i]);
        const double gs = gamma.v[i] * speed;
        out.c1.v[i] = gs * v.c1.v[i];
        out.c2.v[i] = gs * v.c2.v[i];
    }
    return out;
}

VectorModal apply_B(const SpectralBasis& basis, const VectorModal& u, double t,
                    const ModelParams& p) {
    return basis.project(friction_nodal(basis, u, t, p));
}

VectorModal pressure_gradient(const SpectralBasis& basis, const ScalarField& zhat,
                              const ModelParams& p) {
    VectorModal out;
    out.c1 = basis.project_dx1(zhat);
    out.c2 = basis.project_dx2(zhat);
    scale(out, -p.gravity());
    return out;
}

ScalarField divergence_flux(const SpectralBasis& basis, const VectorModal& u,
                            const ModelParams& p) {
    const ScalarField d1 = basis.synthesize_dx1(u.c1);
    const ScalarField d2 = basis.synthesize_dx2(u.c2);
    const VectorField un = basis.synthesize(u);
    const ScalarField& h = p.depth();
    ScalarField out(h.n1, h.n2);
    for (std::size_t i = 0; i < out.v.size(); ++i)
        out.v[i] = h.v[i] * (d1.v[i] + d2.v[i]) + p.depth_dx1().v[i] * un.c1.v[i] +
                   p.depth_dx2().v[i] * un.c2.v[i];
    return out;
}

std::vector<OperatorReport> b_bound_checks(const SpectralBasis& basis, const ModelParams& p,
                                           int samples, std::uint64_t seed) {
    if (samples < 1) throw ContractError("b_bound_checks: samples must be >= 1");
    Rng rng = Rng::from_seed(seed);
    const int m1 = basis.spec().modes_x1, m2 = basis.spec().modes_x2;
    const double c2 = p.gamma_sup();
    const double t = 0.0;
    const double flow_fac = p.flow_factor(t);

    auto with_flow = [&](const VectorModal& u) {
        VectorField v = basis.synthesize(u);
        if (p.has_flow()) {
            const VectorField& base = p.flow_base();
            for (std::size_t i = 0; i < v.c1.v.size(); ++i) {
                v.c1.v[i] += flow_fac * base.c1.v[i];
                v.c2.v[i] += flow_fac * base.c2.v[i];
            }
        }
        return v;
    };

    double worst_e2_lhs = 0.0, worst_e2_rhs = 0.0, worst_e2_margin = 0.0;
    double worst_e1_lhs = 0.0, worst_e1_rhs = 0.0, worst_e1_margin = 0.0;
    bool first = true;
    for (int s = 0; s < samples; ++s) {
        const VectorModal u = random_vector_modal(rng, m1, m2);
        const VectorModal v = random_vector_modal(rng, m1, m2);

        const VectorField uw = with_flow(u);
        const VectorField vw = with_flow(v);
        const VectorField bu = friction_nodal(basis, u, t, p);
        const VectorField bv = friction_nodal(basis, v, t, p);

        const double e2_lhs = basis.norm(bv, Norm::L2);
        const double e2_rhs = c2 * std::pow(basis.norm(vw, Norm::L4), 2);

        VectorField diffB(bu.c1.n1, bu.c1.n2), diffU(bu.c1.n1, bu.c1.n2);
        for (std::size_t i = 0; i < diffB.c1.v.size(); ++i) {
            diffB.c1.v[i] = bu.c1.v[i] - bv.c1.v[i];
            diffB.c2.v[i] = bu.c2.v[i] - bv.c2.v[i];
            diffU.c1.v[i] = uw.c1.v[i] - vw.c1.v[i];
            diffU.c2.v[i] = uw.c2.v[i] - vw.c2.v[i];
        }
        const double e1_lhs = basis.norm(diffB, Norm::L2);
        const double e1_rhs = c2 *
                              (basis.norm(uw, Norm::L4) + basis.norm(vw, Norm::L4)) *
                              basis.norm(diffU, Norm::L4);

        if (first || e2_rhs - e2_lhs < worst_e2_margin) {
            worst_e2_lhs = e2_lhs;
            worst_e2_rhs = e2_rhs;
            worst_e2_margin = e2_rhs - e2_lhs;
        }
        if (first || e1_rhs - e1_lhs < worst_e1_margin) {
            worst_e1_lhs = e1_lhs;
            worst_e1_rhs = e1_rhs;
            worst_e1_margin = e1_rhs - e1_lhs;
        }
        first = false;
    }

    std::vector<OperatorReport> reports;
    reports.push_back(make_report("B_continuity_L4_to_L2", worst_e2_lhs, worst_e2_rhs, 1e-8));
    reports.push_back(make_report("B_difference_L4", worst_e1_lhs, worst_e1_rhs, 1e-8));
    return reports;
}

OperatorReport monotonicity_check(const SpectralBasis& basis, const ModelParams& p, int pairs,
                                  std::uint64_t seed) {
    if (pairs < 1) throw ContractError("monotonicity_check: pairs must be >= 1");
    Rng rng = Rng::from_seed(seed);
    const int m1 = basis.spec().modes_x1, m2 = basis.spec().modes_x2;
    const double t = 0.0;
    double min_pairing = 0.0;
    bool first = true;
    for (int s = 0; s < pairs; ++s) {
        const VectorModal u = random_vector_modal(rng, m1, m2);
        const VectorModal v = random_vector_modal(rng, m1, m2);
        const VectorField bu = friction_nodal(basis, u, t, p);
        const VectorField bv = friction_nodal(basis, v, t, p);
        VectorModal diff = u;
        axpy(-1.0, v, diff);
        const VectorField dn = basis.synthesize(diff);
        ScalarField integrand(dn.c1.n1, dn.c1.n2);
        for (std::size_t i = 0; i < integrand.v.size(); ++i)
            integrand.v[i] = (bu.c1.v[i] - bv.c1.v[i]) * dn.c1.v[i] +
                             (bu.c2.v[i] - bv.c2.v[i]) * dn.c2.v[i];
        const double pairing = basis.integral(integrand);
        if (first || pairing < min_pairing) min_pairing = pairing;
        first = false;
    }
    // Monotone iff the smallest sampled pairing stays nonnegative.
    return make_report("B_monotonicity", -min_pairing, 0.0, 1e-9);
}

}  // namespace tidal
