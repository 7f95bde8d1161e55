// Spatial operators of the tide model: the diffusion/rotation matrix A, its
// bilinear form, quadratic bottom friction, the pressure gradient read through
// integration by parts, and the depth-weighted flux divergence.
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tidecore/basis.hpp"
#include "tidecore/domain.hpp"

namespace tidal {

/// Prescribed full flow w0(x,t) = cos(omega*t + phase) * [mean + profile(x)].
/// The profile is an in-span modal shape; the mean offset need not vanish on
/// the boundary.
struct BackgroundFlow {
    std::array<double, 2> mean{0.0, 0.0};
    VectorModal profile;  // empty => no modal part
    double omega = 0.0;
    double phase = 0.0;

    bool trivially_zero() const {
        if (mean[0] != 0.0 || mean[1] != 0.0) return false;
        for (double c : profile.c1.c)
            if (c != 0.0) return false;
        for (double c : profile.c2.c)
            if (c != 0.0) return false;
        return true;
    }
};

/// Body forcing f(t) = cos(omega*t + phase) * amplitude, amplitude in span.
struct Forcing {
    VectorModal amplitude;  // empty => zero forcing
    double omega = 0.0;
    double phase = 0.0;
};

struct ModelCoefficients {
    double alpha = 1.0;     // horizontal eddy diffusion
    double beta = 1.0;      // Coriolis 2*omega*cos(phi)
    double gravity = 1.5;
    double friction = 0.05; // r in gamma(x) = r/h(x)
};

class ModelParams {
  public:
    ModelParams(const SpectralBasis& basis, ModelCoefficients coeffs, ScalarField depth,
                BackgroundFlow flow, Forcing forcing);

    double alpha() const { return coeffs_.alpha; }
    double beta() const { return coeffs_.beta; }
    double gravity() const { return coeffs_.gravity; }
    double friction() const { return coeffs_.friction; }

    const ScalarField& depth() const { return depth_; }
    const ScalarField& gamma() const { return gamma_; }
    const ScalarField& depth_dx1() const { return depth_dx1_; }
    const ScalarField& depth_dx2() const { return depth_dx2_; }

    // Derived bounds: min/max depth, max |grad h|, sup gamma, continuity C1.
    double depth_min() const { return depth_min_; }
    double depth_max() const { return depth_max_; }
    double grad_depth_max() const { return grad_depth_max_; }
    double gamma_sup() const { return gamma_sup_; }
    double continuity_c1() const { return coeffs_.alpha + coeffs_.beta; }
    double poincare_constant() const { return poincare_; }

    bool has_flow() const { return has_flow_; }
    const VectorField& flow_base() const { return flow_base_; }
    const BackgroundFlow& flow() const { return flow_; }
    double flow_factor(double t) const {
        return has_flow_ ? std::cos(flow_.omega * t + flow_.phase) : 0.0;
    }
    // || w0(t) ||_{L4} = |cos factor| * || base ||_{L4}.
    double flow_l4_base() const { return flow_l4_base_; }

    bool has_forcing() const { return has_forcing_; }
    const Forcing& forcing() const { return forcing_; }
    double forcing_factor(double t) const {
        return has_forcing_ ? std::cos(forcing_.omega * t + forcing_.phase) : 0.0;
    }
    double forcing_l2_base() const { return forcing_l2_base_; }
    VectorModal forcing_at(double t, const SpectralBasis& basis) const;

  private:
    ModelCoefficients coeffs_;
    ScalarField depth_;
    BackgroundFlow flow_;
    Forcing forcing_;

    ScalarField gamma_, depth_dx1_, depth_dx2_;
    double depth_min_ = 0.0, depth_max_ = 0.0, grad_depth_max_ = 0.0;
    double gamma_sup_ = 0.0, poincare_ = 0.0;
    bool has_flow_ = false, has_forcing_ = false;
    VectorField flow_base_;
    double flow_l4_base_ = 0.0, forcing_l2_base_ = 0.0;
};

// Finite differences, centered inside with second-order one-sided stencils at
// the boundary.
ScalarField fd_dx1(const ScalarField& f, double spacing);
ScalarField fd_dx2(const ScalarField& f, double spacing);

struct OperatorReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool satisfied = false;
    double margin = 0.0;     // rhs - lhs
    double tolerance = 0.0;
};

OperatorReport make_report(std::string name, double lhs, double rhs, double tolerance);

/// A u per mode: (alpha*lambda*u1 - beta*u2, beta*u1 + alpha*lambda*u2).
VectorModal apply_A(const SpectralBasis& basis, const VectorModal& u, const ModelParams& p);

/// a(u,v) = alpha * sum lambda (u1 v1 + u2 v2) + beta * [(u1,v2) - (u2,v1)].
double bilinear_a(const SpectralBasis& basis, const VectorModal& u, const VectorModal& v,
                  const ModelParams& p);

inline std::array<double, 2> friction_value(double gamma, double v1, double v2) {
    const double speed = std::sqrt(v1 * v1 + v2 * v2);
    return {gamma * speed * v1, gamma * speed * v2};
}

/// Nodal gamma |u+w0|(u+w0) at time t (the pointwise intermediate of B).
VectorField friction_nodal(const SpectralBasis& basis, const VectorModal& u, double t,
                           const ModelParams& p);

/// B(u) = P_n [ gamma |u+w0| (u+w0) ].
VectorModal apply_B(const SpectralBasis& basis, const VectorModal& u, double t,
                    const ModelParams& p);

/// Modal G with <G, v> = -g (zhat, Div v) for every basis vector v.
VectorModal pressure_gradient(const SpectralBasis& basis, const ScalarField& zhat,
                              const ModelParams& p);

/// Nodal Div(h u) = h Div u + grad(h) . u.
ScalarField divergence_flux(const SpectralBasis& basis, const VectorModal& u,
                            const ModelParams& p);

/// Sampled verification of the friction bounds: continuity into L2 and the
/// L4 difference estimate, both with constant sup(gamma). Reports carry the
/// worst sample seen.
std::vector<OperatorReport> b_bound_checks(const SpectralBasis& basis, const ModelParams& p,
                                           int samples, std::uint64_t seed);

/// Sampled monotonicity of B: min over pairs of <B(u)-B(v), u-v> against 0.
OperatorReport monotonicity_check(const SpectralBasis& basis, const ModelParams& p, int pairs,
                                  std::uint64_t seed);

}  // namespace tidal
