// Driving noise: truncated Q-Wiener increments, the diffusion coefficient,
// a finite-intensity marked Poisson measure with its compensator, and the
// growth/Lipschitz constants of the built-in coefficient families.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tidecore/basis.hpp"
#include "tidecore/domain.hpp"
#include "tidecore/operators.hpp"
#include "tidecore/rng.hpp"

namespace tidal {

/// Covariance spectrum of the Q-Wiener process. q(j,k) applies to both
/// velocity components, whose increments are independent.
struct WienerSpec {
    ScalarModal q;            // q_{jk} >= 0 per mode
    double sigma_add = 0.0;   // c0 in sigma(t,u) = diag(c0 + c1 u)
    double sigma_mult = 0.0;  // c1
    double decay_exponent = 0.0;  // recorded spectrum decay (q0 * lambda^-s)

    double trace() const {
        double s = 0.0;
        for (double x : q.c) s += x;
        return 2.0 * s;  // both components carry the spectrum
    }

    void validate() const {
        for (double x : q.c)
            if (!(x >= 0.0)) throw ContractError("WienerSpec: q eigenvalues must be >= 0");
        if (!std::isfinite(sigma_add) || !std::isfinite(sigma_mult))
            throw ContractError("WienerSpec: sigma coefficients must be finite");
    }

    /// Default trace-class spectrum q_{jk} = q0 * lambda_{jk}^{-s}.
    static WienerSpec power_spectrum(const SpectralBasis& basis, double q0, double s,
                                     double sigma_add, double sigma_mult);
};

struct MarkDistribution {
    enum class Kind { uniform, discrete };
    Kind kind = Kind::uniform;
    double lower = -1.0, upper = 1.0;                // uniform support
    std::vector<std::pair<double, double>> atoms;    // (value, probability)

    void validate() const;
    double mean() const;
    double second_moment() const;
    double fourth_moment() const;
    double support_bound() const;  // sup |z|
    double sample(Rng& rng) const;
};

/// Jump forcing H(u,z) = z * (c2 * shape + c3 * u) under a time-homogeneous
/// Poisson measure with finite total intensity.
struct JumpSpec {
    double total_intensity = 0.0;  // lambda(Z)
    MarkDistribution marks;
    double amp_add = 0.0;   // c2
    double amp_mult = 0.0;  // c3
    VectorModal shape;      // psi, in span

    void validate() const {
        if (!(total_intensity >= 0.0))
            throw ContractError("JumpSpec: total intensity must be >= 0");
        marks.validate();
    }
};

struct JumpEvent {
    double offset = 0.0;  // position inside the step, strictly in (0, dt)
    double mark = 0.0;
};

struct NoiseDraw {
    VectorModal wiener;            // per-mode increments, N(0, q dt)
    std::vector<JumpEvent> jumps;  // sorted by offset
};

/// Growth/Lipschitz constants of the built-in family, in closed form.
struct HypothesisConstants {
    double K_sigma = 0.0, K_jump = 0.0, K = 0.0;   // H.2
    double L_sigma = 0.0, L_jump = 0.0, L = 0.0;   // H.3
    double M_p4 = 0.0;                             // Hp.4 at p = 4
};

VectorModal sample_wiener(double dt, const WienerSpec& spec, Rng& rng);

/// Modal increment sigma(t,u) dW with sigma diagonal: (c0 + c1 u_m) dW_m.
VectorModal apply_sigma(double t, const VectorModal& u, const VectorModal& dW,
                        const WienerSpec& spec);

std::vector<JumpEvent> sample_jumps(double dt, const JumpSpec& spec, Rng& rng);

VectorModal apply_H(const VectorModal& u, double mark, const JumpSpec& spec);

/// Closed form of the compensator integral over Z applied at state u:
/// lambda(Z) * E[z] * (c2 shape + c3 u).
VectorModal compensator(const VectorModal& u, const JumpSpec& spec);

NoiseDraw sample_draw(double dt, const WienerSpec& wiener, const JumpSpec& jumps, Rng& rng);

/// || sigma(t,u) ||_{L_Q}^2 = sum_m q_m (c0 + c1 u_m)^2 over both components.
double sigma_lq_norm_sq(const VectorModal& u, const WienerSpec& spec);

/// Integral over Z of ||H(u,z)||^2 lambda(dz), closed form.
double jump_l2_intensity(const SpectralBasis& basis, const VectorModal& u, const JumpSpec& spec);

HypothesisConstants hypothesis_constants(const SpectralBasis& basis, const WienerSpec& wiener,
                                         const JumpSpec& jumps);

/// Samples random states and checks H.2, H.3 and Hp.4 (p=4) against the
/// closed-form constants. Every report should come back satisfied.
std::vector<OperatorReport> hypothesis_checks(const SpectralBasis& basis,
                                              const WienerSpec& wiener, const JumpSpec& jumps,
                                              int samples, std::uint64_t seed);

}  // namespace tidal
