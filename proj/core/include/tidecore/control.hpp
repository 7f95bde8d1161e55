// Initial-value optimal control by sample-average approximation: the cost
// J(u,U) = E int int L dx dt is estimated over a fixed seed set (common
// random numbers), so the objective is a deterministic function of the
// control and derivative-free descent applies.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tidecore/basis.hpp"
#include "tidecore/operators.hpp"
#include "tidecore/timestepper.hpp"

namespace tidal {

/// Running cost L(t,u,U) = w_track |u - u_ref|^2 + w_reg |U|^2 with the
/// coercive quadratic regularizer k(U) = w_reg |U|^2.
struct CostSpec {
    double w_track = 0.0;
    double w_reg = 1.0;
    // Tracking target as modal snapshots at every step time; empty => zero
    // target. Built from a reference run or left empty.
    std::vector<VectorModal> u_ref;

    void validate() const {
        if (!(w_track >= 0.0)) throw ContractError("CostSpec: w_track must be >= 0");
        if (!(w_reg > 0.0))
            throw ContractError("CostSpec: w_reg must be positive (coercivity)");
    }
};

class ControlProblem {
  public:
    ControlProblem(const SpectralBasis& basis, VectorModal u0, ScalarField z0, int control_modes,
                   double control_bound, CostSpec cost, ModelParams params, NoiseModel noise,
                   SimConfig sim, int ensemble_size, std::uint64_t master_seed);

    const VectorModal& u0() const { return u0_; }
    const ScalarField& z0() const { return z0_; }
    int control_modes() const { return control_modes_; }
    int dimension() const { return 2 * control_modes_; }
    double control_bound() const { return control_bound_; }
    const CostSpec& cost() const { return cost_; }
    const ModelParams& params() const { return params_; }
    const NoiseModel& noise() const { return noise_; }
    const SimConfig& sim() const { return sim_; }
    int ensemble_size() const { return ensemble_size_; }
    const std::vector<std::uint64_t>& seed_set() const { return seed_set_; }

    /// Modes in eigenvalue order (ties by j then k); the control lives in the
    /// span of the first control_modes of them, per velocity component.
    const std::vector<ModeIndex>& mode_order() const { return mode_order_; }

    VectorModal control_to_modal(const std::vector<double>& flat) const;
    double control_l2_sq(const std::vector<double>& flat) const;
    std::vector<double> project_onto_bound(std::vector<double> flat) const;

  private:
    VectorModal u0_;
    ScalarField z0_;
    int control_modes_;
    double control_bound_;
    CostSpec cost_;
    ModelParams params_;
    NoiseModel noise_;
    SimConfig sim_;
    int ensemble_size_;
    std::vector<std::uint64_t> seed_set_;
    std::vector<ModeIndex> mode_order_;
};

struct CostValue {
    double j_hat = 0.0;
    double stderr_mean = 0.0;
};

/// Runs the fixed seed set with u(0) = u0 + U; the control is projected onto
/// the admissible ball first. Bitwise deterministic in (U, seed set).
CostValue evaluate_cost(const SpectralBasis& basis, const std::vector<double>& control,
                        const ControlProblem& prob);

std::vector<OperatorReport> check_admissibility(const SpectralBasis& basis, const CostSpec& cost,
                                                int samples, std::uint64_t seed);

enum class OptimizeMethod { fd_gradient, coordinate_search };

struct TraceEntry {
    std::vector<double> control;
    double j_value = 0.0;
    double stderr_mean = 0.0;
    int evaluations_used = 0;
    std::string note;
};

struct OptimizationTrace {
    std::vector<TraceEntry> iterates;  // accepted iterates, J nonincreasing
    std::vector<double> best_control;
    double best_j = 0.0;
    double best_stderr = 0.0;
    int evaluations = 0;
    bool budget_exhausted = false;
};

OptimizationTrace optimize(const SpectralBasis& basis, const ControlProblem& prob,
                           OptimizeMethod method, int budget);

}  // namespace tidal
