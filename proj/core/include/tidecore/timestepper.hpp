// Semi-implicit Euler-Maruyama integration of the coupled Galerkin system.
// The stiff diffusion/rotation block is solved per mode as a 2x2 system;
// friction, pressure and the noise enter explicitly, jumps are accumulated at
// the end of the step using the pre-step (left-limit) state.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "tidecore/basis.hpp"
#include "tidecore/domain.hpp"
#include "tidecore/noise.hpp"
#include "tidecore/operators.hpp"

namespace tidal {

struct SimConfig {
    double dt = 1e-3;
    double horizon = 1.0;
    int record_stride = 1;
    enum class Scheme { semi_implicit } scheme = Scheme::semi_implicit;
    enum class ElevationUpdate { implicit_velocity, explicit_velocity } elevation_update =
        ElevationUpdate::implicit_velocity;
    std::uint64_t seed = 1;
    double lp_exponent = 4.0;

    std::int64_t steps() const { return std::llround(horizon / dt); }

    void validate() const {
        if (!(dt > 0.0)) throw ContractError("SimConfig: dt must be positive");
        if (!(horizon >= dt)) throw ContractError("SimConfig: horizon must be >= dt");
        const double m = horizon / dt;
        if (m > 1e12) throw ContractError("SimConfig: horizon/dt too large");
        if (std::abs(m - std::llround(m)) > 1e-9 * std::max(1.0, m))
            throw ContractError("SimConfig: horizon must be an integer multiple of dt");
        if (record_stride < 1) throw ContractError("SimConfig: record_stride must be >= 1");
        if (!(lp_exponent > 2.0)) throw ContractError("SimConfig: lp_exponent must exceed 2");
    }
};

struct NoiseModel {
    WienerSpec wiener;
    JumpSpec jumps;
};

struct State {
    double t = 0.0;
    VectorModal u;
    ScalarField zhat;
};

struct EnergySample {
    double t = 0.0;
    double u_l2_sq = 0.0;
    double u_h10_sq = 0.0;
    double z_l2_sq = 0.0;
    double u_lp = 0.0;            // ||u||_{L2}^p for the configured p
    double z_h1_sq = 0.0;         // quadrature of |grad zhat|^2 (finite differences)
    double u_h2_sq = 0.0;         // || Lap u ||_{L2}^2, modal
    double wiener_channel = 0.0;  // running integral of (sigma dW, u)
    double jump_channel = 0.0;    // running compensated jump pairing
};

struct TrajectoryRecord {
    std::vector<double> times;           // snapshot times (stride grid)
    std::vector<State> states;           // snapshots, always include t=0 and t=T
    std::vector<EnergySample> energies;  // every step, 0..steps
    std::vector<int> jump_counts;        // per step
    std::uint64_t seed = 0;
    SimConfig config;

    const State& final_state() const { return states.back(); }
};

struct DivergenceError : std::runtime_error {
    DivergenceError(std::string msg, std::size_t step)
        : std::runtime_error(std::move(msg)), step_index(step) {}
    std::size_t step_index = 0;
    std::uint64_t seed = 0;
    std::shared_ptr<TrajectoryRecord> partial;  // attached by simulate()
};

State step(const SpectralBasis& basis, const State& s, const NoiseDraw& draw,
           const NoiseModel& noise, const ModelParams& p, const SimConfig& c);

TrajectoryRecord simulate(const SpectralBasis& basis, const VectorModal& u0,
                          const ScalarField& z0, const ModelParams& p, const NoiseModel& noise,
                          const SimConfig& c);

/// Two trajectories driven by the identical draw sequence (common random
/// numbers); the noise consumption matches single-path simulate exactly.
std::pair<TrajectoryRecord, TrajectoryRecord> simulate_pair(
    const SpectralBasis& basis, const VectorModal& u0_a, const VectorModal& u0_b,
    const ScalarField& z0, const ModelParams& p, const NoiseModel& noise, const SimConfig& c);

struct RefinementRow {
    int modes_a = 0, modes_b = 0;
    double dt_a = 0.0, dt_b = 0.0;
    double distance = 0.0;  // L2(0,T;L2) between the two levels
};

using ParamsFactory = std::function<ModelParams(const SpectralBasis&)>;
using NoiseFactory = std::function<NoiseModel(const SpectralBasis&)>;

/// Simulates a ladder of (modes, dt) levels under one noise realization that
/// is generated at the finest level and aggregated down (increment summation
/// in time, mode truncation in space). Initial data are given at the finest
/// level and truncated per level.
std::vector<RefinementRow> refinement_study(const VectorModal& u0_fine,
                                            const ScalarModal& z0_fine,
                                            const ParamsFactory& params_for,
                                            const NoiseFactory& noise_for, const SimConfig& base,
                                            const DomainSpec& finest_domain,
                                            const std::vector<int>& mode_levels,
                                            const std::vector<double>& dt_levels);

/// Independent paths; per-path seeds derive from the master seed via
/// Rng::path_seed. Results are written in index order and do not depend on
/// the thread count.
std::vector<TrajectoryRecord> simulate_ensemble(const SpectralBasis& basis,
                                                const VectorModal& u0, const ScalarField& z0,
                                                const ModelParams& p, const NoiseModel& noise,
                                                const SimConfig& c, int paths, int threads = 1);

}  // namespace tidal
