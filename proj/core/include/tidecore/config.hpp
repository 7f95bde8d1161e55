// Run configuration: JSON schema, strict validation (all violations reported,
// unknown keys rejected), realization into model objects, and the manifest
// that makes every run reproducible.
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tidecore/basis.hpp"
#include "tidecore/control.hpp"
#include "tidecore/noise.hpp"
#include "tidecore/operators.hpp"
#include "tidecore/timestepper.hpp"

namespace tidal {

struct ConfigError : std::runtime_error {
    explicit ConfigError(std::vector<std::string> violations_in)
        : std::runtime_error(join(violations_in)), violations(std::move(violations_in)) {}
    std::vector<std::string> violations;

  private:
    static std::string join(const std::vector<std::string>& vs) {
        std::string out = "configuration invalid:";
        for (const std::string& v : vs) out += "\n  - " + v;
        return out;
    }
};

struct ModeAmplitude {
    int j = 1, k = 1;
    double a1 = 0.0, a2 = 0.0;  // per velocity component
};

struct ScalarModeAmplitude {
    int j = 1, k = 1;
    double a = 0.0;
};

struct DepthConfig {
    std::string preset = "constant";  // constant | slope | bump | inline
    double base = 1.2;
    double slope_x1 = 0.0, slope_x2 = 0.0;
    double amplitude = 0.0, width = 0.25;
    std::vector<double> values;  // inline, row-major grid_x1 x grid_x2
};

struct FlowConfig {
    std::string preset = "zero";  // zero | oscillating
    double mean_x1 = 0.0, mean_x2 = 0.0;
    double omega = 0.0, phase = 0.0;
    std::vector<ModeAmplitude> modes;
};

struct ForcingConfig {
    std::string preset = "zero";  // zero | oscillating
    double omega = 0.0, phase = 0.0;
    std::vector<ModeAmplitude> modes;
};

struct WienerConfig {
    double q0 = 0.02;
    double decay_s = 2.0;
    double sigma_add = 1.0;
    double sigma_mult = 0.0;
};

struct MarksConfig {
    std::string kind = "uniform";  // uniform | discrete
    double lower = -1.0, upper = 1.0;
    std::vector<std::pair<double, double>> atoms;
};

struct JumpsConfig {
    double intensity = 2.0;
    MarksConfig marks;
    double amp_add = 0.05;
    double amp_mult = 0.0;
    std::vector<ModeAmplitude> shape_modes{{1, 1, 1.0, 0.0}};
};

struct InitialConfig {
    std::vector<ModeAmplitude> velocity_modes{{1, 1, 1.0, 0.0}};
    std::vector<ScalarModeAmplitude> elevation_modes;
};

struct ControlConfig {
    int modes = 1;
    double bound = 10.0;
    double w_track = 1.0;
    double w_reg = 0.1;
    std::string reference_preset = "zero";  // zero | simulation
    std::vector<ModeAmplitude> reference_modes;
    int ensemble = 8;
};

struct OutputConfig {
    std::string directory = "out";
};

struct RunConfig {
    DomainSpec domain;
    ModelCoefficients coeffs;
    DepthConfig depth;
    FlowConfig flow;
    ForcingConfig forcing;
    WienerConfig wiener;
    JumpsConfig jumps;
    SimConfig sim;
    int threads = 1;
    InitialConfig initial;
    ControlConfig control;
    OutputConfig outputs;
};

/// Parses and validates; throws ConfigError carrying every violation found,
/// each prefixed with the offending key path.
RunConfig parse_config(const nlohmann::json& j);
RunConfig parse_config_file(const std::string& path);

/// Full echo with every default made explicit; parse_config(echo) == config.
nlohmann::json config_echo(const RunConfig& config);

SpectralBasis build_basis(const RunConfig& config);
ScalarField build_depth(const SpectralBasis& basis, const DepthConfig& depth);
ModelParams build_params(const SpectralBasis& basis, const RunConfig& config);
NoiseModel build_noise(const SpectralBasis& basis, const RunConfig& config);
std::pair<VectorModal, ScalarField> build_initial(const SpectralBasis& basis,
                                                  const RunConfig& config);
ControlProblem build_control_problem(const SpectralBasis& basis, const RunConfig& config);

struct RunManifest {
    nlohmann::json config_echo;
    std::uint64_t master_seed = 0;
    std::vector<std::uint64_t> path_seeds;
    std::string code_version;
    std::string created_utc;
    std::map<std::string, double> derived_constants;
    std::vector<std::string> artifacts;
};

RunManifest make_manifest(const RunConfig& config, const SpectralBasis& basis,
                          const ModelParams& params, const NoiseModel& noise, int paths);
nlohmann::json manifest_to_json(const RunManifest& manifest);

extern const char* const kCodeVersion;

}  // namespace tidal
