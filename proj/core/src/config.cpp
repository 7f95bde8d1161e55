#include "tidecore/config.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>

namespace tidal {

const char* const kCodeVersion = "tidalsim 1.0.0";

namespace {

using nlohmann::json;

struct Parser {
    std::vector<std::string> violations;

    void fail(const std::string& path, const std::string& msg) {
        violations.push_back(path + ": " + msg);
    }

    void check_keys(const json& j, const std::string& path,
                    std::initializer_list<const char*> allowed) {
        if (!j.is_object()) {
            fail(path, "expected an object");
            return;
        }
        for (auto it = j.begin(); it != j.end(); ++it) {
            bool known = false;
            for (const char* k : allowed)
                if (it.key() == k) {
                    known = true;
                    break;
                }
            if (!known) fail(path + "." + it.key(), "unknown key");
        }
    }

    template <typename T>
    void read(const json& j, const char* key, T& out, const std::string& path) {
        if (!j.is_object() || !j.contains(key)) return;
        const json& v = j.at(key);
        try {
            out = v.get<T>();
        } catch (const json::exception&) {
            fail(path + "." + key, "wrong type");
        }
    }

    void read_mode_list(const json& j, const char* key, std::vector<ModeAmplitude>& out,
                        const std::string& path) {
        if (!j.is_object() || !j.contains(key)) return;
        const json& v = j.at(key);
        if (!v.is_array()) {
            fail(path + "." + key, "expected an array of [j, k, a1, a2]");
            return;
        }
        out.clear();
        for (const json& e : v) {
            if (!e.is_array() || e.size() != 4 || !e[0].is_number_integer() ||
                !e[1].is_number_integer() || !e[2].is_number() || !e[3].is_number()) {
                fail(path + "." + key, "entries must be [j, k, a1, a2]");
                return;
            }
            out.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>(),
                           e[3].get<double>()});
        }
    }

    void read_scalar_mode_list(const json& j, const char* key,
                               std::vector<ScalarModeAmplitude>& out, const std::string& path) {
        if (!j.is_object() || !j.contains(key)) return;
        const json& v = j.at(key);
        if (!v.is_array()) {
            fail(path + "." + key, "expected an array of [j, k, a]");
            return;
        }
        out.clear();
        for (const json& e : v) {
            if (!e.is_array() || e.size() != 3 || !e[0].is_number_integer() ||
                !e[1].is_number_integer() || !e[2].is_number()) {
                fail(path + "." + key, "entries must be [j, k, a]");
                return;
            }
            out.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
        }
    }
};

void validate_mode_list(Parser& p, const std::vector<ModeAmplitude>& modes,
                        const DomainSpec& domain, const std::string& path) {
    for (const ModeAmplitude& m : modes)
        if (m.j < 1 || m.j > domain.modes_x1 || m.k < 1 || m.k > domain.modes_x2)
            p.fail(path, "mode (" + std::to_string(m.j) + "," + std::to_string(m.k) +
                             ") outside the span");
}

}  // namespace

RunConfig parse_config(const nlohmann::json& j) {
    Parser p;
    RunConfig cfg;

    p.check_keys(j, "config",
                 {"domain", "model", "wiener", "jumps", "sim", "initial", "control", "outputs"});
    if (!p.violations.empty() && !j.is_object()) throw ConfigError(p.violations);

    if (j.contains("domain")) {
        const json& d = j.at("domain");
        p.check_keys(d, "domain",
                     {"length_x1", "length_x2", "modes_x1", "modes_x2", "grid_x1", "grid_x2"});
        p.read(d, "length_x1", cfg.domain.length_x1, "domain");
        p.read(d, "length_x2", cfg.domain.length_x2, "domain");
        p.read(d, "modes_x1", cfg.domain.modes_x1, "domain");
        p.read(d, "modes_x2", cfg.domain.modes_x2, "domain");
        p.read(d, "grid_x1", cfg.domain.grid_x1, "domain");
        p.read(d, "grid_x2", cfg.domain.grid_x2, "domain");
    }
    if (!(cfg.domain.length_x1 > 0.0)) p.fail("domain.length_x1", "must be > 0");
    if (!(cfg.domain.length_x2 > 0.0)) p.fail("domain.length_x2", "must be > 0");
    if (cfg.domain.modes_x1 < 1) p.fail("domain.modes_x1", "must be >= 1");
    if (cfg.domain.modes_x2 < 1) p.fail("domain.modes_x2", "must be >= 1");
    if (cfg.domain.grid_x1 < 2 * cfg.domain.modes_x1 + 1)
        p.fail("domain.grid_x1", "dealiasing requires grid_x1 >= 2*modes_x1 + 1");
    if (cfg.domain.grid_x2 < 2 * cfg.domain.modes_x2 + 1)
        p.fail("domain.grid_x2", "dealiasing requires grid_x2 >= 2*modes_x2 + 1");

    if (j.contains("model")) {
        const json& m = j.at("model");
        p.check_keys(m, "model",
                     {"alpha", "beta", "gravity", "friction", "depth", "background_flow",
                      "forcing"});
        p.read(m, "alpha", cfg.coeffs.alpha, "model");
        p.read(m, "beta", cfg.coeffs.beta, "model");
        p.read(m, "gravity", cfg.coeffs.gravity, "model");
        p.read(m, "friction", cfg.coeffs.friction, "model");
        if (m.contains("depth")) {
            const json& d = m.at("depth");
            p.check_keys(d, "model.depth",
                         {"preset", "base", "slope_x1", "slope_x2", "amplitude", "width",
                          "values"});
            p.read(d, "preset", cfg.depth.preset, "model.depth");
            p.read(d, "base", cfg.depth.base, "model.depth");
            p.read(d, "slope_x1", cfg.depth.slope_x1, "model.depth");
            p.read(d, "slope_x2", cfg.depth.slope_x2, "model.depth");
            p.read(d, "amplitude", cfg.depth.amplitude, "model.depth");
            p.read(d, "width", cfg.depth.width, "model.depth");
            p.read(d, "values", cfg.depth.values, "model.depth");
        }
        if (m.contains("background_flow")) {
            const json& f = m.at("background_flow");
            p.check_keys(f, "model.background_flow",
                         {"preset", "mean_x1", "mean_x2", "omega", "phase", "modes"});
            p.read(f, "preset", cfg.flow.preset, "model.background_flow");
            p.read(f, "mean_x1", cfg.flow.mean_x1, "model.background_flow");
            p.read(f, "mean_x2", cfg.flow.mean_x2, "model.background_flow");
            p.read(f, "omega", cfg.flow.omega, "model.background_flow");
            p.read(f, "phase", cfg.flow.phase, "model.background_flow");
            p.read_mode_list(f, "modes", cfg.flow.modes, "model.background_flow");
        }
        if (m.contains("forcing")) {
            const json& f = m.at("forcing");
            p.check_keys(f, "model.forcing", {"preset", "omega", "phase", "modes"});
            p.read(f, "preset", cfg.forcing.preset, "model.forcing");
            p.read(f, "omega", cfg.forcing.omega, "model.forcing");
            p.read(f, "phase", cfg.forcing.phase, "model.forcing");
            p.read_mode_list(f, "modes", cfg.forcing.modes, "model.forcing");
        }
    }
    if (!(cfg.coeffs.alpha > 0.0)) p.fail("model.alpha", "must be > 0");
    if (!(cfg.coeffs.gravity >= 0.0)) p.fail("model.gravity", "must be >= 0");
    if (!(cfg.coeffs.friction >= 0.0)) p.fail("model.friction", "must be >= 0");
    if (!std::isfinite(cfg.coeffs.beta)) p.fail("model.beta", "must be finite");

    if (cfg.depth.preset != "constant" && cfg.depth.preset != "slope" &&
        cfg.depth.preset != "bump" && cfg.depth.preset != "inline")
        p.fail("model.depth.preset", "unknown preset '" + cfg.depth.preset + "'");
    if (cfg.depth.preset == "inline" &&
        cfg.depth.values.size() !=
            static_cast<std::size_t>(cfg.domain.grid_x1) * cfg.domain.grid_x2)
        p.fail("model.depth.values", "inline depth must have grid_x1*grid_x2 values");
    if (cfg.depth.preset != "inline") {
        // realize the preset cheaply to validate positivity at the corners
        const double L1 = cfg.domain.length_x1, L2 = cfg.domain.length_x2;
        double min_corner = cfg.depth.base;
        if (cfg.depth.preset == "slope")
            for (double x1 : {0.0, L1})
                for (double x2 : {0.0, L2})
                    min_corner = std::min(min_corner, cfg.depth.base +
                                                          cfg.depth.slope_x1 * x1 +
                                                          cfg.depth.slope_x2 * x2);
        if (cfg.depth.preset == "bump")
            min_corner = std::min(cfg.depth.base, cfg.depth.base + cfg.depth.amplitude);
        if (!(min_corner > 0.0)) p.fail("model.depth", "depth.min > 0 violated");
    } else {
        for (double v : cfg.depth.values)
            if (!(v > 0.0)) {
                p.fail("model.depth", "depth.min > 0 violated");
                break;
            }
    }
    if (cfg.flow.preset != "zero" && cfg.flow.preset != "oscillating")
        p.fail("model.background_flow.preset", "unknown preset '" + cfg.flow.preset + "'");
    if (cfg.forcing.preset != "zero" && cfg.forcing.preset != "oscillating")
        p.fail("model.forcing.preset", "unknown preset '" + cfg.forcing.preset + "'");
    validate_mode_list(p, cfg.flow.modes, cfg.domain, "model.background_flow.modes");
    validate_mode_list(p, cfg.forcing.modes, cfg.domain, "model.forcing.modes");

    if (j.contains("wiener")) {
        const json& w = j.at("wiener");
        p.check_keys(w, "wiener", {"q0", "decay_s", "sigma_add", "sigma_mult"});
        p.read(w, "q0", cfg.wiener.q0, "wiener");
        p.read(w, "decay_s", cfg.wiener.decay_s, "wiener");
        p.read(w, "sigma_add", cfg.wiener.sigma_add, "wiener");
        p.read(w, "sigma_mult", cfg.wiener.sigma_mult, "wiener");
    }
    if (!(cfg.wiener.q0 >= 0.0)) p.fail("wiener.q0", "must be >= 0");
    if (!(cfg.wiener.decay_s > 1.0)) p.fail("wiener.decay_s", "must exceed 1");

    if (j.contains("jumps")) {
        const json& jm = j.at("jumps");
        p.check_keys(jm, "jumps", {"intensity", "marks", "amp_add", "amp_mult", "shape_modes"});
        p.read(jm, "intensity", cfg.jumps.intensity, "jumps");
        p.read(jm, "amp_add", cfg.jumps.amp_add, "jumps");
        p.read(jm, "amp_mult", cfg.jumps.amp_mult, "jumps");
        p.read_mode_list(jm, "shape_modes", cfg.jumps.shape_modes, "jumps");
        if (jm.contains("marks")) {
            const json& mk = jm.at("marks");
            p.check_keys(mk, "jumps.marks", {"kind", "lower", "upper", "atoms"});
            p.read(mk, "kind", cfg.jumps.marks.kind, "jumps.marks");
            p.read(mk, "lower", cfg.jumps.marks.lower, "jumps.marks");
            p.read(mk, "upper", cfg.jumps.marks.upper, "jumps.marks");
            p.read(mk, "atoms", cfg.jumps.marks.atoms, "jumps.marks");
        }
    }
    if (!(cfg.jumps.intensity >= 0.0)) p.fail("jumps.intensity", "must be >= 0");
    if (cfg.jumps.marks.kind == "uniform") {
        if (!(cfg.jumps.marks.lower < cfg.jumps.marks.upper))
            p.fail("jumps.marks", "need lower < upper");
    } else if (cfg.jumps.marks.kind == "discrete") {
        double total = 0.0;
        for (const auto& [v, prob] : cfg.jumps.marks.atoms) {
            (void)v;
            total += prob;
            if (!(prob >= 0.0)) p.fail("jumps.marks.atoms", "negative probability");
        }
        if (cfg.jumps.marks.atoms.empty() || std::abs(total - 1.0) > 1e-12)
            p.fail("jumps.marks.atoms", "probabilities must sum to 1");
    } else {
        p.fail("jumps.marks.kind", "unknown kind '" + cfg.jumps.marks.kind + "'");
    }
    validate_mode_list(p, cfg.jumps.shape_modes, cfg.domain, "jumps.shape_modes");

    std::string scheme = "semi_implicit", elevation = "implicit_velocity";
    if (j.contains("sim")) {
        const json& s = j.at("sim");
        p.check_keys(s, "sim",
                     {"dt", "horizon", "record_stride", "scheme", "elevation_update", "seed",
                      "lp_exponent", "threads"});
        p.read(s, "dt", cfg.sim.dt, "sim");
        p.read(s, "horizon", cfg.sim.horizon, "sim");
        p.read(s, "record_stride", cfg.sim.record_stride, "sim");
        p.read(s, "scheme", scheme, "sim");
        p.read(s, "elevation_update", elevation, "sim");
        p.read(s, "seed", cfg.sim.seed, "sim");
        p.read(s, "lp_exponent", cfg.sim.lp_exponent, "sim");
        p.read(s, "threads", cfg.threads, "sim");
    }
    if (scheme != "semi_implicit") p.fail("sim.scheme", "unknown scheme '" + scheme + "'");
    if (elevation == "implicit_velocity")
        cfg.sim.elevation_update = SimConfig::ElevationUpdate::implicit_velocity;
    else if (elevation == "explicit_velocity")
        cfg.sim.elevation_update = SimConfig::ElevationUpdate::explicit_velocity;
    else
        p.fail("sim.elevation_update", "unknown value '" + elevation + "'");
    try {
        cfg.sim.validate();
    } catch (const ContractError& e) {
        p.fail("sim", e.what());
    }
    if (cfg.threads < 0) p.fail("sim.threads", "must be >= 0");

    if (j.contains("initial")) {
        const json& ini = j.at("initial");
        p.check_keys(ini, "initial", {"velocity_modes", "elevation_modes"});
        p.read_mode_list(ini, "velocity_modes", cfg.initial.velocity_modes, "initial");
        p.read_scalar_mode_list(ini, "elevation_modes", cfg.initial.elevation_modes, "initial");
    }
    validate_mode_list(p, cfg.initial.velocity_modes, cfg.domain, "initial.velocity_modes");
    for (const ScalarModeAmplitude& m : cfg.initial.elevation_modes)
        if (m.j < 1 || m.j > cfg.domain.modes_x1 || m.k < 1 || m.k > cfg.domain.modes_x2)
            p.fail("initial.elevation_modes", "mode outside the span");

    if (j.contains("control")) {
        const json& c = j.at("control");
        p.check_keys(c, "control",
                     {"modes", "bound", "w_track", "w_reg", "reference_preset",
                      "reference_modes", "ensemble"});
        p.read(c, "modes", cfg.control.modes, "control");
        p.read(c, "bound", cfg.control.bound, "control");
        p.read(c, "w_track", cfg.control.w_track, "control");
        p.read(c, "w_reg", cfg.control.w_reg, "control");
        p.read(c, "reference_preset", cfg.control.reference_preset, "control");
        p.read_mode_list(c, "reference_modes", cfg.control.reference_modes, "control");
        p.read(c, "ensemble", cfg.control.ensemble, "control");
    }
    if (cfg.control.modes < 1 ||
        cfg.control.modes > cfg.domain.modes_x1 * cfg.domain.modes_x2)
        p.fail("control.modes", "must lie in [1, modes_x1*modes_x2]");
    if (!(cfg.control.bound > 0.0)) p.fail("control.bound", "must be > 0");
    if (!(cfg.control.w_track >= 0.0)) p.fail("control.w_track", "must be >= 0");
    if (!(cfg.control.w_reg > 0.0)) p.fail("control.w_reg", "must be > 0 (coercivity)");
    if (cfg.control.reference_preset != "zero" && cfg.control.reference_preset != "simulation")
        p.fail("control.reference_preset",
               "unknown preset '" + cfg.control.reference_preset + "'");
    validate_mode_list(p, cfg.control.reference_modes, cfg.domain, "control.reference_modes");
    if (cfg.control.ensemble < 1) p.fail("control.ensemble", "must be >= 1");

    if (j.contains("outputs")) {
        const json& o = j.at("outputs");
        p.check_keys(o, "outputs", {"directory"});
        p.read(o, "directory", cfg.outputs.directory, "outputs");
    }
    if (cfg.outputs.directory.empty()) p.fail("outputs.directory", "must not be empty");

    if (!p.violations.empty()) throw ConfigError(p.violations);
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({path + ": cannot open configuration file"});
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError({path + ": malformed JSON (" + e.what() + ")"});
    }
    return parse_config(j);
}

namespace {

nlohmann::json mode_list_json(const std::vector<ModeAmplitude>& modes) {
    nlohmann::json out = nlohmann::json::array();
    for (const ModeAmplitude& m : modes) out.push_back({m.j, m.k, m.a1, m.a2});
    return out;
}

}  // namespace

nlohmann::json config_echo(const RunConfig& c) {
    nlohmann::json j;
    j["domain"] = {{"length_x1", c.domain.length_x1}, {"length_x2", c.domain.length_x2},
                   {"modes_x1", c.domain.modes_x1},   {"modes_x2", c.domain.modes_x2},
                   {"grid_x1", c.domain.grid_x1},     {"grid_x2", c.domain.grid_x2}};
    nlohmann::json depth = {{"preset", c.depth.preset}, {"base", c.depth.base},
                            {"slope_x1", c.depth.slope_x1}, {"slope_x2", c.depth.slope_x2},
                            {"amplitude", c.depth.amplitude}, {"width", c.depth.width}};
    if (c.depth.preset == "inline") depth["values"] = c.depth.values;
    j["model"] = {{"alpha", c.coeffs.alpha},
                  {"beta", c.coeffs.beta},
                  {"gravity", c.coeffs.gravity},
                  {"friction", c.coeffs.friction},
                  {"depth", depth},
                  {"background_flow",
                   {{"preset", c.flow.preset},
                    {"mean_x1", c.flow.mean_x1},
                    {"mean_x2", c.flow.mean_x2},
                    {"omega", c.flow.omega},
                    {"phase", c.flow.phase},
                    {"modes", mode_list_json(c.flow.modes)}}},
                  {"forcing",
                   {{"preset", c.forcing.preset},
                    {"omega", c.forcing.omega},
                    {"phase", c.forcing.phase},
                    {"modes", mode_list_json(c.forcing.modes)}}}};
    j["wiener"] = {{"q0", c.wiener.q0},
                   {"decay_s", c.wiener.decay_s},
                   {"sigma_add", c.wiener.sigma_add},
                   {"sigma_mult", c.wiener.sigma_mult}};
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& [v, prob] : c.jumps.marks.atoms) atoms.push_back({v, prob});
    j["jumps"] = {{"intensity", c.jumps.intensity},
                  {"marks",
                   {{"kind", c.jumps.marks.kind},
                    {"lower", c.jumps.marks.lower},
                    {"upper", c.jumps.marks.upper},
                    {"atoms", atoms}}},
                  {"amp_add", c.jumps.amp_add},
                  {"amp_mult", c.jumps.amp_mult},
                  {"shape_modes", mode_list_json(c.jumps.shape_modes)}};
    j["sim"] = {{"dt", c.sim.dt},
                {"horizon", c.sim.horizon},
                {"record_stride", c.sim.record_stride},
                {"scheme", "semi_implicit"},
                {"elevation_update",
                 c.sim.elevation_update == SimConfig::ElevationUpdate::implicit_velocity
                     ? "implicit_velocity"
                     : "explicit_velocity"},
                {"seed", c.sim.seed},
                {"lp_exponent", c.sim.lp_exponent},
                {"threads", c.threads}};
    nlohmann::json elevation_modes = nlohmann::json::array();
    for (const ScalarModeAmplitude& m : c.initial.elevation_modes)
        elevation_modes.push_back({m.j, m.k, m.a});
    j["initial"] = {{"velocity_modes", mode_list_json(c.initial.velocity_modes)},
                    {"elevation_modes", elevation_modes}};
    j["control"] = {{"modes", c.control.modes},
                    {"bound", c.control.bound},
                    {"w_track", c.control.w_track},
                    {"w_reg", c.control.w_reg},
                    {"reference_preset", c.control.reference_preset},
                    {"reference_modes", mode_list_json(c.control.reference_modes)},
                    {"ensemble", c.control.ensemble}};
    j["outputs"] = {{"directory", c.outputs.directory}};
    return j;
}

SpectralBasis build_basis(const RunConfig& config) { return SpectralBasis(config.domain); }

ScalarField build_depth(const SpectralBasis& basis, const DepthConfig& depth) {
    const DomainSpec& spec = basis.spec();
    ScalarField h(spec.grid_x1, spec.grid_x2);
    if (depth.preset == "inline") {
        if (depth.values.size() != h.v.size())
            throw DimensionError("depth: inline values do not match the grid");
        h.v = depth.values;
        return h;
    }
    for (int i1 = 0; i1 < spec.grid_x1; ++i1)
        for (int i2 = 0; i2 < spec.grid_x2; ++i2) {
            const double x1 = basis.grid_x1_at(i1), x2 = basis.grid_x2_at(i2);
            double v = depth.base;
            if (depth.preset == "slope") v += depth.slope_x1 * x1 + depth.slope_x2 * x2;
            if (depth.preset == "bump") {
                const double cx = 0.5 * spec.length_x1, cy = 0.5 * spec.length_x2;
                const double r2 = (x1 - cx) * (x1 - cx) + (x2 - cy) * (x2 - cy);
                v += depth.amplitude * std::exp(-r2 / (depth.width * depth.width));
            }
            h.at(i1, i2) = v;
        }
    return h;
}

namespace {

VectorModal realize_modes(const SpectralBasis& basis, const std::vector<ModeAmplitude>& modes) {
    VectorModal out = basis.zero_vector();
    for (const ModeAmplitude& m : modes) {
        out.c1.at(m.j, m.k) += m.a1;
        out.c2.at(m.j, m.k) += m.a2;
    }
    return out;
}

bool any_amplitude(const std::vector<ModeAmplitude>& modes) {
    for (const ModeAmplitude& m : modes)
        if (m.a1 != 0.0 || m.a2 != 0.0) return true;
    return false;
}

}  // namespace

ModelParams build_params(const SpectralBasis& basis, const RunConfig& config) {
    BackgroundFlow flow;
    if (config.flow.preset == "oscillating") {
        flow.mean = {config.flow.mean_x1, config.flow.mean_x2};
        flow.omega = config.flow.omega;
        flow.phase = config.flow.phase;
        if (any_amplitude(config.flow.modes)) flow.profile = realize_modes(basis, config.flow.modes);
    }
    Forcing forcing;
    if (config.forcing.preset == "oscillating" && any_amplitude(config.forcing.modes)) {
        forcing.amplitude = realize_modes(basis, config.forcing.modes);
        forcing.omega = config.forcing.omega;
        forcing.phase = config.forcing.phase;
    }
    return ModelParams(basis, config.coeffs, build_depth(basis, config.depth), std::move(flow),
                       std::move(forcing));
}

NoiseModel build_noise(const SpectralBasis& basis, const RunConfig& config) {
    NoiseModel noise;
    noise.wiener = WienerSpec::power_spectrum(basis, config.wiener.q0, config.wiener.decay_s,
                                              config.wiener.sigma_add, config.wiener.sigma_mult);
    noise.jumps.total_intensity = config.jumps.intensity;
    if (config.jumps.marks.kind == "uniform") {
        noise.jumps.marks.kind = MarkDistribution::Kind::uniform;
        noise.jumps.marks.lower = config.jumps.marks.lower;
        noise.jumps.marks.upper = config.jumps.marks.upper;
    } else {
        noise.jumps.marks.kind = MarkDistribution::Kind::discrete;
        noise.jumps.marks.atoms = config.jumps.marks.atoms;
    }
    noise.jumps.amp_add = config.jumps.amp_add;
    noise.jumps.amp_mult = config.jumps.amp_mult;
    noise.jumps.shape = realize_modes(basis, config.jumps.shape_modes);
    noise.jumps.validate();
    return noise;
}

std::pair<VectorModal, ScalarField> build_initial(const SpectralBasis& basis,
                                                  const RunConfig& config) {
    VectorModal u0 = realize_modes(basis, config.initial.velocity_modes);
    ScalarModal z0_modal = basis.zero_scalar();
    for (const ScalarModeAmplitude& m : config.initial.elevation_modes)
        z0_modal.at(m.j, m.k) += m.a;
    return {std::move(u0), basis.synthesize(z0_modal)};
}

ControlProblem build_control_problem(const SpectralBasis& basis, const RunConfig& config) {
    auto [u0, z0] = build_initial(basis, config);
    ModelParams params = build_params(basis, config);
    NoiseModel noise = build_noise(basis, config);

    CostSpec cost;
    cost.w_track = config.control.w_track;
    cost.w_reg = config.control.w_reg;
    if (config.control.reference_preset == "simulation") {
        // Noise-free reference run from the configured initial condition.
        VectorModal ref0 = realize_modes(basis, config.control.reference_modes);
        NoiseModel off = noise;
        for (double& q : off.wiener.q.c) q = 0.0;
        off.jumps.total_intensity = 0.0;
        SimConfig ref_cfg = config.sim;
        ref_cfg.record_stride = 1;
        const TrajectoryRecord ref =
            simulate(basis, ref0, basis.zero_field(), params, off, ref_cfg);
        cost.u_ref.reserve(ref.states.size());
        for (const State& s : ref.states) cost.u_ref.push_back(s.u);
    }

    return ControlProblem(basis, std::move(u0), std::move(z0), config.control.modes,
                          config.control.bound, std::move(cost), std::move(params),
                          std::move(noise), config.sim, config.control.ensemble,
                          config.sim.seed);
}

RunManifest make_manifest(const RunConfig& config, const SpectralBasis& basis,
                          const ModelParams& params, const NoiseModel& noise, int paths) {
    RunManifest m;
    m.config_echo = config_echo(config);
    m.master_seed = config.sim.seed;
    for (int i = 0; i < paths; ++i)
        m.path_seeds.push_back(Rng::path_seed(config.sim.seed, static_cast<std::uint64_t>(i)));
    m.code_version = kCodeVersion;
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
    m.created_utc = buf;

    const HypothesisConstants hc = hypothesis_constants(basis, noise.wiener, noise.jumps);
    const double r_over_eps = params.friction() / params.depth_min();
    const double C = std::max(1.0 + params.grad_depth_max() + r_over_eps,
                              2.0 * params.gravity() * params.gravity() / params.alpha() +
                                  2.0 * params.depth_max() * params.depth_max() / params.alpha() +
                                  params.grad_depth_max());
    const double c3k = 4.0 * hc.K, c4k = 4.0 * hc.K;
    m.derived_constants = {{"depth_min", params.depth_min()},
                           {"depth_max", params.depth_max()},
                           {"grad_depth_max", params.grad_depth_max()},
                           {"gamma_sup", params.gamma_sup()},
                           {"poincare", params.poincare_constant()},
                           {"continuity_C1", params.continuity_c1()},
                           {"K", hc.K},
                           {"L", hc.L},
                           {"C", C},
                           {"C_prime", 2.0 * (C + c3k * c3k + c4k * c4k + 3.0 * hc.K)}};
    return m;
}

nlohmann::json manifest_to_json(const RunManifest& manifest) {
    nlohmann::json j;
    j["config"] = manifest.config_echo;
    j["master_seed"] = manifest.master_seed;
    j["path_seeds"] = manifest.path_seeds;
    j["code_version"] = manifest.code_version;
    j["created_utc"] = manifest.created_utc;
    j["derived_constants"] = manifest.derived_constants;
    j["artifacts"] = manifest.artifacts;
    return j;
}

}  // namespace tidal
