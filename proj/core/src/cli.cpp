#include "tidecore/cli.hpp"

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "tidecore/config.hpp"
#include "tidecore/diagnostics.hpp"
#include "tidecore/io.hpp"

namespace tidal {

namespace {

namespace fs = std::filesystem;

std::vector<double> split_doubles(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(parse_double(cell));
    return out;
}

struct CommandContext {
    RunConfig config;
    std::string out_dir;
    std::vector<std::string> artifacts;

    std::string path(const std::string& name) const { return out_dir + "/" + name; }

    void emit_csv(const std::string& name, const CsvTable& table) {
        write_csv(path(name), table);
        artifacts.push_back(name);
    }
    void emit_json(const std::string& name, nlohmann::json j) {
        j["manifest"] = "manifest.json";
        write_json(path(name), j);
        artifacts.push_back(name);
    }
    void emit_tdf_scalar(const std::string& name, const ScalarField& f) {
        write_tdf(path(name), f);
        artifacts.push_back(name);
    }
    void emit_tdf_vector(const std::string& name, const VectorField& f) {
        write_tdf(path(name), f);
        artifacts.push_back(name);
    }

    void finish_manifest(const SpectralBasis& basis, const ModelParams& params,
                         const NoiseModel& noise, int paths) {
        RunManifest m = make_manifest(config, basis, params, noise, paths);
        m.artifacts = artifacts;
        write_json(path("manifest.json"), manifest_to_json(m));
    }
};

RunConfig load_config(const std::string& config_path, const std::string& manifest_path) {
    if (!manifest_path.empty()) {
        const nlohmann::json m = read_json(manifest_path);
        if (!m.contains("config")) throw ConfigError({manifest_path + ": manifest has no config"});
        return parse_config(m.at("config"));
    }
    if (!config_path.empty()) return parse_config_file(config_path);
    return parse_config(nlohmann::json::object());
}

int threads_of(const RunConfig& config) {
    if (config.threads > 0) return config.threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

int cmd_simulate(CommandContext& ctx) {
    const SpectralBasis basis = build_basis(ctx.config);
    const ModelParams params = build_params(basis, ctx.config);
    const NoiseModel noise = build_noise(basis, ctx.config);
    auto [u0, z0] = build_initial(basis, ctx.config);

    const TrajectoryRecord traj = simulate(basis, u0, z0, params, noise, ctx.config.sim);
    ctx.emit_csv("energies.csv", energies_csv(traj));
    ctx.emit_csv("jumps.csv", jump_log_csv(traj));
    ctx.emit_tdf_vector("u_final.tdf", basis.synthesize(traj.final_state().u));
    ctx.emit_tdf_scalar("z_final.tdf", traj.final_state().zhat);
    ctx.finish_manifest(basis, params, noise, 1);
    std::cout << "simulate: " << traj.config.steps() << " steps, final |u|_L2 = "
              << format_double(std::sqrt(traj.energies.back().u_l2_sq)) << "\n";
    return 0;
}

int cmd_verify(CommandContext& ctx, int samples, std::uint64_t seed) {
    const SpectralBasis basis = build_basis(ctx.config);
    const ModelParams params = build_params(basis, ctx.config);
    const NoiseModel noise = build_noise(basis, ctx.config);
    const int m1 = basis.spec().modes_x1, m2 = basis.spec().modes_x2;

    std::vector<OperatorReport> reports;
    Rng rng = Rng::from_seed(seed);

    // Bilinear form: coercivity identity and continuity constant alpha+beta.
    double coer_worst = 0.0, cont_lhs = 0.0, cont_rhs = 0.0, cont_margin = 0.0;
    double pair_worst = 0.0;
    bool first = true;
    for (int s = 0; s < samples; ++s) {
        VectorModal u = random_vector_modal(rng, m1, m2);
        VectorModal v = random_vector_modal(rng, m1, m2);
        const double uh = basis.norm(u, Norm::H10), vh = basis.norm(v, Norm::H10);
        const double auu = bilinear_a(basis, u, u, params);
        coer_worst = std::max(coer_worst,
                              std::abs(auu - params.alpha() * uh * uh) / std::max(uh * uh, 1e-300));
        const double auv = bilinear_a(basis, u, v, params);
        const double bound = params.continuity_c1() * uh * vh;
        if (first || bound - std::abs(auv) < cont_margin) {
            cont_lhs = std::abs(auv);
            cont_rhs = bound;
            cont_margin = bound - std::abs(auv);
        }
        const double pairing = dot(apply_A(basis, u, params), v);
        pair_worst = std::max(pair_worst,
                              std::abs(pairing - auv) / std::max(1.0, uh * vh));
        first = false;
    }
    reports.push_back(make_report("a_coercivity_identity_rel", coer_worst, 0.0, 1e-10));
    reports.push_back(make_report("a_continuity", cont_lhs, cont_rhs, 1e-8));
    reports.push_back(make_report("A_pairing_matches_a_rel", pair_worst, 0.0, 1e-10));

    // Ladyzhenskaya with constant 2 on random trig polynomials.
    double lady_lhs = 0.0, lady_rhs = 0.0, lady_margin = 0.0;
    first = true;
    for (int s = 0; s < std::min(samples, 200); ++s) {
        const ScalarModal phi = random_modal(rng, m1, m2);
        const ScalarField nodal = basis.synthesize(phi);
        const double l4 = basis.norm(nodal, Norm::L4);
        const double l2 = basis.norm(phi, Norm::L2);
        const double h10 = basis.norm(phi, Norm::H10);
        const double lhs = std::pow(l4, 4);
        const double rhs = 2.0 * l2 * l2 * h10 * h10;
        if (first || rhs - lhs < lady_margin) {
            lady_lhs = lhs;
            lady_rhs = rhs;
            lady_margin = rhs - lhs;
        }
        first = false;
    }
    reports.push_back(make_report("ladyzhenskaya_const2", lady_lhs, lady_rhs, 1e-8));

    // Pressure force dual bound ||G||_{H-1} <= g ||z||_{L2} on in-span z.
    double dual_lhs = 0.0, dual_rhs = 0.0, dual_margin = 0.0;
    first = true;
    for (int s = 0; s < std::min(samples, 200); ++s) {
        const ScalarModal zm = random_modal(rng, m1, m2);
        const ScalarField z = basis.synthesize(zm);
        const VectorModal g = pressure_gradient(basis, z, params);
        const double lhs = basis.norm(g, Norm::Hminus1);
        const double rhs = params.gravity() * basis.norm(z, Norm::L2);
        if (first || rhs - lhs < dual_margin) {
            dual_lhs = lhs;
            dual_rhs = rhs;
            dual_margin = rhs - lhs;
        }
        first = false;
    }
    reports.push_back(make_report("pressure_dual_bound", dual_lhs, dual_rhs, 1e-8));

    for (OperatorReport& r : b_bound_checks(basis, params, samples, seed ^ 0x5bd1e995))
        reports.push_back(std::move(r));
    reports.push_back(monotonicity_check(basis, params, samples, seed ^ 0x9e3779b9));
    for (OperatorReport& r :
         hypothesis_checks(basis, noise.wiener, noise.jumps, samples, seed ^ 0x85ebca6b))
        reports.push_back(std::move(r));

    bool all_ok = true;
    for (const OperatorReport& r : reports) {
        all_ok = all_ok && r.satisfied;
        std::cout << (r.satisfied ? "PASS " : "FAIL ") << r.name
                  << "  lhs=" << format_double(r.lhs) << " rhs=" << format_double(r.rhs) << "\n";
    }
    ctx.emit_json("verify_report.json", nlohmann::json{{"samples", samples},
                                                       {"seed", seed},
                                                       {"reports", reports_json(reports)},
                                                       {"satisfied", all_ok}});
    ctx.finish_manifest(basis, params, noise, 0);
    return all_ok ? 0 : 1;
}

int cmd_energy(CommandContext& ctx, int paths) {
    const SpectralBasis basis = build_basis(ctx.config);
    const ModelParams params = build_params(basis, ctx.config);
    const NoiseModel noise = build_noise(basis, ctx.config);
    auto [u0, z0] = build_initial(basis, ctx.config);

    const std::vector<TrajectoryRecord> trajs = simulate_ensemble(
        basis, u0, z0, params, noise, ctx.config.sim, paths, threads_of(ctx.config));
    const EnergyReport e2 = energy_estimate_check(basis, trajs, params, noise);
    const EnergyReport lp =
        lp_energy_check(basis, trajs, params, ctx.config.sim.lp_exponent);
    const MartingaleReport mart = martingale_mean_check(trajs);

    ctx.emit_json("energy_report.json",
                  nlohmann::json{{"sup_estimate", energy_report_json(e2)},
                                 {"lp_estimate", energy_report_json(lp)},
                                 {"martingale", martingale_report_json(mart)}});
    ctx.emit_csv("energies.csv", energies_csv(trajs.front()));
    ctx.finish_manifest(basis, params, noise, paths);

    const bool ok = e2.satisfied && lp.satisfied && mart.satisfied;
    std::cout << (e2.satisfied ? "PASS" : "FAIL") << " energy sup estimate: lhs="
              << format_double(e2.lhs_sup + e2.lhs_dissipation)
              << " bound=" << format_double(e2.gronwall_bound) << "\n";
    std::cout << (lp.satisfied ? "PASS" : "FAIL") << " Lp estimate\n";
    std::cout << (mart.satisfied ? "PASS" : "FAIL") << " martingale means\n";
    return ok ? 0 : 1;
}

int cmd_regularity(CommandContext& ctx, int paths, const std::string& thresholds_text,
                   const std::string& horizons_text, double limit) {
    const SpectralBasis basis = build_basis(ctx.config);
    const ModelParams params = build_params(basis, ctx.config);
    const NoiseModel noise = build_noise(basis, ctx.config);
    auto [u0, z0] = build_initial(basis, ctx.config);

    const std::vector<double> thresholds = split_doubles(thresholds_text);
    const std::vector<double> horizons = split_doubles(horizons_text);
    const RegularityTable table =
        h1_blowup_probe(basis, u0, z0, params, noise, ctx.config.sim, thresholds, horizons,
                        paths, limit, threads_of(ctx.config));

    ctx.emit_json("regularity_report.json", regularity_table_json(table));
    ctx.emit_csv("regularity_table.csv", regularity_csv(table));
    ctx.finish_manifest(basis, params, noise, paths);
    std::cout << (table.satisfied ? "PASS" : "FAIL") << " regularity probe: max P at T="
              << format_double(horizons.back()) << " is "
              << format_double(table.smallest_horizon_max_probability) << "\n";
    return table.satisfied ? 0 : 1;
}

int cmd_tightness(CommandContext& ctx, int paths, const std::string& deltas_text,
                  const std::string& thetas_text) {
    const SpectralBasis basis = build_basis(ctx.config);
    const ModelParams params = build_params(basis, ctx.config);
    const NoiseModel noise = build_noise(basis, ctx.config);
    auto [u0, z0] = build_initial(basis, ctx.config);

    const std::vector<TrajectoryRecord> trajs = simulate_ensemble(
        basis, u0, z0, params, noise, ctx.config.sim, paths, threads_of(ctx.config));
    const TightnessReport rep =
        tightness_probe(basis, trajs, split_doubles(deltas_text), split_doubles(thetas_text));

    ctx.emit_json("tightness_report.json", tightness_report_json(rep));
    ctx.emit_csv("modulus_curve.csv", modulus_curve_csv(rep.modulus_curve));
    ctx.finish_manifest(basis, params, noise, paths);
    std::cout << "tightness: sup L2 = " << format_double(rep.sup_l2)
              << ", beta_hat = " << format_double(rep.aldous_beta_hat) << "\n";
    return 0;
}

int cmd_optimize(CommandContext& ctx, const std::string& method_text, int budget) {
    const SpectralBasis basis = build_basis(ctx.config);
    const ModelParams params = build_params(basis, ctx.config);
    const NoiseModel noise = build_noise(basis, ctx.config);

    OptimizeMethod method;
    if (method_text == "fd_gradient")
        method = OptimizeMethod::fd_gradient;
    else if (method_text == "coordinate_search")
        method = OptimizeMethod::coordinate_search;
    else
        throw ConfigError({"--method must be fd_gradient or coordinate_search"});

    const ControlProblem prob = build_control_problem(basis, ctx.config);
    const OptimizationTrace trace = optimize(basis, prob, method, budget);

    ctx.emit_json("optimization_trace.json", optimization_trace_json(trace));
    ctx.emit_csv("optimization_trace.csv", optimization_trace_csv(trace));
    ctx.finish_manifest(basis, params, noise, prob.ensemble_size());
    std::cout << "optimize: best J = " << format_double(trace.best_j) << " after "
              << trace.evaluations << " evaluations\n";
    return 0;
}

int cmd_modulus(CommandContext& ctx, const std::string& deltas_text) {
    const SpectralBasis basis = build_basis(ctx.config);
    const ModelParams params = build_params(basis, ctx.config);
    const NoiseModel noise = build_noise(basis, ctx.config);
    auto [u0, z0] = build_initial(basis, ctx.config);

    const TrajectoryRecord traj = simulate(basis, u0, z0, params, noise, ctx.config.sim);
    std::vector<std::pair<double, double>> curve;
    for (double delta : split_doubles(deltas_text))
        curve.emplace_back(delta, cadlag_modulus(basis, traj, delta));

    ctx.emit_csv("modulus_curve.csv", modulus_curve_csv(curve));
    ctx.finish_manifest(basis, params, noise, 1);
    std::cout << "modulus: " << curve.size() << " deltas\n";
    return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
    CLI::App app{"Spectral simulator and verification lab for the stochastic tide equations"};
    app.require_subcommand(1);

    std::string config_path, manifest_path, out_dir_override;
    app.add_option("-c,--config", config_path, "JSON configuration file");
    app.add_option("--from-manifest", manifest_path, "re-run from a manifest's config echo");
    app.add_option("-o,--output", out_dir_override, "output directory override");

    auto* sim = app.add_subcommand("simulate", "integrate one path and export it");
    auto* verify = app.add_subcommand("verify", "operator and noise inequality suite");
    int samples = 1000;
    std::uint64_t verify_seed = 7;
    verify->add_option("--samples", samples, "random samples per check");
    verify->add_option("--seed", verify_seed, "sampling seed");
    auto* energy = app.add_subcommand("energy", "ensemble energy estimates");
    int paths = 64;
    energy->add_option("--paths", paths, "ensemble size");
    auto* regularity = app.add_subcommand("regularity", "H10 blow-up probe");
    int reg_paths = 256;
    // the default thresholds leave room for the dissipation transient of the
    // default initial data; small data admits small N (see README)
    std::string thresholds = "8,16,32,64", horizons = "0.4,0.2,0.1,0.05";
    double limit = 0.05;
    regularity->add_option("--paths", reg_paths, "ensemble size");
    regularity->add_option("--thresholds", thresholds, "comma list of N thresholds");
    regularity->add_option("--horizons", horizons, "comma list of decreasing horizons");
    regularity->add_option("--limit", limit, "probability limit at the smallest horizon");
    auto* tightness = app.add_subcommand("tightness", "modulus curve and Aldous fit");
    int tight_paths = 16;
    std::string deltas = "0.2,0.1,0.05,0.025", thetas = "0.01,0.02,0.04,0.08";
    tightness->add_option("--paths", tight_paths, "ensemble size");
    tightness->add_option("--deltas", deltas, "comma list of modulus deltas");
    tightness->add_option("--thetas", thetas, "comma list of Aldous lags");
    auto* optimize_cmd = app.add_subcommand("optimize", "initial-value control search");
    std::string method = "coordinate_search";
    int budget = 500;
    optimize_cmd->add_option("--method", method, "fd_gradient | coordinate_search");
    optimize_cmd->add_option("--budget", budget, "cost evaluation budget");
    auto* modulus_cmd = app.add_subcommand("modulus", "cadlag modulus curve of one path");
    std::string mod_deltas = "0.2,0.1,0.05,0.025";
    modulus_cmd->add_option("--deltas", mod_deltas, "comma list of deltas");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());  // CLI11 order
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        app.exit(e);  // prints usage/error text
        return 2;
    }

    try {
        CommandContext ctx{load_config(config_path, manifest_path), "", {}};
        if (!out_dir_override.empty()) ctx.config.outputs.directory = out_dir_override;
        ctx.out_dir = ctx.config.outputs.directory;
        fs::create_directories(ctx.out_dir);

        if (sim->parsed()) return cmd_simulate(ctx);
        if (verify->parsed()) return cmd_verify(ctx, samples, verify_seed);
        if (energy->parsed()) return cmd_energy(ctx, paths);
        if (regularity->parsed())
            return cmd_regularity(ctx, reg_paths, thresholds, horizons, limit);
        if (tightness->parsed()) return cmd_tightness(ctx, tight_paths, deltas, thetas);
        if (optimize_cmd->parsed()) return cmd_optimize(ctx, method, budget);
        if (modulus_cmd->parsed()) return cmd_modulus(ctx, mod_deltas);
        std::cerr << "no subcommand\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << " (seed " << e.seed << ")\n";
        return 3;
    } catch (const ContractError& e) {
        std::cerr << "contract violation: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace tidal
