#include "tidecore/diagnostics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>

namespace tidal {

namespace {

void check_homogeneous(const std::vector<TrajectoryRecord>& trajs, const char* where) {
    if (trajs.size() < 2)
        throw ContractError(std::string(where) + ": need an ensemble of at least 2 paths");
    const SimConfig& ref = trajs.front().config;
    for (const TrajectoryRecord& t : trajs) {
        if (t.config.dt != ref.dt || t.config.horizon != ref.horizon ||
            t.config.lp_exponent != ref.lp_exponent)
            throw ContractError(std::string(where) + ": heterogeneous trajectory configs");
    }
}

double mean_of(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double stderr_of(const std::vector<double>& xs, double mean) {
    if (xs.size() < 2) return 0.0;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double var = ss / static_cast<double>(xs.size() - 1);
    return std::sqrt(var / static_cast<double>(xs.size()));
}

// int_0^T cos^2(w t + p) dt, closed form.
double integral_cos2(double T, double w, double p) {
    if (w == 0.0) return T * std::cos(p) * std::cos(p);
    auto F = [](double x) { return 0.5 * x + 0.25 * std::sin(2.0 * x); };
    return (F(w * T + p) - F(p)) / w;
}

// int_0^T cos^4(w t + p) dt, closed form.
double integral_cos4(double T, double w, double p) {
    if (w == 0.0) return T * std::pow(std::cos(p), 4);
    auto F = [](double x) {
        return 3.0 / 8.0 * x + std::sin(2.0 * x) / 4.0 + std::sin(4.0 * x) / 32.0;
    };
    return (F(w * T + p) - F(p)) / w;
}

// int_0^T |cos(w t + p)|^q dt by composite Simpson (used for general q > 2).
double integral_abs_cos_pow(double T, double w, double p, double q) {
    const int n = 2048;
    const double h = T / n;
    double acc = 0.0;
    auto f = [&](double t) { return std::pow(std::abs(std::cos(w * t + p)), q); };
    for (int i = 0; i < n; i += 2) acc += f(i * h) + 4.0 * f((i + 1) * h) + f((i + 2) * h);
    return acc * h / 3.0;
}

}  // namespace

EnergyReport energy_estimate_check(const SpectralBasis& basis,
                                   const std::vector<TrajectoryRecord>& trajs,
                                   const ModelParams& p, const NoiseModel& noise,
                                   const EnergyCheckOptions& opts) {
    check_homogeneous(trajs, "energy_estimate_check");
    const SimConfig& cfg = trajs.front().config;
    const double T = cfg.horizon, dt = cfg.dt;

    std::vector<double> sups, dissipations;
    sups.reserve(trajs.size());
    dissipations.reserve(trajs.size());
    for (const TrajectoryRecord& traj : trajs) {
        double sup = 0.0, diss = 0.0;
        for (std::size_t m = 0; m < traj.energies.size(); ++m) {
            const EnergySample& e = traj.energies[m];
            sup = std::max(sup, e.u_l2_sq + e.z_l2_sq);
            if (m > 0) diss += dt * e.u_h10_sq;  // right-endpoint sum
        }
        sups.push_back(sup);
        dissipations.push_back(2.0 * p.alpha() * diss);
    }

    EnergyReport rep;
    rep.ensemble_size = static_cast<int>(trajs.size());
    rep.lhs_sup = mean_of(sups);
    rep.lhs_dissipation = mean_of(dissipations);

    // Constants exactly as assembled in the proof of the sup estimate.
    const double r_over_eps =
        p.depth_min() > 0.0 ? p.friction() / p.depth_min() : 0.0;
    const double alpha = p.alpha(), g = p.gravity(), mu = p.depth_max(), M = p.grad_depth_max();
    const double C = std::max(1.0 + M + r_over_eps, 2.0 * g * g / alpha + 2.0 * mu * mu / alpha + M);
    const HypothesisConstants hc = hypothesis_constants(basis, noise.wiener, noise.jumps);
    const double K = hc.K;
    const double c3k = opts.bdg_c3 * K, c4k = opts.bdg_c4 * K;
    // The expected jump integral is bounded with the factor-2 compensation
    // constant (3K total); the raw factor-1 variant is reported alongside.
    const double C_prime = 2.0 * (C + c3k * c3k + c4k * c4k + 3.0 * K);
    const double C_dprime = 2.0 * (c3k * c3k + c4k * c4k + 3.0 * K);
    const double C_prime_raw = 2.0 * (C + c3k * c3k + c4k * c4k + 2.0 * K);

    const double init_u = trajs.front().energies.front().u_l2_sq;
    const double init_z = trajs.front().energies.front().z_l2_sq;
    double f_data = 0.0;
    if (p.has_forcing())
        f_data = std::pow(p.forcing_l2_base(), 2) *
                 integral_cos2(T, p.forcing().omega, p.forcing().phase);
    double w0_data = 0.0;
    if (p.has_flow())
        w0_data = std::pow(p.flow_l4_base(), 4) * integral_cos4(T, p.flow().omega, p.flow().phase);

    const double data_term = 2.0 * (init_u + init_z) + 2.0 * f_data +
                             2.0 * r_over_eps * w0_data + C_dprime * T;
    rep.gronwall_log_bound = std::log(std::max(data_term, DBL_MIN)) + C_prime * T;
    rep.gronwall_bound =
        rep.gronwall_log_bound > std::log(DBL_MAX) ? DBL_MAX : data_term * std::exp(C_prime * T);

    rep.constants = {{"C", C},
                     {"K", K},
                     {"C3", opts.bdg_c3},
                     {"C4", opts.bdg_c4},
                     {"r_over_eps", r_over_eps},
                     {"mu", mu},
                     {"M", M},
                     {"g", g},
                     {"alpha", alpha},
                     {"C_prime", C_prime},
                     {"C_prime_raw_jump", C_prime_raw},
                     {"C_dprime", C_dprime},
                     {"data_term", data_term},
                     {"T", T}};
    rep.satisfied = rep.lhs_sup + rep.lhs_dissipation <= rep.gronwall_bound;
    return rep;
}

EnergyReport lp_energy_check(const SpectralBasis& basis,
                             const std::vector<TrajectoryRecord>& trajs, const ModelParams& p,
                             double exponent_p, double allowed_multiple) {
    if (!(exponent_p > 2.0)) throw ContractError("lp_energy_check: exponent must exceed 2");
    check_homogeneous(trajs, "lp_energy_check");
    const SimConfig& cfg = trajs.front().config;
    if (std::abs(cfg.lp_exponent - exponent_p) > 1e-12)
        throw ContractError("lp_energy_check: trajectories lack the requested Lp channel");
    const double T = cfg.horizon, dt = cfg.dt, q = exponent_p;

    std::vector<double> sups, dissipations;
    for (const TrajectoryRecord& traj : trajs) {
        double sup = 0.0, diss = 0.0;
        for (std::size_t m = 0; m < traj.energies.size(); ++m) {
            const EnergySample& e = traj.energies[m];
            sup = std::max(sup, e.u_lp + std::pow(e.z_l2_sq, q / 2.0));
            if (m > 0) diss += dt * std::pow(e.u_l2_sq, (q - 2.0) / 2.0) * e.u_h10_sq;
        }
        sups.push_back(sup);
        dissipations.push_back(p.alpha() * q * diss);
    }

    EnergyReport rep;
    rep.ensemble_size = static_cast<int>(trajs.size());
    rep.lhs_sup = mean_of(sups);
    rep.lhs_dissipation = mean_of(dissipations);

    const EnergySample& e0 = trajs.front().energies.front();
    double f_data = 0.0;
    if (p.has_forcing())
        f_data = std::pow(p.forcing_l2_base(), q) *
                 integral_abs_cos_pow(T, p.forcing().omega, p.forcing().phase, q);
    double w0_data = 0.0;
    if (p.has_flow() && p.flow().profile.c1.size() > 0) {
        // The constant mean offset has zero gradient; only the in-span
        // profile carries an H10 seminorm.
        const double h10 = basis.norm(p.flow().profile, Norm::H10);
        w0_data =
            std::pow(h10, q) * integral_abs_cos_pow(T, p.flow().omega, p.flow().phase, q);
    }
    const double data_term = 1.0 + std::pow(e0.u_l2_sq, q / 2.0) +
                             std::pow(e0.z_l2_sq, q / 2.0) + f_data + w0_data;
    const double lhs = rep.lhs_sup + rep.lhs_dissipation;
    rep.gronwall_bound = allowed_multiple * data_term;
    rep.gronwall_log_bound = std::log(std::max(rep.gronwall_bound, DBL_MIN));
    rep.constants = {{"p", q},
                     {"allowed_multiple", allowed_multiple},
                     {"data_term", data_term},
                     {"empirical_constant", data_term > 0.0 ? lhs / data_term : 0.0},
                     {"T", T}};
    rep.satisfied = lhs <= rep.gronwall_bound;
    return rep;
}

MartingaleReport martingale_mean_check(const std::vector<TrajectoryRecord>& trajs) {
    if (trajs.empty()) throw ContractError("martingale_mean_check: empty ensemble");
    std::vector<double> wiener, jump;
    for (const TrajectoryRecord& t : trajs) {
        wiener.push_back(t.energies.back().wiener_channel);
        jump.push_back(t.energies.back().jump_channel);
    }
    MartingaleReport rep;
    for (const auto& [name, xs] : {std::pair<std::string, const std::vector<double>*>{
                                       "wiener_integral", &wiener},
                                   {"compensated_jump_integral", &jump}}) {
        ChannelStat s;
        s.name = name;
        s.mean = mean_of(*xs);
        s.stderr_mean = stderr_of(*xs, s.mean);
        s.count = static_cast<int>(xs->size());
        s.satisfied = std::abs(s.mean) <= 4.0 * s.stderr_mean;
        rep.channels.push_back(std::move(s));
    }
    rep.satisfied = true;
    for (const ChannelStat& s : rep.channels) rep.satisfied = rep.satisfied && s.satisfied;
    return rep;
}

RegularityTable h1_blowup_probe(const SpectralBasis& basis, const VectorModal& u0,
                                const ScalarField& z0, const ModelParams& p,
                                const NoiseModel& noise, const SimConfig& c,
                                const std::vector<double>& thresholds,
                                const std::vector<double>& horizons, int ensemble,
                                double probability_limit, int threads) {
    if (noise.wiener.sigma_mult != 0.0 || noise.jumps.amp_mult != 0.0)
        throw ContractError(
            "h1_blowup_probe: requires the additive noise family (gradient-bounded A.1-A.3)");
    if (thresholds.empty() || horizons.empty())
        throw ContractError("h1_blowup_probe: empty threshold or horizon list");
    for (std::size_t i = 1; i < horizons.size(); ++i)
        if (!(horizons[i] < horizons[i - 1]))
            throw ContractError("h1_blowup_probe: horizons must be strictly decreasing");
    for (double T : horizons) {
        const double m = T / c.dt;
        if (std::abs(m - std::llround(m)) > 1e-9)
            throw ContractError("h1_blowup_probe: horizons must be multiples of dt");
    }
    if (ensemble < 1) throw ContractError("h1_blowup_probe: ensemble must be >= 1");

    SimConfig cfg = c;
    cfg.horizon = horizons.front();
    cfg.record_stride = static_cast<int>(std::min<std::int64_t>(cfg.steps(), 1 << 30));
    cfg.validate();

    const std::size_t n_thresholds = thresholds.size(), n_horizons = horizons.size();
    const double dt = cfg.dt;

    // One simulation per path at the largest horizon; every (N, T) cell is
    // evaluated on the same draws, so cell probabilities are nonincreasing in
    // shrinking T by construction.
    std::vector<std::vector<std::uint8_t>> exceed(
        static_cast<std::size_t>(ensemble),
        std::vector<std::uint8_t>(n_thresholds * n_horizons, 0));

    const std::vector<TrajectoryRecord> paths =
        simulate_ensemble(basis, u0, z0, p, noise, cfg, ensemble, threads);

    for (int path = 0; path < ensemble; ++path) {
        const std::vector<EnergySample>& es = paths[static_cast<std::size_t>(path)].energies;
        const double init = es.front().u_h10_sq + es.front().z_h1_sq;
        // Running functional R(t) = sup_{s<=t}(||u||_H10^2 + ||z||_H1^2)
        //                           + (alpha/2) int_0^t ||Lap u||^2.
        std::vector<double> running(es.size());
        double sup = 0.0, integral = 0.0;
        for (std::size_t m = 0; m < es.size(); ++m) {
            if (m > 0) integral += 0.5 * p.alpha() * dt * es[m].u_h2_sq;
            sup = std::max(sup, es[m].u_h10_sq + es[m].z_h1_sq);
            running[m] = sup + integral;
        }
        for (std::size_t ni = 0; ni < n_thresholds; ++ni) {
            const double N = thresholds[ni];
            // tau_N: first grid time with R exceeding N + init.
            std::size_t tau_index = es.size();  // "never"
            for (std::size_t m = 0; m < es.size(); ++m)
                if (running[m] > N + init) {
                    tau_index = m;
                    break;
                }
            for (std::size_t hi = 0; hi < n_horizons; ++hi) {
                const std::size_t t_index =
                    static_cast<std::size_t>(std::llround(horizons[hi] / dt));
                const std::size_t stop = std::min(tau_index, t_index);
                const bool event = running[stop] > (N - 1.0) + init;
                exceed[static_cast<std::size_t>(path)][ni * n_horizons + hi] = event ? 1 : 0;
            }
        }
    }

    RegularityTable table;
    table.thresholds = thresholds;
    table.horizons = horizons;
    table.ensemble = ensemble;
    table.probability_limit = probability_limit;
    table.monotone_in_horizon = true;
    double smallest_col_max = 0.0;
    for (std::size_t ni = 0; ni < n_thresholds; ++ni) {
        double prev = 1.0;
        for (std::size_t hi = 0; hi < n_horizons; ++hi) {
            int count = 0;
            for (int path = 0; path < ensemble; ++path)
                count += exceed[static_cast<std::size_t>(path)][ni * n_horizons + hi];
            RegularityCell cell;
            cell.threshold = thresholds[ni];
            cell.horizon = horizons[hi];
            cell.probability = static_cast<double>(count) / ensemble;
            cell.degenerate = thresholds[ni] < 1.0;
            table.cells.push_back(cell);
            if (!cell.degenerate) {
                if (hi > 0 && cell.probability > prev + 1e-12)
                    table.monotone_in_horizon = false;
                prev = cell.probability;
                if (hi + 1 == n_horizons)
                    smallest_col_max = std::max(smallest_col_max, cell.probability);
            }
        }
    }
    table.smallest_horizon_max_probability = smallest_col_max;
    table.satisfied = table.monotone_in_horizon && smallest_col_max <= probability_limit;
    return table;
}

double cadlag_modulus_series(const std::vector<double>& times,
                             const std::vector<std::vector<double>>& distance, double delta) {
    const std::size_t n = times.size();
    if (n < 2) throw ContractError("cadlag_modulus: need at least two snapshots");
    if (distance.size() != n) throw DimensionError("cadlag_modulus: distance matrix shape");
    const double T = times.back() - times.front();
    if (!(delta > 0.0) || !(delta < T))
        throw ContractError("cadlag_modulus: need 0 < delta < horizon");

    // f[i]: best achievable max-cell-oscillation over partitions of
    // [t_0, t_i] whose cuts sit on snapshot times and whose cells are at
    // least delta wide. Cells are half-open, so cell [t_j, t_i) ranges over
    // snapshot indices j..i-1 and the endpoint value at T never enters.
    const double inf = DBL_MAX;
    std::vector<double> f(n, inf);
    f[0] = 0.0;
    // osc[j] tracks the oscillation of the index window [j, i-1] while i
    // advances; each new right endpoint folds in by a suffix-max scan.
    std::vector<double> osc(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        if (i >= 2) {
            const std::size_t newest = i - 1;
            double suffix = 0.0;
            for (std::size_t j = newest; j-- > 0;) {
                suffix = std::max(suffix, distance[j][newest]);
                osc[j] = std::max(osc[j], suffix);
            }
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (f[j] == inf) continue;
            if (times[i] - times[j] < delta - 1e-12) continue;
            f[i] = std::min(f[i], std::max(f[j], osc[j]));
        }
    }
    // The single-cell partition always qualifies because delta < T.
    return f[n - 1];
}

double cadlag_modulus(const SpectralBasis& basis, const TrajectoryRecord& traj, double delta) {
    const std::size_t n = traj.states.size();
    if (n < 2) throw ContractError("cadlag_modulus: trajectory has too few snapshots");
    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            VectorModal diff = traj.states[a].u;
            axpy(-1.0, traj.states[b].u, diff);
            dist[a][b] = dist[b][a] = basis.norm(diff, Norm::Hminus1);
        }
    return cadlag_modulus_series(traj.times, dist, delta);
}

TightnessReport tightness_probe(const SpectralBasis& basis,
                                const std::vector<TrajectoryRecord>& trajs,
                                const std::vector<double>& delta_grid,
                                const std::vector<double>& theta_grid) {
    if (trajs.empty()) throw ContractError("tightness_probe: empty ensemble");
    TightnessReport rep;
    rep.ensemble = static_cast<int>(trajs.size());

    std::vector<double> sups, integrals;
    for (const TrajectoryRecord& t : trajs) {
        double sup = 0.0, integral = 0.0;
        for (std::size_t m = 0; m < t.energies.size(); ++m) {
            sup = std::max(sup, std::sqrt(t.energies[m].u_l2_sq));
            if (m > 0) integral += t.config.dt * t.energies[m].u_h10_sq;
        }
        sups.push_back(sup);
        integrals.push_back(integral);
    }
    rep.sup_l2 = mean_of(sups);
    rep.integral_h10 = mean_of(integrals);

    for (double delta : delta_grid) {
        double worst = 0.0;
        for (const TrajectoryRecord& t : trajs)
            worst = std::max(worst, cadlag_modulus(basis, t, delta));
        rep.modulus_curve.emplace_back(delta, worst);
    }

    // Aldous moment fit: E || u(tau+theta) - u(tau) ||^2_{H-1} ~ C theta^beta,
    // tau running over the snapshot grid. Lag indexing needs uniform spacing.
    for (const TrajectoryRecord& t : trajs)
        for (std::size_t i = 2; i < t.times.size(); ++i)
            if (std::abs((t.times[i] - t.times[i - 1]) - (t.times[1] - t.times[0])) > 1e-12)
                throw ContractError("tightness_probe: snapshots must be uniformly spaced");
    std::vector<double> log_theta, log_moment;
    for (double theta : theta_grid) {
        double acc = 0.0;
        std::size_t count = 0;
        for (const TrajectoryRecord& t : trajs) {
            if (t.times.size() < 2) continue;
            const double snap_dt = t.times[1] - t.times[0];
            const double ratio = theta / snap_dt;
            const auto offset = static_cast<std::size_t>(std::llround(ratio));
            if (offset < 1 || std::abs(ratio - static_cast<double>(offset)) > 1e-9)
                throw ContractError(
                    "tightness_probe: theta must be a multiple of the snapshot spacing");
            for (std::size_t i = 0; i + offset < t.states.size(); ++i) {
                VectorModal diff = t.states[i + offset].u;
                axpy(-1.0, t.states[i].u, diff);
                const double d = basis.norm(diff, Norm::Hminus1);
                acc += d * d;
                ++count;
            }
        }
        if (count == 0) throw ContractError("tightness_probe: theta exceeds the horizon");
        const double moment = acc / static_cast<double>(count);
        log_theta.push_back(std::log(theta));
        log_moment.push_back(std::log(std::max(moment, DBL_MIN)));
    }
    const double mx = mean_of(log_theta), my = mean_of(log_moment);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < log_theta.size(); ++i) {
        sxx += (log_theta[i] - mx) * (log_theta[i] - mx);
        sxy += (log_theta[i] - mx) * (log_moment[i] - my);
    }
    if (sxx == 0.0) throw ContractError("tightness_probe: theta grid needs at least two values");
    rep.aldous_beta_hat = sxy / sxx;
    rep.aldous_c_hat = std::exp(my - rep.aldous_beta_hat * mx);
    return rep;
}

}  // namespace tidal
