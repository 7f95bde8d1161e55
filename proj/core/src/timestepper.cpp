#include "tidecore/timestepper.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace tidal {

namespace {

constexpr double kBlowupThreshold = 1e12;

struct StepStats {
    double wiener_pairing = 0.0;
    double jump_pairing = 0.0;
    int jump_count = 0;
};

State advance(const SpectralBasis& basis, const State& s, const NoiseDraw& draw,
              const NoiseModel& noise, const ModelParams& p, const SimConfig& c,
              std::size_t step_index, StepStats* stats) {
    const double dt = c.dt;
    const int m1 = basis.spec().modes_x1, m2 = basis.spec().modes_x2;

    // Explicit drift E = -B(u) - G(zhat) + f(t); G is the modal pressure
    // force, paired through -g (zhat, Div v).
    VectorModal explicit_terms = apply_B(basis, s.u, s.t, p);
    scale(explicit_terms, -1.0);
    axpy(-1.0, pressure_gradient(basis, s.zhat, p), explicit_terms);
    if (p.has_forcing()) axpy(p.forcing_factor(s.t), p.forcing().amplitude, explicit_terms);

    // Stochastic increment: diffusion plus compensated jumps, both evaluated
    // at the pre-step (left-limit) state.
    const VectorModal wiener_inc = apply_sigma(s.t, s.u, draw.wiener, noise.wiener);
    VectorModal jump_inc(m1, m2);
    for (const JumpEvent& e : draw.jumps) axpy(1.0, apply_H(s.u, e.mark, noise.jumps), jump_inc);
    axpy(-dt, compensator(s.u, noise.jumps), jump_inc);

    if (stats) {
        stats->wiener_pairing = dot(wiener_inc, s.u);
        stats->jump_pairing = dot(jump_inc, s.u);
        stats->jump_count = static_cast<int>(draw.jumps.size());
    }

    VectorModal rhs = s.u;
    axpy(dt, explicit_terms, rhs);
    axpy(1.0, wiener_inc, rhs);
    axpy(1.0, jump_inc, rhs);

    // Per-mode solve of (I + dt alpha lambda I + dt beta Rot) u = rhs with
    // Rot = [[0,-1],[1,0]].
    State out;
    out.t = s.t + dt;
    out.u = VectorModal(m1, m2);
    const double b = dt * p.beta();
    for (int j = 1; j <= m1; ++j)
        for (int k = 1; k <= m2; ++k) {
            const double a = 1.0 + dt * p.alpha() * basis.lambda(j, k);
            const double det = a * a + b * b;
            const double r1 = rhs.c1.at(j, k), r2 = rhs.c2.at(j, k);
            out.u.c1.at(j, k) = (a * r1 + b * r2) / det;
            out.u.c2.at(j, k) = (-b * r1 + a * r2) / det;
        }

    const VectorModal& z_velocity =
        c.elevation_update == SimConfig::ElevationUpdate::implicit_velocity ? out.u : s.u;
    const ScalarField flux = divergence_flux(basis, z_velocity, p);
    out.zhat = s.zhat;
    for (std::size_t i = 0; i < out.zhat.v.size(); ++i) out.zhat.v[i] -= dt * flux.v[i];

    double umax = 0.0;
    for (double x : out.u.c1.c) umax = std::max(umax, std::abs(x));
    for (double x : out.u.c2.c) umax = std::max(umax, std::abs(x));
    double zmax = 0.0;
    for (double x : out.zhat.v) zmax = std::max(zmax, std::abs(x));
    if (!std::isfinite(umax) || !std::isfinite(zmax) || umax > kBlowupThreshold ||
        zmax > kBlowupThreshold)
        throw DivergenceError("state diverged at step " + std::to_string(step_index), step_index);
    return out;
}

EnergySample measure(const SpectralBasis& basis, const State& s, double lp_exponent,
                     double wiener_channel, double jump_channel) {
    EnergySample e;
    e.t = s.t;
    const double u_l2 = basis.norm(s.u, Norm::L2);
    e.u_l2_sq = u_l2 * u_l2;
    const double u_h10 = basis.norm(s.u, Norm::H10);
    e.u_h10_sq = u_h10 * u_h10;
    const double z_l2 = basis.norm(s.zhat, Norm::L2);
    e.z_l2_sq = z_l2 * z_l2;
    e.u_lp = std::pow(u_l2, lp_exponent);

    const ScalarField zx1 = fd_dx1(s.zhat, basis.cell_dx1());
    const ScalarField zx2 = fd_dx2(s.zhat, basis.cell_dx2());
    e.z_h1_sq = basis.inner(zx1, zx1) + basis.inner(zx2, zx2);

    const int m1 = basis.spec().modes_x1, m2 = basis.spec().modes_x2;
    double h2 = 0.0;
    for (int j = 1; j <= m1; ++j)
        for (int k = 1; k <= m2; ++k) {
            const double lam = basis.lambda(j, k);
            const double c1 = s.u.c1.at(j, k), c2 = s.u.c2.at(j, k);
            h2 += lam * lam * (c1 * c1 + c2 * c2);
        }
    e.u_h2_sq = h2;

    e.wiener_channel = wiener_channel;
    e.jump_channel = jump_channel;
    return e;
}

}  // namespace

State step(const SpectralBasis& basis, const State& s, const NoiseDraw& draw,
           const NoiseModel& noise, const ModelParams& p, const SimConfig& c) {
    if (!all_finite(s.u) || !all_finite(s.zhat))
        throw ContractError("step: state must be finite");
    return advance(basis, s, draw, noise, p, c, 0, nullptr);
}

TrajectoryRecord simulate(const SpectralBasis& basis, const VectorModal& u0,
                          const ScalarField& z0, const ModelParams& p, const NoiseModel& noise,
                          const SimConfig& c) {
    c.validate();
    if (!all_finite(u0) || !all_finite(z0))
        throw ContractError("simulate: initial data must be finite");
    const std::int64_t steps = c.steps();

    TrajectoryRecord rec;
    rec.seed = c.seed;
    rec.config = c;
    rec.jump_counts.reserve(static_cast<std::size_t>(steps));
    rec.energies.reserve(static_cast<std::size_t>(steps) + 1);

    Rng rng = Rng::from_seed(c.seed);
    State s{0.0, u0, z0};
    double wiener_channel = 0.0, jump_channel = 0.0;

    auto snapshot = [&](const State& st) {
        rec.times.push_back(st.t);
        rec.states.push_back(st);
    };
    rec.energies.push_back(measure(basis, s, c.lp_exponent, wiener_channel, jump_channel));
    snapshot(s);

    try {
        for (std::int64_t m = 0; m < steps; ++m) {
            const NoiseDraw draw = sample_draw(c.dt, noise.wiener, noise.jumps, rng);
            StepStats stats;
            s = advance(basis, s, draw, noise, p, c, static_cast<std::size_t>(m), &stats);
            wiener_channel += stats.wiener_pairing;
            jump_channel += stats.jump_pairing;
            rec.jump_counts.push_back(stats.jump_count);
            rec.energies.push_back(
                measure(basis, s, c.lp_exponent, wiener_channel, jump_channel));
            if ((m + 1) % c.record_stride == 0 || m + 1 == steps) snapshot(s);
        }
    } catch (DivergenceError& err) {
        err.seed = c.seed;
        err.partial = std::make_shared<TrajectoryRecord>(std::move(rec));
        throw;
    }
    return rec;
}

std::pair<TrajectoryRecord, TrajectoryRecord> simulate_pair(
    const SpectralBasis& basis, const VectorModal& u0_a, const VectorModal& u0_b,
    const ScalarField& z0, const ModelParams& p, const NoiseModel& noise, const SimConfig& c) {
    c.validate();
    if (!all_finite(u0_a) || !all_finite(u0_b) || !all_finite(z0))
        throw ContractError("simulate_pair: initial data must be finite");
    const std::int64_t steps = c.steps();

    TrajectoryRecord ra, rb;
    ra.seed = rb.seed = c.seed;
    ra.config = rb.config = c;

    Rng rng = Rng::from_seed(c.seed);
    State sa{0.0, u0_a, z0};
    State sb{0.0, u0_b, z0};
    double wa = 0.0, ja = 0.0, wb = 0.0, jb = 0.0;

    auto snapshot = [](TrajectoryRecord& rec, const State& st) {
        rec.times.push_back(st.t);
        rec.states.push_back(st);
    };
    ra.energies.push_back(measure(basis, sa, c.lp_exponent, wa, ja));
    rb.energies.push_back(measure(basis, sb, c.lp_exponent, wb, jb));
    snapshot(ra, sa);
    snapshot(rb, sb);

    for (std::int64_t m = 0; m < steps; ++m) {
        const NoiseDraw draw = sample_draw(c.dt, noise.wiener, noise.jumps, rng);
        StepStats stats_a, stats_b;
        sa = advance(basis, sa, draw, noise, p, c, static_cast<std::size_t>(m), &stats_a);
        sb = advance(basis, sb, draw, noise, p, c, static_cast<std::size_t>(m), &stats_b);
        wa += stats_a.wiener_pairing;
        ja += stats_a.jump_pairing;
        wb += stats_b.wiener_pairing;
        jb += stats_b.jump_pairing;
        ra.jump_counts.push_back(stats_a.jump_count);
        rb.jump_counts.push_back(stats_b.jump_count);
        ra.energies.push_back(measure(basis, sa, c.lp_exponent, wa, ja));
        rb.energies.push_back(measure(basis, sb, c.lp_exponent, wb, jb));
        if ((m + 1) % c.record_stride == 0 || m + 1 == steps) {
            snapshot(ra, sa);
            snapshot(rb, sb);
        }
    }
    return {std::move(ra), std::move(rb)};
}

namespace {

ScalarModal truncate_modal(const ScalarModal& fine, int m1, int m2) {
    ScalarModal out(m1, m2);
    for (int j = 1; j <= m1; ++j)
        for (int k = 1; k <= m2; ++k) out.at(j, k) = fine.at(j, k);
    return out;
}

VectorModal truncate_modal(const VectorModal& fine, int m1, int m2) {
    VectorModal out;
    out.c1 = truncate_modal(fine.c1, m1, m2);
    out.c2 = truncate_modal(fine.c2, m1, m2);
    return out;
}

ScalarModal embed_modal(const ScalarModal& coarse, int m1, int m2) {
    ScalarModal out(m1, m2);
    for (int j = 1; j <= coarse.m1; ++j)
        for (int k = 1; k <= coarse.m2; ++k) out.at(j, k) = coarse.at(j, k);
    return out;
}

}  // namespace

std::vector<RefinementRow> refinement_study(const VectorModal& u0_fine,
                                            const ScalarModal& z0_fine,
                                            const ParamsFactory& params_for,
                                            const NoiseFactory& noise_for, const SimConfig& base,
                                            const DomainSpec& finest_domain,
                                            const std::vector<int>& mode_levels,
                                            const std::vector<double>& dt_levels) {
    if (mode_levels.empty() || dt_levels.empty())
        throw ContractError("refinement_study: empty level list");
    if (!std::is_sorted(mode_levels.begin(), mode_levels.end()))
        throw ContractError("refinement_study: mode levels must be ascending");
    for (std::size_t i = 1; i < dt_levels.size(); ++i) {
        if (!(dt_levels[i] <= dt_levels[i - 1]))
            throw ContractError("refinement_study: dt levels must be non-increasing");
        const double ratio = dt_levels[i - 1] / dt_levels[i];
        if (std::abs(ratio - std::llround(ratio)) > 1e-9)
            throw ContractError("refinement_study: consecutive dt levels must divide");
    }
    {
        const double n_coarse = base.horizon / dt_levels.front();
        if (std::abs(n_coarse - std::llround(n_coarse)) > 1e-9)
            throw ContractError("refinement_study: horizon must be a multiple of the coarsest dt");
    }
    std::size_t n_levels;
    if (mode_levels.size() == dt_levels.size())
        n_levels = mode_levels.size();
    else if (mode_levels.size() == 1)
        n_levels = dt_levels.size();
    else if (dt_levels.size() == 1)
        n_levels = mode_levels.size();
    else
        throw ContractError("refinement_study: incompatible level lists");
    if (n_levels < 2) throw ContractError("refinement_study: need at least two levels");

    auto mode_at = [&](std::size_t i) {
        return mode_levels.size() == 1 ? mode_levels[0] : mode_levels[i];
    };
    auto dt_at = [&](std::size_t i) { return dt_levels.size() == 1 ? dt_levels[0] : dt_levels[i]; };

    const int fine_modes = mode_at(n_levels - 1);
    const double fine_dt = dt_at(n_levels - 1);
    const double coarse_dt = dt_at(0);
    if (fine_modes > finest_domain.modes_x1 || fine_modes > finest_domain.modes_x2)
        throw ContractError("refinement_study: level exceeds the finest domain");
    if (u0_fine.c1.m1 != finest_domain.modes_x1 || u0_fine.c1.m2 != finest_domain.modes_x2)
        throw DimensionError("refinement_study: initial data shape mismatch");

    base.validate();
    const std::int64_t fine_steps = std::llround(base.horizon / fine_dt);
    const std::int64_t record_every = std::llround(coarse_dt / fine_dt);

    // One noise realization at the finest level.
    SpectralBasis fine_basis(finest_domain);
    const NoiseModel fine_noise = noise_for(fine_basis);
    Rng rng = Rng::from_seed(base.seed);
    std::vector<NoiseDraw> fine_draws;
    fine_draws.reserve(static_cast<std::size_t>(fine_steps));
    for (std::int64_t m = 0; m < fine_steps; ++m)
        fine_draws.push_back(sample_draw(fine_dt, fine_noise.wiener, fine_noise.jumps, rng));

    // Per level: truncate data and noise, step, record at the coarsest grid.
    struct LevelRun {
        int modes;
        double dt;
        std::vector<VectorModal> snapshots;  // at multiples of coarse_dt, t > 0
    };
    std::vector<LevelRun> runs;
    for (std::size_t li = 0; li < n_levels; ++li) {
        const int m = mode_at(li);
        const double dt = dt_at(li);
        DomainSpec dom = finest_domain;
        dom.modes_x1 = dom.modes_x2 = m;
        SpectralBasis basis(dom);
        ModelParams params = params_for(basis);
        NoiseModel noise = noise_for(basis);

        SimConfig cfg = base;
        cfg.dt = dt;
        const std::int64_t steps = std::llround(base.horizon / dt);
        const std::int64_t stride = std::llround(fine_dt * record_every / dt);
        const std::int64_t window = std::llround(dt / fine_dt);

        State s{0.0, truncate_modal(u0_fine, m, m),
                basis.synthesize(truncate_modal(z0_fine, m, m))};
        LevelRun run{m, dt, {}};
        for (std::int64_t ms = 0; ms < steps; ++ms) {
            NoiseDraw draw;
            draw.wiener = VectorModal(m, m);
            for (std::int64_t f = ms * window; f < (ms + 1) * window; ++f) {
                axpy(1.0, truncate_modal(fine_draws[static_cast<std::size_t>(f)].wiener, m, m),
                     draw.wiener);
                const double base_offset = (f - ms * window) * fine_dt;
                for (const JumpEvent& e : fine_draws[static_cast<std::size_t>(f)].jumps)
                    draw.jumps.push_back({base_offset + e.offset, e.mark});
            }
            s = advance(basis, s, draw, noise, params, cfg, static_cast<std::size_t>(ms),
                        nullptr);
            if ((ms + 1) % stride == 0) run.snapshots.push_back(s.u);
        }
        runs.push_back(std::move(run));
    }

    std::vector<RefinementRow> rows;
    for (std::size_t li = 0; li + 1 < n_levels; ++li) {
        const LevelRun& a = runs[li];
        const LevelRun& b = runs[li + 1];
        double acc = 0.0;
        for (std::size_t t = 0; t < a.snapshots.size(); ++t) {
            VectorModal diff;
            diff.c1 = embed_modal(a.snapshots[t].c1, b.modes, b.modes);
            diff.c2 = embed_modal(a.snapshots[t].c2, b.modes, b.modes);
            axpy(-1.0, b.snapshots[t], diff);
            acc += coarse_dt * dot(diff, diff);
        }
        RefinementRow row;
        row.modes_a = a.modes;
        row.modes_b = b.modes;
        row.dt_a = a.dt;
        row.dt_b = b.dt;
        row.distance = std::sqrt(acc);
        rows.push_back(row);
    }
    return rows;
}

std::vector<TrajectoryRecord> simulate_ensemble(const SpectralBasis& basis,
                                                const VectorModal& u0, const ScalarField& z0,
                                                const ModelParams& p, const NoiseModel& noise,
                                                const SimConfig& c, int paths, int threads) {
    if (paths < 1) throw ContractError("simulate_ensemble: paths must be >= 1");
    std::vector<TrajectoryRecord> out(static_cast<std::size_t>(paths));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(paths));

    auto run_range = [&](int begin, int end) {
        for (int i = begin; i < end; ++i) {
            SimConfig cfg = c;
            cfg.seed = Rng::path_seed(c.seed, static_cast<std::uint64_t>(i));
            try {
                out[static_cast<std::size_t>(i)] = simulate(basis, u0, z0, p, noise, cfg);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };

    threads = std::max(1, std::min(threads, paths));
    if (threads == 1) {
        run_range(0, paths);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (paths + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int begin = t * chunk;
            const int end = std::min(paths, begin + chunk);
            if (begin < end) pool.emplace_back(run_range, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
    return out;
}

}  // namespace tidal
