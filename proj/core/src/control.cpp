#include "tidecore/control.hpp"

#include <algorithm>
#include <cmath>

#include "tidecore/rng.hpp"

namespace tidal {

ControlProblem::ControlProblem(const SpectralBasis& basis, VectorModal u0, ScalarField z0,
                               int control_modes, double control_bound, CostSpec cost,
                               ModelParams params, NoiseModel noise, SimConfig sim,
                               int ensemble_size, std::uint64_t master_seed)
    : u0_(std::move(u0)), z0_(std::move(z0)), control_modes_(control_modes),
      control_bound_(control_bound), cost_(std::move(cost)), params_(std::move(params)),
      noise_(std::move(noise)), sim_(sim), ensemble_size_(ensemble_size) {
    const DomainSpec& spec = basis.spec();
    const int total_modes = spec.modes_x1 * spec.modes_x2;
    if (control_modes_ < 1 || control_modes_ > total_modes)
        throw ContractError("ControlProblem: control_modes out of range");
    if (!(control_bound_ > 0.0)) throw ContractError("ControlProblem: control bound must be > 0");
    if (ensemble_size_ < 1) throw ContractError("ControlProblem: ensemble size must be >= 1");
    cost_.validate();
    sim_.validate();
    if (!cost_.u_ref.empty() &&
        cost_.u_ref.size() != static_cast<std::size_t>(sim_.steps()) + 1)
        throw DimensionError("ControlProblem: tracking target must cover every step time");

    mode_order_.reserve(static_cast<std::size_t>(total_modes));
    for (int j = 1; j <= spec.modes_x1; ++j)
        for (int k = 1; k <= spec.modes_x2; ++k) mode_order_.push_back({j, k});
    std::sort(mode_order_.begin(), mode_order_.end(),
              [&](const ModeIndex& a, const ModeIndex& b) {
                  const double la = basis.lambda(a.j, a.k), lb = basis.lambda(b.j, b.k);
                  if (la != lb) return la < lb;
                  if (a.j != b.j) return a.j < b.j;
                  return a.k < b.k;
              });

    seed_set_.reserve(static_cast<std::size_t>(ensemble_size_));
    for (int i = 0; i < ensemble_size_; ++i)
        seed_set_.push_back(Rng::path_seed(master_seed, static_cast<std::uint64_t>(i)));
}

VectorModal ControlProblem::control_to_modal(const std::vector<double>& flat) const {
    if (flat.size() != static_cast<std::size_t>(dimension()))
        throw DimensionError("control_to_modal: coefficient count mismatch");
    VectorModal out(u0_.c1.m1, u0_.c1.m2);
    for (int i = 0; i < control_modes_; ++i) {
        const ModeIndex m = mode_order_[static_cast<std::size_t>(i)];
        out.c1.at(m.j, m.k) = flat[static_cast<std::size_t>(i)];
        out.c2.at(m.j, m.k) = flat[static_cast<std::size_t>(control_modes_ + i)];
    }
    return out;
}

double ControlProblem::control_l2_sq(const std::vector<double>& flat) const {
    double s = 0.0;
    for (double x : flat) s += x * x;
    return s;
}

std::vector<double> ControlProblem::project_onto_bound(std::vector<double> flat) const {
    const double n2 = control_l2_sq(flat);
    if (n2 > control_bound_) {
        const double scale = std::sqrt(control_bound_ / n2);
        for (double& x : flat) x *= scale;
    }
    return flat;
}

CostValue evaluate_cost(const SpectralBasis& basis, const std::vector<double>& control,
                        const ControlProblem& prob) {
    const std::vector<double> projected = prob.project_onto_bound(control);
    const VectorModal control_modal = prob.control_to_modal(projected);
    VectorModal start = prob.u0();
    axpy(1.0, control_modal, start);

    const double dt = prob.sim().dt;
    const double reg_density = prob.cost().w_reg * prob.control_l2_sq(projected);
    const std::int64_t steps = prob.sim().steps();

    std::vector<double> costs;
    costs.reserve(prob.seed_set().size());
    for (std::uint64_t seed : prob.seed_set()) {
        SimConfig cfg = prob.sim();
        cfg.seed = seed;
        cfg.record_stride = 1;  // the tracking residual needs every step
        TrajectoryRecord traj;
        try {
            traj = simulate(basis, start, prob.z0(), prob.params(), prob.noise(), cfg);
        } catch (DivergenceError& err) {
            err.seed = seed;
            throw;
        }
        // Left-endpoint Riemann sum; the regularizer is exact this way.
        double acc = 0.0;
        for (std::int64_t m = 0; m < steps; ++m) {
            double track = 0.0;
            if (prob.cost().w_track > 0.0) {
                VectorModal diff = traj.states[static_cast<std::size_t>(m)].u;
                if (!prob.cost().u_ref.empty())
                    axpy(-1.0, prob.cost().u_ref[static_cast<std::size_t>(m)], diff);
                track = prob.cost().w_track * dot(diff, diff);
            }
            acc += dt * (track + reg_density);
        }
        costs.push_back(acc);
    }

    CostValue out;
    double mean = 0.0;
    for (double c : costs) mean += c;
    mean /= static_cast<double>(costs.size());
    out.j_hat = mean;
    if (costs.size() > 1) {
        double ss = 0.0;
        for (double c : costs) ss += (c - mean) * (c - mean);
        out.stderr_mean =
            std::sqrt(ss / static_cast<double>(costs.size() - 1) /
                      static_cast<double>(costs.size()));
    }
    return out;
}

std::vector<OperatorReport> check_admissibility(const SpectralBasis& basis, const CostSpec& cost,
                                                int samples, std::uint64_t seed) {
    cost.validate();
    if (samples < 1) throw ContractError("check_admissibility: samples must be >= 1");
    Rng rng = Rng::from_seed(seed);
    const int m1 = basis.spec().modes_x1, m2 = basis.spec().modes_x2;

    // L - k = w_track |u - u_ref|^2 pointwise; sample random states and grid
    // points and track the minimum.
    double min_gap = 0.0;
    bool first = true;
    for (int s = 0; s < samples; ++s) {
        const VectorModal u = random_vector_modal(rng, m1, m2);
        const VectorField un = basis.synthesize(u);
        const int i1 = static_cast<int>(rng.uniform01() * (basis.spec().grid_x1 - 1));
        const int i2 = static_cast<int>(rng.uniform01() * (basis.spec().grid_x2 - 1));
        const double r1 = un.c1.at(i1, i2), r2 = un.c2.at(i1, i2);
        const double gap = cost.w_track * (r1 * r1 + r2 * r2);
        if (first || gap < min_gap) min_gap = gap;
        first = false;
    }

    // Coercivity along a ray: the integral of k(sU) scales exactly like s^2.
    const VectorModal U = random_vector_modal(rng, m1, m2);
    const double base = cost.w_reg * dot(U, U);
    double max_dev = 0.0;
    for (double s : {2.0, 4.0, 8.0, 16.0}) {
        const double scaled = cost.w_reg * s * s * dot(U, U) / (s * s);
        max_dev = std::max(max_dev, std::abs(scaled - base) / std::max(base, 1e-300));
    }

    std::vector<OperatorReport> reports;
    reports.push_back(make_report("cost_L_dominates_k", -min_gap, 0.0, 1e-12));
    reports.push_back(make_report("cost_coercivity_ray", max_dev, 0.0, 1e-10));
    return reports;
}

namespace {

void record(OptimizationTrace& trace, const std::vector<double>& control, const CostValue& value,
            int evaluations, std::string note) {
    TraceEntry e;
    e.control = control;
    e.j_value = value.j_hat;
    e.stderr_mean = value.stderr_mean;
    e.evaluations_used = evaluations;
    e.note = std::move(note);
    trace.iterates.push_back(std::move(e));
}

}  // namespace

OptimizationTrace optimize(const SpectralBasis& basis, const ControlProblem& prob,
                           OptimizeMethod method, int budget) {
    if (budget < 1) throw ContractError("optimize: budget must be >= 1");
    OptimizationTrace trace;
    int evals = 0;
    auto eval = [&](const std::vector<double>& u) {
        ++evals;
        return evaluate_cost(basis, u, prob);
    };

    std::vector<double> current(static_cast<std::size_t>(prob.dimension()), 0.0);
    current = prob.project_onto_bound(std::move(current));
    CostValue current_value = eval(current);
    record(trace, current, current_value, evals, "start");

    if (method == OptimizeMethod::fd_gradient) {
        const int dim = prob.dimension();
        bool progress = true;
        while (progress && evals + 2 * dim < budget) {
            progress = false;
            // Central differences with a relative step.
            std::vector<double> grad(static_cast<std::size_t>(dim), 0.0);
            for (int i = 0; i < dim; ++i) {
                const double h = 1e-4 * (1.0 + std::abs(current[static_cast<std::size_t>(i)]));
                std::vector<double> up = current, down = current;
                up[static_cast<std::size_t>(i)] += h;
                down[static_cast<std::size_t>(i)] -= h;
                grad[static_cast<std::size_t>(i)] =
                    (eval(up).j_hat - eval(down).j_hat) / (2.0 * h);
            }
            double gnorm = 0.0;
            for (double g : grad) gnorm += g * g;
            gnorm = std::sqrt(gnorm);
            if (gnorm == 0.0) break;

            // Backtracking line search along the negative gradient; accept
            // only strict decreases.
            double step = 1.0;
            for (int bt = 0; bt < 30 && evals < budget; ++bt, step *= 0.5) {
                std::vector<double> trial = current;
                for (int i = 0; i < dim; ++i)
                    trial[static_cast<std::size_t>(i)] -=
                        step * grad[static_cast<std::size_t>(i)];
                trial = prob.project_onto_bound(std::move(trial));
                const CostValue tv = eval(trial);
                if (tv.j_hat < current_value.j_hat) {
                    current = std::move(trial);
                    current_value = tv;
                    record(trace, current, current_value, evals,
                           "fd_gradient step " + std::to_string(step));
                    progress = true;
                    break;
                }
            }
        }
        trace.budget_exhausted = evals + 2 * dim >= budget;
    } else {
        // Cyclic coordinate probing: lower mode index first, + before -,
        // halve the step after a full cycle without improvement.
        double step = 0.5;
        while (step > 1e-9 && evals < budget) {
            bool improved = false;
            for (int i = 0; i < prob.dimension() && evals + 1 < budget; ++i) {
                for (double sign : {+1.0, -1.0}) {
                    std::vector<double> trial = current;
                    trial[static_cast<std::size_t>(i)] += sign * step;
                    trial = prob.project_onto_bound(std::move(trial));
                    const CostValue tv = eval(trial);
                    if (tv.j_hat < current_value.j_hat) {
                        current = std::move(trial);
                        current_value = tv;
                        record(trace, current, current_value, evals,
                               "coordinate " + std::to_string(i) +
                                   (sign > 0 ? " +" : " -") + std::to_string(step));
                        improved = true;
                        break;
                    }
                    if (evals >= budget) break;
                }
            }
            if (!improved) step *= 0.5;
        }
        trace.budget_exhausted = evals >= budget;
    }

    trace.best_control = current;
    trace.best_j = current_value.j_hat;
    trace.best_stderr = current_value.stderr_mean;
    trace.evaluations = evals;
    return trace;
}

}  // namespace tidal
