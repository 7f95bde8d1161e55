#include "tidecore/noise.hpp"

#include <algorithm>
#include <cmath>

namespace tidal {

WienerSpec WienerSpec::power_spectrum(const SpectralBasis& basis, double q0, double s,
                                      double sigma_add, double sigma_mult) {
    if (!(q0 >= 0.0)) throw ContractError("WienerSpec: q0 must be >= 0");
    const int m1 = basis.spec().modes_x1, m2 = basis.spec().modes_x2;
    WienerSpec spec;
    spec.q = ScalarModal(m1, m2);
    for (int j = 1; j <= m1; ++j)
        for (int k = 1; k <= m2; ++k)
            spec.q.at(j, k) = q0 * std::pow(basis.lambda(j, k), -s);
    spec.sigma_add = sigma_add;
    spec.sigma_mult = sigma_mult;
    spec.decay_exponent = s;
    spec.validate();
    return spec;
}

void MarkDistribution::validate() const {
    if (kind == Kind::uniform) {
        if (!(lower < upper)) throw ContractError("MarkDistribution: need lower < upper");
        if (!std::isfinite(lower) || !std::isfinite(upper))
            throw ContractError("MarkDistribution: unbounded support");
    } else {
        if (atoms.empty()) throw ContractError("MarkDistribution: no atoms");
        double total = 0.0;
        for (const auto& [value, prob] : atoms) {
            if (!(prob >= 0.0)) throw ContractError("MarkDistribution: negative probability");
            if (!std::isfinite(value)) throw ContractError("MarkDistribution: non-finite atom");
            total += prob;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw ContractError("MarkDistribution: probabilities must sum to 1");
    }
}

double MarkDistribution::mean() const {
    if (kind == Kind::uniform) return 0.5 * (lower + upper);
    double m = 0.0;
    for (const auto& [value, prob] : atoms) m += value * prob;
    return m;
}

double MarkDistribution::second_moment() const {
    if (kind == Kind::uniform)
        return (lower * lower + lower * upper + upper * upper) / 3.0;
    double m = 0.0;
    for (const auto& [value, prob] : atoms) m += value * value * prob;
    return m;
}

double MarkDistribution::fourth_moment() const {
    if (kind == Kind::uniform) {
        // (b^5 - a^5) / (5 (b - a))
        const double a = lower, b = upper;
        return (std::pow(b, 5) - std::pow(a, 5)) / (5.0 * (b - a));
    }
    double m = 0.0;
    for (const auto& [value, prob] : atoms) m += std::pow(value, 4) * prob;
    return m;
}

double MarkDistribution::support_bound() const {
    if (kind == Kind::uniform) return std::max(std::abs(lower), std::abs(upper));
    double m = 0.0;
    for (const auto& [value, prob] : atoms) {
        (void)prob;
        m = std::max(m, std::abs(value));
    }
    return m;
}

double MarkDistribution::sample(Rng& rng) const {
    if (kind == Kind::uniform) return rng.uniform(lower, upper);
    const double u = rng.uniform01();
    double acc = 0.0;
    for (const auto& [value, prob] : atoms) {
        acc += prob;
        if (u <= acc) return value;
    }
    return atoms.back().first;
}

VectorModal sample_wiener(double dt, const WienerSpec& spec, Rng& rng) {
    if (!(dt > 0.0)) throw ContractError("sample_wiener: dt must be positive");
    const int m1 = spec.q.m1, m2 = spec.q.m2;
    VectorModal out(m1, m2);
    // Fixed draw order: component 1 row-major, then component 2.
    for (std::size_t i = 0; i < spec.q.c.size(); ++i) {
        const double sd = std::sqrt(spec.q.c[i] * dt);
        out.c1.c[i] = sd == 0.0 ? 0.0 : sd * rng.normal();
    }
    for (std::size_t i = 0; i < spec.q.c.size(); ++i) {
        const double sd = std::sqrt(spec.q.c[i] * dt);
        out.c2.c[i] = sd == 0.0 ? 0.0 : sd * rng.normal();
    }
    return out;
}

VectorModal apply_sigma(double t, const VectorModal& u, const VectorModal& dW,
                        const WienerSpec& spec) {
    (void)t;  // the built-in family is time homogeneous
    check_same_shape(u.c1, dW.c1, "apply_sigma");
    VectorModal out(u.c1.m1, u.c1.m2);
    const double c0 = spec.sigma_add, c1 = spec.sigma_mult;
    for (std::size_t i = 0; i < u.c1.c.size(); ++i) {
        out.c1.c[i] = (c0 + c1 * u.c1.c[i]) * dW.c1.c[i];
        out.c2.c[i] = (c0 + c1 * u.c2.c[i]) * dW.c2.c[i];
    }
    return out;
}

std::vector<JumpEvent> sample_jumps(double dt, const JumpSpec& spec, Rng& rng) {
    if (!(dt > 0.0)) throw ContractError("sample_jumps: dt must be positive");
    std::vector<JumpEvent> events;
    if (spec.total_intensity == 0.0) return events;
    const std::uint64_t count = rng.poisson(spec.total_intensity * dt);
    events.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        JumpEvent e;
        e.offset = dt * rng.uniform01();  // uniform01 is open, offsets stay interior
        events.push_back(e);
    }
    std::sort(events.begin(), events.end(),
              [](const JumpEvent& a, const JumpEvent& b) { return a.offset < b.offset; });
    for (JumpEvent& e : events) e.mark = spec.marks.sample(rng);
    return events;
}

VectorModal apply_H(const VectorModal& u, double mark, const JumpSpec& spec) {
    VectorModal out(u.c1.m1, u.c1.m2);
    if (spec.amp_add != 0.0 && spec.shape.c1.size() > 0) {
        check_same_shape(u.c1, spec.shape.c1, "apply_H");
        axpy(mark * spec.amp_add, spec.shape, out);
    }
    if (spec.amp_mult != 0.0) axpy(mark * spec.amp_mult, u, out);
    return out;
}

VectorModal compensator(const VectorModal& u, const JumpSpec& spec) {
    VectorModal out(u.c1.m1, u.c1.m2);
    const double weight = spec.total_intensity * spec.marks.mean();
    if (weight == 0.0) return out;
    if (spec.amp_add != 0.0 && spec.shape.c1.size() > 0)
        axpy(weight * spec.amp_add, spec.shape, out);
    if (spec.amp_mult != 0.0) axpy(weight * spec.amp_mult, u, out);
    return out;
}

NoiseDraw sample_draw(double dt, const WienerSpec& wiener, const JumpSpec& jumps, Rng& rng) {
    NoiseDraw draw;
    draw.wiener = sample_wiener(dt, wiener, rng);
    draw.jumps = sample_jumps(dt, jumps, rng);
    return draw;
}

double sigma_lq_norm_sq(const VectorModal& u, const WienerSpec& spec) {
    check_same_shape(u.c1, spec.q, "sigma_lq_norm_sq");
    const double c0 = spec.sigma_add, c1 = spec.sigma_mult;
    double s = 0.0;
    for (std::size_t i = 0; i < spec.q.c.size(); ++i) {
        const double a = c0 + c1 * u.c1.c[i];
        const double b = c0 + c1 * u.c2.c[i];
        s += spec.q.c[i] * (a * a + b * b);
    }
    return s;
}

double jump_l2_intensity(const SpectralBasis& basis, const VectorModal& u, const JumpSpec& spec) {
    VectorModal field = apply_H(u, 1.0, spec);  // c2 psi + c3 u
    const double n = basis.norm(field, Norm::L2);
    return spec.total_intensity * spec.marks.second_moment() * n * n;
}

HypothesisConstants hypothesis_constants(const SpectralBasis& basis, const WienerSpec& wiener,
                                         const JumpSpec& jumps) {
    HypothesisConstants hc;
    const double trace = wiener.trace();
    const double c0 = wiener.sigma_add, c1 = wiener.sigma_mult;
    hc.K_sigma = 2.0 * std::max(c0 * c0, c1 * c1) * trace;
    hc.L_sigma = c1 * c1 * trace;

    const double c2 = jumps.amp_add, c3 = jumps.amp_mult;
    const double psi_l2 =
        jumps.shape.c1.size() > 0 ? basis.norm(jumps.shape, Norm::L2) : 0.0;
    const double z2 = jumps.total_intensity * jumps.marks.second_moment();
    hc.K_jump = 2.0 * z2 * std::max(c2 * c2 * psi_l2 * psi_l2, c3 * c3);
    hc.L_jump = z2 * c3 * c3;

    hc.K = hc.K_sigma + hc.K_jump;
    hc.L = hc.L_sigma + hc.L_jump;

    const double z4 = jumps.total_intensity * jumps.marks.fourth_moment();
    hc.M_p4 = 8.0 * z4 * std::max(std::pow(c2 * psi_l2, 4), std::pow(c3, 4));
    return hc;
}

std::vector<OperatorReport> hypothesis_checks(const SpectralBasis& basis,
                                              const WienerSpec& wiener, const JumpSpec& jumps,
                                              int samples, std::uint64_t seed) {
    if (samples < 1) throw ContractError("hypothesis_checks: samples must be >= 1");
    Rng rng = Rng::from_seed(seed);
    const HypothesisConstants hc = hypothesis_constants(basis, wiener, jumps);
    const int m1 = basis.spec().modes_x1, m2 = basis.spec().modes_x2;

    double h2_worst = 0.0, h2_bound = 0.0, h2_margin = 0.0;
    double h3_worst = 0.0, h3_bound = 0.0, h3_margin = 0.0;
    double p4_worst = 0.0, p4_bound = 0.0, p4_margin = 0.0;
    bool first = true;
    for (int s = 0; s < samples; ++s) {
        const VectorModal u = random_vector_modal(rng, m1, m2);
        const VectorModal v = random_vector_modal(rng, m1, m2);
        const double u_l2 = basis.norm(u, Norm::L2);

        const double growth = sigma_lq_norm_sq(u, wiener) + jump_l2_intensity(basis, u, jumps);
        const double growth_bound = hc.K * (1.0 + u_l2 * u_l2);

        VectorModal du = u;
        axpy(-1.0, v, du);
        const double du_l2 = basis.norm(du, Norm::L2);
        // sigma difference is diagonal: c1 (u_m - v_m) dW direction.
        double sig_diff = 0.0;
        const double c1w = wiener.sigma_mult;
        for (std::size_t i = 0; i < wiener.q.c.size(); ++i) {
            const double a = c1w * du.c1.c[i];
            const double b = c1w * du.c2.c[i];
            sig_diff += wiener.q.c[i] * (a * a + b * b);
        }
        const double jump_diff = jumps.total_intensity * jumps.marks.second_moment() *
                                 std::pow(jumps.amp_mult * du_l2, 2);
        const double lips = sig_diff + jump_diff;
        const double lips_bound = hc.L * du_l2 * du_l2;

        VectorModal hfield = apply_H(u, 1.0, jumps);
        const double h_l2 = basis.norm(hfield, Norm::L2);
        const double p4 = jumps.total_intensity * jumps.marks.fourth_moment() * std::pow(h_l2, 4);
        const double p4_rhs = hc.M_p4 * (1.0 + std::pow(u_l2, 4));

        if (first || growth_bound - growth < h2_margin) {
            h2_worst = growth;
            h2_bound = growth_bound;
            h2_margin = growth_bound - growth;
        }
        if (first || lips_bound - lips < h3_margin) {
            h3_worst = lips;
            h3_bound = lips_bound;
            h3_margin = lips_bound - lips;
        }
        if (first || p4_rhs - p4 < p4_margin) {
            p4_worst = p4;
            p4_bound = p4_rhs;
            p4_margin = p4_rhs - p4;
        }
        first = false;
    }

    std::vector<OperatorReport> reports;
    reports.push_back(make_report("noise_H2_growth", h2_worst, h2_bound, 1e-10));
    reports.push_back(make_report("noise_H3_lipschitz", h3_worst, h3_bound, 1e-10));
    reports.push_back(make_report("noise_Hp4_moment", p4_worst, p4_bound, 1e-10));
    return reports;
}

}  // namespace tidal
