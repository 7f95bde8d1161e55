#include "tidecore/basis.hpp"

#include <numbers>

namespace tidal {

namespace {
constexpr double kPi = std::numbers::pi;
}

SpectralBasis::SpectralBasis(const DomainSpec& spec) : spec_(spec) {
    spec_.validate();
    const int g1 = spec_.grid_x1, g2 = spec_.grid_x2;
    const int m1 = spec_.modes_x1, m2 = spec_.modes_x2;
    h1_ = spec_.length_x1 / (g1 - 1);
    h2_ = spec_.length_x2 / (g2 - 1);
    norm_ = 2.0 / std::sqrt(spec_.length_x1 * spec_.length_x2);

    // Boundary entries of the sine tables are exact zeros so synthesized
    // velocity fields honor the Dirichlet condition bit for bit.
    sin1_.resize(static_cast<std::size_t>(m1) * g1);
    cos1_.resize(static_cast<std::size_t>(m1) * g1);
    for (int j = 1; j <= m1; ++j)
        for (int i = 0; i < g1; ++i) {
            const double t = kPi * j * i / (g1 - 1);
            const bool boundary = i == 0 || i == g1 - 1;
            sin1_[static_cast<std::size_t>(j - 1) * g1 + i] = boundary ? 0.0 : std::sin(t);
            cos1_[static_cast<std::size_t>(j - 1) * g1 + i] = std::cos(t);
        }
    sin2_.resize(static_cast<std::size_t>(m2) * g2);
    cos2_.resize(static_cast<std::size_t>(m2) * g2);
    for (int k = 1; k <= m2; ++k)
        for (int i = 0; i < g2; ++i) {
            const double t = kPi * k * i / (g2 - 1);
            const bool boundary = i == 0 || i == g2 - 1;
            sin2_[static_cast<std::size_t>(k - 1) * g2 + i] = boundary ? 0.0 : std::sin(t);
            cos2_[static_cast<std::size_t>(k - 1) * g2 + i] = std::cos(t);
        }

    w1_.assign(g1, 1.0);
    w1_.front() = w1_.back() = 0.5;
    w2_.assign(g2, 1.0);
    w2_.front() = w2_.back() = 0.5;

    dfac1_.resize(m1);
    for (int j = 1; j <= m1; ++j) dfac1_[j - 1] = j * kPi / spec_.length_x1;
    dfac2_.resize(m2);
    for (int k = 1; k <= m2; ++k) dfac2_[k - 1] = k * kPi / spec_.length_x2;
}

double SpectralBasis::lambda(int j, int k) const {
    if (j < 1 || j > spec_.modes_x1 || k < 1 || k > spec_.modes_x2)
        throw IndexError("lambda: mode index out of range");
    const double a = j * kPi / spec_.length_x1;
    const double b = k * kPi / spec_.length_x2;
    return a * a + b * b;
}

double SpectralBasis::eval(ModeIndex m, double x1, double x2) const {
    if (m.j < 1 || m.j > spec_.modes_x1 || m.k < 1 || m.k > spec_.modes_x2)
        throw IndexError("eval: mode index out of range");
    if (x1 < 0.0 || x1 > spec_.length_x1 || x2 < 0.0 || x2 > spec_.length_x2)
        throw ContractError("eval: point outside the closed rectangle");
    if (x1 == 0.0 || x1 == spec_.length_x1 || x2 == 0.0 || x2 == spec_.length_x2) return 0.0;
    return norm_ * std::sin(m.j * kPi * x1 / spec_.length_x1) *
           std::sin(m.k * kPi * x2 / spec_.length_x2);
}

void SpectralBasis::check_modal(const ScalarModal& c, const char* where) const {
    if (c.m1 != spec_.modes_x1 || c.m2 != spec_.modes_x2)
        throw DimensionError(std::string(where) + ": modal shape does not match the basis");
}

void SpectralBasis::check_field(const ScalarField& f, const char* where) const {
    if (f.n1 != spec_.grid_x1 || f.n2 != spec_.grid_x2)
        throw DimensionError(std::string(where) + ": grid shape does not match the basis");
}

ScalarModal SpectralBasis::project(const ScalarField& f) const {
    check_field(f, "project");
    const int g1 = spec_.grid_x1, g2 = spec_.grid_x2;
    const int m1 = spec_.modes_x1, m2 = spec_.modes_x2;
    // Separable contraction; boundary rows drop out since sin vanishes there.
    std::vector<double> tmp(static_cast<std::size_t>(m1) * g2, 0.0);
    for (int j = 0; j < m1; ++j) {
        const double* sj = &sin1_[static_cast<std::size_t>(j) * g1];
        for (int i1 = 1; i1 < g1 - 1; ++i1) {
            const double s = sj[i1];
            const double* row = &f.v[static_cast<std::size_t>(i1) * g2];
            double* out = &tmp[static_cast<std::size_t>(j) * g2];
            for (int i2 = 0; i2 < g2; ++i2) out[i2] += s * row[i2];
        }
    }
    ScalarModal c(m1, m2);
    const double scale = norm_ * h1_ * h2_;
    for (int j = 0; j < m1; ++j)
        for (int k = 0; k < m2; ++k) {
            const double* sk = &sin2_[static_cast<std::size_t>(k) * g2];
            const double* t = &tmp[static_cast<std::size_t>(j) * g2];
            double acc = 0.0;
            for (int i2 = 1; i2 < g2 - 1; ++i2) acc += t[i2] * sk[i2];
            c.c[static_cast<std::size_t>(j) * m2 + k] = scale * acc;
        }
    return c;
}

VectorModal SpectralBasis::project(const VectorField& f) const {
    VectorModal out;
    out.c1 = project(f.c1);
    out.c2 = project(f.c2);
    return out;
}

ScalarField SpectralBasis::synthesize(const ScalarModal& c) const {
    check_modal(c, "synthesize");
    const int g1 = spec_.grid_x1, g2 = spec_.grid_x2;
    const int m1 = spec_.modes_x1, m2 = spec_.modes_x2;
    std::vector<double> tmp(static_cast<std::size_t>(m1) * g2, 0.0);
    for (int j = 0; j < m1; ++j) {
        double* out = &tmp[static_cast<std::size_t>(j) * g2];
        for (int k = 0; k < m2; ++k) {
            const double cc = c.c[static_cast<std::size_t>(j) * m2 + k];
            if (cc == 0.0) continue;
            const double* sk = &sin2_[static_cast<std::size_t>(k) * g2];
            for (int i2 = 0; i2 < g2; ++i2) out[i2] += cc * sk[i2];
        }
    }
    ScalarField f(g1, g2);
    for (int i1 = 1; i1 < g1 - 1; ++i1) {
        double* row = &f.v[static_cast<std::size_t>(i1) * g2];
        for (int j = 0; j < m1; ++j) {
            const double s = norm_ * sin1_[static_cast<std::size_t>(j) * g1 + i1];
            const double* t = &tmp[static_cast<std::size_t>(j) * g2];
            for (int i2 = 0; i2 < g2; ++i2) row[i2] += s * t[i2];
        }
    }
    return f;
}

VectorField SpectralBasis::synthesize(const VectorModal& c) const {
    VectorField out;
    out.c1 = synthesize(c.c1);
    out.c2 = synthesize(c.c2);
    return out;
}

ScalarField SpectralBasis::synthesize_dx1(const ScalarModal& c) const {
    check_modal(c, "synthesize_dx1");
    const int g1 = spec_.grid_x1, g2 = spec_.grid_x2;
    const int m1 = spec_.modes_x1, m2 = spec_.modes_x2;
    std::vector<double> tmp(static_cast<std::size_t>(m1) * g2, 0.0);
    for (int j = 0; j < m1; ++j) {
        double* out = &tmp[static_cast<std::size_t>(j) * g2];
        for (int k = 0; k < m2; ++k) {
            const double cc = c.c[static_cast<std::size_t>(j) * m2 + k];
            if (cc == 0.0) continue;
            const double* sk = &sin2_[static_cast<std::size_t>(k) * g2];
            for (int i2 = 0; i2 < g2; ++i2) out[i2] += cc * sk[i2];
        }
    }
    ScalarField f(g1, g2);
    for (int i1 = 0; i1 < g1; ++i1) {
        double* row = &f.v[static_cast<std::size_t>(i1) * g2];
        for (int j = 0; j < m1; ++j) {
            const double s = norm_ * dfac1_[j] * cos1_[static_cast<std::size_t>(j) * g1 + i1];
            const double* t = &tmp[static_cast<std::size_t>(j) * g2];
            for (int i2 = 0; i2 < g2; ++i2) row[i2] += s * t[i2];
        }
    }
    return f;
}

ScalarField SpectralBasis::synthesize_dx2(const ScalarModal& c) const {
    check_modal(c, "synthesize_dx2");
    const int g1 = spec_.grid_x1, g2 = spec_.grid_x2;
    const int m1 = spec_.modes_x1, m2 = spec_.modes_x2;
    std::vector<double> tmp(static_cast<std::size_t>(m1) * g2, 0.0);
    for (int j = 0; j < m1; ++j) {
        double* out = &tmp[static_cast<std::size_t>(j) * g2];
        for (int k = 0; k < m2; ++k) {
            const double cc = c.c[static_cast<std::size_t>(j) * m2 + k] * dfac2_[k];
            if (cc == 0.0) continue;
            const double* ck = &cos2_[static_cast<std::size_t>(k) * g2];
            for (int i2 = 0; i2 < g2; ++i2) out[i2] += cc * ck[i2];
        }
    }
    ScalarField f(g1, g2);
    for (int i1 = 1; i1 < g1 - 1; ++i1) {
        double* row = &f.v[static_cast<std::size_t>(i1) * g2];
        for (int j = 0; j < m1; ++j) {
            const double s = norm_ * sin1_[static_cast<std::size_t>(j) * g1 + i1];
            const double* t = &tmp[static_cast<std::size_t>(j) * g2];
            for (int i2 = 0; i2 < g2; ++i2) row[i2] += s * t[i2];
        }
    }
    return f;
}

ScalarModal SpectralBasis::project_dx1(const ScalarField& f) const {
    check_field(f, "project_dx1");
    const int g1 = spec_.grid_x1, g2 = spec_.grid_x2;
    const int m1 = spec_.modes_x1, m2 = spec_.modes_x2;
    // cos factor does not vanish on the x1 boundary, keep trapezoid weights.
    std::vector<double> tmp(static_cast<std::size_t>(m1) * g2, 0.0);
    for (int j = 0; j < m1; ++j) {
        const double* cj = &cos1_[static_cast<std::size_t>(j) * g1];
        double* out = &tmp[static_cast<std::size_t>(j) * g2];
        for (int i1 = 0; i1 < g1; ++i1) {
            const double s = w1_[i1] * cj[i1];
            const double* row = &f.v[static_cast<std::size_t>(i1) * g2];
            for (int i2 = 0; i2 < g2; ++i2) out[i2] += s * row[i2];
        }
    }
    ScalarModal c(m1, m2);
    for (int j = 0; j < m1; ++j) {
        const double scale = norm_ * h1_ * h2_ * dfac1_[j];
        for (int k = 0; k < m2; ++k) {
            const double* sk = &sin2_[static_cast<std::size_t>(k) * g2];
            const double* t = &tmp[static_cast<std::size_t>(j) * g2];
            double acc = 0.0;
            for (int i2 = 1; i2 < g2 - 1; ++i2) acc += t[i2] * sk[i2];
            c.c[static_cast<std::size_t>(j) * m2 + k] = scale * acc;
        }
    }
    return c;
}

ScalarModal SpectralBasis::project_dx2(const ScalarField& f) const {
    check_field(f, "project_dx2");
    const int g1 = spec_.grid_x1, g2 = spec_.grid_x2;
    const int m1 = spec_.modes_x1, m2 = spec_.modes_x2;
    std::vector<double> tmp(static_cast<std::size_t>(m1) * g2, 0.0);
    for (int j = 0; j < m1; ++j) {
        const double* sj = &sin1_[static_cast<std::size_t>(j) * g1];
        double* out = &tmp[static_cast<std::size_t>(j) * g2];
        for (int i1 = 1; i1 < g1 - 1; ++i1) {
            const double s = sj[i1];
            const double* row = &f.v[static_cast<std::size_t>(i1) * g2];
            for (int i2 = 0; i2 < g2; ++i2) out[i2] += s * row[i2];
        }
    }
    ScalarModal c(m1, m2);
    for (int j = 0; j < m1; ++j)
        for (int k = 0; k < m2; ++k) {
            const double* ck = &cos2_[static_cast<std::size_t>(k) * g2];
            const double* t = &tmp[static_cast<std::size_t>(j) * g2];
            double acc = 0.0;
            for (int i2 = 0; i2 < g2; ++i2) acc += w2_[i2] * t[i2] * ck[i2];
            c.c[static_cast<std::size_t>(j) * m2 + k] = norm_ * h1_ * h2_ * dfac2_[k] * acc;
        }
    return c;
}

double SpectralBasis::integral(const ScalarField& f) const {
    check_field(f, "integral");
    const int g1 = spec_.grid_x1, g2 = spec_.grid_x2;
    double acc = 0.0;
    for (int i1 = 0; i1 < g1; ++i1) {
        const double* row = &f.v[static_cast<std::size_t>(i1) * g2];
        double rowacc = 0.0;
        for (int i2 = 0; i2 < g2; ++i2) rowacc += w2_[i2] * row[i2];
        acc += w1_[i1] * rowacc;
    }
    return acc * h1_ * h2_;
}

double SpectralBasis::inner(const ScalarField& a, const ScalarField& b) const {
    check_field(a, "inner");
    check_same_shape(a, b, "inner");
    const int g1 = spec_.grid_x1, g2 = spec_.grid_x2;
    double acc = 0.0;
    for (int i1 = 0; i1 < g1; ++i1) {
        const double* ra = &a.v[static_cast<std::size_t>(i1) * g2];
        const double* rb = &b.v[static_cast<std::size_t>(i1) * g2];
        double rowacc = 0.0;
        for (int i2 = 0; i2 < g2; ++i2) rowacc += w2_[i2] * ra[i2] * rb[i2];
        acc += w1_[i1] * rowacc;
    }
    return acc * h1_ * h2_;
}

double SpectralBasis::norm(const ScalarModal& c, Norm which) const {
    check_modal(c, "norm");
    const int m2 = spec_.modes_x2;
    switch (which) {
        case Norm::L2: {
            double s = 0.0;
            for (double x : c.c) s += x * x;
            return std::sqrt(s);
        }
        case Norm::H10: {
            double s = 0.0;
            for (int j = 1; j <= spec_.modes_x1; ++j)
                for (int k = 1; k <= m2; ++k) {
                    const double x = c.at(j, k);
                    s += lambda(j, k) * x * x;
                }
            return std::sqrt(s);
        }
        case Norm::Hminus1: {
            double s = 0.0;
            for (int j = 1; j <= spec_.modes_x1; ++j)
                for (int k = 1; k <= m2; ++k) {
                    const double x = c.at(j, k);
                    s += x * x / lambda(j, k);
                }
            return std::sqrt(s);
        }
        case Norm::L4:
            throw ContractError("norm: L4 requires a nodal field (synthesize first)");
    }
    throw ContractError("norm: unknown norm");
}

double SpectralBasis::norm(const VectorModal& c, Norm which) const {
    if (which == Norm::L4)
        throw ContractError("norm: L4 requires a nodal field (synthesize first)");
    const double a = norm(c.c1, which);
    const double b = norm(c.c2, which);
    return std::sqrt(a * a + b * b);
}

double SpectralBasis::norm(const ScalarField& f, Norm which) const {
    check_field(f, "norm");
    switch (which) {
        case Norm::L2: {
            double acc = 0.0;
            const int g1 = spec_.grid_x1, g2 = spec_.grid_x2;
            for (int i1 = 0; i1 < g1; ++i1) {
                const double* row = &f.v[static_cast<std::size_t>(i1) * g2];
                double rowacc = 0.0;
                for (int i2 = 0; i2 < g2; ++i2) rowacc += w2_[i2] * row[i2] * row[i2];
                acc += w1_[i1] * rowacc;
            }
            return std::sqrt(acc * h1_ * h2_);
        }
        case Norm::L4: {
            double acc = 0.0;
            const int g1 = spec_.grid_x1, g2 = spec_.grid_x2;
            for (int i1 = 0; i1 < g1; ++i1) {
                const double* row = &f.v[static_cast<std::size_t>(i1) * g2];
                double rowacc = 0.0;
                for (int i2 = 0; i2 < g2; ++i2) {
                    const double x2 = row[i2] * row[i2];
                    rowacc += w2_[i2] * x2 * x2;
                }
                acc += w1_[i1] * rowacc;
            }
            return std::pow(acc * h1_ * h2_, 0.25);
        }
        case Norm::H10:
        case Norm::Hminus1:
            throw ContractError("norm: H10/Hminus1 need modal coefficients");
    }
    throw ContractError("norm: unknown norm");
}

double SpectralBasis::norm(const VectorField& f, Norm which) const {
    check_field(f.c1, "norm");
    check_same_shape(f.c1, f.c2, "norm");
    switch (which) {
        case Norm::L2: {
            const double a = norm(f.c1, Norm::L2);
            const double b = norm(f.c2, Norm::L2);
            return std::sqrt(a * a + b * b);
        }
        case Norm::L4: {
            // || |f| ||_{L4}: quadrature of (f1^2+f2^2)^2.
            double acc = 0.0;
            const int g1 = spec_.grid_x1, g2 = spec_.grid_x2;
            for (int i1 = 0; i1 < g1; ++i1) {
                const double* r1 = &f.c1.v[static_cast<std::size_t>(i1) * g2];
                const double* r2 = &f.c2.v[static_cast<std::size_t>(i1) * g2];
                double rowacc = 0.0;
                for (int i2 = 0; i2 < g2; ++i2) {
                    const double m = r1[i2] * r1[i2] + r2[i2] * r2[i2];
                    rowacc += w2_[i2] * m * m;
                }
                acc += w1_[i1] * rowacc;
            }
            return std::pow(acc * h1_ * h2_, 0.25);
        }
        case Norm::H10:
        case Norm::Hminus1:
            throw ContractError("norm: H10/Hminus1 need modal coefficients");
    }
    throw ContractError("norm: unknown norm");
}

}  // namespace tidal
