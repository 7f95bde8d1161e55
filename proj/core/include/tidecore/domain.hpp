// Core value types: domain description, modal/nodal containers, error taxonomy.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tidal {

struct ContractError : std::invalid_argument {
    explicit ContractError(const std::string& msg) : std::invalid_argument(msg) {}
};

struct DimensionError : std::invalid_argument {
    explicit DimensionError(const std::string& msg) : std::invalid_argument(msg) {}
};

struct IndexError : std::out_of_range {
    explicit IndexError(const std::string& msg) : std::out_of_range(msg) {}
};

/// Rectangular basin [0,L1]x[0,L2] with a tensor sine span and a uniform
/// collocation grid. grid_x1/grid_x2 count grid points per direction,
/// boundary included; spacing is length/(grid-1).
struct DomainSpec {
    double length_x1 = 1.0;
    double length_x2 = 1.0;
    int modes_x1 = 8;
    int modes_x2 = 8;
    int grid_x1 = 19;
    int grid_x2 = 19;

    void validate() const {
        if (!(length_x1 > 0.0) || !(length_x2 > 0.0))
            throw ContractError("DomainSpec: lengths must be strictly positive");
        if (modes_x1 < 1 || modes_x2 < 1)
            throw ContractError("DomainSpec: mode counts must be >= 1");
        if (grid_x1 < 2 * modes_x1 + 1 || grid_x2 < 2 * modes_x2 + 1)
            throw ContractError("DomainSpec: grid must satisfy grid >= 2*modes+1 (dealiasing)");
    }

    bool operator==(const DomainSpec&) const = default;
};

enum class Component { x1, x2 };

struct ModeIndex {
    int j = 1;  // 1..modes_x1
    int k = 1;  // 1..modes_x2
};

enum class Norm { L2, L4, H10, Hminus1 };

/// Coefficients of a scalar field over the sine span, row-major in (j,k).
struct ScalarModal {
    int m1 = 0, m2 = 0;
    std::vector<double> c;

    ScalarModal() = default;
    ScalarModal(int m1_, int m2_) : m1(m1_), m2(m2_), c(static_cast<std::size_t>(m1_) * m2_, 0.0) {}

    double& at(int j, int k) { return c[static_cast<std::size_t>(j - 1) * m2 + (k - 1)]; }
    double at(int j, int k) const { return c[static_cast<std::size_t>(j - 1) * m2 + (k - 1)]; }
    std::size_t size() const { return c.size(); }
};

struct VectorModal {
    ScalarModal c1, c2;

    VectorModal() = default;
    VectorModal(int m1, int m2) : c1(m1, m2), c2(m1, m2) {}
    std::size_t size() const { return c1.size() + c2.size(); }
};

/// Grid values, row-major in (i1,i2), boundary points included.
struct ScalarField {
    int n1 = 0, n2 = 0;  // point counts
    std::vector<double> v;

    ScalarField() = default;
    ScalarField(int n1_, int n2_) : n1(n1_), n2(n2_), v(static_cast<std::size_t>(n1_) * n2_, 0.0) {}

    double& at(int i1, int i2) { return v[static_cast<std::size_t>(i1) * n2 + i2]; }
    double at(int i1, int i2) const { return v[static_cast<std::size_t>(i1) * n2 + i2]; }
    std::size_t size() const { return v.size(); }
};

struct VectorField {
    ScalarField c1, c2;

    VectorField() = default;
    VectorField(int n1, int n2) : c1(n1, n2), c2(n1, n2) {}
};

inline void check_same_shape(const ScalarModal& a, const ScalarModal& b, const char* where) {
    if (a.m1 != b.m1 || a.m2 != b.m2)
        throw DimensionError(std::string(where) + ": modal shape mismatch");
}

inline void check_same_shape(const ScalarField& a, const ScalarField& b, const char* where) {
    if (a.n1 != b.n1 || a.n2 != b.n2)
        throw DimensionError(std::string(where) + ": grid shape mismatch");
}

inline double dot(const ScalarModal& a, const ScalarModal& b) {
    check_same_shape(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.c.size(); ++i) s += a.c[i] * b.c[i];
    return s;
}

inline double dot(const VectorModal& a, const VectorModal& b) {
    return dot(a.c1, b.c1) + dot(a.c2, b.c2);
}

inline void axpy(double a, const ScalarModal& x, ScalarModal& y) {
    check_same_shape(x, y, "axpy");
    for (std::size_t i = 0; i < x.c.size(); ++i) y.c[i] += a * x.c[i];
}

inline void axpy(double a, const VectorModal& x, VectorModal& y) {
    axpy(a, x.c1, y.c1);
    axpy(a, x.c2, y.c2);
}

inline void scale(ScalarModal& x, double a) {
    for (double& ci : x.c) ci *= a;
}

inline void scale(VectorModal& x, double a) {
    scale(x.c1, a);
    scale(x.c2, a);
}

inline bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

inline bool all_finite(const ScalarModal& m) { return all_finite(m.c); }
inline bool all_finite(const VectorModal& m) { return all_finite(m.c1) && all_finite(m.c2); }
inline bool all_finite(const ScalarField& f) { return all_finite(f.v); }
inline bool all_finite(const VectorField& f) { return all_finite(f.c1) && all_finite(f.c2); }

}  // namespace tidal
