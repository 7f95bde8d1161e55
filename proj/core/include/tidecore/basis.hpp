// Tensor sine basis on the rectangle: transforms, quadrature and norms.
//
// The span is phi_{jk}(x) = (2/sqrt(L1*L2)) sin(j pi x1/L1) sin(k pi x2/L2),
// the Dirichlet-Laplacian eigenbasis with -Lap phi = lambda_{jk} phi,
// lambda_{jk} = pi^2 (j^2/L1^2 + k^2/L2^2). On the uniform grid the trapezoid
// rule inherits the discrete sine orthogonality, so in-span quadratic and
// (with one spare point) quartic integrands are integrated exactly.
#pragma once

#include "tidecore/domain.hpp"

namespace tidal {

class SpectralBasis {
  public:
    explicit SpectralBasis(const DomainSpec& spec);

    const DomainSpec& spec() const { return spec_; }

    // Dirichlet-Laplacian eigenvalue of mode (j,k); 1-based indices.
    double lambda(int j, int k) const;
    double lambda_min() const { return lambda(1, 1); }
    double poincare_constant() const { return 1.0 / std::sqrt(lambda_min()); }

    double eval(ModeIndex m, double x1, double x2) const;

    ScalarModal project(const ScalarField& f) const;
    VectorModal project(const VectorField& f) const;
    ScalarField synthesize(const ScalarModal& c) const;
    VectorField synthesize(const VectorModal& c) const;

    // Partial derivatives of the modal expansion, evaluated on the grid.
    ScalarField synthesize_dx1(const ScalarModal& c) const;
    ScalarField synthesize_dx2(const ScalarModal& c) const;

    // Quadrature pairings against differentiated basis functions:
    // result(j,k) = integral of f * d(phi_{jk})/dx_i over the rectangle.
    ScalarModal project_dx1(const ScalarField& f) const;
    ScalarModal project_dx2(const ScalarField& f) const;

    // Trapezoid quadrature over the full grid (half weights on the boundary).
    double integral(const ScalarField& f) const;
    double inner(const ScalarField& a, const ScalarField& b) const;

    double norm(const ScalarModal& c, Norm which) const;
    double norm(const VectorModal& c, Norm which) const;
    double norm(const ScalarField& f, Norm which) const;
    double norm(const VectorField& f, Norm which) const;

    ScalarModal zero_scalar() const { return ScalarModal(spec_.modes_x1, spec_.modes_x2); }
    VectorModal zero_vector() const { return VectorModal(spec_.modes_x1, spec_.modes_x2); }
    ScalarField zero_field() const { return ScalarField(spec_.grid_x1, spec_.grid_x2); }

    double grid_x1_at(int i1) const { return i1 * h1_; }
    double grid_x2_at(int i2) const { return i2 * h2_; }
    double cell_dx1() const { return h1_; }
    double cell_dx2() const { return h2_; }

  private:
    void check_modal(const ScalarModal& c, const char* where) const;
    void check_field(const ScalarField& f, const char* where) const;

    DomainSpec spec_;
    double h1_, h2_;    // grid spacing
    double norm_;       // 2/sqrt(L1*L2)
    // sin1_[(j-1)*grid + i] = sin(j pi i / intervals); cos tables likewise.
    std::vector<double> sin1_, sin2_, cos1_, cos2_;
    std::vector<double> w1_, w2_;      // trapezoid weights (1/2 at ends)
    std::vector<double> dfac1_, dfac2_;  // j*pi/L1, k*pi/L2
};

}  // namespace tidal
