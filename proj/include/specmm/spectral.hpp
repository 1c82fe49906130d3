#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "specmm/mmspace.hpp"
#include "specmm/report.hpp"

namespace specmm {

// Generator of the heat semigroup: L f = "f''" in the weighted-graph sense.
// Invariants: rows sum to zero, m_i L_ij = m_j L_ji, off-diagonal entries are
// nonnegative. Together these force the quadratic form to be negative
// semidefinite, so -L has spectrum {0 = lambda_0 <= lambda_1 <= ...}.
struct LaplacianOp {
    Eigen::MatrixXd L;
    Eigen::VectorXd measure;

    int n() const { return static_cast<int>(L.rows()); }
};

struct OperatorReport {
    bool ok = true;
    double row_sum_defect = 0.0;
    double self_adjoint_defect = 0.0;  // relative to the largest entry
    double offdiag_min = 0.0;
    std::vector<std::string> violations;
};

OperatorReport validate_operator(const Eigen::MatrixXd& L, const Eigen::VectorXd& measure);

// Assembles the canonical operator of a generated space: the second-difference
// stencil scaled by 1/h^2 on cycles, the Kronecker sum on products, the 1x1
// zero matrix on points. Custom spaces must supply their operator explicitly.
LaplacianOp build_laplacian(const FiniteMMS& x);
LaplacianOp build_laplacian(const FiniteMMS& x, const Eigen::MatrixXd& L);

// Full spectral decomposition of -L, orthonormal in L^2(m): sum_x m(x)
// phi_i(x) phi_j(x) = delta_ij. Deterministic: ascending eigenvalues, each
// eigenfunction's first nonnegligible entry made positive, phi_0 pinned to the
// constant 1/sqrt(total mass) when 0 is a simple eigenvalue.
struct SpectralData {
    Eigen::VectorXd lambdas;
    Eigen::MatrixXd phis;  // column i holds phi_i
    Eigen::VectorXd measure;
    double total_mass = 0.0;
    std::string provenance;
};

SpectralData eigensolve(const LaplacianOp& op, const std::string& provenance);

double orthonormality_defect(const SpectralData& sd);
double eigen_residual(const SpectralData& sd, const LaplacianOp& op);  // max over i of
                                                                       // |L phi + lambda phi|_inf / (1+lambda)

// Groups near-equal eigenvalues: a new cluster starts when the gap exceeds
// tol * max(1, lambda). mus holds cluster means, nus the sizes.
struct MultiplicityTable {
    Eigen::VectorXd mus;
    std::vector<int> nus;
    std::vector<int> offsets;     // first eigen-index of each cluster
    std::vector<int> cluster_of;  // eigen-index -> cluster id
    double tol = 0.0;

    int clusters() const { return static_cast<int>(nus.size()); }
};

constexpr double kClusterTolExact = 1e-6;  // generated spaces with exact symmetry
constexpr double kClusterTolNear = 1e-2;   // near-degenerate families

MultiplicityTable cluster_multiplicities(const SpectralData& sd, double tol = kClusterTolExact);

// Draws a Haar-random orthogonal change of basis inside every cluster with
// nu >= 2 and a random sign for every simple cluster; the harmonic column is
// left pinned so the phi_0 convention survives. Same seed, same output.
SpectralData random_spectral_data(const SpectralData& sd, const MultiplicityTable& table,
                                  std::uint64_t seed);

// The exact image of a spectral decomposition under dist*alpha, measure*beta:
// lambda/alpha^2 and phi/sqrt(beta).
SpectralData rescaled_spectral_data(const SpectralData& sd, double alpha, double beta);

Table spectrum_table(const SpectralData& sd, const MultiplicityTable& table);

}  // namespace specmm
