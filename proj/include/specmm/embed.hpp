#pragma once

#include <string>

#include <Eigen/Dense>

#include "specmm/report.hpp"
#include "specmm/spectral.hpp"

namespace specmm {

enum class CloudVariant { I, Phi };

// finite point cloud in a truncated l^2 model; column j holds the embedded
// coordinates of point j, tail_sup is the exact sup norm of everything the
// truncation dropped (finite spectra make this computable, not just bounded)
struct EmbeddedCloud {
    Eigen::MatrixXd coords;  // M x n
    double t = 0.0;
    int M = 0;
    double tail_sup = 0.0;
    CloudVariant variant = CloudVariant::I;
    std::string provenance;
};

// eigenfunction embedding: coordinate i of point x is
// sqrt(total_mass) * exp(-lambda_i t / 2) * phi_i(x), i = 1..M.
// M is the smallest level with tail_sup <= tail_tol, then extended to the
// nearest eigenvalue-cluster boundary so truncation commutes with basis
// rotations inside degenerate clusters.
EmbeddedCloud embed_I(const SpectralData& sd, double t, double tail_tol);

// default tolerance: 1e-9 times the diameter of the untruncated cloud
EmbeddedCloud embed_I(const SpectralData& sd, double t);

// heat kernel row embedding: coordinate i of point x is exp(-lambda_i t) *
// phi_i(x), i = 0..n-1, so l^2 column distances reproduce weighted distances
// between kernel rows exactly
EmbeddedCloud embed_Phi(const SpectralData& sd, double t);

// exact sup over points of the l^2 norm of the coordinates an I-variant
// truncation at level M drops; 0 <= M <= n-1
double tail_bound(const SpectralData& sd, double t, int M);

Table cloud_table(const EmbeddedCloud& cloud);
std::string cloud_sidecar_json(const EmbeddedCloud& cloud);

}  // namespace specmm
