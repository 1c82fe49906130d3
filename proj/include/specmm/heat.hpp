#pragma once

#include <vector>

#include "specmm/spectral.hpp"

namespace specmm {

// Heat kernel p(x,y,t) = sum_i e^{-lambda_i t} phi_i(x) phi_i(y), assembled as
// A A^T so the returned matrix is symmetric to the bit. Units 1/mass; a single
// point of mass c gives the constant 1/c.
Eigen::MatrixXd heat_kernel(const SpectralData& sd, double t);

// (h_t f)(x) = sum_y f(y) p(x,y,t) m(y), evaluated in the eigenbasis.
Eigen::VectorXd heat_flow(const SpectralData& sd, const Eigen::VectorXd& f, double t);

// Dual flow on probability vectors: (h~_t nu)(y) = sum_x p(x,y,t) m(y) nu(x).
// Returns the evolved mass vector; the density variant divides out m.
Eigen::VectorXd dual_heat_flow(const SpectralData& sd, const Eigen::VectorXd& nu, double t);
Eigen::VectorXd dual_heat_density(const SpectralData& sd, const Eigen::VectorXd& nu, double t);

// Distance-squared recovery from kernel decay, est = -4t log p(x,y,t).
//
// Kernels here are built by positive scaling-and-squaring of e^{tL} rather
// than through the eigen-sum: every intermediate quantity is a sum of positive
// terms, so entries keep full relative accuracy arbitrarily deep into the
// Gaussian tail, where the eigen-sum loses everything to cancellation.
//
// Reported values, per the operation contract:
//   d2              raw estimate at the smallest t above the resolution floor
//   d2_extrapolated two-point fit est = d2 + a*t from the two smallest ts
//   est_extrap[k]   the same fit from (ts[k], ts[k+1]); its error at the
//                   antipodal pair decays linearly in t, so this is the
//                   sequence whose error is monotone along a dyadic t list
//                   (the raw error oscillates with the 2t*log(4*pi*t) term)
//   d2_selected     raw estimate at the valid t with log(4*pi*t) closest to 0,
//                   where the continuum prefactor contributes nothing
struct VaradhanEstimate {
    std::vector<double> ts;       // accepted, ascending
    std::vector<double> skipped;  // below the floor sqrt(t) >= 3*mesh_scale
    std::vector<Eigen::MatrixXd> est;
    std::vector<Eigen::MatrixXd> est_extrap;
    Eigen::MatrixXd d2;
    Eigen::MatrixXd d2_extrapolated;
    double selected_t = 0.0;
    Eigen::MatrixXd d2_selected;
    long long flagged = 0;   // underflowed pairs over all accepted ts
    double coverage = 1.0;   // finite fraction of off-diagonal d2 entries
};

VaradhanEstimate varadhan_distance(const LaplacianOp& op, const std::vector<double>& t_list,
                                   double mesh_scale);

// Stochastic propagator e^{tL} itself (row sums 1); exposed for tests.
Eigen::MatrixXd heat_propagator(const LaplacianOp& op, double t);

double mass_defect(const SpectralData& sd, double t);
double semigroup_defect(const SpectralData& sd, double s, double t);

struct HeatDiagnostics {
    struct Row {
        double t;
        double sym_defect;
        double mass_defect;
        double semigroup_defect;
        double positivity_min;
    };
    std::vector<Row> rows;
    double spearman_logp_dist = 0.0;  // at the smallest grid t

    std::string to_json() const;
    Table table() const;
};

HeatDiagnostics heat_diagnostics(const FiniteMMS& x, const SpectralData& sd,
                                 const std::vector<double>& t_grid);

}  // namespace specmm
