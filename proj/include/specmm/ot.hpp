#pragma once

#include <Eigen/Dense>

namespace specmm {

// Exact solution of the balanced transportation problem
//   minimize sum_ij plan_ij * cost_ij,  plan >= 0, row sums mu, column sums nu
// by the network simplex on the bipartite graph. No regularization.
struct Transport {
    double cost = 0.0;
    Eigen::MatrixXd plan;
};

Transport solve_transport(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu,
                          const Eigen::MatrixXd& cost);

// L2-Wasserstein distance between probability vectors for ground distances D:
// square root of the optimal transport value with costs D^2.
double wasserstein2(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu,
                    const Eigen::MatrixXd& D);

}  // namespace specmm
