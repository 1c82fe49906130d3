#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "specmm/distances.hpp"
#include "specmm/mmspace.hpp"
#include "specmm/report.hpp"
#include "specmm/spectral.hpp"

namespace specmm {

// nearest-neighbor realization of "pull x through one embedding, invert the
// other": f(x) is the Y point whose embedded image is closest to x's
struct RecoveredMap {
    std::vector<int> table;      // X index -> Y index
    Eigen::VectorXd residuals;   // embedded distance realized at each x
    double t = 0.0;
    std::string provenance;
};

RecoveredMap recover_map(const FiniteMMS& X, const FiniteMMS& Y, const SpectralData& a,
                         const SpectralData& b, double t);

struct PushforwardCheck {
    double c = 0.0;                // mass ratio identified by the map
    double deviation = 0.0;        // W2 between normalized pushforward and target
    Eigen::VectorXd ortho_defects; // |integral of phi_i against the pushforward|, i = 1..10
};

PushforwardCheck pushforward_check(const RecoveredMap& f, const FiniteMMS& X,
                                   const FiniteMMS& Y);

enum class Verdict { isomorphic_up_to_measure_scale, not_isomorphic, inconclusive };

std::string verdict_name(Verdict v);

// nonpositive entries fall back to 1e-3 times the larger diameter
struct Thresholds {
    double eigengap_tol = 0.0;
    double distortion_tol = 0.0;
    double measure_tol = 0.0;
};

struct IsomorphismVerdict {
    Verdict verdict = Verdict::inconclusive;
    double eigen_gap = 0.0;        // largest |lambda_i(X) - lambda_i(Y)| in the window
    int eigen_gap_index = 0;
    double eigen_first_gap = 0.0;  // gap at the first index crossing the tolerance
    int eigen_first_index = -1;    // -1 when no index crosses
    double distortion = 0.0;
    double c = 0.0;
    double deviation = 0.0;
    double residual_max = 0.0;
    double residual_mean = 0.0;
    double ortho_defect_max = 0.0;
    double lower_estimate = 0.0;   // sampled infimum of the spectral distance
    double upper_estimate = 0.0;   // sampled supremum, bounds the optimizer's reach
    Thresholds thresholds;         // resolved values actually applied
    RecoveredMap map;
};

IsomorphismVerdict isomorphism_verdict(const FiniteMMS& X, const FiniteMMS& Y, double t,
                                       const Thresholds& thr = {}, const Budget& budget = {},
                                       std::uint64_t seed = 17);

std::string verdict_json(const IsomorphismVerdict& v);
Table map_table(const RecoveredMap& f);

}  // namespace specmm
