#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "specmm/embed.hpp"
#include "specmm/mmspace.hpp"
#include "specmm/spectral.hpp"

namespace specmm {

enum class Direction { exact, upper_estimate, lower_estimate };

std::string direction_name(Direction d);

struct Budget {
    int inner = 8;   // alignment starts per inner infimum
    int outer = 32;  // sampled candidates per outer supremum
};

// base decomposition plus seeded block rotations; member 0 is always the base
struct CandidateFamily {
    std::vector<SpectralData> members;
};

// family seeds derive from the space content, not the argument position, so
// both evaluation orders of a pair see identical candidates
CandidateFamily make_family(const FiniteMMS& x, const SpectralData& base,
                            const MultiplicityTable& table, int count, std::uint64_t seed);

struct DistanceReport {
    std::string kind;
    double value = 0.0;
    Direction direction = Direction::exact;
    double t = std::numeric_limits<double>::quiet_NaN();
    std::uint64_t seed = 0;
    int budget_inner = 0;
    int budget_outer = 0;

    // witnesses: enough to replay the reported value
    int witness_a = -1;   // candidate index on the sup side
    int witness_b = -1;   // candidate index seeding the inf side
    int witness_dir = 0;  // 0: first->second argument, 1: reversed
    std::vector<Eigen::MatrixXd> witness_rotation;  // per-cluster blocks, inf side
    std::vector<int> witness_map_fwd, witness_map_bwd;
    double witness_t = std::numeric_limits<double>::quiet_NaN();

    // mgh components
    double distortion = 0.0, covering = 0.0, w2 = 0.0, mass_defect = 0.0;
};

std::string report_json(const DistanceReport& r);
std::string report_line(const DistanceReport& r);

// Hausdorff distance between embedded clouds, zero-padded to a common
// dimension; refuses clouds taken at different times or of different variants.
double hausdorff_l2(const EmbeddedCloud& A, const EmbeddedCloud& B);

// nearest column of `to` for every column of `from` (ties to the lowest index)
std::vector<int> nearest_map(const EmbeddedCloud& from, const EmbeddedCloud& to);

// Sampled spectral pseudo-distances. All three run the same engine and share
// candidate evaluations, so the chain
//   d_spec >= max(directed, reversed) >= min(...) >= lower
// holds exactly on a fixed (t, budget, seed).
DistanceReport d_spec_lower(const FiniteMMS& X, const FiniteMMS& Y, double t,
                            const Budget& budget = {}, std::uint64_t seed = 0);
DistanceReport d_spec_directed(const FiniteMMS& X, const FiniteMMS& Y, double t,
                               const Budget& budget = {}, std::uint64_t seed = 0);
DistanceReport d_spec(const FiniteMMS& X, const FiniteMMS& Y, double t,
                      const Budget& budget = {}, std::uint64_t seed = 0);

// replays a d_spec-family witness and returns the reproduced value
double reproduce(const DistanceReport& r, const FiniteMMS& X, const FiniteMMS& Y);

// rebuilds the candidate pair named by a d_spec* witness, in (X, Y) order,
// with the witness rotation folded into the inf side's eigenfunctions
std::pair<SpectralData, SpectralData> aligned_witness_datas(const DistanceReport& r,
                                                            const FiniteMMS& X,
                                                            const FiniteMMS& Y);

struct MapPair {
    std::vector<int> f;  // X index -> Y index
    std::vector<int> g;  // Y index -> X index
};

// log-spaced grid on [0.05, 20]; the weight exp(-(t + 1/t)) is below 3e-9
// outside that window, beneath reporting precision
std::vector<double> kk_default_grid();

// sup over the grid and point pairs of the weighted kernel pullback defect,
// maximized over both directions
DistanceReport kk_distance(const FiniteMMS& X, const FiniteMMS& Y,
                           const std::vector<double>& t_grid, const MapPair& maps);
// same, with maps recovered by nearest neighbors between the embeddings at
// time embed_t
DistanceReport kk_distance(const FiniteMMS& X, const FiniteMMS& Y,
                           const std::vector<double>& t_grid, double embed_t);

// eps_weak: worst displacement of the map in the embedded model;
// eps_full: additionally charges the covering defect of the image
std::pair<double, double> spectral_approx_eps(const std::vector<int>& f,
                                              const SpectralData& a, const SpectralData& b,
                                              double t);

// measured Gromov-Hausdorff quality of a given map: metric distortion,
// covering defect, and Wasserstein pushforward defect plus total-mass gap
DistanceReport mgh_approx_eps(const std::vector<int>& f, const FiniteMMS& X,
                              const FiniteMMS& Y);

}  // namespace specmm
