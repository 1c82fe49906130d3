#include "specmm/reconstruct.hpp"

#include <algorithm>
#include <cmath>

#include "specmm/common.hpp"
#include "specmm/heat.hpp"
#include "specmm/ot.hpp"

namespace specmm {

namespace {

// I-embedding rows for one space, zero-padded to a shared depth
Eigen::MatrixXd full_cloud(const SpectralData& sd, double t, int depth) {
    const int n = static_cast<int>(sd.lambdas.size());
    const double root_mass = std::sqrt(sd.total_mass);
    Eigen::MatrixXd cloud = Eigen::MatrixXd::Zero(depth, n);
    for (int i = 1; i < n; ++i)
        cloud.row(i - 1) =
            root_mass * std::exp(-0.5 * sd.lambdas[i] * t) * sd.phis.col(i).transpose();
    return cloud;
}

void check_data(const FiniteMMS& space, const SpectralData& sd, const char* side) {
    if (sd.lambdas.size() != space.n)
        throw contract_error(std::string("recover_map: ") + side +
                             " data size does not match its space");
}

}  // namespace

RecoveredMap recover_map(const FiniteMMS& X, const FiniteMMS& Y, const SpectralData& a,
                         const SpectralData& b, double t) {
    if (!(t > 0.0)) throw domain_error("recover_map: t must be positive");
    require_valid(X);
    require_valid(Y);
    check_data(X, a, "source");
    check_data(Y, b, "target");

    const int depth = std::max(X.n, Y.n) - 1;
    Eigen::MatrixXd A = full_cloud(a, t, std::max(depth, 1));
    Eigen::MatrixXd B = full_cloud(b, t, std::max(depth, 1));

    RecoveredMap f;
    f.t = t;
    f.provenance = a.provenance + " -> " + b.provenance;
    f.table.resize(X.n);
    f.residuals.resize(X.n);
    for (int x = 0; x < X.n; ++x) {
        Eigen::RowVectorXd d2 = (B.colwise() - A.col(x)).colwise().squaredNorm();
        int q = 0;
        double best = d2.minCoeff(&q);  // first minimum, so ties go to the lowest index
        f.table[x] = q;
        f.residuals[x] = std::sqrt(std::max(best, 0.0));
    }
    return f;
}

PushforwardCheck pushforward_check(const RecoveredMap& f, const FiniteMMS& X,
                                   const FiniteMMS& Y) {
    require_valid(X);
    require_valid(Y);
    if (static_cast<int>(f.table.size()) != X.n)
        throw contract_error("pushforward_check: map table does not cover the source");
    for (int y : f.table)
        if (y < 0 || y >= Y.n)
            throw contract_error("pushforward_check: map table leaves the target");

    PushforwardCheck out;
    out.c = X.measure.sum() / Y.measure.sum();

    Eigen::VectorXd push = Eigen::VectorXd::Zero(Y.n);
    for (int x = 0; x < X.n; ++x) push[f.table[x]] += X.measure[x];
    Eigen::VectorXd target = Y.measure / Y.measure.sum();
    out.deviation = wasserstein2(push / X.measure.sum(), target, Y.dist);

    SpectralData b = eigensolve(build_laplacian(Y), Y.tag());
    const int k = std::min(10, Y.n - 1);
    out.ortho_defects.resize(k);
    for (int i = 1; i <= k; ++i) out.ortho_defects[i - 1] = std::abs(b.phis.col(i).dot(push));
    return out;
}

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::isomorphic_up_to_measure_scale: return "isomorphic_up_to_measure_scale";
        case Verdict::not_isomorphic: return "not_isomorphic";
        case Verdict::inconclusive: return "inconclusive";
    }
    throw contract_error("verdict_name: unknown verdict");
}

IsomorphismVerdict isomorphism_verdict(const FiniteMMS& X, const FiniteMMS& Y, double t,
                                       const Thresholds& thr, const Budget& budget,
                                       std::uint64_t seed) {
    if (!(t > 0.0)) throw domain_error("isomorphism_verdict: t must be positive");
    require_valid(X);
    require_valid(Y);

    IsomorphismVerdict v;
    double scale = std::max(X.dist.maxCoeff(), Y.dist.maxCoeff());
    v.thresholds = thr;
    if (!(v.thresholds.eigengap_tol > 0.0)) v.thresholds.eigengap_tol = 1e-3 * scale;
    if (!(v.thresholds.distortion_tol > 0.0)) v.thresholds.distortion_tol = 1e-3 * scale;
    if (!(v.thresholds.measure_tol > 0.0)) v.thresholds.measure_tol = 1e-3 * scale;

    SpectralData a = eigensolve(build_laplacian(X), X.tag());
    SpectralData b = eigensolve(build_laplacian(Y), Y.tag());
    const int window = std::min({X.n, Y.n, 50});
    for (int i = 0; i < window; ++i) {
        double gap = std::abs(a.lambdas[i] - b.lambdas[i]);
        if (gap > v.eigen_gap) {
            v.eigen_gap = gap;
            v.eigen_gap_index = i;
        }
        if (v.eigen_first_index < 0 && gap > v.thresholds.eigengap_tol) {
            v.eigen_first_gap = gap;
            v.eigen_first_index = i;
        }
    }

    DistanceReport lo = d_spec_lower(X, Y, t, budget, seed);
    DistanceReport hi = d_spec(X, Y, t, budget, seed);
    v.lower_estimate = lo.value;
    v.upper_estimate = hi.value;

    auto [da, db] = aligned_witness_datas(lo, X, Y);
    v.map = recover_map(X, Y, da, db, t);

    for (int x2 = 0; x2 < X.n; ++x2)
        for (int x1 = 0; x1 < X.n; ++x1)
            v.distortion = std::max(
                v.distortion, std::abs(X.dist(x1, x2) - Y.dist(v.map.table[x1], v.map.table[x2])));

    PushforwardCheck push = pushforward_check(v.map, X, Y);
    v.c = push.c;
    v.deviation = push.deviation;
    v.ortho_defect_max = push.ortho_defects.size() ? push.ortho_defects.maxCoeff() : 0.0;
    v.residual_max = v.map.residuals.maxCoeff();
    v.residual_mean = v.map.residuals.mean();

    bool eig_ok = v.eigen_gap <= v.thresholds.eigengap_tol;
    bool dis_ok = v.distortion <= v.thresholds.distortion_tol;
    bool mea_ok = v.deviation <= v.thresholds.measure_tol;
    if (!eig_ok) {
        v.verdict = Verdict::not_isomorphic;  // spectra are compared exactly, no optimizer
    } else if (dis_ok && mea_ok) {
        v.verdict = Verdict::isomorphic_up_to_measure_scale;
    } else if (v.upper_estimate - v.lower_estimate > 10.0 * v.thresholds.distortion_tol) {
        v.verdict = Verdict::inconclusive;  // alignment search may have missed the witness
    } else {
        v.verdict = Verdict::not_isomorphic;
    }
    return v;
}

std::string verdict_json(const IsomorphismVerdict& v) {
    JsonWriter w;
    w.begin_object();
    w.key("verdict");
    w.value(verdict_name(v.verdict));
    w.key("evidence");
    w.begin_object();
    w.key("eigen_gap");
    w.value(v.eigen_gap);
    w.key("eigen_gap_index");
    w.value(static_cast<long long>(v.eigen_gap_index));
    w.key("eigen_first_gap");
    w.value(v.eigen_first_gap);
    w.key("eigen_first_index");
    w.value(static_cast<long long>(v.eigen_first_index));
    w.key("distortion");
    w.value(v.distortion);
    w.key("c");
    w.value(v.c);
    w.key("deviation");
    w.value(v.deviation);
    w.key("residual_max");
    w.value(v.residual_max);
    w.key("residual_mean");
    w.value(v.residual_mean);
    w.key("ortho_defect_max");
    w.value(v.ortho_defect_max);
    w.key("lower_estimate");
    w.value(v.lower_estimate);
    w.key("upper_estimate");
    w.value(v.upper_estimate);
    w.end_object();
    w.key("thresholds");
    w.begin_object();
    w.key("eigengap");
    w.value(v.thresholds.eigengap_tol);
    w.key("distortion");
    w.value(v.thresholds.distortion_tol);
    w.key("measure");
    w.value(v.thresholds.measure_tol);
    w.end_object();
    w.key("map");
    w.begin_array();
    for (int y : v.map.table) w.value(static_cast<long long>(y));
    w.end_array();
    w.key("t");
    w.value(v.map.t);
    w.end_object();
    return w.str();
}

Table map_table(const RecoveredMap& f) {
    Table tbl;
    tbl.name = "recovered_map";
    tbl.columns = {"x_index", "y_index", "residual"};
    for (std::size_t x = 0; x < f.table.size(); ++x)
        tbl.row({static_cast<long long>(x), static_cast<long long>(f.table[x]),
                 f.residuals[static_cast<int>(x)]});
    return tbl;
}

}  // namespace specmm
