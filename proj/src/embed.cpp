#include "specmm/embed.hpp"

#include <cmath>
#include <limits>

#include "specmm/common.hpp"

namespace specmm {

namespace {

// rows of the untruncated I-cloud: row i-1 holds coordinate i of every point
Eigen::MatrixXd full_rows_I(const SpectralData& sd, double t) {
    const int n = static_cast<int>(sd.lambdas.size());
    const double root_mass = std::sqrt(sd.total_mass);
    Eigen::MatrixXd rows(n - 1, n);
    for (int i = 1; i < n; ++i)
        rows.row(i - 1) = root_mass * std::exp(-0.5 * sd.lambdas[i] * t) *
                          sd.phis.col(i).transpose();
    return rows;
}

// tails[M] = sup over points of the l^2 norm of rows M+1..n-1
std::vector<double> tail_profile(const Eigen::MatrixXd& rows) {
    const int n = static_cast<int>(rows.cols());
    std::vector<double> tails(n);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    tails[n - 1] = 0.0;
    for (int m = n - 2; m >= 0; --m) {
        acc += rows.row(m).transpose().cwiseAbs2();
        tails[m] = std::sqrt(acc.maxCoeff());
    }
    return tails;
}

}  // namespace

EmbeddedCloud embed_I(const SpectralData& sd, double t, double tail_tol) {
    if (!(t > 0.0)) throw domain_error("embed_I: t must be positive");
    if (!(tail_tol > 0.0)) throw domain_error("embed_I: tail_tol must be positive");
    const int n = static_cast<int>(sd.lambdas.size());

    EmbeddedCloud cloud;
    cloud.t = t;
    cloud.variant = CloudVariant::I;
    cloud.provenance = sd.provenance;
    if (n == 1) {
        cloud.coords = Eigen::MatrixXd::Zero(0, 1);
        return cloud;
    }

    Eigen::MatrixXd rows = full_rows_I(sd, t);
    std::vector<double> tails = tail_profile(rows);

    int M = 0;
    while (M < n - 1 && tails[M] > tail_tol) ++M;

    // never cut inside a degenerate cluster: a basis rotation there mixes the
    // kept coordinates with the dropped ones
    MultiplicityTable table = cluster_multiplicities(sd);
    while (M > 0 && M < n - 1 && table.cluster_of[M] == table.cluster_of[M + 1]) ++M;

    cloud.M = M;
    cloud.tail_sup = tails[M];
    cloud.coords = rows.topRows(M);
    return cloud;
}

EmbeddedCloud embed_I(const SpectralData& sd, double t) {
    if (!(t > 0.0)) throw domain_error("embed_I: t must be positive");
    const int n = static_cast<int>(sd.lambdas.size());
    if (n == 1) return embed_I(sd, t, std::numeric_limits<double>::min());

    // cloud diameter from the Gram matrix of the untruncated cloud
    Eigen::MatrixXd rows = full_rows_I(sd, t);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(rows.transpose());
    double diam2 = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = j + 1; i < n; ++i)
            diam2 = std::max(diam2, gram(i, i) + gram(j, j) - 2.0 * gram(i, j));
    double tol = 1e-9 * std::sqrt(std::max(diam2, 0.0));
    if (tol <= 0.0) tol = std::numeric_limits<double>::min();
    return embed_I(sd, t, tol);
}

EmbeddedCloud embed_Phi(const SpectralData& sd, double t) {
    if (!(t > 0.0)) throw domain_error("embed_Phi: t must be positive");
    const int n = static_cast<int>(sd.lambdas.size());
    EmbeddedCloud cloud;
    cloud.t = t;
    cloud.M = n;
    cloud.variant = CloudVariant::Phi;
    cloud.provenance = sd.provenance;
    cloud.coords.resize(n, n);
    for (int i = 0; i < n; ++i)
        cloud.coords.row(i) = std::exp(-sd.lambdas[i] * t) * sd.phis.col(i).transpose();
    return cloud;
}

double tail_bound(const SpectralData& sd, double t, int M) {
    if (!(t > 0.0)) throw domain_error("tail_bound: t must be positive");
    const int n = static_cast<int>(sd.lambdas.size());
    if (M < 0 || M > n - 1) throw contract_error("tail_bound: M out of range");
    if (n == 1) return 0.0;
    return tail_profile(full_rows_I(sd, t))[M];
}

Table cloud_table(const EmbeddedCloud& cloud) {
    const int n = static_cast<int>(cloud.coords.cols());
    Table tbl;
    tbl.name = "cloud";
    tbl.columns.push_back("i");
    for (int j = 0; j < n; ++j) tbl.columns.push_back("p" + std::to_string(j));
    for (int i = 0; i < cloud.coords.rows(); ++i) {
        std::vector<Cell> row;
        row.reserve(n + 1);
        row.emplace_back(static_cast<long long>(cloud.variant == CloudVariant::I ? i + 1 : i));
        for (int j = 0; j < n; ++j) row.emplace_back(cloud.coords(i, j));
        tbl.rows.push_back(std::move(row));
    }
    return tbl;
}

std::string cloud_sidecar_json(const EmbeddedCloud& cloud) {
    JsonWriter w;
    w.begin_object();
    w.key("t");
    w.value(cloud.t);
    w.key("M");
    w.value(static_cast<long long>(cloud.M));
    w.key("tail_sup");
    w.value(cloud.tail_sup);
    w.key("variant");
    w.value(cloud.variant == CloudVariant::I ? "I" : "Phi");
    w.end_object();
    return w.str();
}

}  // namespace specmm
