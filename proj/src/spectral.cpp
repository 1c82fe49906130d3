#include "specmm/spectral.hpp"

#include <cmath>

namespace specmm {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

Eigen::MatrixXd cycle_laplacian(double radius, int n) {
    double h = kTwoPi * radius / n;
    double w = 1.0 / (h * h);
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        L(i, i) = -2.0 * w;
        L(i, (i + 1) % n) = w;
        L(i, (i + n - 1) % n) = w;
    }
    return L;
}

// L_A (+) L_B on the product index p = i*nb + j.
Eigen::MatrixXd kronecker_sum(const Eigen::MatrixXd& la, const Eigen::MatrixXd& lb) {
    int na = static_cast<int>(la.rows()), nb = static_cast<int>(lb.rows());
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(na * nb, na * nb);
    for (int i1 = 0; i1 < na; ++i1)
        for (int i2 = 0; i2 < na; ++i2)
            if (la(i1, i2) != 0.0)
                for (int j = 0; j < nb; ++j) L(i1 * nb + j, i2 * nb + j) += la(i1, i2);
    for (int i = 0; i < na; ++i)
        for (int j1 = 0; j1 < nb; ++j1)
            for (int j2 = 0; j2 < nb; ++j2)
                if (lb(j1, j2) != 0.0) L(i * nb + j1, i * nb + j2) += lb(j1, j2);
    return L;
}

int generator_size(const GeneratorSpec& g) {
    switch (g.kind) {
        case GeneratorSpec::Kind::Cycle:
            return g.count;
        case GeneratorSpec::Kind::Point:
            return 1;
        case GeneratorSpec::Kind::Product:
            return generator_size(*g.left) * generator_size(*g.right);
        case GeneratorSpec::Kind::Custom:
            return -1;
    }
    return -1;
}

Eigen::MatrixXd generator_laplacian(const GeneratorSpec& g) {
    switch (g.kind) {
        case GeneratorSpec::Kind::Cycle:
            return cycle_laplacian(g.radius, g.count);
        case GeneratorSpec::Kind::Point:
            return Eigen::MatrixXd::Zero(1, 1);
        case GeneratorSpec::Kind::Product:
            return kronecker_sum(generator_laplacian(*g.left), generator_laplacian(*g.right));
        case GeneratorSpec::Kind::Custom:
            throw invalid_operator_error("custom space needs an explicit operator");
    }
    throw invalid_operator_error("unknown generator kind");
}

}  // namespace

OperatorReport validate_operator(const Eigen::MatrixXd& L, const Eigen::VectorXd& measure) {
    OperatorReport rep;
    auto fail = [&rep](const std::string& msg) {
        rep.ok = false;
        rep.violations.push_back(msg);
    };
    int n = static_cast<int>(L.rows());
    if (L.cols() != n || measure.size() != n) {
        fail("operator shape does not match the space");
        return rep;
    }
    if (!L.allFinite()) {
        fail("operator has non-finite entries");
        return rep;
    }
    double scale = std::max(1.0, L.cwiseAbs().maxCoeff());

    rep.row_sum_defect = L.rowwise().sum().cwiseAbs().maxCoeff();
    if (rep.row_sum_defect > 1e-12 * scale) fail("rows do not sum to zero");

    double sa = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            sa = std::max(sa, std::abs(measure(i) * L(i, j) - measure(j) * L(j, i)));
    double mscale = measure.maxCoeff();
    rep.self_adjoint_defect = sa / (scale * mscale);
    if (rep.self_adjoint_defect > 1e-12) fail("operator is not self-adjoint in L^2(m)");

    double offmin = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) offmin = std::min(offmin, L(i, j));
    rep.offdiag_min = offmin;
    if (offmin < -1e-13 * scale) fail("negative off-diagonal entry");

    // Row sums zero plus nonnegative off-diagonal already give a nonpositive
    // quadratic form, so definiteness needs no separate check.
    return rep;
}

LaplacianOp build_laplacian(const FiniteMMS& x) {
    int expected = generator_size(x.gen);
    if (expected < 0)
        throw invalid_operator_error("custom space '" + x.tag() +
                                     "' needs an explicit operator");
    if (expected != x.n)
        throw invalid_operator_error("space size " + std::to_string(x.n) +
                                     " does not match generator '" + x.tag() + "'");
    LaplacianOp op;
    op.L = generator_laplacian(x.gen);
    op.measure = x.measure;
    return op;
}

LaplacianOp build_laplacian(const FiniteMMS& x, const Eigen::MatrixXd& L) {
    OperatorReport rep = validate_operator(L, x.measure);
    if (!rep.ok) {
        std::string msg = "supplied operator rejected:";
        for (const auto& v : rep.violations) msg += "\n  - " + v;
        throw invalid_operator_error(msg);
    }
    return LaplacianOp{L, x.measure};
}

SpectralData eigensolve(const LaplacianOp& op, const std::string& provenance) {
    int n = op.n();
    Eigen::VectorXd s = op.measure.cwiseSqrt();
    Eigen::VectorXd sinv = s.cwiseInverse();

    // Similarity transform to a plainly symmetric matrix; the eigensolver then
    // returns an exactly orthonormal basis which maps back to an L^2(m)-
    // orthonormal one.
    Eigen::MatrixXd S = s.asDiagonal() * (-op.L) * sinv.asDiagonal();
    S = 0.5 * (S + S.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success) throw numeric_error("eigensolve did not converge");

    SpectralData sd;
    sd.lambdas = es.eigenvalues();
    sd.phis = sinv.asDiagonal() * es.eigenvectors();
    sd.measure = op.measure;
    sd.total_mass = op.measure.sum();
    sd.provenance = provenance;

    double lmax = std::max(1.0, sd.lambdas.cwiseAbs().maxCoeff());
    double zero_tol = 64.0 * std::numeric_limits<double>::epsilon() * lmax;
    int zeros = 0;
    for (int i = 0; i < n; ++i)
        if (std::abs(sd.lambdas(i)) <= zero_tol) {
            sd.lambdas(i) = 0.0;
            ++zeros;
        }

    for (int i = 0; i < n; ++i) {
        double amax = sd.phis.col(i).cwiseAbs().maxCoeff();
        for (int r = 0; r < n; ++r) {
            double v = sd.phis(r, i);
            if (std::abs(v) > 1e-8 * amax) {
                if (v < 0.0) sd.phis.col(i) = -sd.phis.col(i);
                break;
            }
        }
    }

    if (zeros == 1 && sd.lambdas(0) == 0.0)
        sd.phis.col(0).setConstant(1.0 / std::sqrt(sd.total_mass));

    return sd;
}

double orthonormality_defect(const SpectralData& sd) {
    Eigen::MatrixXd G =
        sd.phis.transpose() * sd.measure.asDiagonal() * sd.phis;
    G.diagonal().array() -= 1.0;
    return G.cwiseAbs().maxCoeff();
}

double eigen_residual(const SpectralData& sd, const LaplacianOp& op) {
    Eigen::MatrixXd R = op.L * sd.phis + sd.phis * sd.lambdas.asDiagonal();
    double worst = 0.0;
    for (int i = 0; i < sd.phis.cols(); ++i)
        worst = std::max(worst, R.col(i).cwiseAbs().maxCoeff() / (1.0 + sd.lambdas(i)));
    return worst;
}

MultiplicityTable cluster_multiplicities(const SpectralData& sd, double tol) {
    if (!(tol > 0.0)) throw contract_error("cluster tolerance must be positive");
    int n = static_cast<int>(sd.lambdas.size());
    MultiplicityTable t;
    t.tol = tol;
    t.cluster_of.resize(n);
    std::vector<double> means;
    int start = 0;
    for (int i = 0; i < n; ++i) {
        t.cluster_of[i] = static_cast<int>(t.nus.size());
        bool last = (i + 1 == n);
        bool break_after =
            last || (sd.lambdas(i + 1) - sd.lambdas(i) > tol * std::max(1.0, sd.lambdas(i + 1)));
        if (break_after) {
            t.offsets.push_back(start);
            t.nus.push_back(i - start + 1);
            means.push_back(sd.lambdas.segment(start, i - start + 1).mean());
            start = i + 1;
        }
    }
    t.mus = Eigen::Map<Eigen::VectorXd>(means.data(), static_cast<long>(means.size()));
    return t;
}

SpectralData random_spectral_data(const SpectralData& sd, const MultiplicityTable& table,
                                  std::uint64_t seed) {
    SpectralData out = sd;
    Rng rng(mix64(seed, 0x5d4c3b2a19080706ULL));
    for (int c = 0; c < table.clusters(); ++c) {
        int off = table.offsets[c], nu = table.nus[c];
        bool harmonic = (sd.lambdas(off) == 0.0 && nu == 1);
        if (nu == 1) {
            if (!harmonic && rng.sign() < 0) out.phis.col(off) = -out.phis.col(off);
        } else {
            out.phis.middleCols(off, nu) =
                (out.phis.middleCols(off, nu) * rng.haar_orthogonal(nu)).eval();
        }
    }
    out.provenance = sd.provenance + "+rot(" + std::to_string(seed) + ")";
    return out;
}

SpectralData rescaled_spectral_data(const SpectralData& sd, double alpha, double beta) {
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw contract_error("rescaled_spectral_data: factors must be positive");
    SpectralData out = sd;
    out.lambdas = sd.lambdas / (alpha * alpha);
    out.phis = sd.phis / std::sqrt(beta);
    out.measure = sd.measure * beta;
    out.total_mass = out.measure.sum();
    out.provenance = sd.provenance + "+rescale(" + fmt17(alpha) + "," + fmt17(beta) + ")";
    return out;
}

Table spectrum_table(const SpectralData& sd, const MultiplicityTable& table) {
    Table t;
    t.name = "spectrum";
    t.columns = {"index", "lambda", "cluster_id"};
    for (int i = 0; i < sd.lambdas.size(); ++i)
        t.row({static_cast<long long>(i), sd.lambdas(i),
               static_cast<long long>(table.cluster_of[i])});
    return t;
}

}  // namespace specmm
