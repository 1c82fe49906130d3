#include "specmm/heat.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace specmm {

namespace {

constexpr double kFourPi = 12.566370614359172953850573533118;

void require_time(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) throw domain_error("time parameter must be positive");
}

}  // namespace

Eigen::MatrixXd heat_kernel(const SpectralData& sd, double t) {
    require_time(t);
    int n = static_cast<int>(sd.lambdas.size());
    Eigen::VectorXd w = (-0.5 * t * sd.lambdas.array()).exp();
    Eigen::MatrixXd A = sd.phis * w.asDiagonal();
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    P.selfadjointView<Eigen::Lower>().rankUpdate(A);
    return P.selfadjointView<Eigen::Lower>();
}

Eigen::VectorXd heat_flow(const SpectralData& sd, const Eigen::VectorXd& f, double t) {
    require_time(t);
    if (f.size() != sd.lambdas.size()) throw contract_error("heat_flow: vector length mismatch");
    Eigen::VectorXd coef = sd.phis.transpose() * (sd.measure.cwiseProduct(f));
    coef.array() *= (-t * sd.lambdas.array()).exp();
    return sd.phis * coef;
}

Eigen::VectorXd dual_heat_flow(const SpectralData& sd, const Eigen::VectorXd& nu, double t) {
    require_time(t);
    if (nu.size() != sd.lambdas.size())
        throw contract_error("dual_heat_flow: vector length mismatch");
    if (nu.minCoeff() < 0.0) throw domain_error("dual_heat_flow: negative mass");
    if (std::abs(nu.sum() - 1.0) > 1e-9)
        throw domain_error("dual_heat_flow: input is not a probability vector");
    return sd.measure.cwiseProduct(dual_heat_density(sd, nu, t));
}

Eigen::VectorXd dual_heat_density(const SpectralData& sd, const Eigen::VectorXd& nu, double t) {
    require_time(t);
    Eigen::VectorXd coef = sd.phis.transpose() * nu;
    coef.array() *= (-t * sd.lambdas.array()).exp();
    return sd.phis * coef;
}

Eigen::MatrixXd heat_propagator(const LaplacianOp& op, double t) {
    require_time(t);
    int n = op.n();
    double d = 0.0;
    for (int i = 0; i < n; ++i) d = std::max(d, -op.L(i, i));
    if (d == 0.0) return Eigen::MatrixXd::Identity(n, n);

    // e^{tL} = e^{-tau d} e^{tau W} squared s times, W = L + dI >= 0 entrywise.
    // All sums have positive terms, so entries keep relative accuracy even
    // when they are vanishingly small.
    int s = 0;
    while (std::ldexp(t, -s) * d > 1.0 && s < 64) ++s;
    double tau = std::ldexp(t, -s);

    Eigen::MatrixXd W = op.L;
    W.diagonal().array() += d;
    W = W.cwiseMax(0.0);

    Eigen::MatrixXd B = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd T = Eigen::MatrixXd::Identity(n, n);
    for (int k = 1; k <= 80; ++k) {
        T = (T * W * (tau / k)).eval();
        B += T;
        if (T.maxCoeff() <= 1e-20 * B.maxCoeff()) break;
    }
    Eigen::MatrixXd Q = std::exp(-tau * d) * B;
    for (int k = 0; k < s; ++k) Q = (Q * Q).eval();
    return Q;
}

VaradhanEstimate varadhan_distance(const LaplacianOp& op, const std::vector<double>& t_list,
                                   double mesh_scale) {
    if (t_list.empty()) throw contract_error("varadhan_distance: empty t list");
    for (size_t i = 0; i < t_list.size(); ++i) {
        if (!(t_list[i] > 0.0)) throw contract_error("varadhan_distance: t must be positive");
        if (i > 0 && !(t_list[i] < t_list[i - 1]))
            throw contract_error("varadhan_distance: t list must be strictly decreasing");
    }
    if (mesh_scale < 0.0) throw contract_error("varadhan_distance: negative mesh scale");

    VaradhanEstimate out;
    double floor = 9.0 * mesh_scale * mesh_scale;
    for (auto it = t_list.rbegin(); it != t_list.rend(); ++it)
        (std::sqrt(*it) >= 3.0 * mesh_scale ? out.ts : out.skipped).push_back(*it);
    if (out.ts.empty())
        throw domain_error("varadhan_distance: every t is below the resolution floor " +
                           fmt17(floor));

    int n = op.n();
    const double nan = std::numeric_limits<double>::quiet_NaN();

    // Walk ts in ascending order, squaring the propagator when the next t is
    // exactly double the current one.
    Eigen::MatrixXd Q;
    double t_cur = 0.0;
    for (double t : out.ts) {
        if (t_cur > 0.0 && t == 2.0 * t_cur)
            Q = (Q * Q).eval();
        else
            Q = heat_propagator(op, t);
        t_cur = t;

        Eigen::MatrixXd p = Q * op.measure.cwiseInverse().asDiagonal();
        p = (0.5 * (p + p.transpose())).eval();

        Eigen::MatrixXd e(n, n);
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                if (i == j) {
                    e(i, j) = 0.0;
                } else if (p(i, j) > 0.0) {
                    e(i, j) = -4.0 * t * std::log(p(i, j));
                } else {
                    e(i, j) = nan;
                    ++out.flagged;
                }
            }
        out.est.push_back(std::move(e));
    }

    size_t K = out.ts.size();
    for (size_t k = 0; k + 1 < K; ++k) {
        double t1 = out.ts[k], t2 = out.ts[k + 1];
        // linear model est(t) = d2 + a t, read off at t = 0
        out.est_extrap.push_back((t2 * out.est[k] - t1 * out.est[k + 1]) / (t2 - t1));
    }

    out.d2 = out.est[0];
    out.d2_extrapolated = K > 1 ? out.est_extrap[0] : out.est[0];

    size_t sel = 0;
    for (size_t k = 1; k < K; ++k)
        if (std::abs(std::log(kFourPi * out.ts[k])) < std::abs(std::log(kFourPi * out.ts[sel])))
            sel = k;
    out.selected_t = out.ts[sel];
    out.d2_selected = out.est[sel];

    long long finite = 0, offdiag = static_cast<long long>(n) * (n - 1);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (i != j && std::isfinite(out.d2(i, j))) ++finite;
    out.coverage = offdiag > 0 ? static_cast<double>(finite) / static_cast<double>(offdiag) : 1.0;
    return out;
}

double mass_defect(const SpectralData& sd, double t) {
    Eigen::VectorXd mass = heat_kernel(sd, t) * sd.measure;
    return (mass.array() - 1.0).abs().maxCoeff();
}

double semigroup_defect(const SpectralData& sd, double s, double t) {
    Eigen::MatrixXd ps = heat_kernel(sd, s);
    Eigen::MatrixXd pt = heat_kernel(sd, t);
    Eigen::MatrixXd comp = ps * sd.measure.asDiagonal() * pt;
    return (comp - heat_kernel(sd, s + t)).cwiseAbs().maxCoeff();
}

namespace {

// Spearman rank correlation with average ranks on ties.
double spearman(const std::vector<double>& a, const std::vector<double>& b) {
    size_t n = a.size();
    if (n < 2) return 1.0;
    auto ranks = [](const std::vector<double>& v) {
        size_t n = v.size();
        std::vector<size_t> idx(n);
        std::iota(idx.begin(), idx.end(), size_t{0});
        std::sort(idx.begin(), idx.end(), [&](size_t i, size_t j) { return v[i] < v[j]; });
        std::vector<double> r(n);
        size_t i = 0;
        while (i < n) {
            size_t j = i;
            while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
            double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
            for (size_t k = i; k <= j; ++k) r[idx[k]] = avg;
            i = j + 1;
        }
        return r;
    };
    std::vector<double> ra = ranks(a), rb = ranks(b);
    double ma = 0, mb = 0;
    for (size_t i = 0; i < n; ++i) ma += ra[i], mb += rb[i];
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double num = 0, va = 0, vb = 0;
    for (size_t i = 0; i < n; ++i) {
        num += (ra[i] - ma) * (rb[i] - mb);
        va += (ra[i] - ma) * (ra[i] - ma);
        vb += (rb[i] - mb) * (rb[i] - mb);
    }
    if (va == 0.0 || vb == 0.0) return 1.0;
    return num / std::sqrt(va * vb);
}

}  // namespace

HeatDiagnostics heat_diagnostics(const FiniteMMS& x, const SpectralData& sd,
                                 const std::vector<double>& t_grid) {
    HeatDiagnostics diag;
    double t_min = 0.0;
    for (double t : t_grid) {
        require_time(t);
        Eigen::MatrixXd p = heat_kernel(sd, t);
        HeatDiagnostics::Row row;
        row.t = t;
        row.sym_defect = (p - p.transpose()).cwiseAbs().maxCoeff();
        row.mass_defect = ((p * sd.measure).array() - 1.0).abs().maxCoeff();
        row.semigroup_defect = semigroup_defect(sd, 0.5 * t, 0.5 * t);
        row.positivity_min = p.minCoeff();
        diag.rows.push_back(row);
        if (t_min == 0.0 || t < t_min) t_min = t;
    }

    if (t_min > 0.0 && x.n > 1) {
        Eigen::MatrixXd p = heat_kernel(sd, t_min);
        std::vector<double> lp, dd;
        for (int i = 0; i < x.n; ++i)
            for (int j = i + 1; j < x.n; ++j) {
                if (!(p(i, j) > 0.0)) continue;
                lp.push_back(std::log(p(i, j)));
                dd.push_back(-x.dist(i, j));
            }
        diag.spearman_logp_dist = spearman(lp, dd);
    } else {
        diag.spearman_logp_dist = 1.0;
    }
    return diag;
}

std::string HeatDiagnostics::to_json() const {
    JsonWriter w;
    w.begin_object();
    w.key("rows");
    w.begin_array();
    for (const auto& r : rows) {
        w.begin_object();
        w.key("t");
        w.value(r.t);
        w.key("sym_defect");
        w.value(r.sym_defect);
        w.key("mass_defect");
        w.value(r.mass_defect);
        w.key("semigroup_defect");
        w.value(r.semigroup_defect);
        w.key("positivity_min");
        w.value(r.positivity_min);
        w.end_object();
    }
    w.end_array();
    w.key("spearman_logp_dist");
    w.value(spearman_logp_dist);
    w.end_object();
    return w.str();
}

Table HeatDiagnostics::table() const {
    Table t;
    t.name = "heat_diagnostics";
    t.columns = {"t", "sym_defect", "mass_defect", "semigroup_defect", "positivity_min"};
    for (const auto& r : rows)
        t.row({r.t, r.sym_defect, r.mass_defect, r.semigroup_defect, r.positivity_min});
    return t;
}

}  // namespace specmm
