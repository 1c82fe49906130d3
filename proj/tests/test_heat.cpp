#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "oracles.hpp"
#include "specmm/heat.hpp"

using namespace specmm;

namespace {

SpectralData solve(const FiniteMMS& x) { return eigensolve(build_laplacian(x), x.tag()); }

// Independent reference: dense Pade exponential of tL, converted to kernel
// units by dividing out the measure columnwise.
Eigen::MatrixXd kernel_by_matexp(const LaplacianOp& op, double t) {
    Eigen::MatrixXd E = (t * op.L).exp();
    return E * op.measure.cwiseInverse().asDiagonal();
}

}  // namespace

TEST_CASE("kernel basics") {
    FiniteMMS p = make_point(4.0);
    SpectralData sdp = solve(p);
    CHECK(heat_kernel(sdp, 0.3)(0, 0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(heat_kernel(sdp, 7.0)(0, 0) == doctest::Approx(0.25).epsilon(1e-14));

    CHECK_THROWS_AS(heat_kernel(sdp, 0.0), domain_error);
    CHECK_THROWS_AS(heat_kernel(sdp, -1.0), domain_error);

    FiniteMMS x = make_cycle(1.0, 256);
    SpectralData sd = solve(x);
    Eigen::MatrixXd k = heat_kernel(sd, 1.0);
    // continuum diagonal value (1/2pi) sum_k e^{-k^2} = 0.2821159...
    CHECK(std::abs(k(0, 0) - 0.28212) < 1e-3);
    CHECK(std::abs(k(100, 100) - k(0, 0)) < 1e-12);
}

TEST_CASE("kernel matches the matrix exponential") {
    for (double t : {0.1, 1.0}) {
        FiniteMMS x = make_cycle(1.0, 96);
        LaplacianOp op = build_laplacian(x);
        Eigen::MatrixXd diff = heat_kernel(solve(x), t) - kernel_by_matexp(op, t);
        CHECK(diff.cwiseAbs().maxCoeff() < 1e-8);

        FiniteMMS t2 = make_product(make_cycle(1.0, 8), make_cycle(1.3, 12));
        LaplacianOp op2 = build_laplacian(t2);
        Eigen::MatrixXd diff2 = heat_kernel(solve(t2), t) - kernel_by_matexp(op2, t);
        CHECK(diff2.cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("positive propagator matches the matrix exponential") {
    FiniteMMS x = make_cycle(1.0, 64);
    LaplacianOp op = build_laplacian(x);
    for (double t : {0.05, 0.3, 2.0}) {
        Eigen::MatrixXd q = heat_propagator(op, t);
        Eigen::MatrixXd ref = (t * op.L).exp();
        CHECK((q - ref).cwiseAbs().maxCoeff() < 1e-11);
        CHECK((q.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("kernel invariants") {
    FiniteMMS x = make_product(make_cycle(1.0, 12), make_cycle(1.1, 12));
    SpectralData sd = solve(x);
    for (double t : {0.1, 1.0}) {
        Eigen::MatrixXd p = heat_kernel(sd, t);
        CHECK((p - p.transpose()).cwiseAbs().maxCoeff() == 0.0);
        CHECK(mass_defect(sd, t) < 1e-10);
        CHECK(semigroup_defect(sd, 0.5 * t, 0.5 * t) < 1e-9);
        CHECK(p.minCoeff() > -1e-12 * p.maxCoeff());
    }
    CHECK(semigroup_defect(sd, 0.3, 0.7) < 1e-9);
}

TEST_CASE("basis and scale invariance of the kernel") {
    FiniteMMS x = make_product(make_cycle(1.0, 10), make_cycle(1.0, 10));
    SpectralData sd = solve(x);
    Eigen::MatrixXd base = heat_kernel(sd, 0.7);

    SpectralData rot = random_spectral_data(sd, cluster_multiplicities(sd), 42);
    CHECK((heat_kernel(rot, 0.7) - base).cwiseAbs().maxCoeff() < 1e-9);

    // measure rescale: kernel scales by 1/beta
    double beta = 3.7;
    SpectralData scaled = rescaled_spectral_data(sd, 1.0, beta);
    CHECK((beta * heat_kernel(scaled, 0.7) - base).cwiseAbs().maxCoeff() < 1e-12 * base.maxCoeff());

    // metric rescale: alpha^2 slower clock
    SpectralData stretched = rescaled_spectral_data(sd, 2.0, 1.0);
    CHECK((heat_kernel(stretched, 4.0 * 0.7) - base).cwiseAbs().maxCoeff() <
          1e-12 * base.maxCoeff());
}

TEST_CASE("heat flow") {
    FiniteMMS x = make_cycle(1.0, 64);
    SpectralData sd = solve(x);
    double t = 0.4;

    Eigen::VectorXd f1 = sd.phis.col(1);
    Eigen::VectorXd expected = std::exp(-sd.lambdas(1) * t) * f1;
    CHECK((heat_flow(sd, f1, t) - expected).cwiseAbs().maxCoeff() < 1e-10);

    Eigen::VectorXd ones = Eigen::VectorXd::Ones(64);
    CHECK((heat_flow(sd, ones, t) - ones).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::VectorXd f12 = sd.phis.col(1) + sd.phis.col(2);
    Eigen::VectorXd e12 = std::exp(-sd.lambdas(1) * t) * sd.phis.col(1) +
                          std::exp(-sd.lambdas(2) * t) * sd.phis.col(2);
    CHECK((heat_flow(sd, f12, t) - e12).cwiseAbs().maxCoeff() < 1e-10);

    // semigroup in function form on random vectors
    Rng rng(11);
    for (int k = 0; k < 20; ++k) {
        Eigen::VectorXd f(64);
        for (int i = 0; i < 64; ++i) f(i) = rng.gaussian();
        Eigen::VectorXd two_step = heat_flow(sd, heat_flow(sd, f, 0.3), 0.5);
        CHECK((two_step - heat_flow(sd, f, 0.8)).cwiseAbs().maxCoeff() < 1e-9);
    }

    CHECK_THROWS_AS(heat_flow(sd, f1, -0.1), domain_error);
    CHECK_THROWS_AS(heat_flow(sd, Eigen::VectorXd::Ones(3), 0.1), contract_error);
}

TEST_CASE("dual heat flow") {
    FiniteMMS x = make_cycle(1.0, 64);
    SpectralData sd = solve(x);
    double t = 0.25;

    Eigen::VectorXd inv = sd.measure / sd.total_mass;
    CHECK((dual_heat_flow(sd, inv, t) - inv).cwiseAbs().maxCoeff() < 1e-12);

    Eigen::VectorXd delta = Eigen::VectorXd::Zero(64);
    delta(7) = 1.0;
    Eigen::VectorXd evolved = dual_heat_flow(sd, delta, t);
    Eigen::VectorXd expected = heat_kernel(sd, t).row(7).transpose().cwiseProduct(sd.measure);
    CHECK((evolved - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::abs(evolved.sum() - 1.0) < 1e-12);

    Eigen::VectorXd bad = inv;
    bad(0) = -bad(0);
    bad(1) += 2.0 * inv(0);
    CHECK_THROWS_AS(dual_heat_flow(sd, bad, t), domain_error);
    CHECK_THROWS_AS(dual_heat_flow(sd, 0.9 * inv, t), domain_error);
}

TEST_CASE("orthogonal initial data flows to a constant density") {
    FiniteMMS x = make_cycle(1.0, 64);
    SpectralData sd = solve(x);
    Eigen::VectorXd m = sd.measure;
    Rng rng(2024);

    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd nu(64);
        for (int i = 0; i < 64; ++i) nu(i) = rng.uniform() + 1e-3;
        nu /= nu.sum();

        // the only mass vectors with zero pairing against every phi_i, i >= 1,
        // are multiples of m; projecting there and renormalizing keeps a
        // probability vector satisfying the orthogonality premise
        Eigen::VectorXd proj = (m.dot(nu) / m.squaredNorm()) * m;
        proj /= proj.sum();
        for (int i = 1; i < 64; ++i) CHECK(std::abs(sd.phis.col(i).dot(proj)) < 1e-12);

        Eigen::VectorXd density = dual_heat_density(sd, proj, 0.5);
        CHECK(density.maxCoeff() - density.minCoeff() < 1e-10);

        // generic data does not flow to a constant this fast
        Eigen::VectorXd generic = dual_heat_density(sd, nu, 0.5);
        CHECK(generic.maxCoeff() - generic.minCoeff() > 1e-6);
    }
}

TEST_CASE("varadhan estimates") {
    SUBCASE("contract checks") {
        FiniteMMS x = make_cycle(1.0, 16);
        LaplacianOp op = build_laplacian(x);
        CHECK_THROWS_AS(varadhan_distance(op, {}, x.mesh_scale), contract_error);
        CHECK_THROWS_AS(varadhan_distance(op, {0.1, 0.2}, x.mesh_scale), contract_error);
        CHECK_THROWS_AS(varadhan_distance(op, {0.1, -0.2}, x.mesh_scale), contract_error);
        CHECK_THROWS_AS(varadhan_distance(op, {1e-6}, x.mesh_scale), domain_error);
    }

    SUBCASE("resolution floor splits the list") {
        FiniteMMS x = make_cycle(1.0, 64);  // floor: t >= 9 * mesh^2 = 0.0868
        VaradhanEstimate v = varadhan_distance(build_laplacian(x), {0.4, 0.2, 0.1, 0.05},
                                               x.mesh_scale);
        CHECK(v.ts == std::vector<double>{0.1, 0.2, 0.4});
        CHECK(v.skipped == std::vector<double>{0.05});
        CHECK(v.d2.diagonal().cwiseAbs().maxCoeff() == 0.0);
        CHECK(v.flagged == 0);
        CHECK(v.coverage == 1.0);
    }

    SUBCASE("antipodal recovery and error trends") {
        FiniteMMS x = make_cycle(1.0, 128);
        VaradhanEstimate v =
            varadhan_distance(build_laplacian(x), {0.4, 0.2, 0.1, 0.05}, x.mesh_scale);
        REQUIRE(v.ts.size() == 4);  // ascending: 0.05, 0.1, 0.2, 0.4
        double d2_true = x.dist(0, 64) * x.dist(0, 64);
        CHECK(std::abs(v.est[2](0, 64) - d2_true) < 0.05 * d2_true);

        // far pairs: the lattice correction grows as t shrinks, so the raw
        // error walks up monotonically toward small t
        for (int k = 0; k < 3; ++k) {
            double fine = std::abs(v.est[k](0, 64) - d2_true);
            double coarse = std::abs(v.est[k + 1](0, 64) - d2_true);
            CHECK(fine > coarse);
        }

        // mid-range pairs: the prefactor term dominates there and the
        // two-point fit cancels it better and better as t shrinks
        REQUIRE(v.est_extrap.size() == 3);
        double dm2 = x.dist(0, 20) * x.dist(0, 20);
        for (int k = 0; k < 2; ++k) {
            double fine = std::abs(v.est_extrap[k](0, 20) - dm2);
            double coarse = std::abs(v.est_extrap[k + 1](0, 20) - dm2);
            CHECK(fine < coarse);
        }
        CHECK(std::abs(v.d2_extrapolated(0, 64) - v.est_extrap[0](0, 64)) == 0.0);
    }

    SUBCASE("entrywise window at the selected t") {
        FiniteMMS x = make_cycle(1.0, 256);
        double tstar = 1.0 / (4.0 * oracles::kPi);
        VaradhanEstimate v =
            varadhan_distance(build_laplacian(x), {0.2, tstar, 0.02}, x.mesh_scale);
        CHECK(v.selected_t == tstar);
        for (int i = 0; i < x.n; ++i)
            for (int j = 0; j < x.n; ++j) {
                double d = x.dist(i, j);
                if (d < 5.0 * x.mesh_scale) continue;
                CHECK(v.d2_selected(i, j) <= 1.1 * d * d);
                CHECK(v.d2_selected(i, j) >= 0.9 * d * d);
            }
    }

    SUBCASE("deep tail entries get flagged, not faked") {
        // chain of 40 unit-rate hops; crossing it in t = 1e-8 needs ~39 jumps,
        // so the far-corner kernel entry lands below double range
        int n = 40;
        FiniteMMS x;
        x.n = n;
        x.dist = Eigen::MatrixXd::NullaryExpr(
            n, n, [](Eigen::Index i, Eigen::Index j) { return std::abs(double(i - j)); });
        x.measure = Eigen::VectorXd::Ones(n);
        x.mesh_scale = 1e-6;
        x.gen = GeneratorSpec::custom("chain40");
        require_valid(x);

        Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i + 1 < n; ++i) {
            L(i, i + 1) = 1.0;
            L(i + 1, i) = 1.0;
            L(i, i) -= 1.0;
            L(i + 1, i + 1) -= 1.0;
        }
        VaradhanEstimate v = varadhan_distance(build_laplacian(x, L), {1e-8}, x.mesh_scale);
        CHECK(v.flagged > 0);
        CHECK(v.coverage < 1.0);
        CHECK(std::isnan(v.d2(0, n - 1)));
        CHECK(std::isfinite(v.d2(0, 1)));
    }
}

TEST_CASE("heat diagnostics") {
    FiniteMMS x = make_cycle(1.0, 128);
    SpectralData sd = solve(x);
    HeatDiagnostics diag = heat_diagnostics(x, sd, {0.1, 1.0});
    REQUIRE(diag.rows.size() == 2);
    for (const auto& r : diag.rows) {
        CHECK(r.sym_defect < 1e-9);
        CHECK(r.mass_defect < 1e-9);
        CHECK(r.semigroup_defect < 1e-9);
        CHECK(r.positivity_min > -1e-12);
    }
    CHECK(diag.spearman_logp_dist > 0.99);

    FiniteMMS p = make_point(2.0);
    HeatDiagnostics pd = heat_diagnostics(p, solve(p), {0.5});
    CHECK(pd.rows[0].mass_defect < 1e-14);
    CHECK(pd.spearman_logp_dist == 1.0);

    std::string js = diag.to_json();
    CHECK(js.find("\"mass_defect\"") != std::string::npos);
    CHECK(js.find("\"spearman_logp_dist\"") != std::string::npos);
    Table t = diag.table();
    CHECK(t.rows.size() == 2);
}
