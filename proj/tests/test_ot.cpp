#include <doctest.h>

#include <cmath>

#include "specmm/common.hpp"
#include "specmm/ot.hpp"
#include "oracles.hpp"

using namespace specmm;

namespace {

Eigen::VectorXd normalized(Eigen::VectorXd w) { return w / w.sum(); }

}  // namespace

TEST_CASE("transport solver basics") {
    SUBCASE("identical marginals cost nothing") {
        Eigen::VectorXd mu = normalized(Eigen::VectorXd::LinSpaced(5, 1.0, 5.0));
        Eigen::MatrixXd D(5, 5);
        for (int i = 0; i < 5; ++i)
            for (int j = 0; j < 5; ++j) D(i, j) = std::abs(i - j);
        CHECK(wasserstein2(mu, mu, D) == 0.0);
    }

    SUBCASE("point masses pay the ground distance") {
        Eigen::VectorXd mu(2), nu(2);
        mu << 1.0, 0.0;
        nu << 0.0, 1.0;
        Eigen::MatrixXd D(2, 2);
        D << 0.0, 1.0, 1.0, 0.0;
        CHECK(wasserstein2(mu, nu, D) == doctest::Approx(1.0).epsilon(1e-14));
    }

    SUBCASE("half a unit across unit distance") {
        Eigen::VectorXd mu(2), nu(2);
        mu << 0.5, 0.5;
        nu << 1.0, 0.0;
        Eigen::MatrixXd D(2, 2);
        D << 0.0, 1.0, 1.0, 0.0;
        CHECK(wasserstein2(mu, nu, D) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-14));
    }

    SUBCASE("input validation") {
        Eigen::VectorXd p2 = Eigen::VectorXd::Constant(2, 0.5);
        Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
        Eigen::VectorXd bad(2);
        bad << 0.6, 0.6;
        CHECK_THROWS_AS(wasserstein2(bad, p2, D), domain_error);
        CHECK_THROWS_AS(wasserstein2(p2, bad, D), domain_error);
        Eigen::MatrixXd neg = D;
        neg(0, 1) = -1.0;
        CHECK_THROWS_AS(wasserstein2(p2, p2, neg), domain_error);
        Eigen::VectorXd unbalanced(2);
        unbalanced << 0.7, 0.7;
        CHECK_THROWS_AS(solve_transport(p2, unbalanced, D), domain_error);
        CHECK_THROWS_AS(solve_transport(p2, p2, Eigen::MatrixXd::Zero(3, 2)),
                        contract_error);
        Eigen::VectorXd withneg(2);
        withneg << 1.2, -0.2;
        CHECK_THROWS_AS(solve_transport(withneg, p2, D), domain_error);
    }

    SUBCASE("degenerate single-row and single-column shapes") {
        Eigen::VectorXd one(1), nu(3);
        one << 1.0;
        nu << 0.2, 0.3, 0.5;
        Eigen::MatrixXd c(1, 3);
        c << 2.0, 1.0, 4.0;
        Transport t = solve_transport(one, nu, c);
        CHECK(t.cost == doctest::Approx(0.2 * 2 + 0.3 * 1 + 0.5 * 4).epsilon(1e-14));
        Transport back = solve_transport(nu, one, c.transpose());
        CHECK(back.cost == doctest::Approx(t.cost).epsilon(1e-14));
    }
}

TEST_CASE("transport solver against brute-force enumeration") {
    Rng rng(20260815);
    for (int trial = 0; trial < 60; ++trial) {
        int n = 2 + static_cast<int>(rng.bits() % 3);
        int m = 2 + static_cast<int>(rng.bits() % 3);
        Eigen::VectorXd mu(n), nu(m);
        for (int i = 0; i < n; ++i) mu[i] = 0.05 + rng.uniform();
        for (int j = 0; j < m; ++j) nu[j] = 0.05 + rng.uniform();
        mu /= mu.sum();
        nu /= nu.sum();
        Eigen::MatrixXd cost(n, m);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) cost(i, j) = rng.uniform() * 3.0;

        Transport t = solve_transport(mu, nu, cost);
        double brute = oracles::transport_cost_brute(mu, nu, cost);
        CHECK(std::abs(t.cost - brute) < 1e-10);

        // plan is a feasible coupling
        CHECK((t.plan.rowwise().sum() - mu).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((t.plan.colwise().sum().transpose() - nu).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(t.plan.minCoeff() >= 0.0);
    }
}

TEST_CASE("transport solver against sorted coupling on the line") {
    Rng rng(99184);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 10 + static_cast<int>(rng.bits() % 40);
        int m = 10 + static_cast<int>(rng.bits() % 40);
        std::vector<std::pair<double, double>> a(n), b(m);
        Eigen::VectorXd mu(n), nu(m);
        for (int i = 0; i < n; ++i) a[i] = {rng.uniform() * 4.0 - 2.0, 0.01 + rng.uniform()};
        for (int j = 0; j < m; ++j) b[j] = {rng.uniform() * 4.0 - 2.0, 0.01 + rng.uniform()};
        double sa = 0.0, sb = 0.0;
        for (auto& p : a) sa += p.second;
        for (auto& p : b) sb += p.second;
        for (int i = 0; i < n; ++i) {
            a[i].second /= sa;
            mu[i] = a[i].second;
        }
        for (int j = 0; j < m; ++j) {
            b[j].second /= sb;
            nu[j] = b[j].second;
        }
        Eigen::MatrixXd D(n, m);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) D(i, j) = std::abs(a[i].first - b[j].first);

        double solver = wasserstein2(mu, nu, D);
        double sorted = oracles::w2_line_sorted(a, b);
        CHECK(solver == doctest::Approx(sorted).epsilon(1e-9));
    }
}

TEST_CASE("transport handles degenerate ties without stalling") {
    // uniform marginals with a flat cost block force heavy degeneracy
    int n = 16;
    Eigen::VectorXd mu = Eigen::VectorXd::Constant(n, 1.0 / n);
    Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) cost(i, j) = (i < 8 && j < 8) ? 1.0 : double((i + j) % 3);
    Transport t = solve_transport(mu, mu, cost);
    CHECK(t.cost >= 0.0);
    CHECK((t.plan.rowwise().sum() - mu).cwiseAbs().maxCoeff() < 1e-12);
    // optimal here: every row can reach a zero-cost column
    CHECK(t.cost == doctest::Approx(0.0).epsilon(1e-12));
}
