#include "specmm/ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "specmm/common.hpp"

namespace specmm {

namespace {

struct BasicArc {
    int i;  // source row
    int j;  // sink column
    double flow;
};

// spanning-tree basis over sources 0..n-1 and sinks n..n+m-1
struct Tree {
    int n, m;
    std::vector<BasicArc> arcs;              // n + m - 1 entries
    std::vector<std::vector<int>> adjacent;  // node -> arc indices
    std::vector<int> parent, parent_arc, order;
    std::vector<double> u, v;  // potentials: u_i + v_j = cost(i, j) on basic arcs

    int node_of_source(int i) const { return i; }
    int node_of_sink(int j) const { return n + j; }

    void rebuild_adjacency() {
        adjacent.assign(n + m, {});
        for (int a = 0; a < static_cast<int>(arcs.size()); ++a) {
            adjacent[node_of_source(arcs[a].i)].push_back(a);
            adjacent[node_of_sink(arcs[a].j)].push_back(a);
        }
    }

    // parents, traversal order and potentials in one pass from node 0
    void refresh(const Eigen::MatrixXd& cost) {
        parent.assign(n + m, -1);
        parent_arc.assign(n + m, -1);
        order.clear();
        order.reserve(n + m);
        u.assign(n, 0.0);
        v.assign(m, 0.0);
        std::vector<char> seen(n + m, 0);
        order.push_back(0);
        seen[0] = 1;
        for (std::size_t q = 0; q < order.size(); ++q) {
            int node = order[q];
            for (int a : adjacent[node]) {
                int other = node < n ? node_of_sink(arcs[a].j) : node_of_source(arcs[a].i);
                if (seen[other]) continue;
                seen[other] = 1;
                parent[other] = node;
                parent_arc[other] = a;
                order.push_back(other);
                if (other < n)
                    u[other] = cost(arcs[a].i, arcs[a].j) - v[arcs[a].j];
                else
                    v[other - n] = cost(arcs[a].i, arcs[a].j) - u[arcs[a].i];
            }
        }
    }
};

Tree northwest_corner(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu) {
    Tree tree;
    tree.n = static_cast<int>(mu.size());
    tree.m = static_cast<int>(nu.size());
    int i = 0, j = 0;
    double a = mu[0], b = nu[0];
    while (true) {
        double f = std::max(std::min(a, b), 0.0);
        tree.arcs.push_back({i, j, f});
        if (i == tree.n - 1 && j == tree.m - 1) break;
        if (i == tree.n - 1 || (j < tree.m - 1 && a > b)) {
            a -= f;
            b = nu[++j];
        } else {
            b -= f;
            a = mu[++i];
        }
    }
    tree.rebuild_adjacency();
    return tree;
}

}  // namespace

Transport solve_transport(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu,
                          const Eigen::MatrixXd& cost) {
    const int n = static_cast<int>(mu.size());
    const int m = static_cast<int>(nu.size());
    if (n == 0 || m == 0) throw domain_error("solve_transport: empty marginal");
    if (cost.rows() != n || cost.cols() != m)
        throw contract_error("solve_transport: cost shape mismatch");
    if (mu.minCoeff() < -1e-15 || nu.minCoeff() < -1e-15)
        throw domain_error("solve_transport: negative mass");
    double total = mu.sum();
    if (std::abs(total - nu.sum()) > 1e-9 * std::max(1.0, total))
        throw domain_error("solve_transport: unbalanced marginals");

    Transport result;
    result.plan = Eigen::MatrixXd::Zero(n, m);
    if (n == 1) {
        result.plan.row(0) = nu.transpose();
        result.cost = nu.dot(cost.row(0));
        return result;
    }
    if (m == 1) {
        result.plan.col(0) = mu;
        result.cost = mu.dot(cost.col(0));
        return result;
    }

    Tree tree = northwest_corner(mu, nu);
    tree.refresh(cost);

    const double cmax = std::max(cost.cwiseAbs().maxCoeff(), 1.0);
    const double enter_tol = 1e-12 * cmax;
    const double degen_tol = 1e-15 * std::max(total, 1.0);
    const long long arc_count = static_cast<long long>(n) * m;
    const int block = std::max(256, static_cast<int>(arc_count / (n + m)));

    long long cursor = 0;
    int degenerate_streak = 0;
    bool bland = false;

    for (long long pivot = 0;; ++pivot) {
        if (pivot > 2000000) throw numeric_error("solve_transport: pivot limit exceeded");

        // entering arc: most negative reduced cost in the first violating
        // block (or first violating arc in index order once Bland kicks in)
        int ei = -1, ej = -1;
        double best_rc = -enter_tol;
        long long scanned = 0;
        long long at = bland ? 0 : cursor;
        bool found_block = false;
        while (scanned < arc_count) {
            int i = static_cast<int>(at / m);
            int j = static_cast<int>(at % m);
            double rc = cost(i, j) - tree.u[i] - tree.v[j];
            if (rc < best_rc) {
                ei = i;
                ej = j;
                best_rc = rc;
                if (bland) break;
                found_block = true;
            }
            ++scanned;
            at = (at + 1) % arc_count;
            if (found_block && scanned % block == 0) break;
        }
        cursor = at;
        if (ei < 0) break;  // optimal

        // unique tree cycle closed by the entering arc
        int node_a = tree.node_of_source(ei);
        int node_b = tree.node_of_sink(ej);
        std::vector<int> path_a, path_b;  // arc indices toward the root
        {
            std::vector<int> depth(tree.parent.size(), 0);
            for (int q : tree.order)
                if (tree.parent[q] >= 0) depth[q] = depth[tree.parent[q]] + 1;
            int x = node_a, y = node_b;
            while (depth[x] > depth[y]) {
                path_a.push_back(tree.parent_arc[x]);
                x = tree.parent[x];
            }
            while (depth[y] > depth[x]) {
                path_b.push_back(tree.parent_arc[y]);
                y = tree.parent[y];
            }
            while (x != y) {
                path_a.push_back(tree.parent_arc[x]);
                x = tree.parent[x];
                path_b.push_back(tree.parent_arc[y]);
                y = tree.parent[y];
            }
        }

        // walking the cycle source->sink on the entering arc, then back along
        // the tree: arcs traversed with their own orientation gain theta, the
        // rest lose it
        std::vector<std::pair<int, int>> cycle;  // (arc index, +1/-1)
        {
            int node = node_b;
            for (int a : path_b) {
                bool with = tree.node_of_sink(tree.arcs[a].j) == node;
                cycle.emplace_back(a, with ? -1 : +1);
                node = with ? tree.node_of_source(tree.arcs[a].i)
                            : tree.node_of_sink(tree.arcs[a].j);
            }
            std::vector<std::pair<int, int>> up;
            node = node_a;
            for (int a : path_a) {
                bool with = tree.node_of_source(tree.arcs[a].i) == node;
                up.emplace_back(a, with ? +1 : -1);
                node = with ? tree.node_of_sink(tree.arcs[a].j)
                            : tree.node_of_source(tree.arcs[a].i);
            }
            std::reverse(up.begin(), up.end());
            for (auto& p : up) p.second = -p.second;
            cycle.insert(cycle.end(), up.begin(), up.end());
        }

        double theta = std::numeric_limits<double>::infinity();
        int leaving = -1;
        long long leaving_id = -1;
        for (auto [a, dir] : cycle)
            if (dir < 0) {
                long long id =
                    static_cast<long long>(tree.arcs[a].i) * m + tree.arcs[a].j;
                if (tree.arcs[a].flow < theta - 1e-18 ||
                    (std::abs(tree.arcs[a].flow - theta) <= 1e-18 &&
                     (leaving < 0 || id < leaving_id))) {
                    theta = tree.arcs[a].flow;
                    leaving = a;
                    leaving_id = id;
                }
            }
        if (leaving < 0) throw numeric_error("solve_transport: unbounded cycle");

        for (auto [a, dir] : cycle)
            tree.arcs[a].flow = std::max(tree.arcs[a].flow + dir * theta, 0.0);
        tree.arcs[leaving] = {ei, ej, theta};
        tree.rebuild_adjacency();
        tree.refresh(cost);

        if (theta <= degen_tol) {
            if (++degenerate_streak > 64) bland = true;
        } else {
            degenerate_streak = 0;
            bland = false;
        }
    }

    for (const BasicArc& a : tree.arcs) result.plan(a.i, a.j) += a.flow;
    result.cost = (result.plan.array() * cost.array()).sum();
    return result;
}

double wasserstein2(const Eigen::VectorXd& mu, const Eigen::VectorXd& nu,
                    const Eigen::MatrixXd& D) {
    if (std::abs(mu.sum() - 1.0) > 1e-12 || std::abs(nu.sum() - 1.0) > 1e-12)
        throw domain_error("wasserstein2: marginals must be probability vectors");
    if (D.size() > 0 && D.minCoeff() < 0.0)
        throw domain_error("wasserstein2: negative ground distance");
    if (mu.size() > 2048 || nu.size() > 2048)
        throw resource_error("wasserstein2: support larger than 2048 points");
    Transport t = solve_transport(mu, nu, D.cwiseAbs2());
    return std::sqrt(std::max(t.cost, 0.0));
}

}  // namespace specmm
