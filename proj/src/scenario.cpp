#include "specmm/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "specmm/common.hpp"
#include "specmm/reconstruct.hpp"
#include "specmm/spectral.hpp"

namespace specmm {

const std::vector<double> kCompactGrid{0.25, 0.5, 1.0, 2.0, 4.0};

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// the ε = 0.2 d_spec value of the default flat-tori run, frozen after the
// first run as a regression floor (the scenario asserts rows stay above half
// of it)
constexpr double kFlatToriPinnedDspec = 1.5841032635689909;

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string join_values(const std::vector<double>& vs) {
    std::string s;
    for (size_t i = 0; i < vs.size(); ++i) {
        if (i) s += " -> ";
        s += fmt6(vs[i]);
    }
    return s;
}

Budget resolve_budget(const Budget& b, const Budget& def) {
    return {b.inner > 0 ? b.inner : def.inner, b.outer > 0 ? b.outer : def.outer};
}

// worker pool over grid rows; the fn(i) writes into pre-sized slots, so the
// output order never depends on scheduling
void run_rows(int count, const std::function<void(int)>& fn) {
    int workers = std::min(thread_budget(), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex err_mu;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::string nus_string(const MultiplicityTable& tb, int max_clusters = 6) {
    std::string s;
    int c = std::min<int>(tb.clusters(), max_clusters);
    for (int i = 0; i < c; ++i) {
        if (i) s += ';';
        s += std::to_string(tb.nus[i]);
    }
    if (tb.clusters() > max_clusters) s += ";...";
    return s;
}

int nu1_of(const MultiplicityTable& tb) {
    return tb.clusters() > 1 ? tb.nus[1] : 0;
}

std::vector<double> sorted_grid(std::vector<double> vs, bool descending, const char* what) {
    if (vs.empty()) throw contract_error(std::string("scenario: empty ") + what + " grid");
    for (double v : vs)
        if (!(v > 0.0)) throw contract_error(std::string("scenario: ") + what + " values must be positive");
    std::sort(vs.begin(), vs.end());
    if (std::adjacent_find(vs.begin(), vs.end()) != vs.end())
        throw contract_error(std::string("scenario: duplicate ") + what + " value");
    if (descending) std::reverse(vs.begin(), vs.end());
    return vs;
}

ScenarioCheck check(std::string name, bool passed, std::string detail) {
    return ScenarioCheck{std::move(name), passed, std::move(detail)};
}

bool strictly_decreasing(const std::vector<double>& vs) {
    for (size_t i = 1; i < vs.size(); ++i)
        if (!(vs[i] < vs[i - 1])) return false;
    return true;
}

double column_max_gap(const SpectralData& a, const SpectralData& b, int window) {
    int lim = std::min<int>({window + 1, static_cast<int>(a.lambdas.size()),
                             static_cast<int>(b.lambdas.size())});
    double g = 0.0;
    for (int j = 1; j < lim; ++j) g = std::max(g, std::abs(a.lambdas[j] - b.lambdas[j]));
    return g;
}

// ---------------------------------------------------------------- flat-tori

ScenarioOutcome run_flat_tori(const ScenarioConfig& cfg) {
    int n = cfg.n > 0 ? cfg.n : 24;
    Budget budget = resolve_budget(cfg.budget, {2, 6});
    std::vector<double> eps = sorted_grid(cfg.eps, true, "eps");

    FiniteMMS limit = build_space(
        GeneratorSpec::product(GeneratorSpec::cycle(1.0, n), GeneratorSpec::cycle(1.0, n)));
    SpectralData sd_limit = eigensolve(build_laplacian(limit), limit.tag());
    MultiplicityTable tb_limit = cluster_multiplicities(sd_limit, kClusterTolNear);

    struct Row {
        double gh = 0, dspec = 0, lower = 0, kk = 0;
        std::string direction;
        double gaps[8] = {};
        double gap_max8 = 0;
        int nu1 = 0;
        std::string nus;
    };
    std::vector<Row> rows(eps.size());

    run_rows(static_cast<int>(eps.size()), [&](int i) {
        std::uint64_t seed = mix64(cfg.seed, static_cast<std::uint64_t>(i));
        FiniteMMS Xe = build_space(GeneratorSpec::product(GeneratorSpec::cycle(1.0, n),
                                                          GeneratorSpec::cycle(1.0 + eps[i], n)));
        SpectralData sde = eigensolve(build_laplacian(Xe), Xe.tag());
        MultiplicityTable tbe = cluster_multiplicities(sde, kClusterTolNear);

        std::vector<int> ident(Xe.n);
        for (int k = 0; k < Xe.n; ++k) ident[k] = k;
        DistanceReport gh = mgh_approx_eps(ident, Xe, limit);

        Row& r = rows[i];
        r.gh = std::max(gh.distortion, gh.covering);
        DistanceReport ds = d_spec(Xe, limit, cfg.t, budget, seed);
        r.dspec = ds.value;
        r.direction = direction_name(ds.direction);
        r.lower = d_spec_lower(Xe, limit, cfg.t, budget, seed).value;
        r.kk = kk_distance(Xe, limit, kCompactGrid, cfg.t).value;
        for (int j = 1; j <= 8; ++j) {
            r.gaps[j - 1] = std::abs(sde.lambdas[j] - sd_limit.lambdas[j]);
            r.gap_max8 = std::max(r.gap_max8, r.gaps[j - 1]);
        }
        r.nu1 = nu1_of(tbe);
        r.nus = nus_string(tbe);
    });

    Table tbl;
    tbl.name = "trend";
    tbl.columns = {"eps", "gh", "d_spec", "direction", "d_spec_lower", "kk"};
    for (int j = 1; j <= 8; ++j) tbl.columns.push_back("gap" + std::to_string(j));
    tbl.columns.insert(tbl.columns.end(), {"gap_max8", "nu1", "nus"});
    for (size_t i = 0; i < eps.size(); ++i) {
        const Row& r = rows[i];
        std::vector<Cell> cells{eps[i], r.gh, r.dspec, r.direction, r.lower, r.kk};
        for (double g : r.gaps) cells.push_back(g);
        cells.insert(cells.end(), {r.gap_max8, static_cast<long long>(r.nu1), r.nus});
        tbl.row(std::move(cells));
    }
    {
        std::vector<Cell> cells{0.0, 0.0, 0.0, std::string("exact"), 0.0, 0.0};
        for (int j = 0; j < 8; ++j) cells.push_back(0.0);
        cells.insert(cells.end(),
                     {0.0, static_cast<long long>(nu1_of(tb_limit)), nus_string(tb_limit)});
        tbl.row(std::move(cells));
    }
    tbl.chart.enabled = true;
    tbl.chart.x_col = 0;
    tbl.chart.y_cols = {1, 2, 5};
    tbl.chart.title = "flat tori: distances to the square-torus limit";

    ScenarioOutcome out;
    out.config = cfg;
    out.doc.name = cfg.name;
    out.doc.meta = {{"scenario", cfg.name}, {"n", fmt_int(n)}, {"t", fmt17(cfg.t)},
                    {"seed", fmt_int(static_cast<long long>(cfg.seed))}};
    out.doc.tables.push_back(std::move(tbl));

    std::vector<double> ghs, dss, max8s;
    for (const Row& r : rows) ghs.push_back(r.gh), dss.push_back(r.dspec), max8s.push_back(r.gap_max8);

    out.checks.push_back(check("gh-strictly-decreasing", strictly_decreasing(ghs), join_values(ghs)));
    out.checks.push_back(check("gh-shrinks-4x", ghs.front() >= 4.0 * ghs.back() - 1e-12,
                               fmt6(ghs.front()) + " vs 4 x " + fmt6(ghs.back())));

    bool gaps_ok = strictly_decreasing(max8s);
    for (int j = 0; j < 8 && gaps_ok; ++j)
        for (size_t i = 1; i < rows.size(); ++i)
            if (rows[i].gaps[j] > rows[i - 1].gaps[j] + 1e-9) gaps_ok = false;
    out.checks.push_back(check("eigen-gaps-decreasing", gaps_ok, "max8 " + join_values(max8s)));

    bool nu_ok = nu1_of(tb_limit) == 4;
    std::string nu_detail;
    for (const Row& r : rows) {
        nu_ok = nu_ok && r.nu1 == 2;
        nu_detail += std::to_string(r.nu1) + ",";
    }
    nu_detail += " limit " + std::to_string(nu1_of(tb_limit));
    out.checks.push_back(check("nu1-stays-2-vs-limit-4", nu_ok, nu_detail));

    double floor_val = 0.5 * dss.front();
    bool floor_ok = true;
    for (double v : dss) floor_ok = floor_ok && v >= floor_val;
    out.checks.push_back(check("d-spec-bounded-below", floor_ok,
                               join_values(dss) + " vs floor " + fmt6(floor_val)));

    bool is_default = n == 24 && cfg.t == 1.0 && cfg.seed == 17 && budget.inner == 2 &&
                      budget.outer == 6 && eps.size() == 3 && eps[0] == 0.2 && eps[1] == 0.1 &&
                      eps[2] == 0.05;
    if (is_default)
        out.checks.push_back(check("d-spec-regression-pin",
                                   std::abs(dss.front() - kFlatToriPinnedDspec) <= 1e-9,
                                   fmt6(dss.front()) + " pinned " + fmt6(kFlatToriPinnedDspec)));
    return out;
}

// ------------------------------------------------------------ collapse-point

ScenarioOutcome run_collapse_point(const ScenarioConfig& cfg) {
    int n = cfg.n > 0 ? cfg.n : 64;
    Budget budget = resolve_budget(cfg.budget, {4, 8});
    std::vector<double> eps = sorted_grid(cfg.eps, true, "eps");

    struct Row {
        double lambda1 = 0, lambda1_eps2 = 0, defect = 0;
        double gh = 0, dspec = 0, kk = 0;
        std::string direction;
        int nu1 = 0;
        std::string nus;
    };
    std::vector<Row> rows(eps.size());

    run_rows(static_cast<int>(eps.size()), [&](int i) {
        std::uint64_t seed = mix64(cfg.seed, static_cast<std::uint64_t>(i));
        FiniteMMS X = make_cycle(eps[i], n);
        FiniteMMS P = make_point(kTwoPi * eps[i]);
        SpectralData sd = eigensolve(build_laplacian(X), X.tag());
        MultiplicityTable tb = cluster_multiplicities(sd);

        std::vector<int> to_point(X.n, 0);
        DistanceReport gh = mgh_approx_eps(to_point, X, P);

        Row& r = rows[i];
        r.lambda1 = sd.lambdas[1];
        r.lambda1_eps2 = sd.lambdas[1] * eps[i] * eps[i];
        r.defect = std::abs(r.lambda1_eps2 - 1.0);
        r.gh = std::max(gh.distortion, gh.covering);
        DistanceReport ds = d_spec(X, P, cfg.t, budget, seed);
        r.dspec = ds.value;
        r.direction = direction_name(ds.direction);
        r.kk = kk_distance(X, P, kCompactGrid, cfg.t).value;
        r.nu1 = nu1_of(tb);
        r.nus = nus_string(tb);
    });

    Table tbl;
    tbl.name = "trend";
    tbl.columns = {"eps", "lambda1", "lambda1_eps2", "lambda1_defect", "gh",
                   "d_spec", "direction", "kk", "nu1", "nus"};
    for (size_t i = 0; i < eps.size(); ++i) {
        const Row& r = rows[i];
        tbl.row({eps[i], r.lambda1, r.lambda1_eps2, r.defect, r.gh, r.dspec, r.direction, r.kk,
                 static_cast<long long>(r.nu1), r.nus});
    }
    tbl.chart.enabled = true;
    tbl.chart.x_col = 0;
    tbl.chart.y_cols = {4, 5, 7};
    tbl.chart.log_x = true;
    tbl.chart.log_y = true;
    tbl.chart.title = "collapse to a point: distances vanish, lambda1 diverges";

    ScenarioOutcome out;
    out.config = cfg;
    out.doc.name = cfg.name;
    out.doc.meta = {{"scenario", cfg.name}, {"n", fmt_int(n)}, {"t", fmt17(cfg.t)},
                    {"seed", fmt_int(static_cast<long long>(cfg.seed))}};
    out.doc.tables.push_back(std::move(tbl));

    std::vector<double> l1s, dss, defects;
    for (const Row& r : rows) l1s.push_back(r.lambda1), dss.push_back(r.dspec), defects.push_back(r.defect);

    bool rate_ok = true;
    for (double d : defects) rate_ok = rate_ok && d <= 0.01;
    out.checks.push_back(check("lambda1-matches-collapse-rate", rate_ok,
                               "defects " + join_values(defects)));

    bool diverging = true;
    for (size_t i = 1; i < l1s.size(); ++i) diverging = diverging && l1s[i] > l1s[i - 1];
    out.checks.push_back(check("lambda1-diverging", diverging, join_values(l1s)));

    // past eps = 0.1 the whole embedded cloud sits below the truncation tail
    // and the sampled value is exactly zero, so ties are legitimate
    bool dec = dss.back() < dss.front();
    for (size_t i = 1; i < dss.size(); ++i) dec = dec && dss[i] <= dss[i - 1];
    out.checks.push_back(check("d-spec-decreasing", dec, join_values(dss)));
    out.checks.push_back(check("d-spec-below-1e-2-at-finest", dss.back() < 1e-2,
                               fmt6(dss.back()) + " at eps " + fmt6(eps.back())));
    return out;
}

// -------------------------------------------------------- eigen-convergence

ScenarioOutcome run_eigen_convergence(const ScenarioConfig& cfg) {
    int n_ref = cfg.n > 0 ? cfg.n : 256;
    Budget budget = resolve_budget(cfg.budget, {4, 8});
    if (cfg.sizes.empty()) throw contract_error("scenario: empty sizes grid");
    std::vector<int> sizes = cfg.sizes;
    std::sort(sizes.begin(), sizes.end());
    if (std::adjacent_find(sizes.begin(), sizes.end()) != sizes.end())
        throw contract_error("scenario: duplicate size");
    for (int s : sizes)
        if (s < 3 || s >= n_ref)
            throw contract_error("scenario: sizes must lie in [3, reference)");

    FiniteMMS ref = make_cycle(1.0, n_ref);
    SpectralData sd_ref = eigensolve(build_laplacian(ref), ref.tag());

    struct Row {
        double errs[8] = {};
        double err_max8 = 0;
        double gh = 0, dspec = 0, kk = 0;
        std::string direction;
        int nu1 = 0;
        std::string nus;
    };
    std::vector<Row> rows(sizes.size());

    run_rows(static_cast<int>(sizes.size()), [&](int i) {
        std::uint64_t seed = mix64(cfg.seed, static_cast<std::uint64_t>(i));
        int n = sizes[i];
        FiniteMMS X = make_cycle(1.0, n);
        SpectralData sd = eigensolve(build_laplacian(X), X.tag());
        MultiplicityTable tb = cluster_multiplicities(sd);

        std::vector<int> f(n);
        for (int k = 0; k < n; ++k)
            f[k] = static_cast<int>(std::lround(static_cast<double>(k) * n_ref / n)) % n_ref;
        DistanceReport gh = mgh_approx_eps(f, X, ref);

        Row& r = rows[i];
        for (int j = 1; j <= 8; ++j) {
            double continuum = std::pow(std::ceil(j / 2.0), 2.0);
            r.errs[j - 1] = std::abs(sd.lambdas[j] - continuum);
            r.err_max8 = std::max(r.err_max8, r.errs[j - 1]);
        }
        r.gh = std::max(gh.distortion, gh.covering);
        DistanceReport ds = d_spec(X, ref, cfg.t, budget, seed);
        r.dspec = ds.value;
        r.direction = direction_name(ds.direction);
        r.kk = kk_distance(X, ref, kCompactGrid, cfg.t).value;
        r.nu1 = nu1_of(tb);
        r.nus = nus_string(tb, 5);
    });

    Table tbl;
    tbl.name = "trend";
    tbl.columns = {"n"};
    for (int j = 1; j <= 8; ++j) tbl.columns.push_back("err" + std::to_string(j));
    tbl.columns.insert(tbl.columns.end(),
                       {"err_max8", "gh", "d_spec", "direction", "kk", "nu1", "nus"});
    for (size_t i = 0; i < sizes.size(); ++i) {
        const Row& r = rows[i];
        std::vector<Cell> cells{static_cast<long long>(sizes[i])};
        for (double e : r.errs) cells.push_back(e);
        cells.insert(cells.end(), {r.err_max8, r.gh, r.dspec, r.direction, r.kk,
                                   static_cast<long long>(r.nu1), r.nus});
        tbl.row(std::move(cells));
    }
    tbl.chart.enabled = true;
    tbl.chart.x_col = 0;
    tbl.chart.y_cols = {9, 10, 11};
    tbl.chart.log_x = true;
    tbl.chart.log_y = true;
    tbl.chart.title = "eigenvalue convergence of refined cycles";

    ScenarioOutcome out;
    out.config = cfg;
    out.doc.name = cfg.name;
    out.doc.meta = {{"scenario", cfg.name}, {"reference_n", fmt_int(n_ref)}, {"t", fmt17(cfg.t)},
                    {"seed", fmt_int(static_cast<long long>(cfg.seed))}};
    out.doc.tables.push_back(std::move(tbl));

    bool conv_ok = true;
    for (int j = 0; j < 8 && conv_ok; ++j)
        for (size_t i = 1; i < rows.size(); ++i)
            if (!(rows[i].errs[j] < rows[i - 1].errs[j])) conv_ok = false;
    std::vector<double> max8s, ghs;
    for (const Row& r : rows) max8s.push_back(r.err_max8), ghs.push_back(r.gh);
    out.checks.push_back(check("eigenvalues-converge-per-index", conv_ok,
                               "max8 " + join_values(max8s)));

    bool mult_ok = true;
    for (const Row& r : rows) mult_ok = mult_ok && r.nus == rows[0].nus;
    out.checks.push_back(check("multiplicities-stable", mult_ok, rows[0].nus));

    out.checks.push_back(check("gh-to-reference-decreasing", strictly_decreasing(ghs),
                               join_values(ghs)));

    (void)sd_ref;
    return out;
}

// ---------------------------------------------------------------- reconstruct

ScenarioOutcome run_reconstruct(const ScenarioConfig& cfg) {
    Budget budget = resolve_budget(cfg.budget, {8, 32});
    std::vector<std::pair<std::string, std::string>> pairs;
    bool default_pairs = cfg.spaces.empty();
    if (default_pairs) {
        pairs = {{"cycle(1,32)", "rescale(cycle(1,32),1,4)"},
                 {"cycle(1,32)", "cycle(1.1,32)"},
                 {"product(cycle(1,6),cycle(1.3,4))", "product(cycle(1.3,4),cycle(1,6))"}};
    } else {
        if (cfg.spaces.size() < 2 || cfg.spaces.size() % 2 != 0)
            throw contract_error("scenario: reconstruct wants an even list of space expressions");
        for (size_t i = 0; i + 1 < cfg.spaces.size(); i += 2)
            pairs.emplace_back(cfg.spaces[i], cfg.spaces[i + 1]);
    }

    struct Row {
        IsomorphismVerdict v;
        double gh = 0, kk = 0;
    };
    std::vector<Row> rows(pairs.size());

    run_rows(static_cast<int>(pairs.size()), [&](int i) {
        std::uint64_t seed = mix64(cfg.seed, static_cast<std::uint64_t>(i));
        FiniteMMS X = parse_space(pairs[i].first);
        FiniteMMS Y = parse_space(pairs[i].second);
        Row& r = rows[i];
        r.v = isomorphism_verdict(X, Y, cfg.t, {}, budget, seed);
        DistanceReport gh = mgh_approx_eps(r.v.map.table, X, Y);
        r.gh = std::max(gh.distortion, gh.covering);
        r.kk = kk_distance(X, Y, kCompactGrid, cfg.t).value;
    });

    Table tbl;
    tbl.name = "verdicts";
    tbl.columns = {"pair",          "x",           "y",          "verdict",
                   "measure_scale", "first_gap",   "first_index", "distortion",
                   "deviation",     "residual_max", "gh",         "lower_estimate",
                   "upper_estimate", "kk"};
    for (size_t i = 0; i < pairs.size(); ++i) {
        const Row& r = rows[i];
        double scale = r.v.c != 0.0 ? 1.0 / r.v.c : 0.0;
        tbl.row({static_cast<long long>(i), pairs[i].first, pairs[i].second,
                 verdict_name(r.v.verdict), scale, r.v.eigen_first_gap,
                 static_cast<long long>(r.v.eigen_first_index), r.v.distortion, r.v.deviation,
                 r.v.residual_max, r.gh, r.v.lower_estimate, r.v.upper_estimate, r.kk});
    }
    tbl.chart.enabled = true;
    tbl.chart.x_col = 0;
    tbl.chart.y_cols = {5, 7, 8};
    tbl.chart.title = "reconstruction evidence per pair";

    ScenarioOutcome out;
    out.config = cfg;
    out.doc.name = cfg.name;
    out.doc.meta = {{"scenario", cfg.name}, {"t", fmt17(cfg.t)},
                    {"seed", fmt_int(static_cast<long long>(cfg.seed))}};
    out.doc.tables.push_back(std::move(tbl));

    if (default_pairs) {
        const IsomorphismVerdict& a = rows[0].v;
        out.checks.push_back(check(
            "rescaled-cycle-identified",
            a.verdict == Verdict::isomorphic_up_to_measure_scale &&
                std::abs(1.0 / a.c - 4.0) <= 1e-9,
            verdict_name(a.verdict) + " scale " + fmt6(a.c != 0 ? 1.0 / a.c : 0.0)));

        const IsomorphismVerdict& b = rows[1].v;
        out.checks.push_back(check("distinct-radii-rejected",
                                   b.verdict == Verdict::not_isomorphic &&
                                       b.eigen_first_index == 1 &&
                                       std::abs(b.eigen_first_gap - 0.1736) <= 1e-3,
                                   verdict_name(b.verdict) + " gap " + fmt6(b.eigen_first_gap) +
                                       " at " + std::to_string(b.eigen_first_index)));

        const IsomorphismVerdict& c = rows[2].v;
        out.checks.push_back(check("relabeled-product-identified",
                                   c.verdict == Verdict::isomorphic_up_to_measure_scale &&
                                       std::abs(c.c - 1.0) <= 1e-9 && c.distortion <= 1e-9 &&
                                       c.deviation <= 1e-9,
                                   verdict_name(c.verdict) + " distortion " + fmt6(c.distortion)));
    } else {
        bool finite = true;
        for (const Row& r : rows)
            finite = finite && std::isfinite(r.v.distortion) && std::isfinite(r.v.deviation);
        out.checks.push_back(check("verdicts-computed", finite,
                                   std::to_string(rows.size()) + " pairs"));
    }
    return out;
}

// -------------------------------------------------------------- kk-continuity

ScenarioOutcome run_kk_continuity(const ScenarioConfig& cfg) {
    int n = cfg.n > 0 ? cfg.n : 32;
    Budget budget = resolve_budget(cfg.budget, {4, 8});
    std::vector<double> delta = sorted_grid(cfg.delta, true, "delta");

    FiniteMMS base = make_cycle(1.0, n);

    struct Row {
        double kk = 0, witness_t = 0, gh = 0, dspec = 0;
        std::string direction;
        int nu1 = 0;
        std::string nus;
    };
    std::vector<Row> rows(delta.size());

    run_rows(static_cast<int>(delta.size()), [&](int i) {
        std::uint64_t seed = mix64(cfg.seed, static_cast<std::uint64_t>(i));
        FiniteMMS X = make_cycle(1.0 + delta[i], n);
        SpectralData sd = eigensolve(build_laplacian(X), X.tag());
        MultiplicityTable tb = cluster_multiplicities(sd);

        std::vector<int> ident(n);
        for (int k = 0; k < n; ++k) ident[k] = k;
        DistanceReport gh = mgh_approx_eps(ident, X, base);

        Row& r = rows[i];
        DistanceReport kkr = kk_distance(X, base, kk_default_grid(), cfg.t);
        r.kk = kkr.value;
        r.witness_t = kkr.witness_t;
        r.gh = std::max(gh.distortion, gh.covering);
        DistanceReport ds = d_spec(X, base, cfg.t, budget, seed);
        r.dspec = ds.value;
        r.direction = direction_name(ds.direction);
        r.nu1 = nu1_of(tb);
        r.nus = nus_string(tb);
    });

    std::vector<int> ident(n);
    for (int k = 0; k < n; ++k) ident[k] = k;
    DistanceReport self_kk = kk_distance(base, base, kk_default_grid(), MapPair{ident, ident});
    FiniteMMS p1 = make_point(1.0), p2 = make_point(2.0);
    DistanceReport point_kk = kk_distance(p1, p2, kk_default_grid(), MapPair{{0}, {0}});

    Table trend;
    trend.name = "trend";
    trend.columns = {"delta", "kk", "witness_t", "gh", "d_spec", "direction", "nu1", "nus"};
    for (size_t i = 0; i < delta.size(); ++i) {
        const Row& r = rows[i];
        trend.row({delta[i], r.kk, r.witness_t, r.gh, r.dspec, r.direction,
                   static_cast<long long>(r.nu1), r.nus});
    }
    trend.chart.enabled = true;
    trend.chart.x_col = 0;
    trend.chart.y_cols = {1, 3, 4};
    trend.chart.title = "kernel-pullback distance under radius perturbation";

    Table fixtures;
    fixtures.name = "fixtures";
    fixtures.columns = {"pair", "kk", "witness_t"};
    fixtures.row({std::string("identity cycle(1," + std::to_string(n) + ")"), self_kk.value,
                  self_kk.witness_t});
    fixtures.row({std::string("point(1) vs point(2)"), point_kk.value, point_kk.witness_t});

    ScenarioOutcome out;
    out.config = cfg;
    out.doc.name = cfg.name;
    out.doc.meta = {{"scenario", cfg.name}, {"n", fmt_int(n)}, {"t", fmt17(cfg.t)},
                    {"seed", fmt_int(static_cast<long long>(cfg.seed))}};
    out.doc.tables.push_back(std::move(trend));
    out.doc.tables.push_back(std::move(fixtures));

    std::vector<double> kks;
    for (const Row& r : rows) kks.push_back(r.kk);
    out.checks.push_back(check("kk-decreasing", strictly_decreasing(kks), join_values(kks)));
    out.checks.push_back(check("kk-identity-zero", self_kk.value == 0.0, fmt17(self_kk.value)));
    double expected = std::exp(-2.0) / 2.0;
    out.checks.push_back(check("kk-point-pair-exact",
                               std::abs(point_kk.value - expected) <= 1e-12,
                               fmt17(point_kk.value) + " vs " + fmt17(expected)));
    return out;
}

// --------------------------------------------------------------------- custom

ScenarioOutcome run_custom(const ScenarioConfig& cfg) {
    Budget budget = resolve_budget(cfg.budget, {4, 8});
    std::vector<std::string> exprs =
        cfg.spaces.empty() ? std::vector<std::string>{"cycle(1,16)", "cycle(1.1,16)"} : cfg.spaces;
    if (exprs.size() < 2) throw contract_error("scenario: custom wants at least two spaces");

    std::vector<FiniteMMS> spaces;
    spaces.reserve(exprs.size());
    for (const std::string& e : exprs) spaces.push_back(parse_space(e));

    std::vector<std::pair<int, int>> pair_idx;
    for (size_t i = 0; i < spaces.size(); ++i)
        for (size_t j = i + 1; j < spaces.size(); ++j)
            pair_idx.emplace_back(static_cast<int>(i), static_cast<int>(j));

    struct Row {
        double gh = 0, dspec = 0, lower = 0, kk = 0, gap_max8 = 0;
        std::string direction;
        int nu1_x = 0, nu1_y = 0;
    };
    std::vector<Row> rows(pair_idx.size());

    run_rows(static_cast<int>(pair_idx.size()), [&](int k) {
        std::uint64_t seed = mix64(cfg.seed, static_cast<std::uint64_t>(k));
        const FiniteMMS& X = spaces[pair_idx[k].first];
        const FiniteMMS& Y = spaces[pair_idx[k].second];
        SpectralData sdx = eigensolve(build_laplacian(X), X.tag());
        SpectralData sdy = eigensolve(build_laplacian(Y), Y.tag());
        RecoveredMap f = recover_map(X, Y, sdx, sdy, cfg.t);
        DistanceReport gh = mgh_approx_eps(f.table, X, Y);

        Row& r = rows[k];
        r.gh = std::max(gh.distortion, gh.covering);
        DistanceReport ds = d_spec(X, Y, cfg.t, budget, seed);
        r.dspec = ds.value;
        r.direction = direction_name(ds.direction);
        r.lower = d_spec_lower(X, Y, cfg.t, budget, seed).value;
        r.kk = kk_distance(X, Y, kCompactGrid, cfg.t).value;
        r.gap_max8 = column_max_gap(sdx, sdy, 8);
        r.nu1_x = nu1_of(cluster_multiplicities(sdx));
        r.nu1_y = nu1_of(cluster_multiplicities(sdy));
    });

    Table tbl;
    tbl.name = "pairs";
    tbl.columns = {"pair", "x",  "y",         "gh",  "d_spec", "direction",
                   "d_spec_lower", "kk", "gap_max8", "nu1_x", "nu1_y"};
    for (size_t k = 0; k < pair_idx.size(); ++k) {
        const Row& r = rows[k];
        tbl.row({static_cast<long long>(k), exprs[pair_idx[k].first], exprs[pair_idx[k].second],
                 r.gh, r.dspec, r.direction, r.lower, r.kk, r.gap_max8,
                 static_cast<long long>(r.nu1_x), static_cast<long long>(r.nu1_y)});
    }
    tbl.chart.enabled = true;
    tbl.chart.x_col = 0;
    tbl.chart.y_cols = {3, 4, 7};
    tbl.chart.title = "pairwise distances";

    ScenarioOutcome out;
    out.config = cfg;
    out.doc.name = cfg.name;
    out.doc.meta = {{"scenario", cfg.name}, {"t", fmt17(cfg.t)},
                    {"seed", fmt_int(static_cast<long long>(cfg.seed))}};
    out.doc.tables.push_back(std::move(tbl));

    bool finite = true;
    for (const Row& r : rows)
        finite = finite && std::isfinite(r.gh) && std::isfinite(r.dspec) &&
                 std::isfinite(r.kk) && r.dspec >= 0.0 && r.lower >= 0.0;
    out.checks.push_back(check("values-finite", finite,
                               std::to_string(rows.size()) + " pairs"));

    if (cfg.max_value) {
        bool below = true;
        double worst = 0.0;
        for (const Row& r : rows) {
            below = below && r.dspec <= *cfg.max_value;
            worst = std::max(worst, r.dspec);
        }
        out.checks.push_back(check("values-below-ceiling", below,
                                   fmt6(worst) + " vs ceiling " + fmt6(*cfg.max_value)));
    }
    return out;
}

}  // namespace

// ------------------------------------------------------------------ plumbing

FiniteMMS parse_space(const std::string& expr) {
    const std::string prefix = "rescale(";
    if (expr.size() > prefix.size() + 1 && expr.compare(0, prefix.size(), prefix) == 0 &&
        expr.back() == ')') {
        std::string body = expr.substr(prefix.size(), expr.size() - prefix.size() - 1);
        std::vector<size_t> commas;
        int depth = 0;
        for (size_t i = 0; i < body.size(); ++i) {
            if (body[i] == '(') ++depth;
            if (body[i] == ')') --depth;
            if (body[i] == ',' && depth == 0) commas.push_back(i);
        }
        if (commas.size() < 2)
            throw contract_error("parse_space: rescale wants (expr, alpha, beta)");
        size_t ca = commas[commas.size() - 2], cb = commas.back();
        std::string inner = body.substr(0, ca);
        std::string as = body.substr(ca + 1, cb - ca - 1), bs = body.substr(cb + 1);
        char* end = nullptr;
        double alpha = std::strtod(as.c_str(), &end);
        if (end != as.c_str() + as.size() || !(alpha > 0.0))
            throw contract_error("parse_space: bad rescale factor '" + as + "'");
        double beta = std::strtod(bs.c_str(), &end);
        if (end != bs.c_str() + bs.size() || !(beta > 0.0))
            throw contract_error("parse_space: bad rescale factor '" + bs + "'");
        return rescale(parse_space(inner), alpha, beta);
    }
    GeneratorSpec spec = GeneratorSpec::parse(expr);
    if (spec.kind == GeneratorSpec::Kind::Custom)
        throw contract_error("parse_space: unrecognized space expression '" + expr + "'");
    return build_space(spec);
}

ScenarioConfig default_config(const std::string& name) {
    ScenarioConfig cfg;
    cfg.name = name;
    cfg.eps = {0.2, 0.1, 0.05};
    cfg.delta = {0.2, 0.1, 0.05};
    cfg.sizes = {16, 32, 64, 128};
    return cfg;
}

ScenarioConfig config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw contract_error(std::string("config: ") + e.what());
    }
    if (!j.is_object() || !j.contains("scenario"))
        throw contract_error("config: object with a 'scenario' key expected");
    ScenarioConfig cfg = default_config(j.at("scenario").get<std::string>());
    static const std::set<std::string> known{"scenario", "eps",    "delta",     "sizes",
                                             "n",        "t",      "budget_inner",
                                             "budget_outer",       "seed",      "spaces",
                                             "max_value", "out"};
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key()))
            throw contract_error("config: unknown key '" + it.key() + "'");
    try {
        if (j.contains("eps")) cfg.eps = j.at("eps").get<std::vector<double>>();
        if (j.contains("delta")) cfg.delta = j.at("delta").get<std::vector<double>>();
        if (j.contains("sizes")) cfg.sizes = j.at("sizes").get<std::vector<int>>();
        if (j.contains("n")) cfg.n = j.at("n").get<int>();
        if (j.contains("t")) cfg.t = j.at("t").get<double>();
        if (j.contains("budget_inner")) cfg.budget.inner = j.at("budget_inner").get<int>();
        if (j.contains("budget_outer")) cfg.budget.outer = j.at("budget_outer").get<int>();
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("spaces")) cfg.spaces = j.at("spaces").get<std::vector<std::string>>();
        if (j.contains("max_value")) cfg.max_value = j.at("max_value").get<double>();
        if (j.contains("out")) cfg.out_dir = j.at("out").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw contract_error(std::string("config: ") + e.what());
    }
    return cfg;
}

bool ScenarioOutcome::passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return !checks.empty();
}

ScenarioOutcome run_scenario(const ScenarioConfig& cfg) {
    if (!(cfg.t > 0.0)) throw domain_error("scenario: t must be positive");
    if (cfg.name == "flat-tori") return run_flat_tori(cfg);
    if (cfg.name == "collapse-point") return run_collapse_point(cfg);
    if (cfg.name == "eigen-convergence") return run_eigen_convergence(cfg);
    if (cfg.name == "reconstruct") return run_reconstruct(cfg);
    if (cfg.name == "kk-continuity") return run_kk_continuity(cfg);
    if (cfg.name == "custom") return run_custom(cfg);
    throw contract_error("scenario: unknown name '" + cfg.name + "'");
}

std::string summary_json(const ScenarioOutcome& outcome) {
    JsonWriter w;
    w.begin_object();
    w.key("scenario");
    w.value(outcome.config.name);
    w.key("passed");
    w.value_bool(outcome.passed());
    w.key("checks");
    w.begin_array();
    for (const auto& c : outcome.checks) {
        w.begin_object();
        w.key("name");
        w.value(c.name);
        w.key("passed");
        w.value_bool(c.passed);
        w.key("detail");
        w.value(c.detail);
        w.end_object();
    }
    w.end_array();
    w.key("config");
    w.begin_object();
    w.key("t");
    w.value(outcome.config.t);
    w.key("n");
    w.value(static_cast<long long>(outcome.config.n));
    w.key("seed");
    w.value(static_cast<long long>(outcome.config.seed));
    w.key("budget_inner");
    w.value(static_cast<long long>(outcome.config.budget.inner));
    w.key("budget_outer");
    w.value(static_cast<long long>(outcome.config.budget.outer));
    w.end_object();
    w.end_object();
    return w.str();
}

std::vector<Artifact> scenario_artifacts(const ScenarioOutcome& outcome) {
    std::vector<Artifact> out = emit_report(outcome.doc, Format::csv);
    bool any_chart = false;
    for (const auto& t : outcome.doc.tables) any_chart = any_chart || t.chart.enabled;
    if (any_chart) {
        auto svgs = emit_report(outcome.doc, Format::svg);
        out.insert(out.end(), svgs.begin(), svgs.end());
    }
    out.push_back({outcome.doc.name + "_summary.json", summary_json(outcome) + "\n"});
    return out;
}

}  // namespace specmm
