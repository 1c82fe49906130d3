#include "specmm/distances.hpp"

#include <algorithm>
#include <cmath>

#include "specmm/common.hpp"
#include "specmm/heat.hpp"
#include "specmm/ot.hpp"
#include "specmm/report.hpp"

namespace specmm {

namespace {

constexpr double kEngineTailTol = 1e-12;
constexpr double kIcpTol = 1e-10;
constexpr int kIcpMaxIter = 100;

Eigen::MatrixXd cross_d2(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::VectorXd na = A.colwise().squaredNorm();
    Eigen::VectorXd nb = B.colwise().squaredNorm();
    Eigen::MatrixXd d2 = -2.0 * (A.transpose() * B);
    d2.colwise() += na;
    d2.rowwise() += nb.transpose();
    return d2.cwiseMax(0.0);
}

// directed sup of nearest-neighbor distances: candidates come from the fast
// Gram expansion, the winning distance is recomputed by exact column
// subtraction so coincident points report 0, not gemm roundoff
double directed_sup(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                    const Eigen::MatrixXd& d2) {
    double worst = 0.0;
    for (int p = 0; p < d2.rows(); ++p) {
        int q;
        d2.row(p).minCoeff(&q);
        worst = std::max(worst, (A.col(p) - B.col(q)).squaredNorm());
    }
    return std::sqrt(worst);
}

double hausdorff_exact(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                       const Eigen::MatrixXd& d2) {
    return std::max(directed_sup(A, B, d2), directed_sup(B, A, d2.transpose()));
}

// rows of an I-embedding, truncated at a fixed level and padded to depth
Eigen::MatrixXd member_cloud(const SpectralData& sd, double t, int M, int depth) {
    const int n = static_cast<int>(sd.lambdas.size());
    const double root_mass = std::sqrt(sd.total_mass);
    Eigen::MatrixXd cloud = Eigen::MatrixXd::Zero(depth, n);
    for (int i = 1; i <= M; ++i)
        cloud.row(i - 1) =
            root_mass * std::exp(-0.5 * sd.lambdas[i] * t) * sd.phis.col(i).transpose();
    return cloud;
}

struct Block {
    int row0;
    int nu;
};

// clusters that survive the truncation, as row ranges of the I-cloud
std::vector<Block> cloud_blocks(const MultiplicityTable& table, int M) {
    std::vector<Block> blocks;
    for (int c = 0; c < table.clusters(); ++c) {
        int off = table.offsets[c];
        int nu = table.nus[c];
        if (off == 0) continue;  // harmonic coordinate is dropped by the embedding
        if (off + nu - 1 > M) break;
        blocks.push_back({off - 1, nu});
    }
    return blocks;
}

Eigen::MatrixXd apply_blocks(const Eigen::MatrixXd& cloud,
                             const std::vector<Block>& blocks,
                             const std::vector<Eigen::MatrixXd>& rots) {
    Eigen::MatrixXd out = cloud;
    for (std::size_t c = 0; c < blocks.size(); ++c)
        out.middleRows(blocks[c].row0, blocks[c].nu) =
            rots[c] * cloud.middleRows(blocks[c].row0, blocks[c].nu);
    return out;
}

struct SideCtx {
    SpectralData base;
    MultiplicityTable table;
    CandidateFamily family;
    int M = 0;
    std::vector<Block> blocks;
    std::vector<Eigen::MatrixXd> clouds;
};

struct PairCtx {
    double t = 0.0;
    Budget budget;
    std::uint64_t seed = 0;
    bool same_key = false;
    SideCtx x, y;
};

void build_side(SideCtx& side, const FiniteMMS& space, double t, int count,
                std::uint64_t seed) {
    side.base = eigensolve(build_laplacian(space), space.tag());
    side.table = cluster_multiplicities(side.base);
    side.family = make_family(space, side.base, side.table, count, seed);
    side.M = embed_I(side.base, t, kEngineTailTol).M;
    side.blocks = cloud_blocks(side.table, side.M);
}

void build_clouds(SideCtx& side, double t, int depth) {
    side.clouds.reserve(side.family.members.size());
    for (const SpectralData& sd : side.family.members)
        side.clouds.push_back(member_cloud(sd, t, side.M, depth));
}

PairCtx build_ctx(const FiniteMMS& X, const FiniteMMS& Y, double t, const Budget& budget,
                  std::uint64_t seed) {
    if (!(t > 0.0)) throw domain_error("spectral distance: t must be positive");
    PairCtx ctx;
    ctx.t = t;
    ctx.budget.inner = std::max(budget.inner, 1);
    ctx.budget.outer = std::max(budget.outer, 1);
    ctx.seed = seed;
    ctx.same_key = space_key(X) == space_key(Y);
    int count = std::max(ctx.budget.inner, ctx.budget.outer);
    build_side(ctx.x, X, t, count, seed);
    build_side(ctx.y, Y, t, count, seed);
    int depth = std::max(ctx.x.M, ctx.y.M);
    build_clouds(ctx.x, t, depth);
    build_clouds(ctx.y, t, depth);
    return ctx;
}

struct AlignResult {
    double value = 0.0;
    std::vector<Eigen::MatrixXd> rots;
};

// alternate nearest-neighbor correspondence with per-cluster orthogonal least
// squares; keeps the best Hausdorff value seen, stops once improvement stalls
AlignResult icp_align(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B0,
                      const std::vector<Block>& blocks) {
    AlignResult best;
    best.rots.reserve(blocks.size());
    for (const Block& b : blocks) best.rots.push_back(Eigen::MatrixXd::Identity(b.nu, b.nu));

    Eigen::MatrixXd B = B0;
    Eigen::MatrixXd d2 = cross_d2(A, B);
    best.value = hausdorff_exact(A, B, d2);
    std::vector<Eigen::MatrixXd> rots = best.rots;

    for (int iter = 0; iter < kIcpMaxIter && best.value > 1e-13; ++iter) {
        // correspondences from the current overlay, both directions
        std::vector<std::pair<int, int>> pairs;
        pairs.reserve(d2.rows() + d2.cols());
        for (int p = 0; p < d2.rows(); ++p) {
            int q;
            d2.row(p).minCoeff(&q);
            pairs.emplace_back(p, q);
        }
        for (int q = 0; q < d2.cols(); ++q) {
            int p;
            d2.col(q).minCoeff(&p);
            pairs.emplace_back(p, q);
        }

        for (std::size_t c = 0; c < blocks.size(); ++c) {
            Eigen::MatrixXd h = Eigen::MatrixXd::Zero(blocks[c].nu, blocks[c].nu);
            for (auto [p, q] : pairs)
                h += B0.block(blocks[c].row0, q, blocks[c].nu, 1) *
                     A.block(blocks[c].row0, p, blocks[c].nu, 1).transpose();
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(h,
                                                  Eigen::ComputeFullU | Eigen::ComputeFullV);
            rots[c] = svd.matrixV() * svd.matrixU().transpose();
        }

        B = apply_blocks(B0, blocks, rots);
        d2 = cross_d2(A, B);
        double h = hausdorff_exact(A, B, d2);
        if (h < best.value - kIcpTol) {
            best.value = h;
            best.rots = rots;
        } else {
            if (h < best.value) {
                best.value = h;
                best.rots = rots;
            }
            break;
        }
    }
    return best;
}

struct InnerResult {
    double value = 0.0;
    int b = -1;
    std::vector<Eigen::MatrixXd> rots;
};

// infimum over the inf side's data, Procrustes-refined from budget.inner
// starts; when both spaces share content the matching candidate joins the
// starts so a sampled rotation can always be undone exactly
InnerResult inner_inf(const PairCtx& ctx, bool forward, int a_idx) {
    const SideCtx& sup = forward ? ctx.x : ctx.y;
    const SideCtx& inf = forward ? ctx.y : ctx.x;
    const Eigen::MatrixXd& A = sup.clouds[a_idx];

    std::vector<int> starts;
    if (ctx.same_key) starts.push_back(a_idx);
    for (int s = 0; s < ctx.budget.inner; ++s)
        if (!(ctx.same_key && s == a_idx)) starts.push_back(s);

    InnerResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (int s : starts) {
        AlignResult aligned = icp_align(A, inf.clouds[s], inf.blocks);
        if (aligned.value < best.value) {
            best.value = aligned.value;
            best.b = s;
            best.rots = std::move(aligned.rots);
        }
        if (best.value <= 1e-13) break;
    }
    return best;
}

DistanceReport base_report(const PairCtx& ctx, const std::string& kind) {
    DistanceReport r;
    r.kind = kind;
    r.t = ctx.t;
    r.seed = ctx.seed;
    r.budget_inner = ctx.budget.inner;
    r.budget_outer = ctx.budget.outer;
    return r;
}

void json_int_array(JsonWriter& w, const std::vector<int>& v) {
    w.begin_array();
    for (int x : v) w.value(static_cast<long long>(x));
    w.end_array();
}

// weighted kernel pullback defect at a single time, both directions
double kk_eval_at(const SpectralData& sx, const SpectralData& sy, const MapPair& maps,
                  double t) {
    double w = std::exp(-(t + 1.0 / t));
    Eigen::MatrixXd px = heat_kernel(sx, t);
    Eigen::MatrixXd py = heat_kernel(sy, t);
    const int nx = static_cast<int>(px.rows());
    const int ny = static_cast<int>(py.rows());
    double defect = 0.0;
    for (int x2 = 0; x2 < nx; ++x2)
        for (int x1 = 0; x1 < nx; ++x1)
            defect = std::max(defect, std::abs(py(maps.f[x1], maps.f[x2]) - px(x1, x2)));
    for (int y2 = 0; y2 < ny; ++y2)
        for (int y1 = 0; y1 < ny; ++y1)
            defect = std::max(defect, std::abs(px(maps.g[y1], maps.g[y2]) - py(y1, y2)));
    return w * defect;
}

}  // namespace

std::string direction_name(Direction d) {
    switch (d) {
        case Direction::exact: return "exact";
        case Direction::upper_estimate: return "upper_estimate";
        case Direction::lower_estimate: return "lower_estimate";
    }
    return "exact";
}

CandidateFamily make_family(const FiniteMMS& x, const SpectralData& base,
                            const MultiplicityTable& table, int count, std::uint64_t seed) {
    CandidateFamily family;
    family.members.reserve(std::max(count, 1));
    family.members.push_back(base);
    std::uint64_t space_seed = mix64(seed, space_key(x));
    for (int k = 1; k < count; ++k)
        family.members.push_back(random_spectral_data(base, table, mix64(space_seed, k)));
    return family;
}

double hausdorff_l2(const EmbeddedCloud& A, const EmbeddedCloud& B) {
    if (A.t != B.t) throw contract_error("hausdorff_l2: clouds taken at different times");
    if (A.variant != B.variant)
        throw contract_error("hausdorff_l2: clouds of different variants");
    int depth = std::max(A.coords.rows(), B.coords.rows());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(depth, A.coords.cols());
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(depth, B.coords.cols());
    a.topRows(A.coords.rows()) = A.coords;
    b.topRows(B.coords.rows()) = B.coords;
    return hausdorff_exact(a, b, cross_d2(a, b));
}

std::vector<int> nearest_map(const EmbeddedCloud& from, const EmbeddedCloud& to) {
    if (from.t != to.t) throw contract_error("nearest_map: clouds taken at different times");
    if (from.variant != to.variant)
        throw contract_error("nearest_map: clouds of different variants");
    int depth = std::max(from.coords.rows(), to.coords.rows());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(depth, from.coords.cols());
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(depth, to.coords.cols());
    a.topRows(from.coords.rows()) = from.coords;
    b.topRows(to.coords.rows()) = to.coords;
    Eigen::MatrixXd d2 = cross_d2(a, b);
    std::vector<int> map(a.cols());
    for (int p = 0; p < d2.rows(); ++p) {
        int q;
        d2.row(p).minCoeff(&q);
        map[p] = q;
    }
    return map;
}

DistanceReport d_spec_lower(const FiniteMMS& X, const FiniteMMS& Y, double t,
                            const Budget& budget, std::uint64_t seed) {
    PairCtx ctx = build_ctx(X, Y, t, budget, seed);
    DistanceReport r = base_report(ctx, "d_spec_lower");
    r.direction = Direction::upper_estimate;  // sampled infimum can only overshoot
    r.value = std::numeric_limits<double>::infinity();
    for (int dir = 0; dir < 2; ++dir)
        for (int a = 0; a < ctx.budget.inner; ++a) {
            InnerResult inner = inner_inf(ctx, dir == 0, a);
            if (inner.value < r.value) {
                r.value = inner.value;
                r.witness_dir = dir;
                r.witness_a = a;
                r.witness_b = inner.b;
                r.witness_rotation = std::move(inner.rots);
            }
        }
    return r;
}

DistanceReport d_spec_directed(const FiniteMMS& X, const FiniteMMS& Y, double t,
                               const Budget& budget, std::uint64_t seed) {
    PairCtx ctx = build_ctx(X, Y, t, budget, seed);
    DistanceReport r = base_report(ctx, "d_spec_directed");
    r.direction = Direction::lower_estimate;  // outer supremum is sampled
    r.value = -1.0;
    for (int a = 0; a < ctx.budget.outer; ++a) {
        InnerResult inner = inner_inf(ctx, true, a);
        if (inner.value > r.value) {
            r.value = inner.value;
            r.witness_dir = 0;
            r.witness_a = a;
            r.witness_b = inner.b;
            r.witness_rotation = std::move(inner.rots);
        }
    }
    return r;
}

DistanceReport d_spec(const FiniteMMS& X, const FiniteMMS& Y, double t,
                      const Budget& budget, std::uint64_t seed) {
    PairCtx ctx = build_ctx(X, Y, t, budget, seed);
    DistanceReport r = base_report(ctx, "d_spec");
    r.direction = Direction::lower_estimate;
    r.value = -1.0;
    for (int dir = 0; dir < 2; ++dir)
        for (int a = 0; a < ctx.budget.outer; ++a) {
            InnerResult inner = inner_inf(ctx, dir == 0, a);
            if (inner.value > r.value) {
                r.value = inner.value;
                r.witness_dir = dir;
                r.witness_a = a;
                r.witness_b = inner.b;
                r.witness_rotation = std::move(inner.rots);
            }
        }
    return r;
}

double reproduce(const DistanceReport& r, const FiniteMMS& X, const FiniteMMS& Y) {
    if (r.kind == "d_spec_lower" || r.kind == "d_spec_directed" || r.kind == "d_spec") {
        Budget budget{r.budget_inner, r.budget_outer};
        PairCtx ctx = build_ctx(X, Y, r.t, budget, r.seed);
        const SideCtx& sup = r.witness_dir == 0 ? ctx.x : ctx.y;
        const SideCtx& inf = r.witness_dir == 0 ? ctx.y : ctx.x;
        Eigen::MatrixXd B =
            apply_blocks(inf.clouds[r.witness_b], inf.blocks, r.witness_rotation);
        const Eigen::MatrixXd& A = sup.clouds[r.witness_a];
        return hausdorff_exact(A, B, cross_d2(A, B));
    }
    if (r.kind == "kk") {
        MapPair maps{r.witness_map_fwd, r.witness_map_bwd};
        SpectralData sx = eigensolve(build_laplacian(X), X.tag());
        SpectralData sy = eigensolve(build_laplacian(Y), Y.tag());
        return kk_eval_at(sx, sy, maps, r.witness_t);
    }
    if (r.kind == "mgh") return mgh_approx_eps(r.witness_map_fwd, X, Y).value;
    throw contract_error("reproduce: unknown report kind " + r.kind);
}

std::pair<SpectralData, SpectralData> aligned_witness_datas(const DistanceReport& r,
                                                            const FiniteMMS& X,
                                                            const FiniteMMS& Y) {
    if (r.kind != "d_spec_lower" && r.kind != "d_spec_directed" && r.kind != "d_spec")
        throw contract_error("aligned_witness_datas: report kind " + r.kind +
                             " carries no alignment witness");
    Budget budget{r.budget_inner, r.budget_outer};
    PairCtx ctx = build_ctx(X, Y, r.t, budget, r.seed);
    const SideCtx& sup = r.witness_dir == 0 ? ctx.x : ctx.y;
    const SideCtx& inf = r.witness_dir == 0 ? ctx.y : ctx.x;
    SpectralData sup_sd = sup.family.members.at(r.witness_a);
    SpectralData inf_sd = inf.family.members.at(r.witness_b);
    if (r.witness_rotation.size() != inf.blocks.size())
        throw contract_error("aligned_witness_datas: rotation count does not match witness");
    // block row0 indexes I-cloud rows, so eigen column row0 + 1 starts the cluster
    for (std::size_t c = 0; c < inf.blocks.size(); ++c)
        inf_sd.phis.middleCols(inf.blocks[c].row0 + 1, inf.blocks[c].nu) =
            inf_sd.phis.middleCols(inf.blocks[c].row0 + 1, inf.blocks[c].nu) *
            r.witness_rotation[c].transpose();
    if (r.witness_dir == 0) return {std::move(sup_sd), std::move(inf_sd)};
    return {std::move(inf_sd), std::move(sup_sd)};
}

std::vector<double> kk_default_grid() {
    const int points = 65;
    std::vector<double> grid(points);
    double lo = std::log(0.05), hi = std::log(20.0);
    for (int k = 0; k < points; ++k)
        grid[k] = std::exp(lo + (hi - lo) * k / (points - 1));
    return grid;
}

DistanceReport kk_distance(const FiniteMMS& X, const FiniteMMS& Y,
                           const std::vector<double>& t_grid, const MapPair& maps) {
    if (t_grid.empty()) throw contract_error("kk_distance: empty t grid");
    for (double t : t_grid)
        if (!(t > 0.0)) throw contract_error("kk_distance: grid times must be positive");
    if (static_cast<int>(maps.f.size()) != X.n || static_cast<int>(maps.g.size()) != Y.n)
        throw contract_error("kk_distance: map size mismatch");
    for (int v : maps.f)
        if (v < 0 || v >= Y.n) throw contract_error("kk_distance: forward map out of range");
    for (int v : maps.g)
        if (v < 0 || v >= X.n) throw contract_error("kk_distance: backward map out of range");

    SpectralData sx = eigensolve(build_laplacian(X), X.tag());
    SpectralData sy = eigensolve(build_laplacian(Y), Y.tag());

    double value = -1.0, at_t = t_grid.front();
    for (double t : t_grid) {
        double v = kk_eval_at(sx, sy, maps, t);
        if (v > value) {
            value = v;
            at_t = t;
        }
    }

    DistanceReport r;
    r.kind = "kk";
    r.value = value;
    r.direction = Direction::upper_estimate;  // specific maps bound the infimum
    r.witness_map_fwd = maps.f;
    r.witness_map_bwd = maps.g;
    r.witness_t = at_t;
    return r;
}

DistanceReport kk_distance(const FiniteMMS& X, const FiniteMMS& Y,
                           const std::vector<double>& t_grid, double embed_t) {
    SpectralData sx = eigensolve(build_laplacian(X), X.tag());
    SpectralData sy = eigensolve(build_laplacian(Y), Y.tag());
    EmbeddedCloud cx = embed_I(sx, embed_t, kEngineTailTol);
    EmbeddedCloud cy = embed_I(sy, embed_t, kEngineTailTol);
    MapPair maps{nearest_map(cx, cy), nearest_map(cy, cx)};
    DistanceReport r = kk_distance(X, Y, t_grid, maps);
    r.t = embed_t;
    return r;
}

std::pair<double, double> spectral_approx_eps(const std::vector<int>& f,
                                              const SpectralData& a, const SpectralData& b,
                                              double t) {
    const int nx = static_cast<int>(a.lambdas.size());
    const int ny = static_cast<int>(b.lambdas.size());
    if (static_cast<int>(f.size()) != nx)
        throw contract_error("spectral_approx_eps: map must be total");
    for (int v : f)
        if (v < 0 || v >= ny) throw contract_error("spectral_approx_eps: map out of range");

    EmbeddedCloud ca = embed_I(a, t, std::numeric_limits<double>::min());
    EmbeddedCloud cb = embed_I(b, t, std::numeric_limits<double>::min());
    int depth = std::max(ca.coords.rows(), cb.coords.rows());
    Eigen::MatrixXd ia = Eigen::MatrixXd::Zero(depth, nx);
    Eigen::MatrixXd ib = Eigen::MatrixXd::Zero(depth, ny);
    ia.topRows(ca.coords.rows()) = ca.coords;
    ib.topRows(cb.coords.rows()) = cb.coords;

    double eps_weak = 0.0;
    for (int x = 0; x < nx; ++x)
        eps_weak = std::max(eps_weak, (ia.col(x) - ib.col(f[x])).norm());

    Eigen::MatrixXd image(depth, nx);
    for (int x = 0; x < nx; ++x) image.col(x) = ib.col(f[x]);
    double covering = directed_sup(ib, image, cross_d2(ib, image));
    return {eps_weak, std::max(eps_weak, covering)};
}

DistanceReport mgh_approx_eps(const std::vector<int>& f, const FiniteMMS& X,
                              const FiniteMMS& Y) {
    if (static_cast<int>(f.size()) != X.n)
        throw contract_error("mgh_approx_eps: map must be total");
    for (int v : f)
        if (v < 0 || v >= Y.n) throw contract_error("mgh_approx_eps: map out of range");

    DistanceReport r;
    r.kind = "mgh";
    r.direction = Direction::exact;  // the quality of this specific map
    r.witness_map_fwd = f;

    for (int x2 = 0; x2 < X.n; ++x2)
        for (int x1 = 0; x1 < X.n; ++x1)
            r.distortion = std::max(
                r.distortion, std::abs(Y.dist(f[x1], f[x2]) - X.dist(x1, x2)));

    for (int y = 0; y < Y.n; ++y) {
        double nearest = std::numeric_limits<double>::infinity();
        for (int x = 0; x < X.n; ++x) nearest = std::min(nearest, Y.dist(y, f[x]));
        r.covering = std::max(r.covering, nearest);
    }

    Eigen::VectorXd push = Eigen::VectorXd::Zero(Y.n);
    for (int x = 0; x < X.n; ++x) push[f[x]] += X.measure[x];
    push /= X.measure.sum();
    Eigen::VectorXd target = Y.measure / Y.measure.sum();
    r.w2 = wasserstein2(push, target, Y.dist);
    r.mass_defect = std::abs(X.measure.sum() - Y.measure.sum());

    r.value = std::max({r.distortion, r.covering, r.w2 + r.mass_defect});
    return r;
}

std::string report_json(const DistanceReport& r) {
    JsonWriter w;
    w.begin_object();
    w.key("kind");
    w.value(r.kind);
    w.key("value");
    w.value(r.value);
    w.key("direction");
    w.value(direction_name(r.direction));
    w.key("t");
    w.value(r.t);
    w.key("seed");
    w.value(std::to_string(r.seed));
    w.key("budget");
    w.begin_object();
    w.key("inner");
    w.value(static_cast<long long>(r.budget_inner));
    w.key("outer");
    w.value(static_cast<long long>(r.budget_outer));
    w.end_object();
    w.key("witness");
    w.begin_object();
    w.key("a");
    w.value(static_cast<long long>(r.witness_a));
    w.key("b");
    w.value(static_cast<long long>(r.witness_b));
    w.key("dir");
    w.value(static_cast<long long>(r.witness_dir));
    w.key("rotation");
    w.begin_array();
    for (const Eigen::MatrixXd& rot : r.witness_rotation) {
        w.begin_array();
        for (int i = 0; i < rot.rows(); ++i) {
            w.begin_array();
            for (int j = 0; j < rot.cols(); ++j) w.value(rot(i, j));
            w.end_array();
        }
        w.end_array();
    }
    w.end_array();
    w.key("map_fwd");
    json_int_array(w, r.witness_map_fwd);
    w.key("map_bwd");
    json_int_array(w, r.witness_map_bwd);
    w.key("achieving_t");
    w.value(r.witness_t);
    w.end_object();
    w.key("components");
    w.begin_object();
    w.key("distortion");
    w.value(r.distortion);
    w.key("covering");
    w.value(r.covering);
    w.key("w2");
    w.value(r.w2);
    w.key("mass_defect");
    w.value(r.mass_defect);
    w.end_object();
    w.end_object();
    return w.str();
}

std::string report_line(const DistanceReport& r) {
    std::string line = r.kind + " value=" + fmt17(r.value) +
                       " direction=" + direction_name(r.direction);
    if (std::isfinite(r.t)) line += " t=" + fmt17(r.t);
    line += " seed=" + std::to_string(r.seed);
    if (r.budget_inner > 0)
        line += " budget=" + fmt_int(r.budget_inner) + "/" + fmt_int(r.budget_outer);
    return line;
}

}  // namespace specmm
