#include "specmm/mmspace.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "specmm/report.hpp"

namespace specmm {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Shortest round-trip decimal; keeps generator tags canonical and readable.
std::string num_tag(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string GeneratorSpec::tag() const {
    switch (kind) {
        case Kind::Cycle:
            return "cycle(" + num_tag(radius) + "," + std::to_string(count) + ")";
        case Kind::Product:
            return "product(" + left->tag() + "," + right->tag() + ")";
        case Kind::Point:
            return "point(" + num_tag(mass) + ")";
        case Kind::Custom:
            return custom_tag;
    }
    return "custom";
}

GeneratorSpec GeneratorSpec::cycle(double radius, int count) {
    GeneratorSpec g;
    g.kind = Kind::Cycle;
    g.radius = radius;
    g.count = count;
    return g;
}

GeneratorSpec GeneratorSpec::product(GeneratorSpec a, GeneratorSpec b) {
    GeneratorSpec g;
    g.kind = Kind::Product;
    g.left = std::make_shared<GeneratorSpec>(std::move(a));
    g.right = std::make_shared<GeneratorSpec>(std::move(b));
    return g;
}

GeneratorSpec GeneratorSpec::point(double mass) {
    GeneratorSpec g;
    g.kind = Kind::Point;
    g.mass = mass;
    return g;
}

GeneratorSpec GeneratorSpec::custom(std::string tag) {
    GeneratorSpec g;
    g.kind = Kind::Custom;
    g.custom_tag = std::move(tag);
    return g;
}

GeneratorSpec GeneratorSpec::scaled(double alpha) const {
    GeneratorSpec g = *this;
    switch (kind) {
        case Kind::Cycle:
            g.radius *= alpha;
            break;
        case Kind::Product:
            g.left = std::make_shared<GeneratorSpec>(left->scaled(alpha));
            g.right = std::make_shared<GeneratorSpec>(right->scaled(alpha));
            break;
        case Kind::Point:
        case Kind::Custom:
            break;
    }
    return g;
}

namespace {

// Splits "a,b" at the top-level comma of a balanced expression.
bool split_args(const std::string& s, std::string& a, std::string& b) {
    int depth = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '(') ++depth;
        if (s[i] == ')') --depth;
        if (s[i] == ',' && depth == 0) {
            a = s.substr(0, i);
            b = s.substr(i + 1);
            return true;
        }
    }
    return false;
}

bool parse_double(const std::string& s, double& out) {
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && s.size() > 0 && std::isfinite(out);
}

}  // namespace

GeneratorSpec GeneratorSpec::parse(const std::string& tag) {
    auto inner = [&](const char* prefix) -> std::optional<std::string> {
        size_t np = std::strlen(prefix);
        if (tag.size() > np + 1 && tag.compare(0, np, prefix) == 0 && tag[np] == '(' &&
            tag.back() == ')')
            return tag.substr(np + 1, tag.size() - np - 2);
        return std::nullopt;
    };
    if (auto body = inner("cycle")) {
        std::string rs, ns;
        double r = 0;
        if (split_args(*body, rs, ns) && parse_double(rs, r)) {
            char* end = nullptr;
            long n = std::strtol(ns.c_str(), &end, 10);
            if (end == ns.c_str() + ns.size() && n >= 3) return cycle(r, static_cast<int>(n));
        }
        return custom(tag);
    }
    if (auto body = inner("product")) {
        std::string ls, rs;
        if (split_args(*body, ls, rs)) return product(parse(ls), parse(rs));
        return custom(tag);
    }
    if (auto body = inner("point")) {
        double c = 0;
        if (parse_double(*body, c) && c > 0) return point(c);
        return custom(tag);
    }
    return custom(tag);
}

std::uint64_t space_key(const FiniteMMS& x) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto eat = [&h](const void* p, size_t bytes) {
        const unsigned char* c = static_cast<const unsigned char*>(p);
        for (size_t i = 0; i < bytes; ++i) {
            h ^= c[i];
            h *= 0x100000001b3ULL;
        }
    };
    eat(&x.n, sizeof(x.n));
    eat(&x.mesh_scale, sizeof(x.mesh_scale));
    for (int i = 0; i < x.n; ++i)
        for (int j = 0; j < x.n; ++j) {
            double v = x.dist(i, j);
            eat(&v, sizeof(v));
        }
    for (int i = 0; i < x.n; ++i) {
        double v = x.measure(i);
        eat(&v, sizeof(v));
    }
    return h;
}

FiniteMMS make_cycle(double radius, int n) {
    if (!(radius > 0.0) || !std::isfinite(radius))
        throw invalid_generator_error("cycle: radius must be positive and finite");
    if (n < 3) throw invalid_generator_error("cycle: need at least 3 points");
    FiniteMMS x;
    x.n = n;
    double h = kTwoPi * radius / n;
    x.mesh_scale = h;
    x.dist.resize(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            int k = std::abs(i - j);
            k = std::min(k, n - k);
            x.dist(i, j) = h * k;
        }
    x.measure = Eigen::VectorXd::Constant(n, h);
    x.gen = GeneratorSpec::cycle(radius, n);
    return x;
}

FiniteMMS make_product(const FiniteMMS& a, const FiniteMMS& b, int max_points) {
    long long total = static_cast<long long>(a.n) * b.n;
    if (total > max_points)
        throw resource_error("product: " + std::to_string(total) + " points exceeds cap of " +
                             std::to_string(max_points));
    FiniteMMS x;
    x.n = static_cast<int>(total);
    x.dist.resize(x.n, x.n);
    x.measure.resize(x.n);
    for (int i1 = 0; i1 < a.n; ++i1)
        for (int j1 = 0; j1 < b.n; ++j1) {
            int p = i1 * b.n + j1;
            x.measure(p) = a.measure(i1) * b.measure(j1);
            for (int i2 = 0; i2 < a.n; ++i2)
                for (int j2 = 0; j2 < b.n; ++j2) {
                    int q = i2 * b.n + j2;
                    x.dist(p, q) = std::hypot(a.dist(i1, i2), b.dist(j1, j2));
                }
        }
    x.mesh_scale = std::max(a.mesh_scale, b.mesh_scale);
    if (x.n == 1)
        x.gen = GeneratorSpec::point(x.measure(0));
    else
        x.gen = GeneratorSpec::product(a.gen, b.gen);
    return x;
}

FiniteMMS make_point(double mass) {
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw invalid_generator_error("point: mass must be positive and finite");
    FiniteMMS x;
    x.n = 1;
    x.dist = Eigen::MatrixXd::Zero(1, 1);
    x.measure = Eigen::VectorXd::Constant(1, mass);
    x.mesh_scale = 0.0;
    x.gen = GeneratorSpec::point(mass);
    return x;
}

FiniteMMS rescale(const FiniteMMS& x, double alpha, double beta) {
    if (!(alpha > 0.0) || !std::isfinite(alpha) || !(beta > 0.0) || !std::isfinite(beta))
        throw contract_error("rescale: factors must be positive and finite");
    FiniteMMS y;
    y.n = x.n;
    y.dist = alpha * x.dist;
    y.measure = beta * x.measure;
    y.mesh_scale = alpha * x.mesh_scale;
    y.gen = x.gen.scaled(alpha);
    if (y.gen.kind == GeneratorSpec::Kind::Point) y.gen.mass *= beta;
    return y;
}

FiniteMMS build_space(const GeneratorSpec& spec, int max_points) {
    switch (spec.kind) {
        case GeneratorSpec::Kind::Cycle:
            return make_cycle(spec.radius, spec.count);
        case GeneratorSpec::Kind::Product:
            return make_product(build_space(*spec.left, max_points),
                                build_space(*spec.right, max_points), max_points);
        case GeneratorSpec::Kind::Point:
            return make_point(spec.mass);
        case GeneratorSpec::Kind::Custom:
            throw invalid_generator_error("custom spaces must be loaded from a file");
    }
    throw invalid_generator_error("unknown generator kind");
}

ValidationReport validate(const FiniteMMS& x) {
    ValidationReport rep;
    auto fail = [&rep](const std::string& msg) {
        rep.ok = false;
        rep.violations.push_back(msg);
    };

    if (x.n < 1) {
        fail("space has no points");
        return rep;
    }
    if (x.dist.rows() != x.n || x.dist.cols() != x.n) {
        fail("distance matrix shape does not match n");
        return rep;
    }
    if (x.measure.size() != x.n) {
        fail("measure vector length does not match n");
        return rep;
    }
    if (!x.dist.allFinite()) fail("distance matrix has non-finite entries");
    if (!x.measure.allFinite()) fail("measure vector has non-finite entries");
    if (!rep.ok) return rep;

    double diam = x.dist.maxCoeff();
    double tol = 1e-12 * std::max(diam, 1e-300);

    rep.worst_asymmetry = (x.dist - x.dist.transpose()).cwiseAbs().maxCoeff();
    if (rep.worst_asymmetry > tol) fail("distance matrix is not symmetric");
    if (x.dist.diagonal().cwiseAbs().maxCoeff() > 0.0) fail("distance diagonal is not zero");

    bool separated = true;
    for (int i = 0; i < x.n && separated; ++i)
        for (int j = i + 1; j < x.n; ++j)
            if (!(x.dist(i, j) > 0.0)) {
                fail("points " + std::to_string(i) + " and " + std::to_string(j) +
                     " are not separated");
                separated = false;
                break;
            }

    // d(i,j) <= d(i,k) + d(k,j) for every k, allowing 1e-12 * diam slack.
    double worst = 0.0;
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(x.n);
    for (int k = 0; k < x.n; ++k) {
        Eigen::MatrixXd bound = x.dist.col(k) * ones.transpose() + ones * x.dist.row(k);
        worst = std::max(worst, (x.dist - bound).maxCoeff());
    }
    rep.worst_triangle_defect = worst;
    if (worst > tol) fail("triangle inequality violated by " + fmt17(worst));

    rep.min_measure = x.measure.minCoeff();
    if (!(rep.min_measure > 0.0)) fail("measure must be strictly positive everywhere");

    if (x.n == 1 && x.gen.kind != GeneratorSpec::Kind::Point)
        fail("single-point spaces must use the point generator");
    if (x.n > 1 && !(x.mesh_scale > 0.0)) fail("mesh_scale must be positive for n > 1");
    if (x.mesh_scale < 0.0) fail("mesh_scale must be nonnegative");

    return rep;
}

void require_valid(const FiniteMMS& x) {
    ValidationReport rep = validate(x);
    if (rep.ok) return;
    std::string msg = "invalid space (" + x.tag() + "):";
    for (const auto& v : rep.violations) msg += "\n  - " + v;
    throw contract_error(msg);
}

std::string space_to_json(const FiniteMMS& x) {
    JsonWriter w;
    w.begin_object();
    w.key("n");
    w.value(static_cast<long long>(x.n));
    w.key("dist");
    w.begin_array();
    for (int i = 0; i < x.n; ++i) {
        w.begin_array();
        for (int j = 0; j < x.n; ++j) w.value(x.dist(i, j));
        w.end_array();
    }
    w.end_array();
    w.key("measure");
    w.begin_array();
    for (int i = 0; i < x.n; ++i) w.value(x.measure(i));
    w.end_array();
    w.key("mesh_scale");
    w.value(x.mesh_scale);
    w.key("generator_tag");
    w.value(x.tag());
    w.end_object();
    std::string s = w.str();
    s += '\n';
    return s;
}

FiniteMMS space_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw io_error(std::string("space file is not valid JSON: ") + e.what());
    }
    FiniteMMS x;
    try {
        x.n = j.at("n").get<int>();
        if (x.n < 1) throw io_error("space file: n must be >= 1");
        const auto& dj = j.at("dist");
        if (static_cast<int>(dj.size()) != x.n) throw io_error("space file: dist row count != n");
        x.dist.resize(x.n, x.n);
        for (int i = 0; i < x.n; ++i) {
            if (static_cast<int>(dj[i].size()) != x.n)
                throw io_error("space file: dist row " + std::to_string(i) + " has wrong length");
            for (int jc = 0; jc < x.n; ++jc) x.dist(i, jc) = dj[i][jc].get<double>();
        }
        const auto& mj = j.at("measure");
        if (static_cast<int>(mj.size()) != x.n) throw io_error("space file: measure length != n");
        x.measure.resize(x.n);
        for (int i = 0; i < x.n; ++i) x.measure(i) = mj[i].get<double>();
        x.mesh_scale = j.at("mesh_scale").get<double>();
        x.gen = GeneratorSpec::parse(j.at("generator_tag").get<std::string>());
    } catch (const io_error&) {
        throw;
    } catch (const std::exception& e) {
        throw io_error(std::string("space file is missing or mistypes a field: ") + e.what());
    }
    require_valid(x);
    return x;
}

void save_space(const FiniteMMS& x, const std::string& path) {
    require_valid(x);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open " + path + " for writing");
    std::string s = space_to_json(x);
    f.write(s.data(), static_cast<std::streamsize>(s.size()));
    if (!f) throw io_error("short write to " + path);
}

FiniteMMS load_space(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return space_from_json(ss.str());
}

}  // namespace specmm
