#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "specmm/distances.hpp"
#include "specmm/embed.hpp"
#include "specmm/mmspace.hpp"
#include "specmm/reconstruct.hpp"
#include "specmm/report.hpp"
#include "specmm/scenario.hpp"
#include "specmm/spectral.hpp"

using namespace specmm;

namespace {

// '@path' loads a saved space, anything else goes through the expression
// grammar; loaded customs carry no operator, so spectral subcommands reject
// them downstream instead of silently inventing one
FiniteMMS resolve_space(const std::string& arg) {
    if (!arg.empty() && arg[0] == '@') return load_space(arg.substr(1));
    return parse_space(arg);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void deliver(const ReportDoc& doc, const std::string& fmt, const std::string& out_dir) {
    std::vector<Artifact> artifacts = emit_report(doc, parse_format(fmt));
    if (out_dir.empty()) {
        for (const Artifact& a : artifacts) std::fputs(a.bytes.c_str(), stdout);
        return;
    }
    write_artifacts(artifacts, out_dir);
    for (const Artifact& a : artifacts)
        std::printf("wrote %s/%s\n", out_dir.c_str(), a.filename.c_str());
}

SpectralData solve_for(const FiniteMMS& x) {
    return eigensolve(build_laplacian(x), x.tag());
}

int run_scenario_cmd(ScenarioConfig cfg) {
    ScenarioOutcome outcome = run_scenario(cfg);
    write_artifacts(scenario_artifacts(outcome), cfg.out_dir);
    for (const ScenarioCheck& c : outcome.checks)
        std::printf("[%s] %s: %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                    c.detail.c_str());
    if (!outcome.passed()) {
        std::string names;
        for (const ScenarioCheck& c : outcome.checks)
            if (!c.passed) names += (names.empty() ? "" : ", ") + c.name;
        std::fprintf(stderr, "scenario %s failed: %s\n", cfg.name.c_str(), names.c_str());
        return 1;
    }
    std::printf("scenario %s passed (%zu checks)\n", cfg.name.c_str(), outcome.checks.size());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral geometry of finite metric measure spaces"};
    app.require_subcommand(1);

    std::string expr, expr_y, out_dir, format = "csv", config_path, scenario_name;
    double t = 1.0;
    std::uint64_t seed = 17;
    int budget_inner = 0, budget_outer = 0;

    auto add_common = [&](CLI::App* sub, bool wants_t) {
        sub->add_option("--out", out_dir, "output directory (default: stdout)");
        if (wants_t) sub->add_option("--t", t, "diffusion time")->check(CLI::PositiveNumber);
    };

    CLI::App* gen = app.add_subcommand("generate", "build a space and emit its JSON");
    gen->add_option("space", expr, "space expression")->required();
    add_common(gen, false);

    CLI::App* spec = app.add_subcommand("spectrum", "eigenvalues and multiplicity clusters");
    spec->add_option("space", expr, "space expression or @file")->required();
    add_common(spec, false);
    spec->add_option("--format", format, "csv|json|svg");

    CLI::App* emb = app.add_subcommand("embed", "heat-kernel embedding coordinates");
    emb->add_option("space", expr, "space expression or @file")->required();
    add_common(emb, true);
    emb->add_option("--format", format, "csv|json|svg");

    CLI::App* dist = app.add_subcommand("dist", "sampled spectral distances between two spaces");
    dist->add_option("x", expr, "first space")->required();
    dist->add_option("y", expr_y, "second space")->required();
    add_common(dist, true);
    dist->add_option("--seed", seed, "sampling seed");
    dist->add_option("--budget-inner", budget_inner, "alignment starts per infimum");
    dist->add_option("--budget-outer", budget_outer, "candidates per supremum");

    CLI::App* kk = app.add_subcommand("kk", "kernel-pullback distance over the time grid");
    kk->add_option("x", expr, "first space")->required();
    kk->add_option("y", expr_y, "second space")->required();
    add_common(kk, true);

    CLI::App* rec = app.add_subcommand("reconstruct", "isomorphism verdict with evidence");
    rec->add_option("x", expr, "first space")->required();
    rec->add_option("y", expr_y, "second space")->required();
    add_common(rec, true);
    rec->add_option("--seed", seed, "sampling seed");
    rec->add_option("--budget-inner", budget_inner, "alignment starts per infimum");
    rec->add_option("--budget-outer", budget_outer, "candidates per supremum");

    CLI::App* scen = app.add_subcommand("scenario", "run a named experiment grid");
    scen->add_option("name", scenario_name, "flat-tori|collapse-point|eigen-convergence|"
                                            "reconstruct|kk-continuity|custom");
    scen->add_option("--config", config_path, "JSON config file");
    scen->add_option("--out", out_dir, "output directory");
    scen->add_option("--seed", seed, "base seed");
    scen->add_option("--t", t, "diffusion time")->check(CLI::PositiveNumber);
    scen->add_option("--budget-inner", budget_inner, "alignment starts per infimum");
    scen->add_option("--budget-outer", budget_outer, "candidates per supremum");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            FiniteMMS x = resolve_space(expr);
            if (out_dir.empty()) {
                std::fputs(space_to_json(x).c_str(), stdout);
                std::fputs("\n", stdout);
            } else {
                std::string path = out_dir + "/space.json";
                write_artifacts({{"space.json", space_to_json(x) + "\n"}}, out_dir);
                std::printf("wrote %s\n", path.c_str());
            }
            return 0;
        }
        if (*spec) {
            FiniteMMS x = resolve_space(expr);
            SpectralData sd = solve_for(x);
            ReportDoc doc;
            doc.name = "spectrum";
            doc.meta = {{"space", x.tag()}};
            doc.tables.push_back(spectrum_table(sd, cluster_multiplicities(sd)));
            deliver(doc, format, out_dir);
            return 0;
        }
        if (*emb) {
            FiniteMMS x = resolve_space(expr);
            EmbeddedCloud cloud = embed_I(solve_for(x), t);
            ReportDoc doc;
            doc.name = "embed";
            doc.meta = {{"space", x.tag()}, {"sidecar", cloud_sidecar_json(cloud)}};
            doc.tables.push_back(cloud_table(cloud));
            deliver(doc, format, out_dir);
            return 0;
        }
        if (*dist) {
            FiniteMMS x = resolve_space(expr), y = resolve_space(expr_y);
            Budget b;
            if (budget_inner > 0) b.inner = budget_inner;
            if (budget_outer > 0) b.outer = budget_outer;
            DistanceReport lo = d_spec_lower(x, y, t, b, seed);
            DistanceReport hi = d_spec(x, y, t, b, seed);
            std::printf("%s\n%s\n", report_line(lo).c_str(), report_line(hi).c_str());
            if (!out_dir.empty()) {
                write_artifacts({{"d_spec_lower.json", report_json(lo) + "\n"},
                                 {"d_spec.json", report_json(hi) + "\n"}},
                                out_dir);
                std::printf("wrote %s/d_spec_lower.json\nwrote %s/d_spec.json\n",
                            out_dir.c_str(), out_dir.c_str());
            }
            return 0;
        }
        if (*kk) {
            FiniteMMS x = resolve_space(expr), y = resolve_space(expr_y);
            DistanceReport r = kk_distance(x, y, kk_default_grid(), t);
            std::printf("%s\n", report_line(r).c_str());
            if (!out_dir.empty()) {
                write_artifacts({{"kk.json", report_json(r) + "\n"}}, out_dir);
                std::printf("wrote %s/kk.json\n", out_dir.c_str());
            }
            return 0;
        }
        if (*rec) {
            FiniteMMS x = resolve_space(expr), y = resolve_space(expr_y);
            Budget b;
            if (budget_inner > 0) b.inner = budget_inner;
            if (budget_outer > 0) b.outer = budget_outer;
            IsomorphismVerdict v = isomorphism_verdict(x, y, t, {}, b, seed);
            std::printf("%s\n", verdict_json(v).c_str());
            if (!out_dir.empty()) {
                ReportDoc doc;
                doc.name = "reconstruct";
                doc.tables.push_back(map_table(v.map));
                std::vector<Artifact> artifacts = emit_report(doc, Format::csv);
                artifacts.push_back({"verdict.json", verdict_json(v) + "\n"});
                write_artifacts(artifacts, out_dir);
                std::printf("wrote %s/reconstruct_map.csv\nwrote %s/verdict.json\n",
                            out_dir.c_str(), out_dir.c_str());
            }
            return 0;
        }
        if (*scen) {
            ScenarioConfig cfg;
            if (!config_path.empty()) {
                cfg = config_from_json(slurp(config_path));
                if (!scenario_name.empty() && scenario_name != cfg.name)
                    throw contract_error("scenario: name '" + scenario_name +
                                         "' contradicts config '" + cfg.name + "'");
            } else {
                if (scenario_name.empty())
                    throw contract_error("scenario: give a name or --config");
                cfg = default_config(scenario_name);
            }
            if (scen->count("--seed")) cfg.seed = seed;
            if (scen->count("--t")) cfg.t = t;
            if (scen->count("--budget-inner")) cfg.budget.inner = budget_inner;
            if (scen->count("--budget-outer")) cfg.budget.outer = budget_outer;
            if (scen->count("--out")) cfg.out_dir = out_dir;
            return run_scenario_cmd(std::move(cfg));
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
