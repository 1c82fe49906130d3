#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "specmm/distances.hpp"
#include "specmm/mmspace.hpp"
#include "specmm/report.hpp"

namespace specmm {

// Space expressions: the generator grammar plus a rescale(expr, alpha, beta)
// wrapper. Anything else is rejected; scenarios never run on tagged customs
// because those carry no operator.
FiniteMMS parse_space(const std::string& expr);

// five sample times around the weight peak; the full grid is overkill when the
// distance value is one column among many
extern const std::vector<double> kCompactGrid;

struct ScenarioConfig {
    std::string name;
    std::vector<double> eps;    // flat-tori, collapse-point
    std::vector<double> delta;  // kk-continuity
    std::vector<int> sizes;     // eigen-convergence
    int n = 0;                  // per-factor resolution; 0 = scenario default
    double t = 1.0;
    Budget budget{0, 0};        // zeros = scenario default
    std::uint64_t seed = 17;
    std::vector<std::string> spaces;  // custom pairs
    std::optional<double> max_value;  // custom value ceiling
    std::string out_dir = "out";
};

ScenarioConfig default_config(const std::string& name);
ScenarioConfig config_from_json(const std::string& text);

struct ScenarioCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct ScenarioOutcome {
    ScenarioConfig config;
    ReportDoc doc;
    std::vector<ScenarioCheck> checks;

    bool passed() const;
};

// Runs every grid point of the named scenario (worker pool, pre-assigned
// per-row seeds) and evaluates its assertions. Throws on invalid configs;
// failed assertions are reported, not thrown.
ScenarioOutcome run_scenario(const ScenarioConfig& cfg);

std::string summary_json(const ScenarioOutcome& outcome);

// CSV per table, SVG per charted table, plus the summary JSON.
std::vector<Artifact> scenario_artifacts(const ScenarioOutcome& outcome);

}  // namespace specmm
