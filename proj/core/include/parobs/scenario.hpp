#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "parobs/classifier.hpp"
#include "parobs/coefficients.hpp"
#include "parobs/finance.hpp"
#include "parobs/grid.hpp"
#include "parobs/lcp.hpp"

namespace parobs {

/// A fully parsed scenario configuration. Sectioned plain-text format
/// (`[section]`, `key = value`, `#` comments); values are numbers or
/// quoted expression strings. Unknown sections or keys are errors.
/// A config describes either a PDE scenario ([grid]/[coefficients]/
/// [initial]/[boundary]) or a finance scenario ([finance]), never both.
struct ScenarioConfig {
    std::string source_text;

    std::optional<GridSpec> grid;
    std::optional<CoefficientSet> coefficients;
    Expr initial;
    Expr bc_left;
    Expr bc_right;
    std::optional<PutScenario> finance;
    SolveConfig solver;

    struct Analysis {
        bool extract_boundary = true;
        bool classify = false;
        std::vector<Point> classify_points;   // empty -> automatic selection
        int max_classify = 3;
        std::vector<double> epsilons{0.4, 0.2, 0.1};
        std::vector<double> radii{0.4, 0.2, 0.1};
        int refine_factor = 4;
        std::optional<GridSpec> ref_box;
        std::optional<Point> trace_point;
        std::vector<double> t_ladder;
        std::vector<double> phi_ms;
        bool smoothfit = false;
        bool family_portrait = false;
        double theta_jump = 0.1;
        double ut_tol = 1e-6;
    } analysis;

    struct Output {
        bool field = false;
        bool boundary = true;
        bool trace = true;
        bool ladder = true;
        bool diagnosis = true;
        bool profile = false;           // dump the v_m profile table(s)
        std::vector<double> profile_ms;
        std::string prefix = "run";
    } output;
};

ScenarioConfig parse_config(const std::string& text);

/// Built-in demo configs, keyed by name (without .cfg).
const std::map<std::string, std::string>& builtin_demos();

struct RunResult {
    std::vector<std::string> outputs;     // files written
    std::string message;
    SmoothFitReport smoothfit;            // populated when requested
    std::vector<PointDiagnosis> diagnoses;
};

/// Execute a scenario: validate, solve, extract, run requested analyses,
/// write CSVs and the run manifest into out_dir. `jobs` bounds the number
/// of concurrently classified points; outputs are byte-identical for any
/// jobs value.
RunResult run_scenario(const ScenarioConfig& cfg, const std::string& out_dir, int jobs = 1);

/// Extract the embedded config text from a run manifest written by
/// run_scenario (accepts the manifest JSON produced by this project).
std::string config_from_manifest(const std::string& manifest_json);

} // namespace parobs
