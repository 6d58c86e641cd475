#include "parobs/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "parobs/blowup.hpp"
#include "parobs/closed_forms.hpp"
#include "parobs/csv.hpp"
#include "parobs/energetics.hpp"
#include "parobs/free_boundary.hpp"

namespace parobs {

namespace {

using Section = std::map<std::string, std::string>;
using Sections = std::map<std::string, Section>;

Sections tokenize_config(const std::string& text) {
    Sections sections;
    std::string current;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        // strip comments and whitespace
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        auto strip = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r");
            return s.substr(b, e - b + 1);
        };
        line = strip(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("malformed section header at line " + std::to_string(lineno),
                                  line);
            current = line.substr(1, line.size() - 2);
            sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value at line " + std::to_string(lineno), line);
        if (current.empty())
            throw ConfigError("key outside any section at line " + std::to_string(lineno), line);
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("empty key or value at line " + std::to_string(lineno), line);
        if (!sections[current].emplace(key, value).second)
            throw ConfigError("duplicate key '" + key + "'", current + "." + key);
    }
    return sections;
}

class SectionReader {
public:
    SectionReader(const Sections& all, const std::string& name) : name_(name) {
        auto it = all.find(name);
        if (it != all.end()) section_ = &it->second;
    }

    bool present() const { return section_ != nullptr; }

    std::optional<std::string> raw(const std::string& key) {
        if (!section_) return {};
        auto it = section_->find(key);
        if (it == section_->end()) return {};
        used_.push_back(key);
        return it->second;
    }

    double number(const std::string& key, std::optional<double> fallback = {}) {
        auto v = raw(key);
        if (!v) {
            if (fallback) return *fallback;
            throw ConfigError("missing required key", name_ + "." + key);
        }
        try {
            std::size_t pos = 0;
            const double d = std::stod(*v, &pos);
            if (pos != v->size()) throw std::invalid_argument("trailing characters");
            return d;
        } catch (const std::exception&) {
            throw ConfigError("expected a number, got '" + *v + "'", name_ + "." + key);
        }
    }

    int integer(const std::string& key, std::optional<int> fallback = {}) {
        const double d = number(key, fallback ? std::optional<double>(*fallback)
                                              : std::optional<double>{});
        const int i = static_cast<int>(std::lround(d));
        if (std::abs(d - i) > 1e-9)
            throw ConfigError("expected an integer", name_ + "." + key);
        return i;
    }

    bool boolean(const std::string& key, bool fallback) {
        auto v = raw(key);
        if (!v) return fallback;
        if (*v == "true" || *v == "1") return true;
        if (*v == "false" || *v == "0") return false;
        throw ConfigError("expected true/false", name_ + "." + key);
    }

    std::string quoted(const std::string& key, std::optional<std::string> fallback = {}) {
        auto v = raw(key);
        if (!v) {
            if (fallback) return *fallback;
            throw ConfigError("missing required key", name_ + "." + key);
        }
        if (v->size() >= 2 && v->front() == '"' && v->back() == '"')
            return v->substr(1, v->size() - 2);
        return *v;
    }

    Expr expression(const std::string& key, std::optional<std::string> fallback = {}) {
        const std::string src = quoted(key, std::move(fallback));
        try {
            return parse_expression(src);
        } catch (const ParseError& e) {
            throw ConfigError(std::string("bad expression: ") + e.what(), name_ + "." + key);
        }
    }

    std::vector<double> number_list(const std::string& key, std::vector<double> fallback) {
        auto v = raw(key);
        if (!v) return fallback;
        std::vector<double> out;
        std::istringstream is(quoted_value(*v));
        std::string tok;
        while (std::getline(is, tok, ',')) {
            try {
                out.push_back(std::stod(tok));
            } catch (const std::exception&) {
                throw ConfigError("bad number list entry '" + tok + "'", name_ + "." + key);
            }
        }
        if (out.empty()) throw ConfigError("empty list", name_ + "." + key);
        return out;
    }

    /// "x,t; x,t; ..." -> points
    std::vector<Point> point_list(const std::string& key) {
        auto v = raw(key);
        if (!v) return {};
        std::vector<Point> out;
        std::istringstream is(quoted_value(*v));
        std::string pair;
        while (std::getline(is, pair, ';')) {
            const auto comma = pair.find(',');
            if (comma == std::string::npos)
                throw ConfigError("expected x,t pairs separated by ';'", name_ + "." + key);
            try {
                out.push_back({std::stod(pair.substr(0, comma)),
                               std::stod(pair.substr(comma + 1))});
            } catch (const std::exception&) {
                throw ConfigError("bad point '" + pair + "'", name_ + "." + key);
            }
        }
        return out;
    }

    void finish() const {
        if (!section_) return;
        for (const auto& [key, value] : *section_) {
            if (std::find(used_.begin(), used_.end(), key) == used_.end())
                throw ConfigError("unknown key '" + key + "'", name_ + "." + key);
        }
    }

private:
    static std::string quoted_value(std::string v) {
        if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
            return v.substr(1, v.size() - 2);
        return v;
    }

    const Section* section_ = nullptr;
    std::string name_;
    std::vector<std::string> used_;
};

} // namespace

ScenarioConfig parse_config(const std::string& text) {
    const Sections sections = tokenize_config(text);

    static const std::vector<std::string> known = {"grid",     "coefficients", "initial",
                                                   "boundary", "solver",       "analysis",
                                                   "output",   "finance"};
    for (const auto& [name, _] : sections)
        if (std::find(known.begin(), known.end(), name) == known.end())
            throw ConfigError("unknown section '" + name + "'", name);

    ScenarioConfig cfg;
    cfg.source_text = text;

    SectionReader grid(sections, "grid");
    SectionReader coefficients(sections, "coefficients");
    SectionReader initial(sections, "initial");
    SectionReader boundary(sections, "boundary");
    SectionReader solver(sections, "solver");
    SectionReader analysis(sections, "analysis");
    SectionReader output(sections, "output");
    SectionReader finance(sections, "finance");

    const bool has_pde = grid.present() || coefficients.present() || initial.present() ||
                         boundary.present();
    if (finance.present() && has_pde)
        throw ConfigError("a config holds either [finance] or the PDE sections, not both",
                          "finance");
    if (!finance.present() && !has_pde)
        throw ConfigError("config defines neither a PDE scenario nor a finance scenario",
                          "grid");

    if (finance.present()) {
        PutScenario scn;
        scn.K = finance.number("K", scn.K);
        scn.r = finance.number("r", scn.r);
        scn.sigma = finance.number("sigma", scn.sigma);
        scn.T = finance.number("T", scn.T);
        scn.s_min = finance.number("s_min", scn.s_min);
        scn.margin = finance.number("margin", scn.margin);
        scn.nx = finance.integer("nx", scn.nx);
        scn.nt = finance.integer("nt", scn.nt);
        scn.wide_mult = finance.number("wide_mult", scn.wide_mult);
        cfg.finance = scn;
    } else {
        if (!grid.present() || !coefficients.present() || !initial.present() ||
            !boundary.present())
            throw ConfigError(
                "PDE scenarios need [grid], [coefficients], [initial] and [boundary]", "grid");
        cfg.grid = GridSpec(grid.number("x_min"), grid.number("x_max"), grid.number("t_min"),
                            grid.number("t_max"), grid.integer("nx"), grid.integer("nt"));
        CoefficientSet cs;
        cs.a = coefficients.expression("a");
        cs.b = coefficients.expression("b");
        cs.c = coefficients.expression("c");
        cs.f = coefficients.expression("f");
        cs.delta = coefficients.number("delta");
        cfg.coefficients = cs;
        cfg.initial = initial.expression("u0");
        cfg.bc_left = boundary.expression("left");
        cfg.bc_right = boundary.expression("right");
    }

    cfg.solver.theta = solver.number("theta", cfg.solver.theta);
    cfg.solver.omega = solver.number("omega", cfg.solver.omega);
    cfg.solver.tol = solver.number("tol", cfg.solver.tol);
    cfg.solver.max_iter = solver.integer("max_iter", cfg.solver.max_iter);
    if (cfg.finance) cfg.finance->solver = cfg.solver;
    if (!(cfg.solver.theta >= 0.5 && cfg.solver.theta <= 1.0))
        throw ConfigError("theta must lie in [0.5, 1]", "solver.theta");
    if (!(cfg.solver.omega > 0.0 && cfg.solver.omega < 2.0))
        throw ConfigError("omega must lie in (0, 2)", "solver.omega");

    auto& an = cfg.analysis;
    an.extract_boundary = analysis.boolean("extract", an.extract_boundary);
    an.classify = analysis.boolean("classify", an.classify);
    an.classify_points = analysis.point_list("classify_points");
    an.max_classify = analysis.integer("max_classify", an.max_classify);
    an.epsilons = analysis.number_list("epsilons", an.epsilons);
    an.radii = analysis.number_list("radii", an.radii);
    an.refine_factor = analysis.integer("refine_factor", an.refine_factor);
    if (auto rb = analysis.raw("ref_box")) {
        std::vector<double> v;
        std::istringstream is(*rb);
        std::string tok;
        while (std::getline(is, tok, ',')) v.push_back(std::stod(tok));
        if (v.size() != 6)
            throw ConfigError("ref_box needs x_min,x_max,t_min,t_max,nx,nt", "analysis.ref_box");
        an.ref_box = GridSpec(v[0], v[1], v[2], v[3], static_cast<int>(v[4]),
                              static_cast<int>(v[5]));
    }
    if (auto tp = analysis.point_list("trace_point"); !tp.empty()) an.trace_point = tp.front();
    an.t_ladder = analysis.number_list("t_ladder", an.t_ladder);
    an.phi_ms = analysis.number_list("phi_ms", an.phi_ms);
    an.smoothfit = analysis.boolean("smoothfit", an.smoothfit);
    an.family_portrait = analysis.boolean("family_portrait", an.family_portrait);
    an.theta_jump = analysis.number("theta_jump", an.theta_jump);
    an.ut_tol = analysis.number("ut_tol", an.ut_tol);

    auto& out = cfg.output;
    out.field = output.boolean("field", out.field);
    out.boundary = output.boolean("boundary", out.boundary);
    out.trace = output.boolean("trace", out.trace);
    out.ladder = output.boolean("ladder", out.ladder);
    out.diagnosis = output.boolean("diagnosis", out.diagnosis);
    out.profile = output.boolean("profile", out.profile);
    out.profile_ms = output.number_list("profile_ms", out.profile_ms);
    out.prefix = output.quoted("prefix", out.prefix);

    grid.finish();
    coefficients.finish();
    initial.finish();
    boundary.finish();
    solver.finish();
    analysis.finish();
    output.finish();
    finance.finish();
    return cfg;
}

namespace {

std::string render_to_string(const std::function<void(std::ostream&)>& writer) {
    std::ostringstream os;
    writer(os);
    return os.str();
}

std::vector<Point> auto_classify_points(const FreeBoundarySet& gamma, const GridSpec& g,
                                        int max_points) {
    // keep points whose surroundings can host the analysis windows
    std::vector<const FreeBoundaryPoint*> ok;
    for (const auto& p : gamma.points) {
        const double reach_x = std::min(p.x - g.x_min, g.x_max - p.x);
        const double history = p.t - g.t_min;
        if (reach_x >= 16.0 * g.dx() && history >= 8.0 * g.dt()) ok.push_back(&p);
    }
    std::vector<Point> out;
    if (ok.empty() || max_points <= 0) return out;
    const std::size_t count = std::min<std::size_t>(max_points, ok.size());
    for (std::size_t k = 0; k < count; ++k) {
        const std::size_t idx = count == 1 ? ok.size() / 2
                                           : k * (ok.size() - 1) / (count - 1);
        out.push_back({ok[idx]->x, ok[idx]->t});
    }
    return out;
}

const FreeBoundaryPoint* nearest_boundary_point(const FreeBoundarySet& gamma, Point p) {
    const FreeBoundaryPoint* best = nullptr;
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto& q : gamma.points) {
        const double d = std::hypot(q.x - p.x, q.t - p.t);
        if (d < best_d) {
            best_d = d;
            best = &q;
        }
    }
    return best;
}

} // namespace

const std::map<std::string, std::string>& builtin_demos() {
    static const std::map<std::string, std::string> demos = {
        {"counterexample", R"cfg(# the discontinuous-u_t example: u = max(0, -t)
[grid]
x_min = -1
x_max = 1
t_min = -1
t_max = 1
nx = 201
nt = 401

[coefficients]
a = "1"
b = "0"
c = "0"
f = "1"
delta = 1

[initial]
u0 = "max(0, -t)"

[boundary]
left = "max(0, -t)"
right = "max(0, -t)"

[analysis]
classify = true
max_classify = 1
epsilons = "0.3,0.2,0.1"
radii = "0.4,0.2,0.1"
smoothfit = true

[output]
prefix = "counterexample"
)cfg"},
        {"regular", R"cfg(# half-space solution data: u = max(0,x)^2 / 2
[grid]
x_min = -1
x_max = 1
t_min = -1
t_max = 0.05
nx = 201
nt = 211

[coefficients]
a = "1"
b = "0"
c = "0"
f = "1"
delta = 1

[initial]
u0 = "0.5*max(0, x)^2"

[boundary]
left = "0"
right = "0.5"

[analysis]
classify = true
classify_points = "0,-0.5"
epsilons = "0.3,0.2,0.1"
radii = "0.3,0.2,0.1"
smoothfit = true

[output]
prefix = "regular"
)cfg"},
        {"singular_vzero", R"cfg(# vertex-family data: u = x^2 / 2
[grid]
x_min = -1
x_max = 1
t_min = -1
t_max = 0.05
nx = 201
nt = 211

[coefficients]
a = "1"
b = "0"
c = "0"
f = "1"
delta = 1

[initial]
u0 = "0.5*x^2"

[boundary]
left = "0.5"
right = "0.5"

[analysis]
classify = true
classify_points = "0,-0.5"
epsilons = "0.3,0.2,0.1"
radii = "0.3,0.2,0.1"

[output]
prefix = "singular_vzero"
)cfg"},
        {"variable_coefficients", R"cfg(# drifting coefficients with a moving contact set
[grid]
x_min = -2
x_max = 2
t_min = -1
t_max = 0.25
nx = 801
nt = 2501

[coefficients]
a = "1 + 0.1*x"
b = "0.1"
c = "-0.2"
f = "1 + 0.1*t"
delta = 0.8

[initial]
u0 = "0.5*max(0, x - 0.3)^2"

[boundary]
left = "0"
right = "1.4"

[analysis]
classify = true
max_classify = 1
epsilons = "0.3,0.2,0.1"
radii = "0.3,0.2,0.1"
ref_box = "-4,4,-1.25,0.25,321,121"
smoothfit = true

[output]
prefix = "variable"
)cfg"},
        {"family_portrait", R"cfg(# sampled panels of the blow-up family
[grid]
x_min = -2
x_max = 2
t_min = -1
t_max = 1
nx = 161
nt = 81

[coefficients]
a = "1"
b = "0"
c = "0"
f = "1"
delta = 1

[initial]
u0 = "0"

[boundary]
left = "0"
right = "0"

[analysis]
extract = false
family_portrait = true

[output]
boundary = false
profile = true
profile_ms = "-0.5"
prefix = "family"
)cfg"},
        {"american_put", R"cfg(# American put smooth-fit scenario
[finance]
K = 1
r = 0.05
sigma = 0.3
T = 1
s_min = 0.15
margin = 0.02
nx = 401
nt = 801

[analysis]
radii = "0.15,0.1"

[output]
prefix = "put"
)cfg"},
        {"american_put_long", R"cfg(# long-maturity put: boundary vs the perpetual level
[finance]
K = 1
r = 0.05
sigma = 0.3
T = 10
s_min = 0.15
margin = 0.02
nx = 401
nt = 2001

[output]
prefix = "put_long"
)cfg"},
    };
    return demos;
}

namespace {

void write_manifest(const ScenarioConfig& cfg, const std::string& out_dir,
                    const std::vector<std::string>& outputs, RunResult& result) {
    nlohmann::json manifest;
    manifest["tool"] = "parobs";
    manifest["version"] = "0.1.0";
    manifest["config_text"] = cfg.source_text;
    manifest["outputs"] = outputs;
    manifest["tolerances"] = {
        {"solver_tol", cfg.solver.tol},
        {"theta", cfg.solver.theta},
        {"omega", cfg.solver.omega},
        {"theta_jump", cfg.analysis.theta_jump},
        {"ut_tol", cfg.analysis.ut_tol},
    };
    const std::string path = out_dir + "/manifest.json";
    csv::write_file_atomic(path, manifest.dump(2) + "\n");
    result.outputs.push_back(path);
}

void run_family_portrait(const ScenarioConfig& cfg, const std::string& out_dir,
                         RunResult& result) {
    const std::vector<ClosedForm> panels = {ClosedForm::v_plus(), ClosedForm::v_minus(),
                                            ClosedForm::v_m(-0.5), ClosedForm::v_minus_one(),
                                            ClosedForm::v_zero()};
    for (const auto& form : panels) {
        const Field u = sample_closed_form(form, *cfg.grid);
        const DerivedFields d = derived_fields(u);
        const std::string path =
            out_dir + "/" + cfg.output.prefix + "_" + form.name() + ".csv";
        csv::write_file_atomic(path,
                               render_to_string([&](std::ostream& os) { write_field_csv(u, d, os); }));
        result.outputs.push_back(path);
    }
}

void run_finance(const ScenarioConfig& cfg, const std::string& out_dir, RunResult& result) {
    const double jump_radius = cfg.analysis.radii.empty()
                                   ? 0.1
                                   : *std::min_element(cfg.analysis.radii.begin(),
                                                       cfg.analysis.radii.end());
    ExerciseBoundaryReport rep = exercise_boundary_report(*cfg.finance, jump_radius);

    const std::string path = out_dir + "/" + cfg.output.prefix + "_exercise_boundary.csv";
    csv::write_file_atomic(path, render_to_string([&](std::ostream& os) {
        write_exercise_csv(rep, os);
    }));
    result.outputs.push_back(path);

    if (cfg.output.field) {
        const DerivedFields d = derived_fields(rep.u);
        const std::string fpath = out_dir + "/" + cfg.output.prefix + "_field.csv";
        csv::write_file_atomic(fpath, render_to_string([&](std::ostream& os) {
            write_field_csv(rep.u, d, os);
        }));
        result.outputs.push_back(fpath);
    }

    std::ostringstream msg;
    msg << "exercise boundary points: " << rep.rows.size()
        << "; min u_t = " << rep.min_ut << "; max jump = " << rep.max_jump
        << "; perpetual gap = " << rep.rel_gap_perpetual;
    result.message = msg.str();
}

} // namespace

RunResult run_scenario(const ScenarioConfig& cfg, const std::string& out_dir, int jobs) {
    RunResult result;

    if (cfg.finance) {
        run_finance(cfg, out_dir, result);
        write_manifest(cfg, out_dir, result.outputs, result);
        return result;
    }

    const GridSpec& grid = *cfg.grid;
    const CoefficientSet& coeffs = *cfg.coefficients;

    if (cfg.analysis.family_portrait) {
        run_family_portrait(cfg, out_dir, result);
        if (cfg.output.profile) {
            for (double m : cfg.output.profile_ms) {
                const SelfSimilarProfile& p = profile_for(m);
                const std::string path = out_dir + "/" + cfg.output.prefix + "_profile_" +
                                         csv::format(m) + ".csv";
                csv::write_file_atomic(path, render_to_string([&](std::ostream& os) {
                    write_profile_csv(p, os);
                }));
                result.outputs.push_back(path);
            }
        }
        write_manifest(cfg, out_dir, result.outputs, result);
        return result;
    }

    const ValidationReport report = validate(coeffs, grid);
    if (!report.pass) {
        std::ostringstream os;
        os << "coefficient hypotheses fail (require a >= delta and f >= delta, delta = "
           << coeffs.delta << "): " << report.summary();
        throw ValidationError(os.str());
    }

    SolveStats stats;
    Field u = solve_parabolic(coeffs, grid, cfg.initial, cfg.bc_left, cfg.bc_right, cfg.solver,
                              &stats);
    const DerivedFields d = derived_fields(u);

    if (cfg.output.field) {
        const std::string path = out_dir + "/" + cfg.output.prefix + "_field.csv";
        csv::write_file_atomic(path, render_to_string([&](std::ostream& os) {
            write_field_csv(u, d, os);
        }));
        result.outputs.push_back(path);
    }

    FreeBoundarySet gamma;
    if (cfg.analysis.extract_boundary) {
        gamma = extract(u, &coeffs);
        if (cfg.output.boundary) {
            const std::string path = out_dir + "/" + cfg.output.prefix + "_boundary.csv";
            csv::write_file_atomic(path, render_to_string([&](std::ostream& os) {
                write_boundary_csv(gamma, os);
            }));
            result.outputs.push_back(path);
        }
    }

    if (cfg.analysis.trace_point) {
        std::vector<double> ladder = cfg.analysis.t_ladder;
        if (ladder.empty()) {
            const Point p0 = *cfg.analysis.trace_point;
            const double half = std::min(p0.x - grid.x_min, grid.x_max - p0.x);
            double t_deep = std::min((half / (8.0 * std::numbers::sqrt2)) *
                                         (half / (8.0 * std::numbers::sqrt2)),
                                     0.9 * (p0.t - grid.t_min));
            for (int k = 0; k < 5 && t_deep > 4.0 * grid.dt(); ++k, t_deep *= 0.5)
                ladder.push_back(-t_deep);
        }
        const EnergyTrace trace =
            energy_trace(u, d, *cfg.analysis.trace_point, ladder, cfg.analysis.phi_ms);
        if (cfg.output.trace) {
            const std::string path = out_dir + "/" + cfg.output.prefix + "_trace.csv";
            csv::write_file_atomic(path, render_to_string([&](std::ostream& os) {
                write_trace_csv(trace, os);
            }));
            result.outputs.push_back(path);
        }
    }

    if (cfg.analysis.classify && !gamma.empty()) {
        std::vector<Point> targets = cfg.analysis.classify_points;
        if (targets.empty())
            targets = auto_classify_points(gamma, grid, cfg.analysis.max_classify);

        ClassifyOptions opts;
        opts.epsilons = cfg.analysis.epsilons;
        opts.radii = cfg.analysis.radii;
        opts.refine_factor = cfg.analysis.refine_factor;
        if (cfg.analysis.ref_box) opts.ref_box = *cfg.analysis.ref_box;
        opts.solver = cfg.solver;
        opts.gamma = &gamma;

        std::vector<const FreeBoundaryPoint*> anchors;
        for (const Point& p : targets) {
            const FreeBoundaryPoint* q = nearest_boundary_point(gamma, p);
            if (q) anchors.push_back(q);
        }

        // classify in parallel batches; assembly order is the input order
        result.diagnoses.resize(anchors.size());
        const int batch = std::max(1, jobs);
        for (std::size_t begin = 0; begin < anchors.size();
             begin += static_cast<std::size_t>(batch)) {
            const std::size_t end =
                std::min(anchors.size(), begin + static_cast<std::size_t>(batch));
            std::vector<std::future<PointDiagnosis>> futures;
            for (std::size_t k = begin; k < end; ++k)
                futures.push_back(std::async(std::launch::async, [&, k] {
                    return classify_point(u, coeffs, *anchors[k], opts);
                }));
            for (std::size_t k = begin; k < end; ++k)
                result.diagnoses[k] = futures[k - begin].get();
        }

        if (cfg.output.diagnosis && !result.diagnoses.empty()) {
            const std::string path = out_dir + "/" + cfg.output.prefix + "_diagnosis.csv";
            csv::write_file_atomic(path, render_to_string([&](std::ostream& os) {
                write_diagnosis_csv(result.diagnoses, os);
            }));
            result.outputs.push_back(path);
        }
        if (cfg.output.ladder && !result.diagnoses.empty() &&
            !result.diagnoses.front().ladder.empty()) {
            const std::string path = out_dir + "/" + cfg.output.prefix + "_ladder.csv";
            csv::write_file_atomic(path, render_to_string([&](std::ostream& os) {
                write_ladder_entries_csv(result.diagnoses.front().ladder, os);
            }));
            result.outputs.push_back(path);
        }
    }

    if (cfg.analysis.smoothfit && !gamma.empty()) {
        result.smoothfit = smoothfit_report(u, d, gamma, cfg.analysis.radii,
                                            cfg.analysis.theta_jump, cfg.analysis.ut_tol);
        const std::string path = out_dir + "/" + cfg.output.prefix + "_smoothfit.csv";
        csv::write_file_atomic(path, render_to_string([&](std::ostream& os) {
            os << "slice,t,max_jump\n";
            for (const auto& [slice, jump] : result.smoothfit.slice_max_jump)
                os << slice << ',' << csv::format(grid.t(slice)) << ',' << csv::format(jump)
                   << '\n';
        }));
        result.outputs.push_back(path);

        std::ostringstream msg;
        msg << "smooth fit: bad-slice fraction " << result.smoothfit.bad_slice_fraction
            << ", global max jump " << result.smoothfit.global_max_jump << ", min u_t "
            << result.smoothfit.min_ut;
        result.message = msg.str();
    }

    write_manifest(cfg, out_dir, result.outputs, result);
    return result;
}

std::string config_from_manifest(const std::string& manifest_json) {
    const auto parsed = nlohmann::json::parse(manifest_json, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("config_text"))
        throw ConfigError("not a parobs run manifest", "manifest");
    return parsed["config_text"].get<std::string>();
}

} // namespace parobs
