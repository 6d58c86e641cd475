// Scenario-driven front end: run obstacle-problem scenarios from sectioned
// config files, list the packaged demos, and turn result CSVs into
// gnuplot-ready column files.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "parobs/csv.hpp"
#include "parobs/errors.hpp"
#include "parobs/scenario.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw parobs::IoError("cannot read " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

/// Resolve a run target: a config file on disk, a manifest from a previous
/// run, or a packaged demo name.
std::string resolve_config_text(const std::string& target) {
    namespace fs = std::filesystem;
    if (fs::exists(target)) {
        const std::string text = read_file(target);
        const bool looks_json = !text.empty() && text.find_first_not_of(" \t\r\n") !=
                                                     std::string::npos &&
                                text[text.find_first_not_of(" \t\r\n")] == '{';
        return looks_json ? parobs::config_from_manifest(text) : text;
    }
    std::string name = target;
    if (name.size() > 4 && name.substr(name.size() - 4) == ".cfg")
        name = name.substr(0, name.size() - 4);
    const auto& demos = parobs::builtin_demos();
    if (auto it = demos.find(name); it != demos.end()) return it->second;
    throw parobs::ConfigError("no such file or demo: " + target, target);
}

int run_command(const std::string& target, const std::string& out_dir, int jobs) {
    const std::string text = resolve_config_text(target);
    const parobs::ScenarioConfig cfg = parobs::parse_config(text);
    const parobs::RunResult result = parobs::run_scenario(cfg, out_dir, jobs);
    for (const auto& f : result.outputs) std::cout << "wrote " << f << "\n";
    if (!result.message.empty()) std::cout << result.message << "\n";
    return 0;
}

/// CSV -> whitespace-separated columns for gnuplot.
int emit_plot_data(const std::string& csv_path, const std::string& kind) {
    static const std::map<std::string, std::vector<std::string>> kinds = {
        {"profile", {"xi", "V"}},
        {"trace", {"t", "E"}},
        {"ladder", {"eps", "defect"}},
        {"boundary", {"x", "t"}},
        {"field", {"x", "t", "u"}},
        {"exercise", {"tau", "s_star"}},
    };
    auto it = kinds.find(kind);
    if (it == kinds.end()) {
        std::ostringstream os;
        os << "unknown plot kind '" << kind << "'; known:";
        for (const auto& [k, _] : kinds) os << ' ' << k;
        throw parobs::ConfigError(os.str(), kind);
    }

    std::ifstream is(csv_path);
    if (!is) throw parobs::IoError("cannot read " + csv_path);
    std::string line;
    std::vector<int> columns;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!header_seen) {
            header_seen = true;
            for (const auto& want : it->second) {
                int found = -1;
                for (std::size_t c = 0; c < cells.size(); ++c)
                    if (cells[c] == want) found = static_cast<int>(c);
                if (found < 0)
                    throw parobs::ConfigError("column '" + want + "' not in " + csv_path, kind);
                columns.push_back(found);
            }
            continue;
        }
        bool first = true;
        for (int c : columns) {
            if (!first) std::cout << ' ';
            std::cout << (c < static_cast<int>(cells.size()) ? cells[c] : "nan");
            first = false;
        }
        std::cout << '\n';
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for the 1D parabolic obstacle problem"};
    app.require_subcommand(1);

    std::string target;
    std::string out_dir;
    int jobs = 1;
    if (const char* env = std::getenv("PAROBS_OUT")) out_dir = env;
    if (out_dir.empty()) out_dir = "parobs_out";

    auto* run = app.add_subcommand("run", "run a scenario config, demo name, or manifest");
    run->add_option("config", target, "config file, demo name, or manifest.json")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--jobs", jobs, "max concurrently classified points")
        ->check(CLI::PositiveNumber);

    auto* list = app.add_subcommand("list-demos", "list packaged demo scenarios");

    std::string csv_path, kind;
    auto* plot = app.add_subcommand("emit-plot-data",
                                    "print gnuplot-ready columns from a result CSV");
    plot->add_option("csv", csv_path, "result CSV file")->required();
    plot->add_option("kind", kind, "profile|trace|ladder|boundary|field|exercise")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return run_command(target, out_dir, jobs);
        if (list->parsed()) {
            for (const auto& [name, _] : parobs::builtin_demos())
                std::cout << name << ".cfg\n";
            return 0;
        }
        if (plot->parsed()) return emit_plot_data(csv_path, kind);
    } catch (const parobs::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const parobs::ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const parobs::ValidationError& e) {
        std::cerr << "hypothesis validation failed: " << e.what() << "\n";
        return 3;
    } catch (const parobs::ConvergenceError& e) {
        std::cerr << "solver did not converge: " << e.what() << "\n";
        return 4;
    } catch (const parobs::IoError& e) {
        std::cerr << "i/o failure: " << e.what() << "\n";
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
