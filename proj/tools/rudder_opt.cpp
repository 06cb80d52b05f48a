// Batch front end: run, analyze, verify-gradients.

#include "rudder/driver.hpp"
#include "rudder/error.hpp"
#include "rudder/layout_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>

namespace {

constexpr int kConverged = 0;
constexpr int kMaxIterations = 2;
constexpr int kConfigError = 3;
constexpr int kNumericalFailure = 4;

// "all", or a comma-separated list of indices and labels such as t3, x5, y5.
std::vector<int> parse_vars(const std::string& spec, const rudder::DesignMap& map) {
    std::vector<int> out;
    if (spec == "all") return out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        int found = -1;
        for (int i = 0; i < map.size() && found < 0; ++i) {
            if (map.label(i) == item) found = i;
        }
        if (found < 0) {
            try {
                std::size_t used = 0;
                found = std::stoi(item, &used);
                if (used != item.size()) found = -1;
            } catch (const std::exception&) {
                found = -1;
            }
        }
        if (found < 0) throw rudder::ConfigError("unknown design variable '" + item + "'");
        out.push_back(found);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stiffener layout optimization for enclosed tapered rudders"};
    app.set_help_flag("--help", "print this help and exit");
    app.require_subcommand(1);

    std::string config, out = "out", layout, vars = "all", csv;
    double h = 1e-4;

    auto* run = app.add_subcommand("run", "optimize the layout and write history, layouts and fields");
    run->add_option("--config", config, "configuration JSON")->required();
    run->add_option("--out", out, "output directory");

    auto* an = app.add_subcommand("analyze", "mesh and solve a stored layout");
    an->add_option("--config", config, "configuration JSON")->required();
    an->add_option("--layout", layout, "layout JSON")->required();
    an->add_option("--out", out, "output directory");

    auto* vg = app.add_subcommand("verify-gradients", "compare analytic gradients with central differences");
    vg->add_option("--config", config, "configuration JSON")->required();
    vg->add_option("--layout", layout, "layout JSON (default: the initial layout)");
    vg->add_option("--vars", vars, "all, or comma-separated indices / labels (t3, x5, y5)");
    vg->add_option("--h", h, "finite-difference step");
    vg->add_option("--csv", csv, "write the table here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        const rudder::RunConfig cfg = rudder::load_config(config);
        auto load_layout = [&]() {
            if (layout.empty()) return rudder::initial_layout(cfg);
            const rudder::LayoutDocument doc = rudder::read_layout_file(layout);
            rudder::check_planes_match(doc, cfg.problem.domain);
            return doc.gs;
        };
        if (*run) {
            const rudder::RunResult res = rudder::run(cfg, out);
            const auto& last = res.history.back();
            std::printf("%s after %d iterations: objective %.6g, V/Vbar %.4f\n",
                        res.status == rudder::RunStatus::converged ? "converged" : "stopped at max iterations",
                        last.k, last.objective, last.volume_ratio);
            return res.status == rudder::RunStatus::converged ? kConverged : kMaxIterations;
        }
        if (*an) {
            const rudder::AnalysisReport r = rudder::analyze(cfg, load_layout(), out);
            if (r.compliance) std::printf("compliance %.10g mJ\n", *r.compliance);
            for (std::size_t j = 0; j < r.frequencies.size(); ++j) std::printf("f%zu %.10g Hz\n", j + 1, r.frequencies[j]);
            std::printf("volume ratio %.6f\n", r.volume_ratio);
            if (r.repeated_warning) std::printf("warning: repeated fundamental eigenvalue\n");
            return 0;
        }
        const rudder::GroundStructure gs = load_layout();
        const auto rows = rudder::verify_gradients(cfg, gs, parse_vars(vars, rudder::DesignMap(gs)), h);
        const std::string table = rudder::gradient_csv(rows);
        if (csv.empty()) {
            std::cout << table;
        } else {
            rudder::write_file_atomic(csv, table);
        }
        return 0;
    } catch (const rudder::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    }
}
