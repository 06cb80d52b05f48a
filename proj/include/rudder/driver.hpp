#pragma once

// Optimization loop, thin-stiffener pruning, one-shot analysis of a layout
// and the gradient check harness behind the CLI.

#include "rudder/config.hpp"
#include "rudder/sensitivity.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rudder {

struct IterationRecord {
    int k = 0;
    double objective = 0.0;     // compliance in mJ or f1 in Hz
    double volume_ratio = 0.0;  // V / Vbar
    double thin_fraction = 0.0; // volume of sub-threshold stiffeners / Vbar
    double max_step = 0.0;      // largest |dx| of the update leading here
    int counter = 0;            // consecutive quiet steps
};

enum class RunStatus { converged, max_iterations };

struct PruneReport {
    GroundStructure layout;
    std::vector<int> removed;  // stiffener ids of the input layout
    std::vector<int> retained; // thin but needed to keep the model solvable
    double objective_before = 0.0;
    double objective_after = 0.0;

    double relative_change() const;
};

struct RunResult {
    RunStatus status = RunStatus::max_iterations;
    GroundStructure layout;
    std::vector<IterationRecord> history;
    double volume_bound = 0.0;
    std::optional<PruneReport> pruned;
};

/// Per-variable box, and per-iteration move limit, of the design vector.
struct DesignBounds {
    Eigen::VectorXd lower, upper, move;
};
DesignBounds design_bounds(const RunConfig& cfg, const GroundStructure& gs, const DesignMap& map);

/// Stiffeners running into the shaft disc.
std::vector<int> shaft_crossings(const GroundStructure& gs, const PlanformDomain& domain);

SolveRequest request_for(Objective objective);

/// Compliance in mJ, or the fundamental frequency in Hz.
double objective_value(const Problem& problem, const Evaluation& ev);

/// Runs the loop, then prunes. Artifacts go to `out_dir` unless it is empty.
/// Throws on configuration errors; numerical failures are rethrown after
/// the failing design has been written to `out_dir`.
RunResult run(const RunConfig& cfg, const std::string& out_dir);

/// Deletes stiffeners whose design thickness t is below `threshold` and re-analyses. When the
/// pruned model cannot be solved, removals are undone one stiffener at a time.
PruneReport remove_thin_stiffeners(const Problem& problem, const GroundStructure& gs, double threshold);

struct AnalysisReport {
    std::optional<double> compliance;  // mJ, when loads are present
    std::vector<double> frequencies;   // Hz
    double volume = 0.0;
    double volume_ratio = 0.0;
    bool repeated_warning = false;
};

AnalysisReport analyze(const RunConfig& cfg, const GroundStructure& gs, const std::string& out_dir);

struct GradientCheckRow {
    std::string variable;
    double analytic = 0.0;
    double fd = 0.0;
    double rel_error = 0.0;
};

/// Objective gradient (compliance, or lambda_1 for frequency runs) against
/// central differences. `vars` empty means every variable.
std::vector<GradientCheckRow> verify_gradients(const RunConfig& cfg, const GroundStructure& gs,
                                               const std::vector<int>& vars, double h);

/// |a - f| / max(|a|, |f|, floor).
double relative_error(double analytic, double fd, double floor);

std::string history_csv(const std::vector<IterationRecord>& history);
std::string gradient_csv(const std::vector<GradientCheckRow>& rows);

}  // namespace rudder
