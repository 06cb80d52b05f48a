#pragma once

// Run configuration: one JSON document, units N / mm / MPa / tonne / s.

#include "rudder/mma.hpp"
#include "rudder/pipeline.hpp"

#include <optional>
#include <string>

namespace rudder {

struct OptimizerSettings {
    int max_iterations = 300;
    double t_lower = 0.001;
    double t_upper = 15.0;
    double t_move = 2.0;                        // per-iteration thickness move limit
    Vec2 node_move = Vec2(-1.0, -1.0);          // per-iteration node move; <= 0: a quarter of the cell size
    Vec2 node_range = Vec2(-1.0, -1.0);         // half-width of the node box; <= 0: 0.45 of the cell size
    bool fixed_boundary_thickness = false;      // boundary stiffeners close the box and keep their thickness
    ConvergenceParams convergence;
    MmaParams mma;
};

struct RunConfig {
    Problem problem;
    double volume_fraction = 0.33;
    int nx = 5;
    int ny = 4;
    CellPattern pattern = CellPattern::x_braced;
    double t_boundary = 5.0;
    double t_interior = 2.0;
    std::optional<std::string> initial_layout;  // layout JSON replacing the grid
    OptimizerSettings optimizer;
    int snapshot_every = 10;
    std::string output_dir = "out";
    unsigned seed = 0;  // reserved; no algorithm draws random numbers
};

/// Throws ConfigError with the offending key on any schema or range violation.
RunConfig parse_config(const std::string& json_text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

/// Grid ground structure (or the configured initial layout), clipped.
GroundStructure initial_layout(const RunConfig& cfg);

}  // namespace rudder
