#pragma once

// One analysis of a design: remesh, build the model, assemble and solve.

#include "rudder/eigensolver.hpp"
#include "rudder/fem.hpp"
#include "rudder/meshing.hpp"
#include "rudder/model.hpp"

#include <optional>

namespace rudder {

enum class Objective { compliance, frequency };

/// How node gradients are formed. `domain`: derivative of the discrete
/// system along the mesh velocity of each node coordinate. `face_integral`:
/// the side-face boundary integral only.
enum class ShapeGradient { domain, face_integral };

std::string to_string(ShapeGradient g);
ShapeGradient shape_gradient_from_string(const std::string& name);

std::string to_string(Objective o);
Objective objective_from_string(const std::string& name);

struct Problem {
    PlanformDomain domain;
    AnalysisSetup setup;
    MeshParams mesh;
    Objective objective = Objective::compliance;
    int modes = 2;  // eigenpairs requested for frequency work
    ShapeGradient shape_gradient = ShapeGradient::domain;
};

struct Evaluation {
    GroundStructure gs;  // design the mesh and results belong to
    ReferenceMesh ref;
    FEModel model;
    SystemMatrices sys;
    std::optional<StaticResult> statics;
    std::optional<ModalResult> modal;
};

struct SolveRequest {
    bool statics = true;
    bool modal = false;
};

Evaluation evaluate(const Problem& problem, const GroundStructure& gs, SolveRequest what);

/// Thickness-only change on the existing mesh: refresh element properties and
/// re-solve. Node positions in `gs` must match the evaluation.
void reevaluate_frozen(Evaluation& ev, const Problem& problem, const GroundStructure& gs, SolveRequest what);

/// Sum of L * H* * t_eps over all stiffeners.
double total_volume(const GroundStructure& gs, const PlanformDomain& domain, const PenaltyParams& penalty);

/// Volume of stiffeners with t_eps below the manufacturing threshold.
double thin_volume(const GroundStructure& gs, const PlanformDomain& domain, const PenaltyParams& penalty);

/// Design vector: stiffener thicknesses followed by (x, y) of each movable node.
struct DesignMap {
    int n_stiffeners = 0;
    std::vector<int> movable;  // node ids

    explicit DesignMap(const GroundStructure& gs);
    int size() const { return n_stiffeners + 2 * static_cast<int>(movable.size()); }
    Eigen::VectorXd pack(const GroundStructure& gs) const;
    void unpack(const Eigen::VectorXd& x, GroundStructure& gs) const;
    std::string label(int var) const;  // "t3", "x5", "y5"
};

}  // namespace rudder
