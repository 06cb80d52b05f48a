#pragma once

// Finite-element model: mesh plus material map, penalized element
// properties, fixed degrees of freedom and pressure loads.

#include "rudder/meshing.hpp"
#include "rudder/penalty.hpp"

#include <Eigen/Core>

#include <map>
#include <string>
#include <vector>

namespace rudder {

struct Material {
    std::string name = "default";
    double E = 1.0e5;       // MPa
    double nu = 0.3;
    double rho = 4.45e-9;   // tonne/mm^3
};

/// Material index per part kind.
struct PartMaterials {
    int skin = 0;
    int stiffener = 0;
    int leading_edge = 0;
    int collar = 0;
};

struct AnalysisSetup {
    std::vector<Material> materials{Material{}};
    PartMaterials assign;
    std::map<std::string, double> pressures;  // part name -> MPa, pushes against the outward normal
    PenaltyParams penalty;
};

struct FEModel {
    ShellMesh mesh;
    std::vector<Material> materials;
    std::vector<int> material;       // per element
    std::vector<double> thickness;   // per element, penalized for stiffeners
    std::vector<double> density;     // per element, penalized for stiffeners
    std::vector<double> dthickness;  // d t_eps / d t per element (0 off stiffeners)
    std::vector<double> ddensity;    // d rho_eps / d t per element
    std::vector<char> fixed;         // per DOF, 6 per node
    Eigen::VectorXd load;            // full-length nodal load vector

    int node_count() const { return static_cast<int>(mesh.nodes.size()); }
    int dof_count() const { return 6 * node_count(); }
};

/// Shaft columns fully fixed; consistent nodal forces from uniform pressures.
/// Throws ConfigError for a pressure on a missing part, AnalysisError when
/// nothing is fixed.
FEModel apply_bcs_and_loads(ShellMesh mesh, const PlanformDomain& domain, const GroundStructure& gs,
                            const AnalysisSetup& setup);

/// Re-derives penalized stiffener thickness/density from gs on the existing mesh.
void update_stiffener_properties(FEModel& model, const GroundStructure& gs, const AnalysisSetup& setup);

/// Outward unit normal of a mesh element from its node order.
Vec3 element_normal(const ShellMesh& mesh, const MeshElement& e);
double element_area(const ShellMesh& mesh, const MeshElement& e);

}  // namespace rudder
