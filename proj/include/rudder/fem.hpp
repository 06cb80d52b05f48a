#pragma once

// Global assembly and linear solves on the reduced (free-DOF) system.

#include "rudder/model.hpp"
#include "rudder/shell_element.hpp"

#include <Eigen/Core>
#include <Eigen/Sparse>

#include <vector>

namespace rudder {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct DofMap {
    std::vector<int> reduced;  // full DOF -> reduced index, -1 when fixed
    std::vector<int> full;     // reduced index -> full DOF

    int size() const { return static_cast<int>(full.size()); }
    Eigen::VectorXd restrict(const Eigen::VectorXd& v) const;
    Eigen::VectorXd expand(const Eigen::VectorXd& v) const;
};

struct SystemMatrices {
    SparseMatrix K;  // reduced
    SparseMatrix M;  // reduced, empty when mass is not requested
    DofMap dofs;
    double total_mass = 0.0;  // sum of element masses
};

Section element_section(const FEModel& model, int element);
std::vector<Eigen::Vector3d> element_coordinates(const FEModel& model, int element);
/// Full-vector DOF indices of an element (6 per node).
std::vector<int> element_dofs(const FEModel& model, int element);

/// Throws AnalysisError naming the part of any component without fixed DOFs.
SystemMatrices assemble(const FEModel& model, bool with_mass = true);

struct StaticResult {
    Eigen::VectorXd U;  // full length
    double compliance = 0.0;
    double residual = 0.0;  // ||K U - F|| / ||F|| on the reduced system
};

/// Throws AnalysisError when the reduced stiffness is singular or indefinite.
StaticResult solve_static(const SystemMatrices& sys, const Eigen::VectorXd& F);

/// U^T K_e U split into membrane, bending and drilling parts for one element.
struct ElementEnergy {
    double membrane = 0.0;
    double bending = 0.0;
    double drilling = 0.0;
    double total() const { return membrane + bending + drilling; }
};
ElementEnergy element_energy(const FEModel& model, int element, const Eigen::VectorXd& U);

/// Strain state at area coordinates (xi, eta) of a triangle built from
/// element-local node indices `tri` (0..count-1).
StrainState element_strain(const FEModel& model, int element, const std::array<int, 3>& tri,
                           const Eigen::VectorXd& U, double xi, double eta);

/// Midsurface translational kinetic density rho * u.u at area coordinates of a sub-triangle.
double kinetic_density(const FEModel& model, int element, const std::array<int, 3>& tri,
                       const Eigen::VectorXd& U, double xi, double eta);

/// Largest top/bottom-fibre von Mises stress at the element centre.
double recover_von_mises(const FEModel& model, int element, const Eigen::VectorXd& U);

}  // namespace rudder
