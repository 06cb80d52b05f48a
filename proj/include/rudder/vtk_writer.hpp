#pragma once

// Legacy ASCII VTK unstructured grid of the shell mesh with nodal
// displacements (or a mode shape) and per-cell part, thickness and stress.

#include "rudder/model.hpp"

#include <Eigen/Core>

#include <string>

namespace rudder {

struct VtkFields {
    const Eigen::VectorXd* displacement = nullptr;  // full DOF vector, optional
    std::string displacement_name = "displacement";
    const std::vector<double>* von_mises = nullptr;  // per element, optional
};

std::string vtk_string(const FEModel& model, const VtkFields& fields, const std::string& title);

}  // namespace rudder
