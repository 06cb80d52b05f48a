#pragma once

// Smallest eigenpairs of (K - lambda M) phi = 0 by shift-invert Lanczos with
// full M-orthogonalization, polished by subspace iteration.

#include "rudder/fem.hpp"

#include <Eigen/Core>

#include <vector>

namespace rudder {

struct ModalResult {
    std::vector<double> eigenvalues;   // ascending, (rad/s)^2
    std::vector<Eigen::VectorXd> modes;  // full length, phi^T M phi = 1
    std::vector<double> residuals;     // ||K phi - lambda M phi|| / max(||K phi||, |shift| ||M phi||)
    bool repeated_warning = false;     // (lambda_2 - lambda_1)/lambda_1 < 1e-3
    double shift = 0.0;

    double frequency(int j) const;  // Hz
};

/// Iterates until every wanted residual is at most `tol`, or until progress
/// stalls; throws AnalysisError if a residual is then still above `accept`.
ModalResult solve_modal(const SystemMatrices& sys, int count, double tol = 1e-8, double accept = 1e-6);

}  // namespace rudder
