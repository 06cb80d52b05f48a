#pragma once

// Analytic design sensitivities of compliance, the fundamental eigenvalue and
// stiffener volume, and a finite-difference oracle to check them.
//
// Thickness gradients integrate the energy (or Rayleigh) density over both
// side faces of each stiffener. Node gradients default to the domain form:
// element matrices differentiated along the mesh velocity obtained from
// meshes rebuilt at +-delta. The side-face integral weighted by (1 - eta) and
// eta is kept as ShapeGradient::face_integral.

#include "rudder/pipeline.hpp"

#include <vector>

namespace rudder {

struct GradientSet {
    std::vector<double> dt;    // per stiffener
    std::vector<Vec2> dnode;   // per node, zero for fixed nodes
    bool unreliable = false;   // set when lambda_1 is (nearly) repeated
    int fd_fallbacks = 0;      // node coordinates on a remeshing seam, differenced instead

    /// Flattened in DesignMap order.
    Eigen::VectorXd flatten(const DesignMap& map) const;
};

/// d(F^T U). Throws AnalysisError when `ev` holds no static result or belongs
/// to a different design.
GradientSet grad_compliance(const Evaluation& ev, const Problem& problem, const GroundStructure& gs);

/// d(lambda_1) with phi_1 renormalized to phi^T M phi = 1. `density_term`
/// false drops the d(rho_eps)/dt part of the mass derivative (for checks only).
GradientSet grad_frequency(const Evaluation& ev, const Problem& problem, const GroundStructure& gs,
                           bool density_term = true);

/// d(sum of L * H* * t_eps), closed form.
GradientSet grad_volume(const GroundStructure& gs, const PlanformDomain& domain, const PenaltyParams& penalty);

enum class Quantity { compliance, lambda1, volume };

/// Central difference of `q` with respect to design variable `var` (DesignMap
/// order). Each side is a full re-evaluation; with `frozen_mesh` thickness
/// variables only update element properties on the unperturbed mesh.
double fd_oracle(const Problem& problem, const GroundStructure& gs, Quantity q, int var, double h,
                 bool frozen_mesh = false);

/// 6-point degree-4 rule on the unit triangle: (xi, eta, weight), weights sum to 1.
struct TrianglePoint {
    double xi, eta, w;
};
const std::array<TrianglePoint, 6>& dunavant6();

}  // namespace rudder
