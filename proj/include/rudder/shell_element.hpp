#pragma once

// Flat shell elements: constant-strain membrane, discrete-Kirchhoff (DKT)
// bending and a drilling penalty. A 4-node element is the average of the two
// diagonal splits into triangles.
//
// Node DOFs are (ux, uy, uz, rx, ry, rz) in global axes.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <vector>

namespace rudder {

struct Section {
    double E = 1.0e5;
    double nu = 0.3;
    double t = 1.0;
    double rho = 0.0;
};

/// Drilling penalty factor relative to E * t * area.
inline constexpr double kDrillingFactor = 1.0e-3;

/// Element matrices split by how they scale with thickness:
/// membrane and drilling ~ t, bending ~ t^3, translational mass ~ rho*t,
/// rotary mass ~ rho*t^3.
struct ElementMatrices {
    Eigen::MatrixXd membrane;
    Eigen::MatrixXd bending;
    Eigen::MatrixXd drilling;
    Eigen::MatrixXd mass_translation;
    Eigen::MatrixXd mass_rotation;

    Eigen::MatrixXd stiffness() const { return membrane + bending + drilling; }
    Eigen::MatrixXd mass() const { return mass_translation + mass_rotation; }
};

/// `x` holds 3 or 4 node positions. Throws AnalysisError on a zero-area triangle.
ElementMatrices element_matrices(const std::vector<Eigen::Vector3d>& x, const Section& s);

/// Local frame and in-plane coordinates of a triangle: rows of R are e1, e2, e3.
struct TriangleFrame {
    Eigen::Matrix3d R;
    std::array<Eigen::Vector2d, 3> xy;
    double area = 0.0;
};
TriangleFrame triangle_frame(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c);

/// DKT curvature operator (beta_x,x, beta_y,y, beta_x,y + beta_y,x) at area
/// coordinates (xi, eta) acting on (w, rx, ry) per node in local axes.
Eigen::Matrix<double, 3, 9> dkt_curvature_operator(const TriangleFrame& f, double xi, double eta);

/// Plane-stress constitutive matrix E/(1-nu^2) [1 nu 0; nu 1 0; 0 0 (1-nu)/2].
Eigen::Matrix3d plane_stress(double E, double nu);

/// Strain state of a triangle at (xi, eta): fibre strain is membrane + z * curvature,
/// z along the local normal. `drill_density` is the drilling-penalty energy per volume.
struct StrainState {
    Eigen::Vector3d membrane = Eigen::Vector3d::Zero();
    Eigen::Vector3d curvature = Eigen::Vector3d::Zero();
    double drill_density = 0.0;
};

StrainState triangle_strain(const std::array<Eigen::Vector3d, 3>& x, const Eigen::Matrix<double, 18, 1>& u,
                            const Section& s, double xi, double eta);

/// Energy density at the fibre z = side * t/2 (side = +1 or -1), including the
/// drilling share.
double fiber_energy_density(const StrainState& st, const Section& s, int side);

/// Plane-stress von Mises stress at the fibre z = side * t/2.
double fiber_von_mises(const StrainState& st, const Section& s, int side);

double von_mises(const Eigen::Vector3d& sigma);

/// Sub-triangles of a quad (both diagonal splits), node indices 0..3.
inline constexpr std::array<std::array<int, 3>, 4> kQuadSplits{{{0, 1, 2}, {0, 2, 3}, {0, 1, 3}, {1, 2, 3}}};

}  // namespace rudder
