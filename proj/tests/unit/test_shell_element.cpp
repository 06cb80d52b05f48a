#include "rudder/error.hpp"
#include "rudder/shell_element.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace rudder;
using Eigen::Vector3d;

namespace {

std::vector<Vector3d> skew_triangle() {
    return {{1.0, 2.0, 0.5}, {9.0, 3.0, -1.0}, {4.0, 10.0, 2.0}};
}

std::vector<Vector3d> skew_quad() {
    return {{0.0, 0.0, 0.0}, {10.0, 1.0, 0.5}, {11.0, 9.0, 1.0}, {-1.0, 8.0, 0.5}};
}

// Rigid motion u = c + w x x with rotations w at every node.
Eigen::VectorXd rigid_field(const std::vector<Vector3d>& x, const Vector3d& c, const Vector3d& w) {
    Eigen::VectorXd u(6 * static_cast<Eigen::Index>(x.size()));
    for (std::size_t a = 0; a < x.size(); ++a) {
        u.segment<3>(6 * static_cast<Eigen::Index>(a)) = c + w.cross(x[a]);
        u.segment<3>(6 * static_cast<Eigen::Index>(a) + 3) = w;
    }
    return u;
}

const Section kSection{7.0e4, 0.3, 1.5, 2.7e-9};

}  // namespace

TEST(ShellElement, RigidBodyMotionsCarryNoForce) {
    for (const auto& x : {skew_triangle(), skew_quad()}) {
        const Eigen::MatrixXd K = element_matrices(x, kSection).stiffness();
        const double scale = K.cwiseAbs().maxCoeff();
        for (int k = 0; k < 6; ++k) {
            Vector3d c = Vector3d::Zero(), w = Vector3d::Zero();
            (k < 3 ? c : w)(k % 3) = 1.0;
            const Eigen::VectorXd f = K * rigid_field(x, c, w);
            EXPECT_LT(f.cwiseAbs().maxCoeff(), 1e-10 * scale * 20.0) << "mode " << k;
        }
    }
}

// A flat triangle has a seventh zero mode, a uniform drilling rotation: the
// penalty only sees differences of rz. Warping couples it away in the quad.
TEST(ShellElement, StiffnessIsSymmetricPositiveSemidefiniteWithRigidNullSpace) {
    for (const auto& x : {skew_triangle(), skew_quad()}) {
        const int zeros = x.size() == 3 ? 7 : 6;
        const Eigen::MatrixXd K = element_matrices(x, kSection).stiffness();
        EXPECT_LT((K - K.transpose()).cwiseAbs().maxCoeff(), 1e-9 * K.cwiseAbs().maxCoeff());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
        const auto& ev = es.eigenvalues();
        const double top = ev(ev.size() - 1);
        for (int i = 0; i < ev.size(); ++i) EXPECT_GT(ev(i), -1e-10 * top);
        for (int i = 0; i < zeros; ++i) EXPECT_LT(std::abs(ev(i)), 1e-10 * top);
        EXPECT_GT(ev(zeros), 1e-8 * top);
    }
}

TEST(ShellElement, TranslationalMassSumsToElementMass) {
    for (const auto& x : {skew_triangle(), skew_quad()}) {
        const ElementMatrices em = element_matrices(x, kSection);
        double area = 0.0;
        if (x.size() == 3) {
            area = 0.5 * (x[1] - x[0]).cross(x[2] - x[0]).norm();
        } else {
            for (const auto& tri : kQuadSplits)
                area += 0.25 * (x[tri[1]] - x[tri[0]]).cross(x[tri[2]] - x[tri[0]]).norm();
        }
        const double mass = kSection.rho * kSection.t * area;
        for (int d = 0; d < 3; ++d) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(em.mass_translation.rows());
            for (std::size_t a = 0; a < x.size(); ++a) e(6 * static_cast<Eigen::Index>(a) + d) = 1.0;
            EXPECT_NEAR(e.dot(em.mass_translation * e), mass, 1e-12 * mass);
        }
        const double rotary = kSection.rho * std::pow(kSection.t, 3) / 12.0 * area;
        Eigen::VectorXd e = Eigen::VectorXd::Zero(em.mass_rotation.rows());
        for (std::size_t a = 0; a < x.size(); ++a) e(6 * static_cast<Eigen::Index>(a) + 3) = 1.0;
        EXPECT_NEAR(e.dot(em.mass_rotation * e), rotary, 1e-12 * rotary);
    }
}

TEST(ShellElement, ThicknessScaling) {
    Section a = kSection, b = kSection;
    b.t = 2.0 * a.t;
    const auto ma = element_matrices(skew_quad(), a), mb = element_matrices(skew_quad(), b);
    EXPECT_LT((mb.membrane - 2.0 * ma.membrane).norm(), 1e-10 * mb.membrane.norm());
    EXPECT_LT((mb.drilling - 2.0 * ma.drilling).norm(), 1e-10 * mb.drilling.norm());
    EXPECT_LT((mb.bending - 8.0 * ma.bending).norm(), 1e-10 * mb.bending.norm());
    EXPECT_LT((mb.mass_translation - 2.0 * ma.mass_translation).norm(), 1e-10 * mb.mass_translation.norm());
    EXPECT_LT((mb.mass_rotation - 8.0 * ma.mass_rotation).norm(), 1e-10 * mb.mass_rotation.norm());
}

TEST(ShellElement, QuadIsInvariantUnderCyclicRelabeling) {
    const auto x = skew_quad();
    const std::vector<Vector3d> y{x[1], x[2], x[3], x[0]};
    const Eigen::MatrixXd Kx = element_matrices(x, kSection).stiffness();
    const Eigen::MatrixXd Ky = element_matrices(y, kSection).stiffness();
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(24, 24);
    for (int a = 0; a < 4; ++a)
        for (int d = 0; d < 6; ++d) P(6 * a + d, 6 * ((a + 1) % 4) + d) = 1.0;
    EXPECT_LT((P * Kx * P.transpose() - Ky).cwiseAbs().maxCoeff(), 1e-9 * Kx.cwiseAbs().maxCoeff());
}

TEST(ShellElement, MembraneEnergyOfUniformStrain) {
    const std::vector<Vector3d> x{{0, 0, 0}, {4, 0, 0}, {1, 3, 0}};
    const Eigen::MatrixXd K = element_matrices(x, kSection).membrane;
    const double exx = 1e-3, eyy = -4e-4, gxy = 2e-4;
    Eigen::VectorXd u = Eigen::VectorXd::Zero(18);
    for (int a = 0; a < 3; ++a) {
        u(6 * a) = exx * x[a].x() + gxy * x[a].y();
        u(6 * a + 1) = eyy * x[a].y();
    }
    const Eigen::Vector3d eps(exx, eyy, gxy);
    const double expected = eps.dot(plane_stress(kSection.E, kSection.nu) * eps) * 6.0 * kSection.t;
    EXPECT_NEAR(u.dot(K * u), expected, 1e-10 * expected);
}

TEST(ShellElement, FiberSignConvention) {
    // w = x^2/2 bends the +z face into compression.
    const std::array<Vector3d, 3> x{Vector3d(0, 0, 0), Vector3d(1, 0, 0), Vector3d(0, 1, 0)};
    Eigen::Matrix<double, 18, 1> u = Eigen::Matrix<double, 18, 1>::Zero();
    for (int a = 0; a < 3; ++a) {
        u(6 * a + 2) = 0.5 * x[a].x() * x[a].x();
        u(6 * a + 3) = 0.0;         // rx = w,y
        u(6 * a + 4) = -x[a].x();   // ry = -w,x
    }
    const Section s{1.0e5, 0.0, 0.4, 0.0};
    for (const auto& [xi, eta] : {std::pair{1.0 / 3.0, 1.0 / 3.0}, std::pair{0.1, 0.7}, std::pair{0.6, 0.2}}) {
        const StrainState st = triangle_strain(x, u, s, xi, eta);
        EXPECT_NEAR(st.curvature(0), -1.0, 1e-12);
        EXPECT_NEAR(st.curvature(1), 0.0, 1e-12);
        EXPECT_NEAR(st.curvature(2), 0.0, 1e-12);
        const Eigen::Vector3d top = st.membrane + 0.5 * s.t * st.curvature;
        EXPECT_NEAR(top(0), -0.5 * s.t, 1e-12);
        EXPECT_NEAR(fiber_energy_density(st, s, 1), 0.5 * s.E * 0.04, 1e-9);
        EXPECT_NEAR(fiber_energy_density(st, s, -1), 0.5 * s.E * 0.04, 1e-9);
        EXPECT_NEAR(fiber_von_mises(st, s, 1), s.E * 0.2, 1e-9);
    }
}

TEST(ShellElement, DktReproducesConstantCurvatureOnSkewTriangle) {
    const auto xs = skew_triangle();
    const std::array<Vector3d, 3> x{xs[0], xs[1], xs[2]};
    const TriangleFrame f = triangle_frame(x[0], x[1], x[2]);
    // Quadratic w in local coordinates, expressed through global DOFs.
    const double a = 0.3, b = -0.2, c = 0.5;
    Eigen::Matrix<double, 18, 1> u = Eigen::Matrix<double, 18, 1>::Zero();
    for (int k = 0; k < 3; ++k) {
        const double px = f.xy[k].x(), py = f.xy[k].y();
        const double w = 0.5 * a * px * px + b * px * py + 0.5 * c * py * py;
        const double wx = a * px + b * py, wy = b * px + c * py;
        const Vector3d rot_local(wy, -wx, 0.0);
        u.segment<3>(6 * k) = f.R.transpose() * Vector3d(0, 0, w);
        u.segment<3>(6 * k + 3) = f.R.transpose() * rot_local;
    }
    const Section s{1.0e5, 0.3, 1.0, 0.0};
    for (const auto& [xi, eta] : {std::pair{0.2, 0.2}, std::pair{0.5, 0.1}, std::pair{0.05, 0.9}}) {
        const StrainState st = triangle_strain(x, u, s, xi, eta);
        EXPECT_NEAR(st.curvature(0), -a, 1e-10);
        EXPECT_NEAR(st.curvature(1), -c, 1e-10);
        EXPECT_NEAR(st.curvature(2), -2.0 * b, 1e-10);
        EXPECT_LT(st.membrane.norm(), 1e-12);
    }
}

TEST(ShellElement, BendingPatchTestOnDistortedPatch) {
    // Five nodes, interior node 4: out-of-balance force there must vanish for a
    // constant-curvature field.
    const std::vector<Vector3d> x{{0, 0, 0}, {10, 0, 0}, {11, 9, 0}, {-1, 10, 0}, {4, 3.5, 0}};
    const std::vector<std::array<int, 3>> tris{{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(30, 30);
    for (const auto& t : tris) {
        const Eigen::MatrixXd ke = element_matrices({x[t[0]], x[t[1]], x[t[2]]}, kSection).stiffness();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) K.block<6, 6>(6 * t[i], 6 * t[j]) += ke.block<6, 6>(6 * i, 6 * j);
    }
    const double a = 0.01, b = 0.004, c = -0.02;
    const double exx = 2e-4, eyy = 1e-4, gxy = -3e-4;
    Eigen::VectorXd u(30);
    for (int k = 0; k < 5; ++k) {
        const double px = x[k].x(), py = x[k].y();
        u.segment<6>(6 * k) << exx * px + 0.5 * gxy * py, eyy * py + 0.5 * gxy * px,
            0.5 * a * px * px + b * px * py + 0.5 * c * py * py, b * px + c * py, -(a * px + b * py), 0.0;
    }
    const Eigen::VectorXd f = K * u;
    EXPECT_LT(f.segment<6>(24).cwiseAbs().maxCoeff(), 1e-9 * (K * u).cwiseAbs().maxCoeff() + 1e-12);
}

TEST(ShellElement, DegenerateTriangleThrows) {
    const std::vector<Vector3d> x{{0, 0, 0}, {1, 1, 1}, {2, 2, 2}};
    EXPECT_THROW(element_matrices(x, kSection), AnalysisError);
}

TEST(ShellElement, VonMisesOfUniaxialAndShear) {
    EXPECT_NEAR(von_mises({100.0, 0.0, 0.0}), 100.0, 1e-12);
    EXPECT_NEAR(von_mises({0.0, 0.0, 10.0}), 10.0 * std::sqrt(3.0), 1e-12);
    EXPECT_NEAR(von_mises({50.0, 50.0, 0.0}), 50.0, 1e-12);
}
