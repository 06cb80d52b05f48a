#include "rudder/eigensolver.hpp"
#include "rudder/error.hpp"
#include "rudder/fem.hpp"

#include "structured.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace rudder;
using testsupport::fix_dof;
using testsupport::fix_node;
using testsupport::flat_plate;
using testsupport::plate_node;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Consistent nodal load of a uniform pressure q along +z on a flat model.
void add_pressure(FEModel& m, double q) {
    for (const auto& e : m.mesh.elements) {
        const double a = element_area(m.mesh, e);
        for (int k = 0; k < e.count; ++k) m.load(6 * e.nodes[k] + 2) += q * a / e.count;
    }
}

double navier_centre(double a, double b, double q, double D) {
    double w = 0.0;
    for (int m = 1; m < 200; m += 2)
        for (int n = 1; n < 200; n += 2) {
            const double s = std::sin(m * kPi / 2) * std::sin(n * kPi / 2);
            const double d = m * m / (a * a) + n * n / (b * b);
            w += s / (m * n * d * d);
        }
    return 16.0 * q / (std::pow(kPi, 6) * D) * w;
}

// Unreduced matrices of a model with every DOF free.
SystemMatrices free_system(const FEModel& model) {
    const int n = model.dof_count();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n), M = Eigen::MatrixXd::Zero(n, n);
    for (int e = 0; e < static_cast<int>(model.mesh.elements.size()); ++e) {
        const auto em = element_matrices(element_coordinates(model, e), element_section(model, e));
        const auto dofs = element_dofs(model, e);
        const Eigen::MatrixXd ke = em.stiffness(), me = em.mass();
        for (std::size_t i = 0; i < dofs.size(); ++i)
            for (std::size_t j = 0; j < dofs.size(); ++j) {
                K(dofs[i], dofs[j]) += ke(i, j);
                M(dofs[i], dofs[j]) += me(i, j);
            }
    }
    SystemMatrices sys;
    sys.K = K.sparseView();
    sys.M = M.sparseView();
    for (int i = 0; i < n; ++i) {
        sys.dofs.reduced.push_back(i);
        sys.dofs.full.push_back(i);
    }
    return sys;
}

Material beam_material() {
    Material m;
    m.E = 7.0e4;
    m.nu = 0.0;
    m.rho = 2.7e-9;
    return m;
}

}  // namespace

TEST(StaticSolve, SimplySupportedPlateMatchesNavierSeries) {
    const double a = 100.0, t = 1.0, q = 0.01;
    Material mat;
    const int nx = 16;
    for (bool quads : {false, true}) {
        FEModel m = flat_plate(a, a, nx, nx, t, mat, quads);
        for (int j = 0; j <= nx; ++j)
            for (int i = 0; i <= nx; ++i) {
                const int n = plate_node(i, j, nx);
                fix_dof(m, n, 5);
                const bool xe = i == 0 || i == nx, ye = j == 0 || j == nx;
                if (xe || ye) {
                    fix_dof(m, n, 0);
                    fix_dof(m, n, 1);
                    fix_dof(m, n, 2);
                }
                if (xe) fix_dof(m, n, 3);
                if (ye) fix_dof(m, n, 4);
            }
        add_pressure(m, q);
        const auto sys = assemble(m, false);
        const auto res = solve_static(sys, m.load);
        const double D = mat.E * t * t * t / (12.0 * (1.0 - mat.nu * mat.nu));
        const double w = res.U(6 * plate_node(nx / 2, nx / 2, nx) + 2);
        EXPECT_NEAR(w, navier_centre(a, a, q, D), 0.02 * navier_centre(a, a, q, D)) << (quads ? "quads" : "triangles");
        EXPECT_LE(res.residual, 1e-8);
        EXPECT_NEAR(res.compliance, m.load.dot(res.U), 1e-12 * res.compliance);
        double energy = 0.0;
        for (int e = 0; e < static_cast<int>(m.mesh.elements.size()); ++e) energy += element_energy(m, e, res.U).total();
        EXPECT_NEAR(energy, res.compliance, 1e-8 * res.compliance);
    }
}

TEST(StaticSolve, CantileverTipDeflection) {
    const double L = 100.0, b = 10.0, t = 1.0, P = 0.1;
    const Material mat = beam_material();
    const int nx = 20, ny = 2;
    FEModel m = flat_plate(L, b, nx, ny, t, mat);
    for (int j = 0; j <= ny; ++j) fix_node(m, plate_node(0, j, nx));
    for (int j = 0; j <= ny; ++j) m.load(6 * plate_node(nx, j, nx) + 2) = P / ny * ((j == 0 || j == ny) ? 0.5 : 1.0);
    const auto res = solve_static(assemble(m, false), m.load);
    const double I = b * t * t * t / 12.0;
    const double expected = P * L * L * L / (3.0 * mat.E * I);
    for (int j = 0; j <= ny; ++j) EXPECT_NEAR(res.U(6 * plate_node(nx, j, nx) + 2), expected, 0.03 * expected);
}

TEST(StaticSolve, ZeroLoadGivesZeroDisplacement) {
    FEModel m = flat_plate(10, 10, 2, 2, 1.0, Material{});
    fix_node(m, 0);
    const auto res = solve_static(assemble(m), m.load);
    EXPECT_EQ(res.U.norm(), 0.0);
    EXPECT_EQ(res.compliance, 0.0);
}

TEST(Assemble, UnsupportedPartIsReported) {
    FEModel m = flat_plate(10, 10, 1, 1, 1.0, Material{});
    // Disjoint second plate with nothing fixed.
    const int base = m.node_count();
    for (int k = 0; k < 3; ++k) m.mesh.nodes.emplace_back(50.0 + 5 * (k == 1), 5.0 * (k == 2), 0.0);
    MeshElement e;
    e.nodes = {base, base + 1, base + 2, 0};
    e.count = 3;
    e.part = 3;
    m.mesh.elements.push_back(e);
    m.material.push_back(0);
    m.thickness.push_back(1.0);
    m.density.push_back(1e-9);
    m.dthickness.push_back(0.0);
    m.ddensity.push_back(0.0);
    m.fixed.resize(static_cast<std::size_t>(m.dof_count()), 0);
    m.load = Eigen::VectorXd::Zero(m.dof_count());
    fix_node(m, 0);
    try {
        assemble(m);
        FAIL() << "expected AnalysisError";
    } catch (const AnalysisError& err) {
        EXPECT_NE(std::string(err.what()).find("shaft-collar"), std::string::npos) << err.what();
    }
}

TEST(Assemble, TotalMassAndSymmetry) {
    const Material mat = beam_material();
    FEModel m = flat_plate(30, 20, 3, 2, 2.0, mat, true);
    fix_node(m, 0);
    const auto sys = assemble(m);
    EXPECT_NEAR(sys.total_mass, 30 * 20 * 2.0 * mat.rho, 1e-12 * sys.total_mass);
    const Eigen::MatrixXd K(sys.K), M(sys.M);
    EXPECT_LT((K - K.transpose()).cwiseAbs().maxCoeff(), 1e-9 * K.cwiseAbs().maxCoeff());
    EXPECT_LT((M - M.transpose()).cwiseAbs().maxCoeff(), 1e-9 * M.cwiseAbs().maxCoeff());
}

TEST(Modal, CantileverFirstFrequency) {
    const double L = 100.0, b = 10.0, t = 1.0;
    const Material mat = beam_material();
    const int nx = 20, ny = 2;
    FEModel m = flat_plate(L, b, nx, ny, t, mat);
    for (int j = 0; j <= ny; ++j) fix_node(m, plate_node(0, j, nx));
    const auto sys = assemble(m);
    const auto res = solve_modal(sys, 3);
    const double I = b * t * t * t / 12.0;
    const double beta = 1.8751040687;
    const double f1 = beta * beta / (2 * kPi) * std::sqrt(mat.E * I / (mat.rho * b * t * std::pow(L, 4)));
    EXPECT_NEAR(res.frequency(0), f1, 0.03 * f1);
    for (std::size_t j = 0; j < res.residuals.size(); ++j) EXPECT_LE(res.residuals[j], 1e-8);
    for (std::size_t j = 1; j < res.eigenvalues.size(); ++j) EXPECT_GE(res.eigenvalues[j], res.eigenvalues[j - 1]);
}

TEST(Modal, MatchesDenseGeneralizedSolverAndIsMOrthonormal) {
    const Material mat = beam_material();
    FEModel m = flat_plate(40, 30, 4, 3, 1.5, mat);
    fix_node(m, plate_node(0, 0, 4));
    fix_node(m, plate_node(0, 3, 4));
    const auto sys = assemble(m);
    const auto res = solve_modal(sys, 5);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(Eigen::MatrixXd(sys.K), Eigen::MatrixXd(sys.M));
    for (int j = 0; j < 5; ++j) EXPECT_NEAR(res.eigenvalues[j], ges.eigenvalues()(j), 1e-7 * ges.eigenvalues()(j));
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) {
            const Eigen::VectorXd pi = sys.dofs.restrict(res.modes[i]), pj = sys.dofs.restrict(res.modes[j]);
            EXPECT_NEAR(pi.dot(sys.M * pj), i == j ? 1.0 : 0.0, 1e-8);
        }
}

TEST(Modal, FreeFreeFoldedSectionHasSixRigidModes) {
    // Two plates joined at a right angle along x.
    std::vector<Vec3> nodes;
    const int nx = 4, ny = 2;
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) nodes.emplace_back(10.0 * i, 5.0 * j, 0.0);
    for (int j = 1; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) nodes.emplace_back(10.0 * i, 0.0, 5.0 * j);
    auto id = [&](int i, int j) { return j >= 0 ? j * (nx + 1) + i : (ny + 1) * (nx + 1) + (-j - 1) * (nx + 1) + i; };
    std::vector<std::vector<int>> els;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) els.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
        for (int j = 0; j > -ny; --j) els.push_back({id(i, j), id(i, j - 1), id(i + 1, j - 1), id(i + 1, j)});
    }
    const FEModel m = testsupport::make_model(nodes, els, 1.0, beam_material());
    const auto sys = free_system(m);
    const auto res = solve_modal(sys, 8);
    EXPECT_LT(res.shift, 0.0);
    const double first_elastic = res.eigenvalues[6];
    EXPECT_GT(first_elastic, 0.0);
    for (int j = 0; j < 6; ++j) EXPECT_LT(std::abs(res.eigenvalues[j]), 1e-6 * first_elastic) << j;
}

TEST(Modal, RepeatedEigenvalueWarning) {
    SystemMatrices sys;
    const int n = 12;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) K(i, i) = i < 2 ? 5.0 : 5.0 + i;
    sys.K = K.sparseView();
    sys.M = Eigen::MatrixXd::Identity(n, n).sparseView();
    for (int i = 0; i < n; ++i) {
        sys.dofs.reduced.push_back(i);
        sys.dofs.full.push_back(i);
    }
    const auto res = solve_modal(sys, 2);
    EXPECT_TRUE(res.repeated_warning);
    EXPECT_NEAR(res.eigenvalues[0], 5.0, 1e-10);
    EXPECT_NEAR(res.eigenvalues[1], 5.0, 1e-10);

    K(1, 1) = 6.0;
    sys.K = K.sparseView();
    EXPECT_FALSE(solve_modal(sys, 2).repeated_warning);
}
