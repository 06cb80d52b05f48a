#include "rudder/fem.hpp"

#include "rudder/error.hpp"

#include <Eigen/SparseCholesky>

#include <numeric>
#include <string>

namespace rudder {

namespace {

int find_root(std::vector<int>& parent, int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
        parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
        x = parent[static_cast<std::size_t>(x)];
    }
    return x;
}

void check_connectivity(const FEModel& model) {
    const int nn = model.node_count();
    std::vector<int> parent(static_cast<std::size_t>(nn));
    std::iota(parent.begin(), parent.end(), 0);
    for (const MeshElement& e : model.mesh.elements) {
        const int r0 = find_root(parent, e.nodes[0]);
        for (int a = 1; a < e.count; ++a) {
            const int r = find_root(parent, e.nodes[static_cast<std::size_t>(a)]);
            if (r != r0) parent[static_cast<std::size_t>(r)] = r0;
        }
    }
    std::vector<char> anchored(static_cast<std::size_t>(nn), 0);
    for (int n = 0; n < nn; ++n) {
        for (int d = 0; d < 6; ++d) {
            if (model.fixed[static_cast<std::size_t>(6 * n + d)]) anchored[static_cast<std::size_t>(find_root(parent, n))] = 1;
        }
    }
    for (const MeshElement& e : model.mesh.elements) {
        if (!anchored[static_cast<std::size_t>(find_root(parent, e.nodes[0]))]) {
            throw AnalysisError("singular stiffness: part '" +
                                part_name(model.mesh.parts[static_cast<std::size_t>(e.part)]) +
                                "' is not connected to any fixed support");
        }
    }
}

}  // namespace

Eigen::VectorXd DofMap::restrict(const Eigen::VectorXd& v) const {
    Eigen::VectorXd r(size());
    for (int i = 0; i < size(); ++i) r(i) = v(full[static_cast<std::size_t>(i)]);
    return r;
}

Eigen::VectorXd DofMap::expand(const Eigen::VectorXd& v) const {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(reduced.size()));
    for (int i = 0; i < size(); ++i) f(full[static_cast<std::size_t>(i)]) = v(i);
    return f;
}

Section element_section(const FEModel& model, int element) {
    const auto k = static_cast<std::size_t>(element);
    const Material& m = model.materials[static_cast<std::size_t>(model.material[k])];
    return {m.E, m.nu, model.thickness[k], model.density[k]};
}

std::vector<Eigen::Vector3d> element_coordinates(const FEModel& model, int element) {
    const MeshElement& e = model.mesh.elements[static_cast<std::size_t>(element)];
    std::vector<Eigen::Vector3d> x;
    for (int a = 0; a < e.count; ++a) x.push_back(model.mesh.nodes[static_cast<std::size_t>(e.nodes[static_cast<std::size_t>(a)])]);
    return x;
}

std::vector<int> element_dofs(const FEModel& model, int element) {
    const MeshElement& e = model.mesh.elements[static_cast<std::size_t>(element)];
    std::vector<int> dofs;
    for (int a = 0; a < e.count; ++a) {
        for (int d = 0; d < 6; ++d) dofs.push_back(6 * e.nodes[static_cast<std::size_t>(a)] + d);
    }
    return dofs;
}

SystemMatrices assemble(const FEModel& model, bool with_mass) {
    check_connectivity(model);
    SystemMatrices sys;
    const int ndof = model.dof_count();
    sys.dofs.reduced.assign(static_cast<std::size_t>(ndof), -1);
    for (int i = 0; i < ndof; ++i) {
        if (!model.fixed[static_cast<std::size_t>(i)]) {
            sys.dofs.reduced[static_cast<std::size_t>(i)] = sys.dofs.size();
            sys.dofs.full.push_back(i);
        }
    }
    std::vector<Eigen::Triplet<double>> kt, mt;
    for (int e = 0; e < static_cast<int>(model.mesh.elements.size()); ++e) {
        const Section s = element_section(model, e);
        const ElementMatrices em = element_matrices(element_coordinates(model, e), s);
        const Eigen::MatrixXd ke = em.stiffness();
        const Eigen::MatrixXd me = em.mass();
        sys.total_mass += s.rho * s.t * element_area(model.mesh, model.mesh.elements[static_cast<std::size_t>(e)]);
        const auto dofs = element_dofs(model, e);
        for (std::size_t i = 0; i < dofs.size(); ++i) {
            const int ri = sys.dofs.reduced[static_cast<std::size_t>(dofs[i])];
            if (ri < 0) continue;
            for (std::size_t j = 0; j < dofs.size(); ++j) {
                const int rj = sys.dofs.reduced[static_cast<std::size_t>(dofs[j])];
                if (rj < 0) continue;
                const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
                if (ke(ii, jj) != 0.0) kt.emplace_back(ri, rj, ke(ii, jj));
                if (with_mass && me(ii, jj) != 0.0) mt.emplace_back(ri, rj, me(ii, jj));
            }
        }
    }
    const int n = sys.dofs.size();
    sys.K.resize(n, n);
    sys.K.setFromTriplets(kt.begin(), kt.end());
    if (with_mass) {
        sys.M.resize(n, n);
        sys.M.setFromTriplets(mt.begin(), mt.end());
    }
    return sys;
}

StaticResult solve_static(const SystemMatrices& sys, const Eigen::VectorXd& F) {
    StaticResult res;
    const Eigen::VectorXd f = sys.dofs.restrict(F);
    res.U = Eigen::VectorXd::Zero(F.size());
    if (f.norm() == 0.0) return res;
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
    ldlt.compute(sys.K);
    if (ldlt.info() != Eigen::Success) throw AnalysisError("stiffness factorization failed");
    const Eigen::VectorXd D = ldlt.vectorD();
    const Eigen::VectorXd diag = ldlt.permutationP() * Eigen::VectorXd(sys.K.diagonal());
    for (Eigen::Index i = 0; i < D.size(); ++i) {
        if (!(D(i) > 1e-12 * std::abs(diag(i)))) {
            throw AnalysisError("singular or indefinite reduced stiffness (pivot " + std::to_string(i) + ")");
        }
    }
    Eigen::VectorXd u = ldlt.solve(f);
    Eigen::VectorXd r = f - sys.K * u;
    for (int it = 0; it < 3 && r.norm() > 1e-12 * f.norm(); ++it) {
        u += ldlt.solve(r);
        r = f - sys.K * u;
    }
    res.residual = r.norm() / f.norm();
    if (!std::isfinite(res.residual) || res.residual > 1e-8) {
        throw AnalysisError("static solve residual " + std::to_string(res.residual) + " above 1e-8");
    }
    res.U = sys.dofs.expand(u);
    res.compliance = F.dot(res.U);
    return res;
}

ElementEnergy element_energy(const FEModel& model, int element, const Eigen::VectorXd& U) {
    const ElementMatrices em = element_matrices(element_coordinates(model, element), element_section(model, element));
    const auto dofs = element_dofs(model, element);
    Eigen::VectorXd ue(static_cast<Eigen::Index>(dofs.size()));
    for (std::size_t i = 0; i < dofs.size(); ++i) ue(static_cast<Eigen::Index>(i)) = U(dofs[i]);
    return {ue.dot(em.membrane * ue), ue.dot(em.bending * ue), ue.dot(em.drilling * ue)};
}

StrainState element_strain(const FEModel& model, int element, const std::array<int, 3>& tri,
                           const Eigen::VectorXd& U, double xi, double eta) {
    const MeshElement& e = model.mesh.elements[static_cast<std::size_t>(element)];
    std::array<Eigen::Vector3d, 3> x;
    Eigen::Matrix<double, 18, 1> u;
    for (int a = 0; a < 3; ++a) {
        const int node = e.nodes[static_cast<std::size_t>(tri[static_cast<std::size_t>(a)])];
        x[static_cast<std::size_t>(a)] = model.mesh.nodes[static_cast<std::size_t>(node)];
        u.segment<6>(6 * a) = U.segment<6>(6 * node);
    }
    return triangle_strain(x, u, element_section(model, element), xi, eta);
}

double kinetic_density(const FEModel& model, int element, const std::array<int, 3>& tri,
                       const Eigen::VectorXd& U, double xi, double eta) {
    const MeshElement& e = model.mesh.elements[static_cast<std::size_t>(element)];
    const double N[3] = {1.0 - xi - eta, xi, eta};
    Eigen::Vector3d u = Eigen::Vector3d::Zero();
    for (int a = 0; a < 3; ++a) {
        const int node = e.nodes[static_cast<std::size_t>(tri[static_cast<std::size_t>(a)])];
        u += N[a] * U.segment<3>(6 * node);
    }
    return model.density[static_cast<std::size_t>(element)] * u.squaredNorm();
}

double recover_von_mises(const FEModel& model, int element, const Eigen::VectorXd& U) {
    const MeshElement& e = model.mesh.elements[static_cast<std::size_t>(element)];
    const Section s = element_section(model, element);
    double vm = 0.0;
    const std::array<int, 3> first{0, 1, 2};
    const StrainState st = element_strain(model, element, first, U, 1.0 / 3.0, 1.0 / 3.0);
    vm = std::max(fiber_von_mises(st, s, 1), fiber_von_mises(st, s, -1));
    if (e.count == 4) {
        const StrainState st2 = element_strain(model, element, {0, 2, 3}, U, 1.0 / 3.0, 1.0 / 3.0);
        vm = std::max({vm, fiber_von_mises(st2, s, 1), fiber_von_mises(st2, s, -1)});
    }
    return vm;
}

}  // namespace rudder
