#include "rudder/model.hpp"

#include "rudder/error.hpp"

#include <set>

namespace rudder {

Vec3 element_normal(const ShellMesh& mesh, const MeshElement& e) {
    const Vec3& a = mesh.nodes[static_cast<std::size_t>(e.nodes[0])];
    const Vec3& b = mesh.nodes[static_cast<std::size_t>(e.nodes[1])];
    const Vec3& c = mesh.nodes[static_cast<std::size_t>(e.nodes[2])];
    Vec3 n = (b - a).cross(c - a);
    if (e.count == 4) {
        const Vec3& d = mesh.nodes[static_cast<std::size_t>(e.nodes[3])];
        n = (c - a).cross(d - b);
    }
    return n.normalized();
}

double element_area(const ShellMesh& mesh, const MeshElement& e) {
    const Vec3& a = mesh.nodes[static_cast<std::size_t>(e.nodes[0])];
    const Vec3& b = mesh.nodes[static_cast<std::size_t>(e.nodes[1])];
    const Vec3& c = mesh.nodes[static_cast<std::size_t>(e.nodes[2])];
    if (e.count == 3) return 0.5 * (b - a).cross(c - a).norm();
    const Vec3& d = mesh.nodes[static_cast<std::size_t>(e.nodes[3])];
    return 0.5 * (c - a).cross(d - b).norm();
}

void update_stiffener_properties(FEModel& model, const GroundStructure& gs, const AnalysisSetup& setup) {
    const Material& mat = setup.materials.at(static_cast<std::size_t>(setup.assign.stiffener));
    for (std::size_t i = 0; i < gs.stiffeners.size(); ++i) {
        const auto te = penalized_thickness(gs.stiffeners[i].t, setup.penalty);
        const auto re = penalized_density(gs.stiffeners[i].t, mat.rho, setup.penalty);
        for (int e : model.mesh.stiffener_elements[i]) {
            const auto k = static_cast<std::size_t>(e);
            model.thickness[k] = te.value;
            model.dthickness[k] = te.slope;
            model.density[k] = re.value;
            model.ddensity[k] = re.slope;
        }
    }
}

FEModel apply_bcs_and_loads(ShellMesh mesh, const PlanformDomain& domain, const GroundStructure& gs,
                            const AnalysisSetup& setup) {
    if (setup.materials.empty()) throw ConfigError("no materials defined");
    const auto nmat = static_cast<int>(setup.materials.size());
    for (int m : {setup.assign.skin, setup.assign.stiffener, setup.assign.leading_edge, setup.assign.collar}) {
        if (m < 0 || m >= nmat) throw ConfigError("part material index out of range");
    }
    FEModel model;
    model.mesh = std::move(mesh);
    model.materials = setup.materials;
    const std::size_t ne = model.mesh.elements.size();
    model.material.assign(ne, 0);
    model.thickness.assign(ne, 0.0);
    model.density.assign(ne, 0.0);
    model.dthickness.assign(ne, 0.0);
    model.ddensity.assign(ne, 0.0);

    for (std::size_t k = 0; k < ne; ++k) {
        const MeshElement& e = model.mesh.elements[k];
        const PartTag& tag = model.mesh.parts[static_cast<std::size_t>(e.part)];
        int m = setup.assign.skin;
        double t = e.leading_edge_zone ? domain.leading_edge_thickness : domain.skin_thickness;
        switch (tag.kind) {
            case PartKind::skin_upper:
            case PartKind::skin_lower: break;
            case PartKind::leading_edge:
                m = setup.assign.leading_edge;
                t = domain.leading_edge_thickness;
                break;
            case PartKind::shaft_collar:
                m = setup.assign.collar;
                t = domain.leading_edge_thickness;
                break;
            case PartKind::stiffener: m = setup.assign.stiffener; break;
        }
        model.material[k] = m;
        model.thickness[k] = t;
        model.density[k] = setup.materials[static_cast<std::size_t>(m)].rho;
    }
    update_stiffener_properties(model, gs, setup);

    model.fixed.assign(static_cast<std::size_t>(model.dof_count()), 0);
    for (int n : model.mesh.fixed_nodes) {
        for (int d = 0; d < 6; ++d) model.fixed[static_cast<std::size_t>(6 * n + d)] = 1;
    }
    if (model.mesh.fixed_nodes.empty()) throw AnalysisError("no fixed degrees of freedom");

    model.load = Eigen::VectorXd::Zero(model.dof_count());
    for (const auto& [name, p] : setup.pressures) {
        int part = -1;
        for (std::size_t k = 0; k < model.mesh.parts.size(); ++k) {
            if (part_name(model.mesh.parts[k]) == name) part = static_cast<int>(k);
        }
        if (part < 0) throw ConfigError("pressure on unknown part '" + name + "'");
        if (p == 0.0) continue;
        for (const MeshElement& e : model.mesh.elements) {
            if (e.part != part) continue;
            const Vec3 f = -p * element_area(model.mesh, e) / e.count * element_normal(model.mesh, e);
            for (int a = 0; a < e.count; ++a) {
                model.load.segment<3>(6 * e.nodes[static_cast<std::size_t>(a)]) += f;
            }
        }
    }
    return model;
}

}  // namespace rudder
