#include "rudder/vtk_writer.hpp"

#include <iomanip>
#include <sstream>

namespace rudder {

std::string vtk_string(const FEModel& model, const VtkFields& fields, const std::string& title) {
    const ShellMesh& mesh = model.mesh;
    std::ostringstream os;
    os << std::setprecision(12);
    os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.nodes.size() << " double\n";
    for (const Vec3& p : mesh.nodes) os << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';

    std::size_t size = 0;
    for (const MeshElement& e : mesh.elements) size += static_cast<std::size_t>(e.count) + 1;
    os << "CELLS " << mesh.elements.size() << ' ' << size << '\n';
    for (const MeshElement& e : mesh.elements) {
        os << e.count;
        for (int a = 0; a < e.count; ++a) os << ' ' << e.nodes[static_cast<std::size_t>(a)];
        os << '\n';
    }
    os << "CELL_TYPES " << mesh.elements.size() << '\n';
    for (const MeshElement& e : mesh.elements) os << (e.count == 4 ? 9 : 5) << '\n';  // VTK_QUAD / VTK_TRIANGLE

    os << "CELL_DATA " << mesh.elements.size() << '\n';
    os << "SCALARS part int 1\nLOOKUP_TABLE default\n";
    for (const MeshElement& e : mesh.elements) os << e.part << '\n';
    os << "SCALARS thickness double 1\nLOOKUP_TABLE default\n";
    for (double t : model.thickness) os << t << '\n';
    if (fields.von_mises) {
        os << "SCALARS von_mises double 1\nLOOKUP_TABLE default\n";
        for (double v : *fields.von_mises) os << v << '\n';
    }
    if (fields.displacement) {
        const Eigen::VectorXd& u = *fields.displacement;
        os << "POINT_DATA " << mesh.nodes.size() << '\n';
        os << "VECTORS " << fields.displacement_name << " double\n";
        for (std::size_t n = 0; n < mesh.nodes.size(); ++n) {
            const auto i = static_cast<Eigen::Index>(6 * n);
            os << u(i) << ' ' << u(i + 1) << ' ' << u(i + 2) << '\n';
        }
    }
    return os.str();
}

}  // namespace rudder
