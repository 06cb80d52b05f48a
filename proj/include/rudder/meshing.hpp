#pragma once

// Per-iteration remeshing: a constrained triangulation of the reference plane
// that contains every stiffener trace, lifted to both skins, plus structured
// quad strips for stiffeners, the leading-edge wall and the shaft collar.

#include "rudder/geometry.hpp"

#include <array>
#include <string>
#include <vector>

namespace rudder {

struct MeshParams {
    double h_target = 0.0;  // <= 0 selects characteristic length / 40
    int n_layers = 4;       // through-height divisions per side
    double min_length_factor = 2.0;

    double resolved_h(const PlanformDomain& domain) const;
};

struct ReferenceMesh {
    double h = 0.0;
    std::vector<Vec2> points;
    std::vector<std::array<int, 3>> triangles;  // counter-clockwise
    std::vector<char> leading_edge_zone;        // per triangle, ahead of the leading-edge trace
    std::vector<char> active;                   // per stiffener
    std::vector<std::vector<int>> stiffener_traces;  // per stiffener, point ids from node_a to node_b
    std::vector<std::vector<int>> leading_edge_traces;
    std::vector<int> shaft_loop;  // counter-clockwise, not closed
};

/// Throws MeshingError (naming offending stiffener ids where possible).
ReferenceMesh build_reference_mesh(const PlanformDomain& domain, const GroundStructure& gs,
                                   const MeshParams& params);

enum class PartKind { skin_upper, skin_lower, leading_edge, shaft_collar, stiffener };

struct PartTag {
    PartKind kind = PartKind::skin_upper;
    int stiffener = -1;
};

/// "skin-upper", "skin-lower", "leading-edge", "shaft-collar", "stiffener <i>".
std::string part_name(const PartTag& tag);

struct MeshElement {
    std::array<int, 4> nodes{-1, -1, -1, -1};
    int count = 3;  // 3 or 4
    int part = 0;
    bool leading_edge_zone = false;
};

struct ShellMesh {
    static constexpr int kUpper = 0;
    static constexpr int kLower = 1;
    static constexpr int kLeadingEdge = 2;
    static constexpr int kCollar = 3;
    static constexpr int kFirstStiffener = 4;

    std::vector<Vec3> nodes;
    std::vector<MeshElement> elements;
    std::vector<PartTag> parts;
    std::vector<int> fixed_nodes;                    // sorted
    std::vector<std::vector<int>> stiffener_elements;  // per stiffener (empty when inactive)
    int n_layers = 0;

    static int stiffener_part(int stiffener) { return kFirstStiffener + stiffener; }
};

ShellMesh extrude_and_lift(const ReferenceMesh& ref, const PlanformDomain& domain,
                           const GroundStructure& gs, int n_layers);

/// Smallest element area and largest triangle aspect ratio (longest edge over
/// shortest altitude); quads are measured through their two halves.
struct MeshQuality {
    double min_area = 0.0;
    double max_aspect = 0.0;
};
MeshQuality mesh_quality(const ShellMesh& mesh);

}  // namespace rudder
