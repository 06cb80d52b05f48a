#pragma once

// Incremental constrained Delaunay triangulation (Lawson flips for point
// insertion, Sloan's flip-based edge recovery for constraints).

#include <Eigen/Core>

#include <array>
#include <vector>

namespace rudder::cdt {

using Vec2 = Eigen::Vector2d;

struct Triangulation {
    std::vector<std::array<int, 3>> triangles;  // counter-clockwise, indices into the input points
};

/// Triangulates the convex hull of `points` so that every constraint edge
/// appears as a triangle edge. Constraint edges must not cross each other and
/// no input point may lie in the interior of a constraint edge; violations are
/// reported as MeshingError naming the offending edge index.
Triangulation constrained_delaunay(const std::vector<Vec2>& points,
                                   const std::vector<std::array<int, 2>>& constraints);

}  // namespace rudder::cdt
