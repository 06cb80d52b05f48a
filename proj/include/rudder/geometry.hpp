#pragma once

// Explicit stiffener geometry inside an enclosed, tapered rudder: skin planes,
// stiffener heights and faces, and the node-driven ground structure.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <optional>
#include <string>
#include <vector>

namespace rudder {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

/// Implicit plane a*x + b*y + c*z + d = 0 (lengths in mm). c must be nonzero.
struct Plane {
    double a = 0.0;
    double b = 0.0;
    double c = 1.0;
    double d = 0.0;
};

/// z on the plane above (x, y). Throws ConfigError when c == 0.
double plane_z(const Plane& plane, double x, double y);

struct Circle {
    Vec2 center = Vec2::Zero();
    double radius = 0.0;
};

enum class Side { upper, lower };

/// The enclosed rudder in the reference plane z = 0 together with its skins.
///
/// `outline` is the planform polygon (counter-clockwise). The optional
/// leading-edge plane cuts the planform along its trace on z = 0; the design
/// region is the part of the planform on the same side of that trace as the
/// shaft centre.
struct PlanformDomain {
    std::vector<Vec2> outline;
    Circle shaft;
    Plane upper;  // skin above the reference plane, z > 0 inside
    Plane lower;  // skin below the reference plane, z < 0 inside
    std::optional<Plane> leading_edge;
    double skin_thickness = 1.2;
    double leading_edge_thickness = 3.0;

    /// Throws ConfigError on a degenerate plane, a shaft outside the design
    /// region or non-positive interior height.
    void validate() const;

    /// Planform clipped by the leading-edge half-plane (the whole planform
    /// when no leading-edge plane is given).
    std::vector<Vec2> design_region() const;

    /// Signed value of the leading-edge trace at p, negative on the design
    /// side. Zero everywhere without a leading-edge plane.
    double leading_edge_side(const Vec2& p) const;

    /// Full height between the skins, H_I - H_II, at p.
    double height(const Vec2& p) const;

    double skin_z(Side side, const Vec2& p) const;

    /// Volume between the skins over the design region minus the shaft.
    double enclosed_volume() const;

    /// Largest bounding-box extent of the planform.
    double characteristic_length() const;

    /// Absolute geometric tolerance used for on-boundary tests.
    double tolerance() const;
};

struct DrivingNode {
    Vec2 pos = Vec2::Zero();
    bool movable = false;
};

struct Stiffener {
    int node_a = -1;
    int node_b = -1;
    double t = 0.0;  // design thickness
    bool boundary = false;
};

enum class CellPattern { x_braced, single_diagonal, edges_only };

std::string to_string(CellPattern pattern);
CellPattern cell_pattern_from_string(const std::string& name);

struct GroundStructure {
    std::vector<DrivingNode> nodes;
    std::vector<Stiffener> stiffeners;
    CellPattern pattern = CellPattern::x_braced;

    int movable_count() const;
};

/// Straight stiffener skeleton from the alpha end (eta = 0) to the beta end.
struct Skeleton {
    Vec2 a;
    Vec2 b;
    Vec2 at(double eta) const { return (1.0 - eta) * a + eta * b; }
};

Skeleton skeleton_of(const GroundStructure& gs, int stiffener);

/// Signed height of the skin above (upper) or below (lower) the skeleton point
/// at eta. Throws GeometryError when the point lies outside the planform.
double stiffener_height(const Skeleton& skel, const PlanformDomain& domain, Side side, double eta);

/// Point on the upper or lower midsurface; zeta = 0 on the reference plane,
/// zeta = 1 on the skin.
Vec3 midsurface_point(const Skeleton& skel, const PlanformDomain& domain, Side side, double eta,
                      double zeta);

/// In-plane unit normal (dy, -dx, 0) / L. Throws GeometryError when L == 0.
Vec3 stiffener_normal(const Skeleton& skel);

/// Outer faces of a stiffener. I* lie above the reference plane, II* below.
/// Faces 1 and 3 are the side faces (+n and -n), 2 and 4 the end faces at
/// eta = 1 and eta = 0.
enum class Face { I1, I2, I3, I4, II1, II2, II3, II4 };

/// Side faces take (eta, zeta); end faces take (zeta, xi).
Vec3 face_point(const Skeleton& skel, const PlanformDomain& domain, double t_eps, Face face,
                double p1, double p2);

double stiffener_length(const Skeleton& skel);

/// H_I(0.5) - H_II(0.5); throws GeometryError when not positive.
double stiffener_mid_height(const Skeleton& skel, const PlanformDomain& domain);

/// L * H* * t_eps, exact for planar skins.
double stiffener_volume(const Skeleton& skel, const PlanformDomain& domain, double t_eps);

/// Grid of nx * ny driving nodes over the design region bounding box, cells
/// connected per `pattern`, clipped to the design region, and closed with
/// boundary stiffeners along the planform edges. Boundary stiffeners get
/// `boundary_t`, all others `interior_t`.
GroundStructure build_ground_structure(const PlanformDomain& domain, int nx, int ny,
                                       CellPattern pattern, double boundary_t,
                                       double interior_t);

/// Clips every skeleton to the design region minus the shaft disc. Endpoints
/// created by clipping become fixed nodes; nodes no longer referenced are
/// dropped.
GroundStructure clip_skeleton(const GroundStructure& gs, const PlanformDomain& domain);

// Planar helpers shared with the mesher.
double polygon_area(const std::vector<Vec2>& poly);
bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly);
double distance_to_polygon_boundary(const Vec2& p, const std::vector<Vec2>& poly);
double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b);
double cross2(const Vec2& u, const Vec2& v);

}  // namespace rudder
