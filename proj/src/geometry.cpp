#include "rudder/geometry.hpp"

#include "rudder/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <utility>

namespace rudder {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_plane(const Plane& p, const char* name) {
    if (p.c == 0.0 || !std::isfinite(p.a) || !std::isfinite(p.b) || !std::isfinite(p.c) ||
        !std::isfinite(p.d)) {
        throw ConfigError(std::string("degenerate plane '") + name + "': c must be nonzero");
    }
}

// Parameters s in [0,1] along a->b where the segment meets the polygon boundary.
std::vector<double> boundary_crossings(const Vec2& a, const Vec2& b, const std::vector<Vec2>& poly,
                                       double tol) {
    std::vector<double> params{0.0, 1.0};
    const Vec2 d = b - a;
    const double len2 = d.squaredNorm();
    for (std::size_t k = 0; k < poly.size(); ++k) {
        const Vec2& p = poly[k];
        const Vec2& q = poly[(k + 1) % poly.size()];
        const Vec2 e = q - p;
        const double denom = cross2(d, e);
        if (std::abs(denom) <= 1e-14 * std::sqrt(len2 * e.squaredNorm())) {
            // Parallel: collinear overlap contributes the edge endpoints.
            if (distance_to_segment(p, a, b) < tol || distance_to_segment(q, a, b) < tol) {
                for (const Vec2* v : {&p, &q}) {
                    const double s = (*v - a).dot(d) / len2;
                    if (s > 0.0 && s < 1.0 && distance_to_segment(*v, a, b) < tol) params.push_back(s);
                }
            }
            continue;
        }
        const double s = cross2(p - a, e) / denom;
        const double u = cross2(p - a, d) / denom;
        const double ut = tol / std::sqrt(e.squaredNorm());
        if (u >= -ut && u <= 1.0 + ut && s > 0.0 && s < 1.0) params.push_back(s);
    }
    std::sort(params.begin(), params.end());
    return params;
}

using Interval = std::pair<double, double>;

std::vector<Interval> clip_to_polygon(const Vec2& a, const Vec2& b, const std::vector<Vec2>& poly,
                                      double tol) {
    const auto params = boundary_crossings(a, b, poly, tol);
    const double len = (b - a).norm();
    std::vector<Interval> kept;
    for (std::size_t k = 0; k + 1 < params.size(); ++k) {
        const double s0 = params[k];
        const double s1 = params[k + 1];
        if ((s1 - s0) * len <= tol) continue;
        const Vec2 mid = a + 0.5 * (s0 + s1) * (b - a);
        if (!point_in_polygon(mid, poly)) continue;
        if (!kept.empty() && std::abs(kept.back().second - s0) * len <= tol) {
            kept.back().second = s1;
        } else {
            kept.emplace_back(s0, s1);
        }
    }
    return kept;
}

std::vector<Interval> subtract_disc(const std::vector<Interval>& in, const Vec2& a, const Vec2& b,
                                    const Circle& circle, double tol) {
    const Vec2 d = b - a;
    const Vec2 f = a - circle.center;
    const double A = d.squaredNorm();
    const double B = 2.0 * f.dot(d);
    const double C = f.squaredNorm() - circle.radius * circle.radius;
    const double disc = B * B - 4.0 * A * C;
    if (disc <= 0.0) return in;
    const double sq = std::sqrt(disc);
    const double r0 = (-B - sq) / (2.0 * A);
    const double r1 = (-B + sq) / (2.0 * A);
    const double len = std::sqrt(A);
    std::vector<Interval> out;
    for (const auto& [s0, s1] : in) {
        if (r1 <= s0 || r0 >= s1) {
            out.emplace_back(s0, s1);
            continue;
        }
        if (r0 > s0 && (r0 - s0) * len > tol) out.emplace_back(s0, r0);
        if (r1 < s1 && (s1 - r1) * len > tol) out.emplace_back(r1, s1);
    }
    return out;
}

int find_or_add_node(std::vector<DrivingNode>& nodes, const Vec2& p, double tol) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if ((nodes[i].pos - p).norm() <= tol) return static_cast<int>(i);
    }
    nodes.push_back({p, false});
    return static_cast<int>(nodes.size()) - 1;
}

}  // namespace

double cross2(const Vec2& u, const Vec2& v) { return u.x() * v.y() - u.y() * v.x(); }

double plane_z(const Plane& plane, double x, double y) {
    check_plane(plane, "plane");
    return -(plane.a * x + plane.b * y + plane.d) / plane.c;
}

double polygon_area(const std::vector<Vec2>& poly) {
    double area = 0.0;
    for (std::size_t k = 0; k < poly.size(); ++k) {
        area += cross2(poly[k], poly[(k + 1) % poly.size()]);
    }
    return 0.5 * area;
}

double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 d = b - a;
    const double len2 = d.squaredNorm();
    if (len2 == 0.0) return (p - a).norm();
    const double s = std::clamp((p - a).dot(d) / len2, 0.0, 1.0);
    return (p - (a + s * d)).norm();
}

double distance_to_polygon_boundary(const Vec2& p, const std::vector<Vec2>& poly) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < poly.size(); ++k) {
        best = std::min(best, distance_to_segment(p, poly[k], poly[(k + 1) % poly.size()]));
    }
    return best;
}

bool point_in_polygon(const Vec2& p, const std::vector<Vec2>& poly) {
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Vec2& pi = poly[i];
        const Vec2& pj = poly[j];
        if ((pi.y() > p.y()) != (pj.y() > p.y())) {
            const double x = pj.x() + (p.y() - pj.y()) * (pi.x() - pj.x()) / (pi.y() - pj.y());
            if (p.x() < x) inside = !inside;
        }
    }
    return inside;
}

// ---------------------------------------------------------------------------

void PlanformDomain::validate() const {
    check_plane(upper, "upper skin");
    check_plane(lower, "lower skin");
    if (leading_edge) check_plane(*leading_edge, "leading edge");
    if (outline.size() < 3) throw ConfigError("planform outline needs at least 3 vertices");
    if (polygon_area(outline) <= 0.0) {
        throw ConfigError("planform outline must be counter-clockwise with positive area");
    }
    if (!(skin_thickness > 0.0) || !(leading_edge_thickness > 0.0)) {
        throw ConfigError("skin and leading-edge thickness must be positive");
    }
    if (!(shaft.radius > 0.0)) throw ConfigError("shaft radius must be positive");
    if (leading_edge && std::abs(leading_edge_side(shaft.center)) <= tolerance()) {
        throw ConfigError("shaft centre lies on the leading-edge trace");
    }
    const auto region = design_region();
    if (region.size() < 3 || polygon_area(region) <= 0.0) {
        throw ConfigError("design region is empty");
    }
    if (!point_in_polygon(shaft.center, region) ||
        distance_to_polygon_boundary(shaft.center, region) <= shaft.radius) {
        throw ConfigError("shaft circle must lie strictly inside the design region");
    }
    for (const Vec2& v : outline) {
        if (!(skin_z(Side::upper, v) > 0.0) || !(skin_z(Side::lower, v) < 0.0)) {
            throw ConfigError("skins must satisfy z_upper > 0 > z_lower over the planform");
        }
    }
}

double PlanformDomain::leading_edge_side(const Vec2& p) const {
    if (!leading_edge) return 0.0;
    const Plane& le = *leading_edge;
    const double raw = le.a * p.x() + le.b * p.y() + le.d;
    const double ref = le.a * shaft.center.x() + le.b * shaft.center.y() + le.d;
    const double scale = std::hypot(le.a, le.b);
    if (scale == 0.0) return 0.0;
    return (ref > 0.0 ? -raw : raw) / scale;
}

std::vector<Vec2> PlanformDomain::design_region() const {
    if (!leading_edge) return outline;
    // Sutherland-Hodgman against the single half-plane leading_edge_side <= 0.
    std::vector<Vec2> out;
    const std::size_t n = outline.size();
    for (std::size_t k = 0; k < n; ++k) {
        const Vec2& p = outline[k];
        const Vec2& q = outline[(k + 1) % n];
        const double sp = leading_edge_side(p);
        const double sq = leading_edge_side(q);
        if (sp <= 0.0) out.push_back(p);
        if ((sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0)) {
            const double s = sp / (sp - sq);
            out.push_back(p + s * (q - p));
        }
    }
    // Drop consecutive duplicates.
    std::vector<Vec2> clean;
    for (const Vec2& v : out) {
        if (clean.empty() || (clean.back() - v).norm() > 1e-12 * characteristic_length()) {
            clean.push_back(v);
        }
    }
    if (clean.size() > 1 && (clean.front() - clean.back()).norm() <= 1e-12 * characteristic_length()) {
        clean.pop_back();
    }
    return clean;
}

double PlanformDomain::skin_z(Side side, const Vec2& p) const {
    return plane_z(side == Side::upper ? upper : lower, p.x(), p.y());
}

double PlanformDomain::height(const Vec2& p) const {
    return skin_z(Side::upper, p) - skin_z(Side::lower, p);
}

double PlanformDomain::enclosed_volume() const {
    const auto region = design_region();
    double vol = 0.0;
    for (std::size_t k = 1; k + 1 < region.size(); ++k) {
        const double area = 0.5 * cross2(region[k] - region[0], region[k + 1] - region[0]);
        const Vec2 centroid = (region[0] + region[k] + region[k + 1]) / 3.0;
        vol += area * height(centroid);
    }
    vol -= kPi * shaft.radius * shaft.radius * height(shaft.center);
    return vol;
}

double PlanformDomain::characteristic_length() const {
    if (outline.empty()) return 1.0;
    Vec2 lo = outline.front();
    Vec2 hi = outline.front();
    for (const Vec2& v : outline) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    return std::max((hi - lo).maxCoeff(), 1e-300);
}

double PlanformDomain::tolerance() const { return 1e-9 * characteristic_length(); }

// ---------------------------------------------------------------------------

std::string to_string(CellPattern pattern) {
    switch (pattern) {
        case CellPattern::x_braced: return "x-braced";
        case CellPattern::single_diagonal: return "single-diagonal";
        case CellPattern::edges_only: return "edges-only";
    }
    return "x-braced";
}

CellPattern cell_pattern_from_string(const std::string& name) {
    if (name == "x-braced") return CellPattern::x_braced;
    if (name == "single-diagonal") return CellPattern::single_diagonal;
    if (name == "edges-only") return CellPattern::edges_only;
    throw ConfigError("unknown cell pattern '" + name + "'");
}

int GroundStructure::movable_count() const {
    return static_cast<int>(std::count_if(nodes.begin(), nodes.end(),
                                          [](const DrivingNode& n) { return n.movable; }));
}

Skeleton skeleton_of(const GroundStructure& gs, int stiffener) {
    const Stiffener& s = gs.stiffeners.at(static_cast<std::size_t>(stiffener));
    return {gs.nodes.at(static_cast<std::size_t>(s.node_a)).pos,
            gs.nodes.at(static_cast<std::size_t>(s.node_b)).pos};
}

double stiffener_height(const Skeleton& skel, const PlanformDomain& domain, Side side, double eta) {
    const Vec2 p = skel.at(eta);
    if (!point_in_polygon(p, domain.outline) &&
        distance_to_polygon_boundary(p, domain.outline) > domain.tolerance()) {
        throw GeometryError("skeleton point outside the planform");
    }
    return domain.skin_z(side, p);
}

Vec3 midsurface_point(const Skeleton& skel, const PlanformDomain& domain, Side side, double eta,
                      double zeta) {
    const Vec2 p = skel.at(eta);
    return {p.x(), p.y(), zeta * stiffener_height(skel, domain, side, eta)};
}

Vec3 stiffener_normal(const Skeleton& skel) {
    const double len = stiffener_length(skel);
    if (len == 0.0) throw GeometryError("stiffener with coincident endpoints");
    return {(skel.b.y() - skel.a.y()) / len, (skel.a.x() - skel.b.x()) / len, 0.0};
}

Vec3 face_point(const Skeleton& skel, const PlanformDomain& domain, double t_eps, Face face,
                double p1, double p2) {
    const Vec3 n = stiffener_normal(skel);
    const bool upper = face == Face::I1 || face == Face::I2 || face == Face::I3 || face == Face::I4;
    const Side side = upper ? Side::upper : Side::lower;
    switch (face) {
        case Face::I1:
        case Face::II1: return midsurface_point(skel, domain, side, p1, p2) + 0.5 * t_eps * n;
        case Face::I3:
        case Face::II3: return midsurface_point(skel, domain, side, p1, p2) - 0.5 * t_eps * n;
        case Face::I2:
        case Face::II2: return midsurface_point(skel, domain, side, 1.0, p1) + (0.5 - p2) * t_eps * n;
        case Face::I4:
        case Face::II4: return midsurface_point(skel, domain, side, 0.0, p1) - (0.5 - p2) * t_eps * n;
    }
    return Vec3::Zero();
}

double stiffener_length(const Skeleton& skel) { return (skel.b - skel.a).norm(); }

double stiffener_mid_height(const Skeleton& skel, const PlanformDomain& domain) {
    const double h = stiffener_height(skel, domain, Side::upper, 0.5) -
                     stiffener_height(skel, domain, Side::lower, 0.5);
    if (!(h > 0.0)) throw GeometryError("non-positive stiffener mid height");
    return h;
}

double stiffener_volume(const Skeleton& skel, const PlanformDomain& domain, double t_eps) {
    return stiffener_length(skel) * stiffener_mid_height(skel, domain) * t_eps;
}

// ---------------------------------------------------------------------------

GroundStructure clip_skeleton(const GroundStructure& gs, const PlanformDomain& domain) {
    const auto region = domain.design_region();
    const double tol = domain.tolerance();
    GroundStructure out;
    out.pattern = gs.pattern;
    std::map<int, int> remap;
    auto keep_node = [&](int old) {
        auto it = remap.find(old);
        if (it != remap.end()) return it->second;
        const int id = find_or_add_node(out.nodes, gs.nodes[static_cast<std::size_t>(old)].pos, tol);
        out.nodes[static_cast<std::size_t>(id)].movable = gs.nodes[static_cast<std::size_t>(old)].movable;
        remap.emplace(old, id);
        return id;
    };
    std::set<std::pair<int, int>> pairs;
    for (const Stiffener& s : gs.stiffeners) {
        const Vec2 a = gs.nodes[static_cast<std::size_t>(s.node_a)].pos;
        const Vec2 b = gs.nodes[static_cast<std::size_t>(s.node_b)].pos;
        if ((b - a).norm() <= tol) continue;
        auto pieces = clip_to_polygon(a, b, region, tol);
        pieces = subtract_disc(pieces, a, b, domain.shaft, tol);
        for (const auto& [s0, s1] : pieces) {
            const int na = s0 <= 0.0 ? keep_node(s.node_a) : find_or_add_node(out.nodes, a + s0 * (b - a), tol);
            const int nb = s1 >= 1.0 ? keep_node(s.node_b) : find_or_add_node(out.nodes, a + s1 * (b - a), tol);
            if (na == nb) continue;
            const auto key = std::minmax(na, nb);
            if (!pairs.insert(key).second) continue;
            out.stiffeners.push_back({na, nb, s.t, s.boundary});
        }
    }
    // Nodes on the design-region boundary or the shaft circle are never design nodes.
    for (DrivingNode& n : out.nodes) {
        const bool on_boundary = distance_to_polygon_boundary(n.pos, region) <= tol ||
                                 (n.pos - domain.shaft.center).norm() <= domain.shaft.radius + tol;
        if (on_boundary) n.movable = false;
    }
    return out;
}

GroundStructure build_ground_structure(const PlanformDomain& domain, int nx, int ny,
                                       CellPattern pattern, double boundary_t,
                                       double interior_t) {
    if (nx < 2 || ny < 2) throw ConfigError("ground structure grid needs at least 2x2 nodes");
    const auto region = domain.design_region();
    const double tol = domain.tolerance();
    Vec2 lo = region.front();
    Vec2 hi = region.front();
    for (const Vec2& v : region) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }

    GroundStructure grid;
    grid.pattern = pattern;
    auto id = [nx](int i, int j) { return j * nx + i; };
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const Vec2 p(lo.x() + (hi.x() - lo.x()) * i / (nx - 1),
                         lo.y() + (hi.y() - lo.y()) * j / (ny - 1));
            const bool inside = point_in_polygon(p, region) &&
                                distance_to_polygon_boundary(p, region) > tol &&
                                (p - domain.shaft.center).norm() > domain.shaft.radius + tol;
            grid.nodes.push_back({p, inside});
        }
    }
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (i + 1 < nx) grid.stiffeners.push_back({id(i, j), id(i + 1, j), interior_t, false});
            if (j + 1 < ny) grid.stiffeners.push_back({id(i, j), id(i, j + 1), interior_t, false});
            if (i + 1 < nx && j + 1 < ny) {
                if (pattern != CellPattern::edges_only) {
                    grid.stiffeners.push_back({id(i, j), id(i + 1, j + 1), interior_t, false});
                }
                if (pattern == CellPattern::x_braced) {
                    grid.stiffeners.push_back({id(i + 1, j), id(i, j + 1), interior_t, false});
                }
            }
        }
    }

    GroundStructure gs = clip_skeleton(grid, domain);

    // Close the layout with boundary stiffeners along every planform edge of
    // the design region (leading-edge trace excluded: that wall is non-design).
    std::set<std::pair<int, int>> pairs;
    for (const Stiffener& s : gs.stiffeners) pairs.insert(std::minmax(s.node_a, s.node_b));
    const std::size_t nr = region.size();
    std::vector<bool> edge_is_trace(nr, false);
    for (std::size_t k = 0; k < nr; ++k) {
        const Vec2& p = region[k];
        const Vec2& q = region[(k + 1) % nr];
        edge_is_trace[k] = domain.leading_edge.has_value() &&
                           std::abs(domain.leading_edge_side(p)) <= tol &&
                           std::abs(domain.leading_edge_side(q)) <= tol;
    }
    for (std::size_t k = 0; k < nr; ++k) {
        if (edge_is_trace[k]) continue;
        const Vec2& p = region[k];
        const Vec2& q = region[(k + 1) % nr];
        find_or_add_node(gs.nodes, p, tol);
        find_or_add_node(gs.nodes, q, tol);
    }
    for (std::size_t k = 0; k < nr; ++k) {
        if (edge_is_trace[k]) continue;
        const Vec2& p = region[k];
        const Vec2& q = region[(k + 1) % nr];
        const Vec2 d = q - p;
        std::vector<std::pair<double, int>> on_edge;
        for (std::size_t i = 0; i < gs.nodes.size(); ++i) {
            if (distance_to_segment(gs.nodes[i].pos, p, q) <= tol) {
                on_edge.emplace_back((gs.nodes[i].pos - p).dot(d) / d.squaredNorm(), static_cast<int>(i));
            }
        }
        std::sort(on_edge.begin(), on_edge.end());
        for (std::size_t m = 0; m + 1 < on_edge.size(); ++m) {
            const int a = on_edge[m].second;
            const int b = on_edge[m + 1].second;
            if (a == b) continue;
            if (pairs.insert(std::minmax(a, b)).second) {
                gs.stiffeners.push_back({a, b, boundary_t, true});
            }
        }
        for (Stiffener& s : gs.stiffeners) {
            if (distance_to_segment(gs.nodes[static_cast<std::size_t>(s.node_a)].pos, p, q) <= tol &&
                distance_to_segment(gs.nodes[static_cast<std::size_t>(s.node_b)].pos, p, q) <= tol) {
                s.boundary = true;
                s.t = boundary_t;
            }
        }
    }
    for (DrivingNode& n : gs.nodes) {
        if (distance_to_polygon_boundary(n.pos, region) <= tol) n.movable = false;
    }
    if (gs.stiffeners.empty()) throw ConfigError("ground structure is empty after clipping");
    return gs;
}

}  // namespace rudder
