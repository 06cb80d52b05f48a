#include "rudder/meshing.hpp"

#include "rudder/cdt.hpp"
#include "rudder/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>

namespace rudder {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Owner codes for planar segments; stiffeners use their own index (>= 0).
constexpr int kOutline = -1;
constexpr int kTrace = -2;
constexpr int kShaft = -3;

struct InputSegment {
    int p = -1;
    int q = -1;
    int owner = 0;
    std::vector<std::pair<double, int>> splits;
};

class PointStore {
public:
    explicit PointStore(double snap) : snap_(snap) {}

    int add(const Vec2& p) {
        for (std::size_t i = 0; i < pts_.size(); ++i) {
            if ((pts_[i] - p).norm() <= snap_) return static_cast<int>(i);
        }
        return append(p);
    }

    int append(const Vec2& p) {
        pts_.push_back(p);
        return static_cast<int>(pts_.size()) - 1;
    }

    const Vec2& operator[](int i) const { return pts_[static_cast<std::size_t>(i)]; }
    std::vector<Vec2>& all() { return pts_; }

private:
    double snap_;
    std::vector<Vec2> pts_;
};

// Orders the chain edges carrying one owner into polylines, starting each from
// the free end nearest to `start`.
std::vector<std::vector<int>> chain_polylines(const std::vector<std::pair<int, int>>& edges,
                                              const std::vector<Vec2>& pts, const Vec2& start) {
    std::map<int, std::vector<int>> adj;
    for (const auto& [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    std::set<std::pair<int, int>> used;
    std::vector<std::vector<int>> lines;
    while (used.size() < edges.size()) {
        int first = -1;
        double best = std::numeric_limits<double>::infinity();
        for (const auto& [v, nb] : adj) {
            bool has_free = false;
            for (int w : nb) has_free = has_free || !used.count(std::minmax(v, w));
            if (!has_free) continue;
            const bool end = nb.size() != 2;
            const double d = (pts[static_cast<std::size_t>(v)] - start).norm() - (end ? 1e300 : 0.0);
            if (d < best) {
                best = d;
                first = v;
            }
        }
        if (first < 0) break;
        std::vector<int> line{first};
        int cur = first;
        for (;;) {
            int next = -1;
            for (int w : adj[cur]) {
                if (!used.count(std::minmax(cur, w))) {
                    next = w;
                    break;
                }
            }
            if (next < 0) break;
            used.insert(std::minmax(cur, next));
            line.push_back(next);
            cur = next;
        }
        lines.push_back(std::move(line));
    }
    return lines;
}

}  // namespace

double MeshParams::resolved_h(const PlanformDomain& domain) const {
    return h_target > 0.0 ? h_target : domain.characteristic_length() / 40.0;
}

std::string part_name(const PartTag& tag) {
    switch (tag.kind) {
        case PartKind::skin_upper: return "skin-upper";
        case PartKind::skin_lower: return "skin-lower";
        case PartKind::leading_edge: return "leading-edge";
        case PartKind::shaft_collar: return "shaft-collar";
        case PartKind::stiffener: return "stiffener " + std::to_string(tag.stiffener);
    }
    return "unknown";
}

ReferenceMesh build_reference_mesh(const PlanformDomain& domain, const GroundStructure& gs,
                                   const MeshParams& params) {
    const double h = params.resolved_h(domain);
    if (!(h > 0.0)) throw MeshingError("mesh size must be positive");
    const double snap = 0.05 * h;
    const double on_tol = 1e-6 * h;
    const auto region = domain.design_region();

    ReferenceMesh ref;
    ref.h = h;
    ref.active.assign(gs.stiffeners.size(), 0);
    ref.stiffener_traces.assign(gs.stiffeners.size(), {});

    PointStore store(snap);
    std::vector<InputSegment> segs;
    auto add_seg = [&](int p, int q, int owner) {
        if (p != q) segs.push_back({p, q, owner, {}});
    };

    // Planform outline.
    std::vector<int> outline_ids;
    for (const Vec2& v : domain.outline) outline_ids.push_back(store.add(v));
    for (std::size_t k = 0; k < outline_ids.size(); ++k) {
        add_seg(outline_ids[k], outline_ids[(k + 1) % outline_ids.size()], kOutline);
    }

    // Leading-edge trace: design-region edges lying on the trace.
    if (domain.leading_edge) {
        const double tol = domain.tolerance();
        for (std::size_t k = 0; k < region.size(); ++k) {
            const Vec2& p = region[k];
            const Vec2& q = region[(k + 1) % region.size()];
            if (std::abs(domain.leading_edge_side(p)) <= tol && std::abs(domain.leading_edge_side(q)) <= tol) {
                add_seg(store.add(p), store.add(q), kTrace);
            }
        }
    }

    // Stiffeners (too-short ones are left out for this iteration).
    for (std::size_t i = 0; i < gs.stiffeners.size(); ++i) {
        const Skeleton sk = skeleton_of(gs, static_cast<int>(i));
        if (stiffener_length(sk) < params.min_length_factor * h) continue;
        ref.active[i] = 1;
    }

    // Shaft circle, polygonized through every stiffener endpoint lying on it.
    {
        const Circle& c = domain.shaft;
        const int nseg = std::max(12, static_cast<int>(std::ceil(2.0 * kPi * c.radius / h)));
        const double dth = 2.0 * kPi / nseg;
        std::vector<double> pinned;
        for (std::size_t i = 0; i < gs.stiffeners.size(); ++i) {
            if (!ref.active[i]) continue;
            for (int nid : {gs.stiffeners[i].node_a, gs.stiffeners[i].node_b}) {
                const Vec2 d = gs.nodes[static_cast<std::size_t>(nid)].pos - c.center;
                if (std::abs(d.norm() - c.radius) <= 1e-6 * c.radius) {
                    double th = std::atan2(d.y(), d.x());
                    if (th < 0.0) th += 2.0 * kPi;
                    pinned.push_back(th);
                }
            }
        }
        std::vector<std::pair<double, Vec2>> ring;
        for (double th : pinned) {
            ring.emplace_back(th, c.center + c.radius * Vec2(std::cos(th), std::sin(th)));
        }
        for (int k = 0; k < nseg; ++k) {
            const double th = k * dth;
            bool near = false;
            for (double p : pinned) {
                double d = std::abs(th - p);
                d = std::min(d, 2.0 * kPi - d);
                near = near || d < 0.35 * dth;
            }
            if (!near) ring.emplace_back(th, c.center + c.radius * Vec2(std::cos(th), std::sin(th)));
        }
        std::sort(ring.begin(), ring.end(), [](const auto& l, const auto& r) { return l.first < r.first; });
        std::vector<int> ids;
        for (const auto& [th, p] : ring) {
            const int id = store.add(p);
            if (ids.empty() || ids.back() != id) ids.push_back(id);
        }
        while (ids.size() > 1 && ids.front() == ids.back()) ids.pop_back();
        if (ids.size() < 3) throw MeshingError("shaft circle polygonization degenerated");
        for (std::size_t k = 0; k < ids.size(); ++k) add_seg(ids[k], ids[(k + 1) % ids.size()], kShaft);
    }

    for (std::size_t i = 0; i < gs.stiffeners.size(); ++i) {
        if (!ref.active[i]) continue;
        const Stiffener& s = gs.stiffeners[i];
        const int p = store.add(gs.nodes[static_cast<std::size_t>(s.node_a)].pos);
        const int q = store.add(gs.nodes[static_cast<std::size_t>(s.node_b)].pos);
        if (p == q) {
            ref.active[i] = 0;
            continue;
        }
        add_seg(p, q, static_cast<int>(i));
    }

    // Split every segment at crossings and at endpoints of others lying on it.
    for (std::size_t i = 0; i < segs.size(); ++i) {
        for (std::size_t j = i + 1; j < segs.size(); ++j) {
            InputSegment& A = segs[i];
            InputSegment& B = segs[j];
            const Vec2 a0 = store[A.p], a1 = store[A.q];
            const Vec2 b0 = store[B.p], b1 = store[B.q];
            const Vec2 da = a1 - a0, db = b1 - b0;
            const double la = da.norm(), lb = db.norm();
            auto on = [&](const Vec2& x, const Vec2& s0, const Vec2& d, double l, double& param) {
                param = (x - s0).dot(d) / (l * l);
                return param > 0.0 && param < 1.0 && distance_to_segment(x, s0, s0 + d) <= on_tol;
            };
            double prm = 0.0;
            bool touched = false;
            for (int e : {B.p, B.q}) {
                if (e != A.p && e != A.q && on(store[e], a0, da, la, prm)) {
                    A.splits.emplace_back(prm, e);
                    touched = true;
                }
            }
            for (int e : {A.p, A.q}) {
                if (e != B.p && e != B.q && on(store[e], b0, db, lb, prm)) {
                    B.splits.emplace_back(prm, e);
                    touched = true;
                }
            }
            if (touched) continue;
            if (A.p == B.p || A.p == B.q || A.q == B.p || A.q == B.q) continue;
            const double denom = cross2(da, db);
            if (std::abs(denom) <= 1e-12 * la * lb) continue;
            const double s = cross2(b0 - a0, db) / denom;
            const double u = cross2(b0 - a0, da) / denom;
            if (s <= 0.0 || s >= 1.0 || u <= 0.0 || u >= 1.0) continue;
            const int x = store.add(a0 + s * da);
            if (x != A.p && x != A.q) A.splits.emplace_back((store[x] - a0).dot(da) / (la * la), x);
            if (x != B.p && x != B.q) B.splits.emplace_back((store[x] - b0).dot(db) / (lb * lb), x);
        }
    }

    std::map<std::pair<int, int>, std::set<int>> pieces;
    for (InputSegment& s : segs) {
        auto splits = s.splits;
        splits.emplace_back(0.0, s.p);
        splits.emplace_back(1.0, s.q);
        std::sort(splits.begin(), splits.end());
        std::vector<int> chain;
        for (const auto& [t, id] : splits) {
            if (std::find(chain.begin(), chain.end(), id) == chain.end()) chain.push_back(id);
        }
        for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
            pieces[std::minmax(chain[k], chain[k + 1])].insert(s.owner);
        }
    }

    // Subdivide atomic pieces to spacing <= 1.01 h. The slack keeps the piece
    // count constant around lengths that are exact multiples of h, which grid
    // layouts hit all the time.
    std::vector<std::array<int, 2>> constraints;
    std::map<int, std::vector<std::pair<int, int>>> owner_edges;
    std::vector<std::pair<Vec2, Vec2>> constraint_geom;
    for (const auto& [key, owners] : pieces) {
        const Vec2 a = store[key.first];
        const Vec2 b = store[key.second];
        const int m = std::max(1, static_cast<int>(std::ceil((b - a).norm() / h - 0.01)));
        std::vector<int> chain{key.first};
        for (int k = 1; k < m; ++k) chain.push_back(store.append(a + (b - a) * (static_cast<double>(k) / m)));
        chain.push_back(key.second);
        for (std::size_t k = 0; k + 1 < chain.size(); ++k) {
            constraints.push_back({chain[k], chain[k + 1]});
            for (int o : owners) owner_edges[o].emplace_back(chain[k], chain[k + 1]);
        }
        constraint_geom.emplace_back(a, b);
    }

    // Shaft loop polygon used for classification.
    std::vector<Vec2> shaft_poly;
    {
        std::vector<std::pair<double, int>> loop;
        std::set<int> seen;
        for (const auto& [a, b] : owner_edges[kShaft]) {
            for (int v : {a, b}) {
                if (!seen.insert(v).second) continue;
                const Vec2 d = store[v] - domain.shaft.center;
                loop.emplace_back(std::atan2(d.y(), d.x()), v);
            }
        }
        std::sort(loop.begin(), loop.end());
        for (const auto& [th, v] : loop) {
            ref.shaft_loop.push_back(v);
            shaft_poly.push_back(store[v]);
        }
    }

    // Interior Steiner points on a triangular lattice.
    {
        Vec2 lo = domain.outline.front(), hi = domain.outline.front();
        for (const Vec2& v : domain.outline) {
            lo = lo.cwiseMin(v);
            hi = hi.cwiseMax(v);
        }
        const double dy = h * std::sqrt(3.0) / 2.0;
        const double clear = 0.5 * h;
        for (int j = 0;; ++j) {
            const double y = lo.y() + (j + 0.5) * dy;
            if (y >= hi.y()) break;
            const double x0 = lo.x() + ((j % 2) ? 0.5 * h : 0.0) + 0.25 * h;
            for (double x = x0; x < hi.x(); x += h) {
                const Vec2 p(x, y);
                if (!point_in_polygon(p, domain.outline)) continue;
                if ((p - domain.shaft.center).norm() <= domain.shaft.radius + clear) continue;
                bool ok = true;
                for (const auto& [a, b] : constraint_geom) {
                    if (distance_to_segment(p, a, b) < clear) {
                        ok = false;
                        break;
                    }
                }
                if (ok) store.append(p);
            }
        }
    }

    const auto& pts = store.all();
    cdt::Triangulation tri;
    try {
        tri = cdt::constrained_delaunay(pts, constraints);
    } catch (const MeshingError& e) {
        std::string ids;
        for (std::size_t i = 0; i < gs.stiffeners.size(); ++i) {
            if (ref.active[i]) ids += (ids.empty() ? "" : ",") + std::to_string(i);
        }
        throw MeshingError(std::string(e.what()) + "; active stiffeners: " + ids);
    }

    std::vector<int> used(pts.size(), -1);
    std::vector<std::array<int, 3>> kept;
    std::vector<char> le_zone;
    for (const auto& t : tri.triangles) {
        const Vec2 c = (pts[static_cast<std::size_t>(t[0])] + pts[static_cast<std::size_t>(t[1])] +
                        pts[static_cast<std::size_t>(t[2])]) / 3.0;
        if (!point_in_polygon(c, domain.outline)) continue;
        if (point_in_polygon(c, shaft_poly)) continue;
        kept.push_back(t);
        le_zone.push_back(domain.leading_edge && domain.leading_edge_side(c) > 0.0 ? 1 : 0);
    }
    // Compact point numbering to the points actually referenced.
    for (const auto& t : kept) {
        for (int v : t) used[static_cast<std::size_t>(v)] = 0;
    }
    int next = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (used[i] == 0) {
            used[i] = next++;
            ref.points.push_back(pts[i]);
        }
    }
    auto remap = [&](int v) {
        const int r = used[static_cast<std::size_t>(v)];
        if (r < 0) throw MeshingError("constraint point missing from the triangulation");
        return r;
    };
    for (const auto& t : kept) ref.triangles.push_back({remap(t[0]), remap(t[1]), remap(t[2])});
    ref.leading_edge_zone = le_zone;
    for (int& v : ref.shaft_loop) v = remap(v);

    for (std::size_t i = 0; i < gs.stiffeners.size(); ++i) {
        if (!ref.active[i]) continue;
        const Vec2 start = gs.nodes[static_cast<std::size_t>(gs.stiffeners[i].node_a)].pos;
        const auto lines = chain_polylines(owner_edges[static_cast<int>(i)], pts, start);
        if (lines.size() != 1) {
            throw MeshingError("stiffener " + std::to_string(i) + " trace is not a single polyline");
        }
        for (int v : lines.front()) ref.stiffener_traces[i].push_back(remap(v));
    }
    if (owner_edges.count(kTrace)) {
        for (const auto& line : chain_polylines(owner_edges[kTrace], pts, pts.front())) {
            std::vector<int> mapped;
            for (int v : line) mapped.push_back(remap(v));
            ref.leading_edge_traces.push_back(std::move(mapped));
        }
    }
    (void)kOutline;
    return ref;
}

ShellMesh extrude_and_lift(const ReferenceMesh& ref, const PlanformDomain& domain,
                           const GroundStructure& gs, int n_layers) {
    if (n_layers < 1) throw MeshingError("n_layers must be at least 1");
    ShellMesh mesh;
    mesh.n_layers = n_layers;
    mesh.parts = {{PartKind::skin_upper, -1},
                  {PartKind::skin_lower, -1},
                  {PartKind::leading_edge, -1},
                  {PartKind::shaft_collar, -1}};
    for (std::size_t i = 0; i < gs.stiffeners.size(); ++i) {
        mesh.parts.push_back({PartKind::stiffener, static_cast<int>(i)});
    }
    mesh.stiffener_elements.assign(gs.stiffeners.size(), {});

    const std::size_t np = ref.points.size();
    std::vector<int> upper(np), lower(np);
    for (std::size_t i = 0; i < np; ++i) {
        const Vec2& p = ref.points[i];
        const double zu = domain.skin_z(Side::upper, p);
        const double zl = domain.skin_z(Side::lower, p);
        if (!(zu > 0.0) || !(zl < 0.0)) throw GeometryError("non-positive local height in the planform");
        upper[i] = static_cast<int>(mesh.nodes.size());
        mesh.nodes.emplace_back(p.x(), p.y(), zu);
        lower[i] = static_cast<int>(mesh.nodes.size());
        mesh.nodes.emplace_back(p.x(), p.y(), zl);
    }

    for (std::size_t t = 0; t < ref.triangles.size(); ++t) {
        const auto& tr = ref.triangles[t];
        const bool le = !ref.leading_edge_zone.empty() && ref.leading_edge_zone[t];
        MeshElement up;
        up.nodes = {upper[static_cast<std::size_t>(tr[0])], upper[static_cast<std::size_t>(tr[1])],
                    upper[static_cast<std::size_t>(tr[2])], -1};
        up.count = 3;
        up.part = ShellMesh::kUpper;
        up.leading_edge_zone = le;
        mesh.elements.push_back(up);
        MeshElement lo;
        lo.nodes = {lower[static_cast<std::size_t>(tr[0])], lower[static_cast<std::size_t>(tr[2])],
                    lower[static_cast<std::size_t>(tr[1])], -1};
        lo.count = 3;
        lo.part = ShellMesh::kLower;
        lo.leading_edge_zone = le;
        mesh.elements.push_back(lo);
    }

    // Through-height columns, shared by every strip passing through a point.
    std::map<int, std::vector<int>> columns;
    auto column = [&](int p) -> const std::vector<int>& {
        auto it = columns.find(p);
        if (it != columns.end()) return it->second;
        const Vec2& xy = ref.points[static_cast<std::size_t>(p)];
        const double zu = domain.skin_z(Side::upper, xy);
        const double zl = domain.skin_z(Side::lower, xy);
        std::vector<int> col(static_cast<std::size_t>(2 * n_layers + 1));
        for (int j = 0; j <= 2 * n_layers; ++j) {
            if (j == 0) {
                col[0] = lower[static_cast<std::size_t>(p)];
            } else if (j == 2 * n_layers) {
                col[static_cast<std::size_t>(j)] = upper[static_cast<std::size_t>(p)];
            } else {
                const double z = j < n_layers ? zl * (n_layers - j) / n_layers : zu * (j - n_layers) / n_layers;
                col[static_cast<std::size_t>(j)] = static_cast<int>(mesh.nodes.size());
                mesh.nodes.emplace_back(xy.x(), xy.y(), z);
            }
        }
        return columns.emplace(p, std::move(col)).first->second;
    };
    auto strip = [&](const std::vector<int>& trace, int part, bool closed, std::vector<int>* record) {
        const std::size_t n = trace.size();
        const std::size_t segs = closed ? n : n - 1;
        for (std::size_t k = 0; k < segs; ++k) {
            const std::vector<int> c0 = column(trace[k]);
            const std::vector<int> c1 = column(trace[(k + 1) % n]);
            for (int j = 0; j < 2 * n_layers; ++j) {
                MeshElement q;
                q.nodes = {c0[static_cast<std::size_t>(j)], c1[static_cast<std::size_t>(j)],
                           c1[static_cast<std::size_t>(j + 1)], c0[static_cast<std::size_t>(j + 1)]};
                q.count = 4;
                q.part = part;
                if (record) record->push_back(static_cast<int>(mesh.elements.size()));
                mesh.elements.push_back(q);
            }
        }
    };

    for (std::size_t i = 0; i < gs.stiffeners.size(); ++i) {
        if (!ref.active[i]) continue;
        strip(ref.stiffener_traces[i], ShellMesh::stiffener_part(static_cast<int>(i)), false,
              &mesh.stiffener_elements[i]);
    }
    for (const auto& trace : ref.leading_edge_traces) strip(trace, ShellMesh::kLeadingEdge, false, nullptr);
    strip(ref.shaft_loop, ShellMesh::kCollar, true, nullptr);

    std::set<int> fixed;
    for (int p : ref.shaft_loop) {
        for (int v : column(p)) fixed.insert(v);
    }
    mesh.fixed_nodes.assign(fixed.begin(), fixed.end());
    return mesh;
}

MeshQuality mesh_quality(const ShellMesh& mesh) {
    MeshQuality q{std::numeric_limits<double>::infinity(), 0.0};
    auto tri = [&](int a, int b, int c) {
        const Vec3& pa = mesh.nodes[static_cast<std::size_t>(a)];
        const Vec3& pb = mesh.nodes[static_cast<std::size_t>(b)];
        const Vec3& pc = mesh.nodes[static_cast<std::size_t>(c)];
        const double area = 0.5 * (pb - pa).cross(pc - pa).norm();
        const double lmax = std::max({(pb - pa).norm(), (pc - pb).norm(), (pa - pc).norm()});
        q.min_area = std::min(q.min_area, area);
        if (area > 0.0) q.max_aspect = std::max(q.max_aspect, lmax * lmax / (2.0 * area));
        else q.max_aspect = std::numeric_limits<double>::infinity();
        return area;
    };
    for (const MeshElement& e : mesh.elements) {
        if (e.count == 3) {
            tri(e.nodes[0], e.nodes[1], e.nodes[2]);
        } else {
            const double a1 = tri(e.nodes[0], e.nodes[1], e.nodes[2]);
            const double a2 = tri(e.nodes[0], e.nodes[2], e.nodes[3]);
            q.min_area = std::min(q.min_area, a1 + a2);
        }
    }
    return q;
}

}  // namespace rudder
