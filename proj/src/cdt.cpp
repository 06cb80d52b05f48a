#include "rudder/cdt.hpp"

#include "rudder/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <string>
#include <utility>

namespace rudder::cdt {

namespace {

inline int next3(int i) { return i == 2 ? 0 : i + 1; }
inline int prev3(int i) { return i == 0 ? 2 : i - 1; }

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

// Positive when d lies inside the circumcircle of the counter-clockwise a, b, c.
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double adx = a.x() - d.x(), ady = a.y() - d.y();
    const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
    const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
    const double ad = adx * adx + ady * ady;
    const double bd = bdx * bdx + bdy * bdy;
    const double cd = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

class Builder {
public:
    Builder(const std::vector<Vec2>& input) : n_input_(static_cast<int>(input.size())) {
        pts_ = input;
        Vec2 lo = input.front();
        Vec2 hi = input.front();
        for (const Vec2& p : input) {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
        }
        const Vec2 c = 0.5 * (lo + hi);
        scale_ = std::max((hi - lo).maxCoeff(), 1e-12);
        const double m = 50.0 * scale_;
        pts_.emplace_back(c.x() - m, c.y() - m);
        pts_.emplace_back(c.x() + m, c.y() - m);
        pts_.emplace_back(c.x(), c.y() + m);
        v2t_.assign(pts_.size(), -1);
        alias_.resize(input.size());
        for (int i = 0; i < n_input_; ++i) alias_[static_cast<std::size_t>(i)] = i;
        add_triangle({n_input_, n_input_ + 1, n_input_ + 2}, {-1, -1, -1});
    }

    void insert_all() {
        for (int i = 0; i < n_input_; ++i) insert_point(i);
    }

    void insert_constraint(int a, int b, int edge_id) {
        a = alias_[static_cast<std::size_t>(a)];
        b = alias_[static_cast<std::size_t>(b)];
        if (a == b) return;
        if (find_edge(a, b).first >= 0) {
            constrained_.insert(std::minmax(a, b));
            return;
        }
        std::deque<std::pair<int, int>> crossing = crossing_edges(a, b, edge_id);
        std::vector<std::pair<int, int>> created;
        std::size_t stall = 0;
        while (!crossing.empty()) {
            const auto [u, w] = crossing.front();
            crossing.pop_front();
            const auto [t, i] = find_edge(u, w);
            if (t < 0) throw MeshingError("constraint recovery lost an edge (segment " + std::to_string(edge_id) + ")");
            const int p = tri_[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
            const int n = nbr_[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
            const int q = opposite_vertex(n, t);
            const bool convex = strictly_crosses(p, q, u, w);
            if (!convex) {
                crossing.emplace_back(u, w);
                if (++stall > 4 * crossing.size() + 64) {
                    throw MeshingError("constraint recovery stalled on segment " + std::to_string(edge_id));
                }
                continue;
            }
            stall = 0;
            flip(t, i);
            const bool shares = p == a || p == b || q == a || q == b;
            const double op = orient(pts_[static_cast<std::size_t>(a)], pts_[static_cast<std::size_t>(b)], pts_[static_cast<std::size_t>(p)]);
            const double oq = orient(pts_[static_cast<std::size_t>(a)], pts_[static_cast<std::size_t>(b)], pts_[static_cast<std::size_t>(q)]);
            if (!shares && ((op > 0.0 && oq < 0.0) || (op < 0.0 && oq > 0.0))) {
                crossing.emplace_back(p, q);
            } else {
                created.emplace_back(p, q);
            }
        }
        constrained_.insert(std::minmax(a, b));
        restore_delaunay(created, a, b);
    }

    Triangulation result() const {
        Triangulation out;
        for (std::size_t t = 0; t < tri_.size(); ++t) {
            const auto& v = tri_[t];
            if (v[0] >= n_input_ || v[1] >= n_input_ || v[2] >= n_input_) continue;
            out.triangles.push_back(v);
        }
        return out;
    }

private:
    int add_triangle(std::array<int, 3> v, std::array<int, 3> nb) {
        tri_.push_back(v);
        nbr_.push_back(nb);
        const int t = static_cast<int>(tri_.size()) - 1;
        for (int k : v) v2t_[static_cast<std::size_t>(k)] = t;
        return t;
    }

    void set_triangle(int t, std::array<int, 3> v, std::array<int, 3> nb) {
        tri_[static_cast<std::size_t>(t)] = v;
        nbr_[static_cast<std::size_t>(t)] = nb;
        for (int k : v) v2t_[static_cast<std::size_t>(k)] = t;
    }

    void replace_neighbor(int t, int old_nb, int new_nb) {
        if (t < 0) return;
        auto& nb = nbr_[static_cast<std::size_t>(t)];
        for (int& k : nb) {
            if (k == old_nb) {
                k = new_nb;
                return;
            }
        }
    }

    int index_of(int t, int v) const {
        const auto& tv = tri_[static_cast<std::size_t>(t)];
        for (int k = 0; k < 3; ++k) {
            if (tv[static_cast<std::size_t>(k)] == v) return k;
        }
        return -1;
    }

    int opposite_vertex(int n, int t) const {
        const auto& nb = nbr_[static_cast<std::size_t>(n)];
        for (int k = 0; k < 3; ++k) {
            if (nb[static_cast<std::size_t>(k)] == t) return tri_[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
        }
        throw MeshingError("triangulation adjacency is inconsistent");
    }

    const Vec2& P(int i) const { return pts_[static_cast<std::size_t>(i)]; }

    bool strictly_crosses(int p, int q, int u, int w) const {
        const double o1 = orient(P(p), P(q), P(u));
        const double o2 = orient(P(p), P(q), P(w));
        const double o3 = orient(P(u), P(w), P(p));
        const double o4 = orient(P(u), P(w), P(q));
        return ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) &&
               ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0));
    }

    // Locates p; returns (triangle, edge index) where edge index >= 0 means p
    // lies on the edge opposite that vertex.
    std::pair<int, int> locate(const Vec2& p) {
        int t = last_;
        const double on_tol = 1e-11 * scale_;
        for (std::size_t steps = 0; steps < 4 * tri_.size() + 16; ++steps) {
            const auto& v = tri_[static_cast<std::size_t>(t)];
            bool moved = false;
            const int start = static_cast<int>(steps % 3);
            for (int kk = 0; kk < 3; ++kk) {
                const int k = (start + kk) % 3;
                const Vec2& a = P(v[static_cast<std::size_t>(next3(k))]);
                const Vec2& b = P(v[static_cast<std::size_t>(prev3(k))]);
                const double o = orient(a, b, p) / std::max((b - a).norm(), 1e-300);
                if (o < -on_tol) {
                    const int n = nbr_[static_cast<std::size_t>(t)][static_cast<std::size_t>(k)];
                    if (n < 0) throw MeshingError("point outside the triangulation hull");
                    t = n;
                    moved = true;
                    break;
                }
            }
            if (moved) continue;
            for (int k = 0; k < 3; ++k) {
                const Vec2& a = P(v[static_cast<std::size_t>(next3(k))]);
                const Vec2& b = P(v[static_cast<std::size_t>(prev3(k))]);
                const double o = orient(a, b, p) / std::max((b - a).norm(), 1e-300);
                if (std::abs(o) <= on_tol) return {t, k};
            }
            return {t, -1};
        }
        throw MeshingError("point location did not terminate");
    }

    void insert_point(int pi) {
        const Vec2& p = P(pi);
        const auto [t, edge] = locate(p);
        const auto& v = tri_[static_cast<std::size_t>(t)];
        for (int k : v) {
            if ((P(k) - p).norm() <= 1e-12 * scale_) {
                alias_[static_cast<std::size_t>(pi)] = k;
                return;
            }
        }
        if (edge < 0) {
            split_triangle(t, pi);
        } else {
            split_edge(t, edge, pi);
        }
    }

    void split_triangle(int t, int p) {
        const auto v = tri_[static_cast<std::size_t>(t)];
        const auto nb = nbr_[static_cast<std::size_t>(t)];
        const int a = v[0], b = v[1], c = v[2];
        const int na = nb[0], nb_ = nb[1], nc = nb[2];
        const int t1 = add_triangle({b, c, p}, {-1, -1, na});
        const int t2 = add_triangle({c, a, p}, {-1, -1, nb_});
        set_triangle(t, {a, b, p}, {t1, t2, nc});
        nbr_[static_cast<std::size_t>(t1)] = {t2, t, na};
        nbr_[static_cast<std::size_t>(t2)] = {t, t1, nb_};
        replace_neighbor(na, t, t1);
        replace_neighbor(nb_, t, t2);
        last_ = t;
        legalize(t, p);
        legalize(t1, p);
        legalize(t2, p);
    }

    void split_edge(int t, int i, int p) {
        const auto v = tri_[static_cast<std::size_t>(t)];
        const auto nbt = nbr_[static_cast<std::size_t>(t)];
        const int a = v[static_cast<std::size_t>(i)];
        const int u = v[static_cast<std::size_t>(next3(i))];
        const int w = v[static_cast<std::size_t>(prev3(i))];
        const int n = nbt[static_cast<std::size_t>(i)];
        const int x_wa = nbt[static_cast<std::size_t>(next3(i))];
        const int x_au = nbt[static_cast<std::size_t>(prev3(i))];
        if (n < 0) {
            const int t2 = add_triangle({a, p, w}, {-1, x_wa, t});
            set_triangle(t, {a, u, p}, {-1, t2, x_au});
            replace_neighbor(x_wa, t, t2);
            last_ = t;
            legalize(t, p);
            legalize(t2, p);
            return;
        }
        const int j = index_of(n, opposite_vertex(n, t));
        const auto nbn = nbr_[static_cast<std::size_t>(n)];
        const int b = tri_[static_cast<std::size_t>(n)][static_cast<std::size_t>(j)];
        const int x_ub = nbn[static_cast<std::size_t>(next3(j))];
        const int x_bw = nbn[static_cast<std::size_t>(prev3(j))];
        const int t2 = add_triangle({a, p, w}, {-1, -1, -1});
        const int t4 = add_triangle({b, p, u}, {-1, -1, -1});
        set_triangle(t, {a, u, p}, {t4, t2, x_au});
        nbr_[static_cast<std::size_t>(t2)] = {n, x_wa, t};
        set_triangle(n, {b, w, p}, {t2, t4, x_bw});
        nbr_[static_cast<std::size_t>(t4)] = {t, x_ub, n};
        replace_neighbor(x_wa, t, t2);
        replace_neighbor(x_ub, n, t4);
        if (constrained_.erase(std::minmax(u, w)) > 0) {
            constrained_.insert(std::minmax(u, p));
            constrained_.insert(std::minmax(p, w));
        }
        last_ = t;
        legalize(t, p);
        legalize(t2, p);
        legalize(n, p);
        legalize(t4, p);
    }

    // Flips the edge opposite vertex i of t. Afterwards t and its old
    // neighbour both contain the old opposite vertex of t.
    void flip(int t, int i) {
        const auto vt = tri_[static_cast<std::size_t>(t)];
        const auto nt = nbr_[static_cast<std::size_t>(t)];
        const int p = vt[static_cast<std::size_t>(i)];
        const int a = vt[static_cast<std::size_t>(next3(i))];
        const int b = vt[static_cast<std::size_t>(prev3(i))];
        const int n = nt[static_cast<std::size_t>(i)];
        const int n_bp = nt[static_cast<std::size_t>(next3(i))];
        const int n_pa = nt[static_cast<std::size_t>(prev3(i))];
        const int q = opposite_vertex(n, t);
        const int j = index_of(n, q);
        const auto nn = nbr_[static_cast<std::size_t>(n)];
        const int n_aq = nn[static_cast<std::size_t>(next3(j))];
        const int n_qb = nn[static_cast<std::size_t>(prev3(j))];
        set_triangle(t, {p, a, q}, {n_aq, n, n_pa});
        set_triangle(n, {p, q, b}, {n_qb, n_bp, t});
        replace_neighbor(n_aq, n, t);
        replace_neighbor(n_bp, t, n);
    }

    void legalize(int t0, int p) {
        std::vector<int> stack{t0};
        while (!stack.empty()) {
            const int t = stack.back();
            stack.pop_back();
            const int i = index_of(t, p);
            if (i < 0) continue;
            const int n = nbr_[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
            if (n < 0) continue;
            const auto& v = tri_[static_cast<std::size_t>(t)];
            const int a = v[static_cast<std::size_t>(next3(i))];
            const int b = v[static_cast<std::size_t>(prev3(i))];
            if (constrained_.count(std::minmax(a, b))) continue;
            const int q = opposite_vertex(n, t);
            if (incircle(P(v[0]), P(v[1]), P(v[2]), P(q)) > 0.0) {
                flip(t, i);
                stack.push_back(t);
                stack.push_back(n);
            }
        }
    }

    // (triangle, index of the vertex opposite edge u-w) or (-1, -1).
    std::pair<int, int> find_edge(int u, int w) const {
        const int start = v2t_[static_cast<std::size_t>(u)];
        int t = start;
        for (std::size_t guard = 0; guard < tri_.size() + 4; ++guard) {
            const int iu = index_of(t, u);
            const auto& v = tri_[static_cast<std::size_t>(t)];
            if (v[static_cast<std::size_t>(next3(iu))] == w) return {t, prev3(iu)};
            if (v[static_cast<std::size_t>(prev3(iu))] == w) return {t, next3(iu)};
            t = nbr_[static_cast<std::size_t>(t)][static_cast<std::size_t>(prev3(iu))];
            if (t < 0 || t == start) break;
        }
        if (t < 0) {
            // Hit the hull: walk the other way round.
            t = start;
            for (std::size_t guard = 0; guard < tri_.size() + 4; ++guard) {
                const int iu = index_of(t, u);
                const auto& v = tri_[static_cast<std::size_t>(t)];
                if (v[static_cast<std::size_t>(next3(iu))] == w) return {t, prev3(iu)};
                if (v[static_cast<std::size_t>(prev3(iu))] == w) return {t, next3(iu)};
                t = nbr_[static_cast<std::size_t>(t)][static_cast<std::size_t>(next3(iu))];
                if (t < 0 || t == start) break;
            }
        }
        return {-1, -1};
    }

    std::deque<std::pair<int, int>> crossing_edges(int a, int b, int edge_id) const {
        const std::string where = " (segment " + std::to_string(edge_id) + ")";
        const Vec2& pa = P(a);
        const Vec2& pb = P(b);
        const double len = (pb - pa).norm();
        const double on_tol = 1e-11 * scale_;
        auto side = [&](int v) { return orient(pa, pb, P(v)) / len; };
        auto on_segment = [&](int v) {
            const double s = (P(v) - pa).dot(pb - pa) / (len * len);
            return std::abs(side(v)) <= on_tol && s > 0.0 && s < 1.0;
        };

        // Triangle around a whose opposite edge is crossed by a->b.
        int t = v2t_[static_cast<std::size_t>(a)];
        int left = -1, right = -1;
        for (std::size_t guard = 0; guard < tri_.size() + 4; ++guard) {
            const int ia = index_of(t, a);
            const auto& v = tri_[static_cast<std::size_t>(t)];
            const int v1 = v[static_cast<std::size_t>(next3(ia))];
            const int v2 = v[static_cast<std::size_t>(prev3(ia))];
            if (on_segment(v1) || on_segment(v2)) {
                throw MeshingError("a point lies on a constraint edge" + where);
            }
            if (orient(pa, P(v1), pb) > 0.0 && orient(pa, P(v2), pb) < 0.0) {
                right = v1;
                left = v2;
                break;
            }
            t = nbr_[static_cast<std::size_t>(t)][static_cast<std::size_t>(prev3(ia))];
            if (t < 0) throw MeshingError("constraint starts on the hull" + where);
        }
        if (left < 0) throw MeshingError("could not start constraint recovery" + where);

        std::deque<std::pair<int, int>> out;
        for (std::size_t guard = 0; guard < tri_.size() + 4; ++guard) {
            out.emplace_back(left, right);
            // Step across edge (left, right).
            const int il = index_of(t, left);
            const int ir = index_of(t, right);
            const int opp = 3 - il - ir;
            const int n = nbr_[static_cast<std::size_t>(t)][static_cast<std::size_t>(opp)];
            if (n < 0) throw MeshingError("constraint leaves the triangulation" + where);
            const int q = opposite_vertex(n, t);
            t = n;
            if (q == b) return out;
            if (on_segment(q)) throw MeshingError("a point lies on a constraint edge" + where);
            if (side(q) > 0.0) {
                left = q;
            } else {
                right = q;
            }
        }
        throw MeshingError("constraint walk did not terminate" + where);
    }

    void restore_delaunay(std::vector<std::pair<int, int>>& edges, int a, int b) {
        bool changed = true;
        std::size_t rounds = 0;
        while (changed && rounds++ < 64) {
            changed = false;
            for (auto& e : edges) {
                if (std::minmax(e.first, e.second) == std::minmax(a, b)) continue;
                if (constrained_.count(std::minmax(e.first, e.second))) continue;
                const auto [t, i] = find_edge(e.first, e.second);
                if (t < 0) continue;
                const int n = nbr_[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
                if (n < 0) continue;
                const auto& v = tri_[static_cast<std::size_t>(t)];
                const int p = v[static_cast<std::size_t>(i)];
                const int q = opposite_vertex(n, t);
                if (incircle(P(v[0]), P(v[1]), P(v[2]), P(q)) > 0.0 &&
                    strictly_crosses(p, q, e.first, e.second)) {
                    flip(t, i);
                    e = {p, q};
                    changed = true;
                }
            }
        }
    }

    int n_input_;
    double scale_ = 1.0;
    std::vector<Vec2> pts_;
    std::vector<std::array<int, 3>> tri_;
    std::vector<std::array<int, 3>> nbr_;
    std::vector<int> v2t_;
    std::vector<int> alias_;
    std::set<std::pair<int, int>> constrained_;
    int last_ = 0;

public:
    int alias(int i) const { return alias_[static_cast<std::size_t>(i)]; }
};

}  // namespace

Triangulation constrained_delaunay(const std::vector<Vec2>& points,
                                   const std::vector<std::array<int, 2>>& constraints) {
    if (points.size() < 3) throw MeshingError("triangulation needs at least three points");
    Builder builder(points);
    builder.insert_all();
    for (std::size_t e = 0; e < constraints.size(); ++e) {
        builder.insert_constraint(constraints[e][0], constraints[e][1], static_cast<int>(e));
    }
    return builder.result();
}

}  // namespace rudder::cdt
