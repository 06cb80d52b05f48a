#include "rudder/sensitivity.hpp"

#include "rudder/error.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace rudder {

const std::array<TrianglePoint, 6>& dunavant6() {
    static const std::array<TrianglePoint, 6> rule = [] {
        const double a1 = 0.445948490915965, b1 = 1.0 - 2.0 * a1, w1 = 0.223381589678011;
        const double a2 = 0.091576213509771, b2 = 1.0 - 2.0 * a2, w2 = 0.109951743655322;
        return std::array<TrianglePoint, 6>{{{a1, a1, w1}, {b1, a1, w1}, {a1, b1, w1},
                                             {a2, a2, w2}, {b2, a2, w2}, {a2, b2, w2}}};
    }();
    return rule;
}

Eigen::VectorXd GradientSet::flatten(const DesignMap& map) const {
    Eigen::VectorXd g(map.size());
    for (int i = 0; i < map.n_stiffeners; ++i) g(i) = dt[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < map.movable.size(); ++k) {
        const Vec2& d = dnode[static_cast<std::size_t>(map.movable[k])];
        g(map.n_stiffeners + 2 * static_cast<int>(k)) = d.x();
        g(map.n_stiffeners + 2 * static_cast<int>(k) + 1) = d.y();
    }
    return g;
}

namespace {

void check_stamp(const Evaluation& ev, const GroundStructure& gs) {
    bool same = ev.gs.nodes.size() == gs.nodes.size() && ev.gs.stiffeners.size() == gs.stiffeners.size();
    for (std::size_t i = 0; same && i < gs.nodes.size(); ++i) same = ev.gs.nodes[i].pos == gs.nodes[i].pos;
    for (std::size_t i = 0; same && i < gs.stiffeners.size(); ++i) {
        same = ev.gs.stiffeners[i].t == gs.stiffeners[i].t && ev.gs.stiffeners[i].node_a == gs.stiffeners[i].node_a &&
               ev.gs.stiffeners[i].node_b == gs.stiffeners[i].node_b;
    }
    if (!same) throw AnalysisError("stale analysis: mesh and results belong to a different design");
}

// Integrals over the strip of one stiffener for a displacement field U.
struct StripIntegrals {
    double sum_density = 0.0;   // int (d+ + d-) dA
    double diff_alpha = 0.0;    // int 2 (d+ - d-) (1 - eta) dA
    double diff_beta = 0.0;     // int 2 (d+ - d-) eta dA
    double uu = 0.0;            // int u.u dA
    double rotary = 0.0;        // phi_e^T M_rot phi_e
};

StripIntegrals integrate_strip(const FEModel& model, const GroundStructure& gs, int stiffener,
                               const Eigen::VectorXd& U) {
    StripIntegrals out;
    const Skeleton sk = skeleton_of(gs, stiffener);
    const Vec2 d = sk.b - sk.a;
    const double L2 = d.squaredNorm();
    const Vec3 n = stiffener_normal(sk);
    for (int e : model.mesh.stiffener_elements[static_cast<std::size_t>(stiffener)]) {
        const MeshElement& el = model.mesh.elements[static_cast<std::size_t>(e)];
        const Section s = element_section(model, e);
        const auto xe = element_coordinates(model, e);
        const double split_w = el.count == 4 ? 0.5 : 1.0;
        const int nsplit = el.count == 4 ? 4 : 1;
        for (int k = 0; k < nsplit; ++k) {
            const std::array<int, 3> tri = el.count == 4 ? kQuadSplits[static_cast<std::size_t>(k)] : std::array<int, 3>{0, 1, 2};
            const Vec3& x0 = xe[static_cast<std::size_t>(tri[0])];
            const Vec3& x1 = xe[static_cast<std::size_t>(tri[1])];
            const Vec3& x2 = xe[static_cast<std::size_t>(tri[2])];
            const TriangleFrame f = triangle_frame(x0, x1, x2);
            // Fibre z runs along the local normal; map it onto the +n face.
            const int sign = f.R.row(2).dot(n) >= 0.0 ? 1 : -1;
            for (const auto& q : dunavant6()) {
                const double wA = split_w * q.w * f.area;
                const StrainState st = element_strain(model, e, tri, U, q.xi, q.eta);
                const double dp = fiber_energy_density(st, s, sign);
                const double dm = fiber_energy_density(st, s, -sign);
                const Vec3 p = (1.0 - q.xi - q.eta) * x0 + q.xi * x1 + q.eta * x2;
                const double eta = std::clamp((Vec2(p.x(), p.y()) - sk.a).dot(d) / L2, 0.0, 1.0);
                out.sum_density += (dp + dm) * wA;
                out.diff_alpha += 2.0 * (dp - dm) * (1.0 - eta) * wA;
                out.diff_beta += 2.0 * (dp - dm) * eta * wA;
                out.uu += kinetic_density(model, e, tri, U, q.xi, q.eta) / s.rho * wA;
            }
        }
        const auto dofs = element_dofs(model, e);
        Eigen::VectorXd ue(static_cast<Eigen::Index>(dofs.size()));
        for (std::size_t i = 0; i < dofs.size(); ++i) ue(static_cast<Eigen::Index>(i)) = U(dofs[i]);
        out.rotary += ue.dot(element_matrices(xe, s).mass_rotation * ue);
    }
    return out;
}

// The base model with its nodes moved to where a fresh mesh of `gs` puts
// them. Delaunay ties may flip skin diagonals between nearby designs while the
// node set and numbering stay put; the base connectivity is kept so the mesh
// map stays differentiable. Empty when the node set itself changes.
std::optional<FEModel> moved_model(const Problem& problem, const FEModel& base, const GroundStructure& gs,
                                   double delta) {
    const ReferenceMesh ref = build_reference_mesh(problem.domain, gs, problem.mesh);
    ShellMesh fresh = extrude_and_lift(ref, problem.domain, gs, problem.mesh.n_layers);
    if (fresh.nodes.size() != base.mesh.nodes.size() || fresh.fixed_nodes != base.mesh.fixed_nodes) return std::nullopt;
    for (std::size_t i = 0; i < fresh.nodes.size(); ++i) {
        if ((fresh.nodes[i] - base.mesh.nodes[i]).norm() > 1e3 * delta) return std::nullopt;
    }
    ShellMesh mesh = base.mesh;
    mesh.nodes = std::move(fresh.nodes);
    FEModel m = apply_bcs_and_loads(std::move(mesh), problem.domain, gs, problem.setup);
    if (m.fixed != base.fixed) return std::nullopt;
    return m;
}

// u_e^T (K_e - lambda M_e) u_e with the element placed at the nodes of `mesh`.
double element_form(const FEModel& base, const ShellMesh& mesh, int e, const Eigen::VectorXd& U, double lambda) {
    const MeshElement& el = mesh.elements[static_cast<std::size_t>(e)];
    std::vector<Vec3> x;
    for (int a = 0; a < el.count; ++a) x.push_back(mesh.nodes[static_cast<std::size_t>(el.nodes[static_cast<std::size_t>(a)])]);
    const auto dofs = element_dofs(base, e);
    Eigen::VectorXd ue(static_cast<Eigen::Index>(dofs.size()));
    for (std::size_t i = 0; i < dofs.size(); ++i) ue(static_cast<Eigen::Index>(i)) = U(dofs[i]);
    const ElementMatrices em = element_matrices(x, element_section(base, e));
    double v = ue.dot(em.stiffness() * ue);
    if (lambda != 0.0) v -= lambda * ue.dot(em.mass() * ue);
    return v;
}

// Derivative of the discrete response along the mesh velocity of every
// movable node coordinate. The velocity field is the derivative of the mesh
// map at fixed topology, taken from meshes of the design nudged by +-delta.
// With `with_load` the result is d(F^T U) = 2 dF^T U - U^T dK U; otherwise
// phi^T (dK - lambda dM) phi.
std::vector<Vec2> domain_shape_gradient(const Evaluation& ev, const Problem& problem, const GroundStructure& gs,
                                        const Eigen::VectorXd& U, double lambda, bool with_load, int& fallbacks) {
    std::vector<Vec2> out(gs.nodes.size(), Vec2::Zero());
    const DesignMap map(gs);
    const FEModel& base = ev.model;
    for (std::size_t n = 0; n < gs.nodes.size(); ++n) {
        if (!gs.nodes[n].movable) continue;
        for (int c = 0; c < 2; ++c) {
            double delta = 1e-6 * problem.domain.characteristic_length();
            double value = 0.0;
            bool done = false;
            for (int attempt = 0; attempt < 4 && !done; ++attempt, delta *= 0.1) {
                std::array<std::optional<FEModel>, 2> side;
                for (int s = 0; s < 2; ++s) {
                    GroundStructure p = gs;
                    p.nodes[n].pos(c) += s == 0 ? delta : -delta;
                    side[static_cast<std::size_t>(s)] = moved_model(problem, base, p, delta);
                }
                if (!side[0] && !side[1]) continue;
                // Central difference of the mesh map when both sides keep the
                // topology, one-sided otherwise.
                const FEModel& plus = side[0] ? *side[0] : base;
                const FEModel& minus = side[1] ? *side[1] : base;
                const double span = (side[0] ? delta : 0.0) + (side[1] ? delta : 0.0);
                double acc = 0.0;
                for (int e = 0; e < static_cast<int>(base.mesh.elements.size()); ++e) {
                    const MeshElement& el = base.mesh.elements[static_cast<std::size_t>(e)];
                    bool moved = false;
                    for (int a = 0; a < el.count && !moved; ++a) {
                        const auto id = static_cast<std::size_t>(el.nodes[static_cast<std::size_t>(a)]);
                        moved = plus.mesh.nodes[id] != minus.mesh.nodes[id];
                    }
                    if (!moved) continue;
                    // Element properties stay those of the analysed design.
                    acc += (element_form(base, plus.mesh, e, U, lambda) - element_form(base, minus.mesh, e, U, lambda)) / span;
                }
                value = with_load ? 2.0 * (plus.load - minus.load).dot(U) / span - acc : acc;
                done = true;
            }
            if (!done) {
                // The node set changes on both sides: the design sits on a
                // remeshing seam. Use a central difference wide enough to
                // straddle it.
                const auto m = std::find(map.movable.begin(), map.movable.end(), static_cast<int>(n)) - map.movable.begin();
                const int var = map.n_stiffeners + 2 * static_cast<int>(m) + c;
                value = fd_oracle(problem, gs, with_load ? Quantity::compliance : Quantity::lambda1, var, 1e-2 * ev.ref.h);
                ++fallbacks;
            }
            out[n](c) = value;
        }
    }
    return out;
}

GradientSet empty_set(const GroundStructure& gs) {
    GradientSet g;
    g.dt.assign(gs.stiffeners.size(), 0.0);
    g.dnode.assign(gs.nodes.size(), Vec2::Zero());
    return g;
}

void zero_fixed(GradientSet& g, const GroundStructure& gs) {
    for (std::size_t n = 0; n < gs.nodes.size(); ++n) {
        if (!gs.nodes[n].movable) g.dnode[n].setZero();
    }
}

}  // namespace

GradientSet grad_compliance(const Evaluation& ev, const Problem& problem, const GroundStructure& gs) {
    check_stamp(ev, gs);
    if (!ev.statics) throw AnalysisError("compliance gradient needs a static solution");
    GradientSet g = empty_set(gs);
    const Eigen::VectorXd& U = ev.statics->U;
    for (int i = 0; i < static_cast<int>(gs.stiffeners.size()); ++i) {
        if (ev.model.mesh.stiffener_elements[static_cast<std::size_t>(i)].empty()) continue;
        const Stiffener& st = gs.stiffeners[static_cast<std::size_t>(i)];
        const StripIntegrals I = integrate_strip(ev.model, gs, i, U);
        g.dt[static_cast<std::size_t>(i)] = -penalized_thickness(st.t, problem.setup.penalty).slope * I.sum_density;
        const Vec3 n3 = stiffener_normal(skeleton_of(gs, i));
        const Vec2 n(n3.x(), n3.y());
        g.dnode[static_cast<std::size_t>(st.node_a)] -= I.diff_alpha * n;
        g.dnode[static_cast<std::size_t>(st.node_b)] -= I.diff_beta * n;
    }
    if (problem.shape_gradient == ShapeGradient::domain) g.dnode = domain_shape_gradient(ev, problem, gs, U, 0.0, true, g.fd_fallbacks);
    zero_fixed(g, gs);
    return g;
}

GradientSet grad_frequency(const Evaluation& ev, const Problem& problem, const GroundStructure& gs, bool density_term) {
    check_stamp(ev, gs);
    if (!ev.modal || ev.modal->eigenvalues.empty()) throw AnalysisError("frequency gradient needs a modal solution");
    GradientSet g = empty_set(gs);
    g.unreliable = ev.modal->repeated_warning;
    const double lambda = ev.modal->eigenvalues[0];
    Eigen::VectorXd phi = ev.modal->modes[0];
    const Eigen::VectorXd pr = ev.sys.dofs.restrict(phi);
    phi /= std::sqrt(pr.dot(ev.sys.M * pr));
    const PenaltyParams& pen = problem.setup.penalty;
    for (int i = 0; i < static_cast<int>(gs.stiffeners.size()); ++i) {
        if (ev.model.mesh.stiffener_elements[static_cast<std::size_t>(i)].empty()) continue;
        const Stiffener& st = gs.stiffeners[static_cast<std::size_t>(i)];
        const StripIntegrals I = integrate_strip(ev.model, gs, i, phi);
        const int e0 = ev.model.mesh.stiffener_elements[static_cast<std::size_t>(i)].front();
        const double rho0 = ev.model.materials[static_cast<std::size_t>(ev.model.material[static_cast<std::size_t>(e0)])].rho;
        const auto te = penalized_thickness(st.t, pen);
        const auto re = penalized_density(st.t, rho0, pen);
        const double dk = te.slope * I.sum_density;
        const double drho = density_term ? re.slope : 0.0;
        // Translational mass ~ rho_eps t_eps, rotary mass ~ rho_eps t_eps^3.
        const double dm = (drho * te.value + re.value * te.slope) * I.uu +
                          (drho / re.value + 3.0 * te.slope / te.value) * I.rotary;
        g.dt[static_cast<std::size_t>(i)] = dk - lambda * dm;
        const Vec3 n3 = stiffener_normal(skeleton_of(gs, i));
        const Vec2 n(n3.x(), n3.y());
        g.dnode[static_cast<std::size_t>(st.node_a)] += I.diff_alpha * n;
        g.dnode[static_cast<std::size_t>(st.node_b)] += I.diff_beta * n;
    }
    if (problem.shape_gradient == ShapeGradient::domain) {
        g.dnode = domain_shape_gradient(ev, problem, gs, phi, lambda, false, g.fd_fallbacks);
    }
    zero_fixed(g, gs);
    return g;
}

GradientSet grad_volume(const GroundStructure& gs, const PlanformDomain& domain, const PenaltyParams& penalty) {
    GradientSet g = empty_set(gs);
    const double sx = 0.5 * (domain.lower.a / domain.lower.c - domain.upper.a / domain.upper.c);
    const double sy = 0.5 * (domain.lower.b / domain.lower.c - domain.upper.b / domain.upper.c);
    for (int i = 0; i < static_cast<int>(gs.stiffeners.size()); ++i) {
        const Stiffener& st = gs.stiffeners[static_cast<std::size_t>(i)];
        const Skeleton sk = skeleton_of(gs, i);
        const double L = stiffener_length(sk);
        const double H = stiffener_mid_height(sk, domain);
        const auto te = penalized_thickness(st.t, penalty);
        g.dt[static_cast<std::size_t>(i)] = L * H * te.slope;
        const Vec2 dL_db = (sk.b - sk.a) / L;
        // H* depends on the midpoint, so each end sees half the skin slopes.
        const Vec2 dH(sx, sy);
        g.dnode[static_cast<std::size_t>(st.node_a)] += te.value * (-dL_db * H + L * dH);
        g.dnode[static_cast<std::size_t>(st.node_b)] += te.value * (dL_db * H + L * dH);
    }
    zero_fixed(g, gs);
    return g;
}

double fd_oracle(const Problem& problem, const GroundStructure& gs, Quantity q, int var, double h, bool frozen_mesh) {
    const DesignMap map(gs);
    if (var < 0 || var >= map.size()) throw AnalysisError("design variable index out of range");
    const Eigen::VectorXd x0 = map.pack(gs);
    const SolveRequest what{q == Quantity::compliance, q == Quantity::lambda1};
    std::optional<Evaluation> base;
    if (frozen_mesh && var < map.n_stiffeners && q != Quantity::volume) base = evaluate(problem, gs, what);
    auto value = [&](double step) {
        Eigen::VectorXd x = x0;
        x(var) += step;
        GroundStructure p = gs;
        map.unpack(x, p);
        if (q == Quantity::volume) return total_volume(p, problem.domain, problem.setup.penalty);
        Evaluation ev;
        if (base) {
            ev = *base;
            reevaluate_frozen(ev, problem, p, what);
        } else {
            ev = evaluate(problem, p, what);
        }
        return q == Quantity::compliance ? ev.statics->compliance : ev.modal->eigenvalues[0];
    };
    return (value(h) - value(-h)) / (2.0 * h);
}

}  // namespace rudder
