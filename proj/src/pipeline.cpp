#include "rudder/pipeline.hpp"

#include "rudder/error.hpp"

namespace rudder {

std::string to_string(Objective o) { return o == Objective::compliance ? "compliance" : "frequency"; }

Objective objective_from_string(const std::string& name) {
    if (name == "compliance") return Objective::compliance;
    if (name == "frequency") return Objective::frequency;
    throw ConfigError("unknown objective '" + name + "'");
}

std::string to_string(ShapeGradient g) { return g == ShapeGradient::domain ? "domain" : "face_integral"; }

ShapeGradient shape_gradient_from_string(const std::string& name) {
    if (name == "domain") return ShapeGradient::domain;
    if (name == "face_integral") return ShapeGradient::face_integral;
    throw ConfigError("unknown shape gradient '" + name + "'");
}

namespace {

void solve(Evaluation& ev, const Problem& problem, SolveRequest what) {
    ev.sys = assemble(ev.model, what.modal);
    ev.statics.reset();
    ev.modal.reset();
    if (what.statics) ev.statics = solve_static(ev.sys, ev.model.load);
    if (what.modal) ev.modal = solve_modal(ev.sys, std::max(problem.modes, 2));
}

}  // namespace

Evaluation evaluate(const Problem& problem, const GroundStructure& gs, SolveRequest what) {
    Evaluation ev;
    ev.gs = gs;
    ev.ref = build_reference_mesh(problem.domain, gs, problem.mesh);
    ev.model = apply_bcs_and_loads(extrude_and_lift(ev.ref, problem.domain, gs, problem.mesh.n_layers),
                                   problem.domain, gs, problem.setup);
    solve(ev, problem, what);
    return ev;
}

void reevaluate_frozen(Evaluation& ev, const Problem& problem, const GroundStructure& gs, SolveRequest what) {
    if (gs.nodes.size() != ev.gs.nodes.size() || gs.stiffeners.size() != ev.gs.stiffeners.size()) {
        throw AnalysisError("frozen re-evaluation with a different layout");
    }
    for (std::size_t i = 0; i < gs.nodes.size(); ++i) {
        if (gs.nodes[i].pos != ev.gs.nodes[i].pos) throw AnalysisError("frozen re-evaluation with moved nodes");
    }
    ev.gs = gs;
    update_stiffener_properties(ev.model, gs, problem.setup);
    solve(ev, problem, what);
}

double total_volume(const GroundStructure& gs, const PlanformDomain& domain, const PenaltyParams& penalty) {
    double v = 0.0;
    for (int i = 0; i < static_cast<int>(gs.stiffeners.size()); ++i) {
        const double te = penalized_thickness(gs.stiffeners[static_cast<std::size_t>(i)].t, penalty).value;
        v += stiffener_volume(skeleton_of(gs, i), domain, te);
    }
    return v;
}

double thin_volume(const GroundStructure& gs, const PlanformDomain& domain, const PenaltyParams& penalty) {
    double v = 0.0;
    for (int i = 0; i < static_cast<int>(gs.stiffeners.size()); ++i) {
        const double te = penalized_thickness(gs.stiffeners[static_cast<std::size_t>(i)].t, penalty).value;
        if (te < penalty.t_min) v += stiffener_volume(skeleton_of(gs, i), domain, te);
    }
    return v;
}

DesignMap::DesignMap(const GroundStructure& gs) : n_stiffeners(static_cast<int>(gs.stiffeners.size())) {
    for (int n = 0; n < static_cast<int>(gs.nodes.size()); ++n) {
        if (gs.nodes[static_cast<std::size_t>(n)].movable) movable.push_back(n);
    }
}

Eigen::VectorXd DesignMap::pack(const GroundStructure& gs) const {
    Eigen::VectorXd x(size());
    for (int i = 0; i < n_stiffeners; ++i) x(i) = gs.stiffeners[static_cast<std::size_t>(i)].t;
    for (std::size_t k = 0; k < movable.size(); ++k) {
        const Vec2& p = gs.nodes[static_cast<std::size_t>(movable[k])].pos;
        x(n_stiffeners + 2 * static_cast<int>(k)) = p.x();
        x(n_stiffeners + 2 * static_cast<int>(k) + 1) = p.y();
    }
    return x;
}

void DesignMap::unpack(const Eigen::VectorXd& x, GroundStructure& gs) const {
    if (x.size() != size()) throw AnalysisError("design vector size mismatch");
    for (int i = 0; i < n_stiffeners; ++i) gs.stiffeners[static_cast<std::size_t>(i)].t = x(i);
    for (std::size_t k = 0; k < movable.size(); ++k) {
        Vec2& p = gs.nodes[static_cast<std::size_t>(movable[k])].pos;
        p.x() = x(n_stiffeners + 2 * static_cast<int>(k));
        p.y() = x(n_stiffeners + 2 * static_cast<int>(k) + 1);
    }
}

std::string DesignMap::label(int var) const {
    if (var < n_stiffeners) return "t" + std::to_string(var);
    const int k = (var - n_stiffeners) / 2;
    return ((var - n_stiffeners) % 2 == 0 ? "x" : "y") + std::to_string(movable[static_cast<std::size_t>(k)]);
}

}  // namespace rudder
