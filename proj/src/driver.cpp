#include "rudder/driver.hpp"

#include "rudder/error.hpp"
#include "rudder/layout_io.hpp"
#include "rudder/vtk_writer.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <sstream>

namespace rudder {

using ordered_json = nlohmann::ordered_json;

namespace {

int verbosity() {
    static const int level = [] {
        const char* v = std::getenv("RUDDER_VERBOSE");
        return v ? std::atoi(v) : 1;
    }();
    return level;
}

void log(int level, const std::string& msg) {
    if (verbosity() >= level) std::cerr << msg << '\n';
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

// Point-to-box distance.
double box_distance(const Vec2& c, const Vec2& lo, const Vec2& hi) {
    return (c - c.cwiseMax(lo).cwiseMin(hi)).norm();
}

Vec2 cell_size(const RunConfig& cfg) {
    const auto region = cfg.problem.domain.design_region();
    Vec2 lo = region.front(), hi = region.front();
    for (const Vec2& v : region) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    return {(hi.x() - lo.x()) / std::max(cfg.nx - 1, 1), (hi.y() - lo.y()) / std::max(cfg.ny - 1, 1)};
}

bool has_load(const AnalysisSetup& setup) {
    for (const auto& [part, p] : setup.pressures) {
        if (p != 0.0) return true;
    }
    return false;
}

double raw_objective(const Problem& problem, const Evaluation& ev) {
    return problem.objective == Objective::compliance ? ev.statics->compliance : ev.modal->eigenvalues.at(0);
}

GroundStructure drop_stiffeners(const GroundStructure& gs, const std::vector<char>& drop) {
    GroundStructure out;
    out.pattern = gs.pattern;
    std::vector<int> remap(gs.nodes.size(), -1);
    auto node = [&](int old) {
        int& id = remap[static_cast<std::size_t>(old)];
        if (id < 0) {
            id = static_cast<int>(out.nodes.size());
            out.nodes.push_back(gs.nodes[static_cast<std::size_t>(old)]);
        }
        return id;
    };
    for (std::size_t i = 0; i < gs.stiffeners.size(); ++i) {
        if (drop[i]) continue;
        Stiffener s = gs.stiffeners[i];
        s.node_a = node(s.node_a);
        s.node_b = node(s.node_b);
        out.stiffeners.push_back(s);
    }
    return out;
}

std::optional<Evaluation> try_evaluate(const Problem& problem, const GroundStructure& gs, SolveRequest req,
                                       std::string* why = nullptr) {
    try {
        return evaluate(problem, gs, req);
    } catch (const AnalysisError& e) {
        if (why) *why = e.what();
    } catch (const MeshingError& e) {
        if (why) *why = e.what();
    } catch (const GeometryError& e) {
        if (why) *why = e.what();
    }
    return std::nullopt;
}

std::string fields_vtk(const Problem& problem, const Evaluation& ev, const std::string& title) {
    VtkFields f;
    std::vector<double> vm;
    if (ev.statics && problem.objective == Objective::compliance) {
        f.displacement = &ev.statics->U;
        for (int e = 0; e < static_cast<int>(ev.model.mesh.elements.size()); ++e) {
            vm.push_back(recover_von_mises(ev.model, e, ev.statics->U));
        }
        f.von_mises = &vm;
    } else if (ev.modal) {
        f.displacement = &ev.modal->modes.at(0);
        f.displacement_name = "mode_1";
    }
    return vtk_string(ev.model, f, title);
}

// Nodes of stiffeners that the step would drag through the shaft disc keep
// their previous coordinates. The previous layout is clear, so this ends.
void hold_clear_of_shaft(const GroundStructure& gs, const DesignMap& map, const Eigen::VectorXd& x,
                         Eigen::VectorXd& xn, const PlanformDomain& domain) {
    std::vector<int> slot(gs.nodes.size(), -1);
    for (std::size_t m = 0; m < map.movable.size(); ++m) slot[static_cast<std::size_t>(map.movable[m])] = static_cast<int>(m);
    for (;;) {
        GroundStructure trial = gs;
        map.unpack(xn, trial);
        const std::vector<int> bad = shaft_crossings(trial, domain);
        bool changed = false;
        for (int i : bad) {
            for (int nid : {gs.stiffeners[static_cast<std::size_t>(i)].node_a, gs.stiffeners[static_cast<std::size_t>(i)].node_b}) {
                const int m = slot[static_cast<std::size_t>(nid)];
                if (m < 0) continue;
                const int ix = map.n_stiffeners + 2 * m;
                if (xn.segment<2>(ix) != x.segment<2>(ix)) {
                    xn.segment<2>(ix) = x.segment<2>(ix);
                    changed = true;
                }
            }
        }
        if (bad.empty() || !changed) return;
        log(2, std::to_string(bad.size()) + " stiffener(s) would cross the shaft; their nodes hold still");
    }
}

}  // namespace

double PruneReport::relative_change() const {
    return objective_before == 0.0 ? 0.0 : (objective_after - objective_before) / objective_before;
}

double relative_error(double analytic, double fd, double floor) {
    const double scale = std::max({std::abs(analytic), std::abs(fd), floor});
    return scale > 0.0 ? std::abs(analytic - fd) / scale : 0.0;
}

SolveRequest request_for(Objective objective) {
    return objective == Objective::compliance ? SolveRequest{true, false} : SolveRequest{false, true};
}

double objective_value(const Problem& problem, const Evaluation& ev) {
    if (problem.objective == Objective::compliance) {
        if (!ev.statics) throw AnalysisError("no static result for the compliance objective");
        return ev.statics->compliance;
    }
    if (!ev.modal) throw AnalysisError("no modal result for the frequency objective");
    return ev.modal->frequency(0);
}

std::vector<int> shaft_crossings(const GroundStructure& gs, const PlanformDomain& domain) {
    const Circle& c = domain.shaft;
    const double on = 1e-6 * c.radius;
    std::vector<int> out;
    for (std::size_t i = 0; i < gs.stiffeners.size(); ++i) {
        const Stiffener& s = gs.stiffeners[i];
        const Vec2 a = gs.nodes[static_cast<std::size_t>(s.node_a)].pos;
        const Vec2 b = gs.nodes[static_cast<std::size_t>(s.node_b)].pos;
        const bool a_on = std::abs((a - c.center).norm() - c.radius) <= on;
        const bool b_on = std::abs((b - c.center).norm() - c.radius) <= on;
        bool bad = false;
        if (a_on && b_on) {
            bad = true;
        } else if (a_on || b_on) {
            // A stiffener rooted on the collar must leave it outwards.
            const Vec2 p = a_on ? a : b;
            const Vec2 q = a_on ? b : a;
            bad = (q - p).dot(p - c.center) <= 0.0;
        } else {
            bad = distance_to_segment(c.center, a, b) <= c.radius;
        }
        if (bad) out.push_back(static_cast<int>(i));
    }
    return out;
}

DesignBounds design_bounds(const RunConfig& cfg, const GroundStructure& gs, const DesignMap& map) {
    const OptimizerSettings& o = cfg.optimizer;
    const PlanformDomain& d = cfg.problem.domain;
    const Vec2 cell = cell_size(cfg);
    const Vec2 range(o.node_range.x() > 0.0 ? o.node_range.x() : 0.45 * cell.x(),
                     o.node_range.y() > 0.0 ? o.node_range.y() : 0.45 * cell.y());
    const Vec2 move(o.node_move.x() > 0.0 ? o.node_move.x() : 0.25 * cell.x(),
                    o.node_move.y() > 0.0 ? o.node_move.y() : 0.25 * cell.y());
    const auto region = d.design_region();
    const double margin = 0.5 * cfg.problem.mesh.resolved_h(d);

    DesignBounds b;
    const int n = map.size();
    b.lower.resize(n);
    b.upper.resize(n);
    b.move.resize(n);
    for (int i = 0; i < map.n_stiffeners; ++i) {
        b.lower(i) = o.t_lower;
        b.upper(i) = o.t_upper;
        b.move(i) = o.t_move;
    }
    for (std::size_t m = 0; m < map.movable.size(); ++m) {
        const Vec2 p = gs.nodes[static_cast<std::size_t>(map.movable[m])].pos;
        // Shrink the box until it sits inside the design region and away from the shaft.
        double s = 1.0;
        for (int it = 0; it < 40; ++it, s *= 0.8) {
            const Vec2 lo = p - s * range, hi = p + s * range;
            bool ok = box_distance(d.shaft.center, lo, hi) > d.shaft.radius + margin;
            for (const Vec2& q : {lo, hi, Vec2(lo.x(), hi.y()), Vec2(hi.x(), lo.y())}) {
                ok = ok && point_in_polygon(q, region) && distance_to_polygon_boundary(q, region) > margin;
            }
            if (ok) break;
        }
        const int ix = map.n_stiffeners + 2 * static_cast<int>(m);
        for (int c = 0; c < 2; ++c) {
            b.lower(ix + c) = p(c) - s * range(c);
            b.upper(ix + c) = p(c) + s * range(c);
            b.move(ix + c) = std::min(move(c), std::max(s * range(c), 1e-9));
        }
    }
    return b;
}

std::string history_csv(const std::vector<IterationRecord>& history) {
    std::ostringstream out;
    out.precision(12);
    out << "k,objective,volume_ratio,thin_fraction\n";
    for (const IterationRecord& r : history) {
        out << r.k << ',' << r.objective << ',' << r.volume_ratio << ',' << r.thin_fraction << '\n';
    }
    return out.str();
}

std::string gradient_csv(const std::vector<GradientCheckRow>& rows) {
    std::ostringstream out;
    out.precision(12);
    out << "variable,analytic,fd,rel_error\n";
    for (const GradientCheckRow& r : rows) out << r.variable << ',' << r.analytic << ',' << r.fd << ',' << r.rel_error << '\n';
    return out.str();
}

PruneReport remove_thin_stiffeners(const Problem& problem, const GroundStructure& gs, double threshold) {
    const SolveRequest req = request_for(problem.objective);
    PruneReport r;
    r.objective_before = objective_value(problem, evaluate(problem, gs, req));
    std::vector<char> drop(gs.stiffeners.size(), 0);
    for (std::size_t i = 0; i < gs.stiffeners.size(); ++i) {
        if (gs.stiffeners[i].t < threshold) drop[i] = 1;
    }
    if (std::find(drop.begin(), drop.end(), 1) == drop.end()) {
        r.layout = gs;
        r.objective_after = r.objective_before;
        return r;
    }
    std::string why;
    auto pruned = drop_stiffeners(gs, drop);
    auto ev = try_evaluate(problem, pruned, req, &why);
    if (!ev) {
        log(1, "pruning all thin stiffeners failed (" + why + "); removing them one at a time");
        std::vector<char> partial(gs.stiffeners.size(), 0);
        for (std::size_t i = 0; i < gs.stiffeners.size(); ++i) {
            if (!drop[i]) continue;
            partial[i] = 1;
            auto trial = drop_stiffeners(gs, partial);
            auto tev = try_evaluate(problem, trial, req);
            if (!tev) {
                partial[i] = 0;
                r.retained.push_back(static_cast<int>(i));
                continue;
            }
            pruned = std::move(trial);
            ev = std::move(tev);
        }
        drop = partial;
        if (!ev) {
            pruned = gs;
            ev = evaluate(problem, gs, req);
        }
    }
    for (std::size_t i = 0; i < drop.size(); ++i) {
        if (drop[i]) r.removed.push_back(static_cast<int>(i));
    }
    r.layout = std::move(pruned);
    r.objective_after = objective_value(problem, *ev);
    return r;
}

RunResult run(const RunConfig& cfg, const std::string& out_dir) {
    const Problem& problem = cfg.problem;
    const PlanformDomain& domain = problem.domain;
    const PenaltyParams& pen = problem.setup.penalty;
    const bool write = !out_dir.empty();
    const SolveRequest req = request_for(problem.objective);
    if (problem.objective == Objective::compliance && !has_load(problem.setup)) {
        throw ConfigError("compliance objective needs a non-zero entry in 'loads'");
    }

    RunResult res;
    GroundStructure gs = initial_layout(cfg);
    res.volume_bound = cfg.volume_fraction * domain.enclosed_volume();
    const double vbar = res.volume_bound;
    const DesignMap map(gs);
    const DesignBounds bounds = design_bounds(cfg, gs, map);
    Mma mma(bounds.lower, bounds.upper, bounds.move, 1, cfg.optimizer.mma);
    std::vector<int> fixed;
    if (cfg.optimizer.fixed_boundary_thickness) {
        for (int i = 0; i < map.n_stiffeners; ++i) {
            if (gs.stiffeners[static_cast<std::size_t>(i)].boundary) fixed.push_back(i);
        }
    }
    ConvergenceMonitor monitor(cfg.optimizer.convergence);

    auto save_history = [&] {
        if (write) write_file_atomic(join(out_dir, "history.csv"), history_csv(res.history));
    };
    auto save_layout = [&](const std::string& name, const GroundStructure& g) {
        if (write) write_file_atomic(join(out_dir, name), layout_to_json(g, domain, pen));
    };
    int k = 0;
    auto fail = [&](const std::string& what) {
        if (write) {
            ordered_json j = {{"iteration", k}, {"error", what}};
            write_file_atomic(join(out_dir, "failure.json"), j.dump(1) + "\n");
            save_layout("failed_layout.json", gs);
        }
    };
    auto record = [&](const Evaluation& ev, double step) {
        IterationRecord r;
        r.k = k;
        r.objective = objective_value(problem, ev);
        r.volume_ratio = total_volume(gs, domain, pen) / vbar;
        r.thin_fraction = thin_volume(gs, domain, pen) / vbar;
        r.max_step = step;
        monitor.update(r.objective, r.volume_ratio);
        r.counter = monitor.counter();
        res.history.push_back(r);
        log(1, "k=" + std::to_string(k) + fmt(" objective=%.6g", r.objective) + fmt(" V/Vbar=%.4f", r.volume_ratio) +
                   fmt(" thin=%.4f", r.thin_fraction) + fmt(" step=%.3g", step) + " quiet=" + std::to_string(r.counter));
        save_history();
        if (write && cfg.snapshot_every > 0 && k % cfg.snapshot_every == 0) {
            char name[64];
            std::snprintf(name, sizeof name, "snapshots/layout_%04d.json", k);
            save_layout(name, gs);
        }
        return r.counter >= cfg.optimizer.convergence.consecutive;
    };

    Evaluation ev;
    try {
        ev = evaluate(problem, gs, req);
        const double scale = raw_objective(problem, ev);
        if (!(std::abs(scale) > 0.0)) throw AnalysisError("initial objective is zero; nothing to optimize");
        record(ev, 0.0);
        for (k = 1; k <= cfg.optimizer.max_iterations; ++k) {
            const GradientSet gobj = problem.objective == Objective::compliance ? grad_compliance(ev, problem, gs)
                                                                                : grad_frequency(ev, problem, gs);
            if (gobj.unreliable) log(1, "warning: lambda_1 is nearly repeated; its gradient is unreliable");
            if (gobj.fd_fallbacks > 0) {
                log(2, std::to_string(gobj.fd_fallbacks) + " node coordinate(s) on a remeshing seam were differenced");
            }
            const GradientSet gvol = grad_volume(gs, domain, pen);
            const double sign = problem.objective == Objective::compliance ? 1.0 : -1.0;
            const double f0 = sign * raw_objective(problem, ev) / std::abs(scale);
            Eigen::VectorXd df0 = sign * gobj.flatten(map) / std::abs(scale);
            Eigen::VectorXd g(1);
            g(0) = total_volume(gs, domain, pen) / vbar - 1.0;
            Eigen::MatrixXd dg = (gvol.flatten(map) / vbar).transpose();
            for (int i : fixed) df0(i) = dg(0, i) = 0.0;
            const Eigen::VectorXd x = map.pack(gs);
            Eigen::VectorXd xn = mma.step(x, f0, df0, g, dg);
            for (int i : fixed) xn(i) = x(i);
            if (mma.last_step().restorations > 0) {
                log(1, "MMA subproblem restored by halving move limits " + std::to_string(mma.last_step().restorations) +
                           " time(s)");
            }
            // Back off along the step when the new layout cannot be meshed or solved.
            std::optional<Evaluation> next;
            GroundStructure trial = gs;
            std::string why;
            for (int attempt = 0; attempt < 6 && !next; ++attempt) {
                if (attempt > 0) {
                    xn = x + 0.5 * (xn - x);
                    log(1, "step rejected (" + why + "); halving it");
                }
                hold_clear_of_shaft(gs, map, x, xn, domain);
                trial = gs;
                map.unpack(xn, trial);
                next = try_evaluate(problem, trial, req, &why);
            }
            if (!next) throw AnalysisError("no admissible step at iteration " + std::to_string(k) + ": " + why);
            gs = std::move(trial);
            ev = std::move(*next);
            if (record(ev, (xn - x).cwiseAbs().maxCoeff())) {
                res.status = RunStatus::converged;
                break;
            }
        }
        k = std::min(k, cfg.optimizer.max_iterations);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        fail(e.what());
        throw;
    }

    res.layout = gs;
    save_layout("layout.json", gs);
    if (write) write_file_atomic(join(out_dir, "fields.vtk"), fields_vtk(problem, ev, "optimized layout"));

    res.pruned = remove_thin_stiffeners(problem, gs, pen.t_min);
    const PruneReport& pr = *res.pruned;
    log(1, "pruned " + std::to_string(pr.removed.size()) + " thin stiffener(s); objective " +
               fmt("%.6g", pr.objective_before) + fmt(" -> %.6g", pr.objective_after) +
               fmt(" (%+.3f%%)", 100.0 * pr.relative_change()));
    if (write) {
        save_layout("layout_pruned.json", pr.layout);
        ordered_json s;
        s["status"] = res.status == RunStatus::converged ? "converged" : "max_iterations";
        s["objective"] = to_string(problem.objective);
        s["units"] = problem.objective == Objective::compliance ? "mJ" : "Hz";
        s["iterations"] = res.history.back().k;
        s["initial_objective"] = res.history.front().objective;
        s["final_objective"] = res.history.back().objective;
        s["volume_bound"] = vbar;
        s["final_volume_ratio"] = res.history.back().volume_ratio;
        double max_thin = 0.0;
        for (const IterationRecord& r : res.history) max_thin = std::max(max_thin, r.thin_fraction);
        s["max_thin_fraction"] = max_thin;
        s["pruning"] = {{"removed", pr.removed},
                        {"retained", pr.retained},
                        {"objective_before", pr.objective_before},
                        {"objective_after", pr.objective_after},
                        {"relative_change", pr.relative_change()}};
        write_file_atomic(join(out_dir, "summary.json"), s.dump(1) + "\n");
    }
    return res;
}

AnalysisReport analyze(const RunConfig& cfg, const GroundStructure& gs, const std::string& out_dir) {
    const Problem& problem = cfg.problem;
    const bool loaded = has_load(problem.setup);
    const Evaluation ev = evaluate(problem, gs, {loaded, true});
    AnalysisReport r;
    if (loaded) r.compliance = ev.statics->compliance;
    for (std::size_t j = 0; j < ev.modal->eigenvalues.size() && static_cast<int>(j) < problem.modes; ++j) {
        r.frequencies.push_back(ev.modal->frequency(static_cast<int>(j)));
    }
    r.repeated_warning = ev.modal->repeated_warning;
    r.volume = total_volume(gs, problem.domain, problem.setup.penalty);
    r.volume_ratio = r.volume / (cfg.volume_fraction * problem.domain.enclosed_volume());
    if (!out_dir.empty()) {
        ordered_json j;
        j["compliance_mJ"] = r.compliance ? ordered_json(*r.compliance) : ordered_json(nullptr);
        j["frequencies_Hz"] = r.frequencies;
        j["volume"] = r.volume;
        j["volume_ratio"] = r.volume_ratio;
        j["repeated_eigenvalue_warning"] = r.repeated_warning;
        j["dofs"] = ev.sys.dofs.size();
        write_file_atomic(join(out_dir, "analysis.json"), j.dump(1) + "\n");
        VtkFields f;
        std::vector<double> vm;
        if (loaded) {
            f.displacement = &ev.statics->U;
            for (int e = 0; e < static_cast<int>(ev.model.mesh.elements.size()); ++e) {
                vm.push_back(recover_von_mises(ev.model, e, ev.statics->U));
            }
            f.von_mises = &vm;
        } else {
            f.displacement = &ev.modal->modes.at(0);
            f.displacement_name = "mode_1";
        }
        write_file_atomic(join(out_dir, "fields.vtk"), vtk_string(ev.model, f, "analysis"));
    }
    return r;
}

std::vector<GradientCheckRow> verify_gradients(const RunConfig& cfg, const GroundStructure& gs,
                                               const std::vector<int>& vars, double h) {
    const Problem& problem = cfg.problem;
    if (!(h > 0.0)) throw ConfigError("finite-difference step must be positive");
    const DesignMap map(gs);
    std::vector<int> ids = vars;
    if (ids.empty()) {
        for (int i = 0; i < map.size(); ++i) ids.push_back(i);
    }
    for (int i : ids) {
        if (i < 0 || i >= map.size()) throw ConfigError("design variable " + std::to_string(i) + " out of range");
    }
    const bool compliance = problem.objective == Objective::compliance;
    const Evaluation ev = evaluate(problem, gs, request_for(problem.objective));
    const Eigen::VectorXd g = (compliance ? grad_compliance(ev, problem, gs) : grad_frequency(ev, problem, gs)).flatten(map);
    const Quantity q = compliance ? Quantity::compliance : Quantity::lambda1;
    std::vector<GradientCheckRow> rows;
    double fmax = 0.0;
    for (int i : ids) {
        const double fd = fd_oracle(problem, gs, q, i, h, i < map.n_stiffeners);
        rows.push_back({map.label(i), g(i), fd, 0.0});
        fmax = std::max(fmax, std::abs(fd));
    }
    for (GradientCheckRow& r : rows) r.rel_error = relative_error(r.analytic, r.fd, 1e-6 * fmax);
    return rows;
}

}  // namespace rudder
