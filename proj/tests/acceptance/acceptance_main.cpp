// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset; the exit code is non-zero if any fails.

#include "rudder/driver.hpp"
#include "rudder/eigensolver.hpp"
#include "rudder/fem.hpp"
#include "rudder/mma.hpp"
#include "rudder/penalty.hpp"
#include "rudder/sensitivity.hpp"

#include "rudder_fixtures.hpp"
#include "structured.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace rudder;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, double v) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

fs::path work_dir() {
    const fs::path p = fs::path(RUDDER_ACCEPTANCE_WORK_DIR);
    fs::create_directories(p);
    return p;
}

fs::path config_path(const std::string& name) { return fs::path(RUDDER_SOURCE_DIR) / "configs" / name; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// |a - f| / max(|f|, floor); floor keeps near-zero entries from dominating.
struct ErrorTally {
    double worst = 0.0;
    std::string where;
    void add(double analytic, double fd, double floor, const std::string& label) {
        const double e = std::abs(analytic - fd) / std::max(std::abs(fd), floor);
        if (e > worst) {
            worst = e;
            where = label;
        }
    }
};

// --- 1, 2: penalty -------------------------------------------------------

Outcome penalty_exactness() {
    const PenaltyParams pen;
    const std::pair<double, double> cases[] = {{5.0, 5.0}, {2.0, 0.002}, {3.5, 0.0035}};
    double worst = 0.0;
    for (const auto& [t, expected] : cases) worst = std::max(worst, std::abs(penalized_thickness(t, pen).value - expected));
    return {worst <= 1e-12, "5->5, 2->0.002, 3.5->0.0035; max abs error " + fmt("%.1e", worst)};
}

Outcome heaviside_contract() {
    const PenaltyParams pen;
    bool bounded = true;
    for (int i = -3000; i <= 3000; ++i) {
        const double v = heaviside(i * 1e-4, pen).value;
        bounded = bounded && v >= pen.alpha && v <= 1.0;
    }
    double jump = 0.0;
    for (double x : {-pen.eps, pen.eps}) {
        const double below = heaviside(std::nextafter(x, -1.0), pen).value;
        const double above = heaviside(std::nextafter(x, 1.0), pen).value;
        jump = std::max(jump, std::abs(above - below));
    }
    const ValueAndSlope h0 = heaviside(0.0, pen);
    const double e0 = std::abs(h0.value - 0.5005), e1 = std::abs(h0.slope - 7.4925);
    const bool pass = bounded && jump < 1e-12 && e0 <= 1e-12 && e1 <= 1e-12;
    return {pass, std::string(bounded ? "values in [alpha, 1]" : "values leave [alpha, 1]") + fmt(", jump at +-eps %.1e", jump) +
                      fmt(", H(0) error %.1e", e0) + fmt(", H'(0) error %.1e", e1)};
}

// --- 3, 4, 5: gradients --------------------------------------------------

Outcome volume_gradient() {
    const auto t0 = std::chrono::steady_clock::now();
    Problem p;
    p.domain = testsupport::wedge_domain();
    const GroundStructure gs = build_ground_structure(p.domain, 3, 3, CellPattern::x_braced, 5.0, 4.02);
    const DesignMap map(gs);
    const Eigen::VectorXd g = grad_volume(gs, p.domain, p.setup.penalty).flatten(map);
    ErrorTally tally;
    for (int i = 0; i < map.size(); ++i) {
        const bool thickness = i < map.n_stiffeners;
        const double fd = fd_oracle(p, gs, Quantity::volume, i, thickness ? 1e-6 : 1e-3);
        tally.add(g(i), fd, 1e-3, map.label(i));
    }
    const double dt = seconds_since(t0);
    return {tally.worst <= 1e-8 && dt < 1.0, std::to_string(map.size()) + " variables, max rel error " +
                                                 fmt("%.2e", tally.worst) + " (" + tally.where + ")" + fmt(", %.2f s", dt)};
}

Problem small_problem(Objective objective) {
    Problem p;
    p.domain = testsupport::small_rudder_domain();
    p.setup = testsupport::default_setup();
    p.mesh.h_target = 12.0;
    p.mesh.n_layers = 2;
    p.objective = objective;
    return p;
}

std::string model_size(const Evaluation& ev, const GroundStructure& gs) {
    return std::to_string(gs.movable_count()) + " movable nodes, " + std::to_string(gs.stiffeners.size()) +
           " stiffeners, " + std::to_string(ev.sys.dofs.size()) + " DOFs";
}

bool small_enough(const Evaluation& ev, const GroundStructure& gs) {
    return gs.movable_count() <= 4 && gs.stiffeners.size() <= 10 && ev.sys.dofs.size() <= 5000;
}

// Thickness entries against frozen-mesh differences, node entries against
// remeshed differences.
std::pair<ErrorTally, ErrorTally> gradient_errors(const Problem& p, const GroundStructure& gs, const Eigen::VectorXd& g,
                                                  Quantity q) {
    const DesignMap map(gs);
    std::vector<double> fd(static_cast<std::size_t>(map.size()));
    double tmax = 0.0, nmax = 0.0;
    for (int i = 0; i < map.size(); ++i) {
        const bool thickness = i < map.n_stiffeners;
        fd[static_cast<std::size_t>(i)] = fd_oracle(p, gs, q, i, thickness ? 1e-4 : 1e-3, thickness);
        (thickness ? tmax : nmax) = std::max(thickness ? tmax : nmax, std::abs(fd[static_cast<std::size_t>(i)]));
    }
    ErrorTally t, n;
    for (int i = 0; i < map.size(); ++i) {
        const bool thickness = i < map.n_stiffeners;
        (thickness ? t : n).add(g(i), fd[static_cast<std::size_t>(i)], 1e-6 * (thickness ? tmax : nmax), map.label(i));
    }
    return {t, n};
}

Outcome compliance_gradient() {
    const auto t0 = std::chrono::steady_clock::now();
    const Problem p = small_problem(Objective::compliance);
    const GroundStructure gs = testsupport::small_rudder_layout(6.0, 5.0);
    const Evaluation ev = evaluate(p, gs, {true, false});
    const Eigen::VectorXd g = grad_compliance(ev, p, gs).flatten(DesignMap(gs));
    const auto [t, n] = gradient_errors(p, gs, g, Quantity::compliance);
    const double dt = seconds_since(t0);
    const bool pass = small_enough(ev, gs) && t.worst <= 1e-3 && n.worst <= 5e-2 && dt < 300.0;
    return {pass, model_size(ev, gs) + "; thickness max rel error " + fmt("%.2e", t.worst) + " (" + t.where +
                      "), node max rel error " + fmt("%.2e", n.worst) + " (" + n.where + ")" + fmt(", %.1f s", dt)};
}

Outcome frequency_gradient() {
    const auto t0 = std::chrono::steady_clock::now();
    const Problem p = small_problem(Objective::frequency);
    const GroundStructure gs = testsupport::small_rudder_layout(6.0, 5.0);
    const Evaluation ev = evaluate(p, gs, {false, true});
    const auto& lam = ev.modal->eigenvalues;
    const double gap = (lam[1] - lam[0]) / lam[0];
    const Eigen::VectorXd g = grad_frequency(ev, p, gs).flatten(DesignMap(gs));
    const auto [t, n] = gradient_errors(p, gs, g, Quantity::lambda1);

    // Interior stiffeners inside the smoothing band: the density term decides.
    const GroundStructure band = testsupport::small_rudder_layout(4.0, 5.0);
    const Evaluation evb = evaluate(p, band, {false, true});
    const double gap_band = (evb.modal->eigenvalues[1] - evb.modal->eigenvalues[0]) / evb.modal->eigenvalues[0];
    const GradientSet with = grad_frequency(evb, p, band);
    const GradientSet without = grad_frequency(evb, p, band, false);
    ErrorTally tw, two;
    double fmax = 0.0;
    std::vector<double> fd;
    for (int i = 0; i < static_cast<int>(band.stiffeners.size()); ++i) {
        fd.push_back(fd_oracle(p, band, Quantity::lambda1, i, 1e-5, true));
        fmax = std::max(fmax, std::abs(fd.back()));
    }
    for (int i = 0; i < static_cast<int>(band.stiffeners.size()); ++i) {
        if (band.stiffeners[static_cast<std::size_t>(i)].boundary) continue;
        const std::string label = "t" + std::to_string(i);
        tw.add(with.dt[static_cast<std::size_t>(i)], fd[static_cast<std::size_t>(i)], 1e-6 * fmax, label);
        two.add(without.dt[static_cast<std::size_t>(i)], fd[static_cast<std::size_t>(i)], 1e-6 * fmax, label);
    }
    const double dt = seconds_since(t0);
    const bool pass = small_enough(ev, gs) && gap >= 1e-2 && gap_band >= 1e-2 && t.worst <= 1e-3 && n.worst <= 5e-2 &&
                      tw.worst <= 1e-3 && two.worst > 1e-3 && dt < 300.0;
    return {pass, model_size(ev, gs) + fmt("; gap %.3f", gap) + "; thickness max rel error " + fmt("%.2e", t.worst) +
                      ", node max rel error " + fmt("%.2e", n.worst) + " (" + n.where + "); in-band thickness " +
                      fmt("%.2e", tw.worst) + " with density term, " + fmt("%.2e", two.worst) + " without" +
                      fmt(", %.1f s", dt)};
}

// --- 6: FEM against closed forms --------------------------------------------

double navier_centre(double a, double q, double D) {
    double w = 0.0;
    for (int m = 1; m < 200; m += 2)
        for (int n = 1; n < 200; n += 2) {
            const double s = std::sin(m * kPi / 2) * std::sin(n * kPi / 2);
            const double d = (m * m + n * n) / (a * a);
            w += s / (m * n * d * d);
        }
    return 16.0 * q / (std::pow(kPi, 6) * D) * w;
}

Outcome fem_verification() {
    using testsupport::fix_dof;
    using testsupport::plate_node;
    const auto t0 = std::chrono::steady_clock::now();
    // Simply supported square plate under uniform pressure, h = a / 16.
    const double a = 100.0, t = 1.0, q = 0.01;
    const Material mat;
    const int nx = 16;
    FEModel plate = testsupport::flat_plate(a, a, nx, nx, t, mat);
    for (int j = 0; j <= nx; ++j)
        for (int i = 0; i <= nx; ++i) {
            const int n = plate_node(i, j, nx);
            fix_dof(plate, n, 5);
            const bool xe = i == 0 || i == nx, ye = j == 0 || j == nx;
            if (xe || ye) {
                fix_dof(plate, n, 0);
                fix_dof(plate, n, 1);
                fix_dof(plate, n, 2);
            }
            if (xe) fix_dof(plate, n, 3);
            if (ye) fix_dof(plate, n, 4);
        }
    for (const auto& e : plate.mesh.elements) {
        const double area = element_area(plate.mesh, e);
        for (int k = 0; k < e.count; ++k) plate.load(6 * e.nodes[static_cast<std::size_t>(k)] + 2) += q * area / e.count;
    }
    const StaticResult sres = solve_static(assemble(plate, false), plate.load);
    const double D = mat.E * t * t * t / (12.0 * (1.0 - mat.nu * mat.nu));
    const double w_ref = navier_centre(a, q, D);
    const double w = sres.U(6 * plate_node(nx / 2, nx / 2, nx) + 2);
    const double e_plate = std::abs(w - w_ref) / w_ref;

    // Cantilever strip, first bending frequency.
    Material beam;
    beam.E = 7.0e4;
    beam.nu = 0.0;
    beam.rho = 2.7e-9;
    const double L = 100.0, b = 10.0;
    const int bx = 20, by = 2;
    FEModel strip = testsupport::flat_plate(L, b, bx, by, t, beam);
    for (int j = 0; j <= by; ++j) testsupport::fix_node(strip, plate_node(0, j, bx));
    const ModalResult mres = solve_modal(assemble(strip), 2);
    const double I = b * t * t * t / 12.0;
    const double beta = 1.8751040687;
    const double f_ref = beta * beta / (2 * kPi) * std::sqrt(beam.E * I / (beam.rho * b * t * std::pow(L, 4)));
    const double e_beam = std::abs(mres.frequency(0) - f_ref) / f_ref;
    const double dt = seconds_since(t0);
    return {e_plate <= 0.02 && e_beam <= 0.03 && dt < 60.0,
            "plate centre deflection " + fmt("%.4g", w) + " vs Navier " + fmt("%.4g", w_ref) + fmt(" (%.2f%%)", 100 * e_plate) +
                "; cantilever f1 " + fmt("%.2f Hz", mres.frequency(0)) + " vs " + fmt("%.2f Hz", f_ref) +
                fmt(" (%.2f%%)", 100 * e_beam) + fmt(", %.1f s", dt)};
}

// --- 7: spurious modes ------------------------------------------------------

// Share of phi^T M phi carried by the elements of one stiffener.
double modal_mass_share(const Evaluation& ev, int stiffener) {
    Eigen::VectorXd phi = ev.modal->modes[0];
    double part = 0.0, total = 0.0;
    const auto& thin = ev.model.mesh.stiffener_elements[static_cast<std::size_t>(stiffener)];
    for (int e = 0; e < static_cast<int>(ev.model.mesh.elements.size()); ++e) {
        const Eigen::MatrixXd me = element_matrices(element_coordinates(ev.model, e), element_section(ev.model, e)).mass();
        const auto dofs = element_dofs(ev.model, e);
        Eigen::VectorXd pe(static_cast<Eigen::Index>(dofs.size()));
        for (std::size_t i = 0; i < dofs.size(); ++i) pe(static_cast<Eigen::Index>(i)) = phi(dofs[i]);
        const double m = pe.dot(me * pe);
        total += m;
        if (std::find(thin.begin(), thin.end(), e) != thin.end()) part += m;
    }
    return part / total;
}

Outcome spurious_modes() {
    const auto t0 = std::chrono::steady_clock::now();
    Problem p = small_problem(Objective::frequency);
    GroundStructure gs = testsupport::small_rudder_layout(5.0, 5.0);
    const int thin = 8;  // the long interior diagonal
    gs.stiffeners[thin].t = 2.0;
    p.setup.penalty.P = 0.0;
    const Evaluation off = evaluate(p, gs, {false, true});
    p.setup.penalty.P = 2.0;
    const Evaluation on = evaluate(p, gs, {false, true});
    const double share_off = modal_mass_share(off, thin), share_on = modal_mass_share(on, thin);
    const double f_off = off.modal->frequency(0), f_on = on.modal->frequency(0);
    const double dt = seconds_since(t0);
    const bool pass = share_off > 0.5 && share_on < 0.1 && f_on / f_off >= 5.0 && dt < 120.0;
    return {pass, "one stiffener at t = 2 (t_eps = 0.002); without density penalty f1 " + fmt("%.2f Hz", f_off) +
                      fmt(", thin share %.1f%%", 100 * share_off) + "; with penalty f1 " + fmt("%.2f Hz", f_on) +
                      fmt(", thin share %.2f%%", 100 * share_on) + fmt("; ratio %.1f", f_on / f_off) + fmt(", %.1f s", dt)};
}

// --- 8-10: end-to-end runs -----------------------------------------------------

struct EndToEnd {
    bool attempted = false;
    std::string error;
    RunConfig cfg;
    RunResult result;
    double seconds = 0.0;
};

EndToEnd& end_to_end(const std::string& config_name, const std::string& out_name) {
    static std::map<std::string, EndToEnd> cache;
    EndToEnd& e = cache[config_name];
    if (e.attempted) return e;
    e.attempted = true;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        e.cfg = load_config(config_path(config_name).string());
        const fs::path out = work_dir() / out_name;
        fs::remove_all(out);
        e.result = run(e.cfg, out.string());
    } catch (const std::exception& ex) {
        e.error = ex.what();
    }
    e.seconds = seconds_since(t0);
    return e;
}

EndToEnd& compliance_run() { return end_to_end("compliance_trapezoid.json", "compliance"); }
EndToEnd& frequency_run() { return end_to_end("frequency_triangle.json", "frequency"); }

Outcome compliance_end_to_end() {
    const EndToEnd& e = compliance_run();
    if (!e.error.empty()) return {false, "run failed: " + e.error};
    const auto& h = e.result.history;
    // Baseline: first recorded design that satisfies the volume bound.
    const auto first = std::find_if(h.begin(), h.end(), [](const IterationRecord& r) { return r.volume_ratio - 1.0 <= 1e-2; });
    if (first == h.end()) return {false, "no feasible iterate"};
    const double excess = h.back().volume_ratio - 1.0;
    const double reduction = 1.0 - h.back().objective / first->objective;
    const bool converged = e.result.status == RunStatus::converged;
    const bool pass = excess <= 1e-2 && reduction >= 0.4 && converged && e.seconds < 1800.0;
    return {pass, std::string(converged ? "converged by the 5-quiet-step rule" : "stopped at max iterations") + " after " +
                      std::to_string(h.back().k) + " iterations; compliance " + fmt("%.2f", first->objective) + " -> " +
                      fmt("%.2f mJ", h.back().objective) + fmt(" (%.1f%% reduction", 100 * reduction) + " vs k = " +
                      std::to_string(first->k) + ")" + fmt("; (V - Vbar)/Vbar = %.4f", excess) + fmt(", %.0f s", e.seconds)};
}

Outcome pruning() {
    const EndToEnd& c = compliance_run();
    const EndToEnd& f = frequency_run();
    if (!c.error.empty() || !f.error.empty()) return {false, "run failed: " + c.error + f.error};
    const PruneReport& pc = *c.result.pruned;
    const PruneReport& pf = *f.result.pruned;
    const double dc = pc.relative_change(), df = pf.relative_change();
    const bool pass = std::abs(dc) <= 0.02 && std::abs(df) <= 0.003;
    return {pass, "compliance " + fmt("%.2f", pc.objective_before) + " -> " + fmt("%.2f mJ", pc.objective_after) +
                      fmt(" (%+.2f%%", 100 * dc) + ", " + std::to_string(pc.removed.size()) + " removed); f1 " +
                      fmt("%.2f", pf.objective_before) + " -> " + fmt("%.2f Hz", pf.objective_after) +
                      fmt(" (%+.3f%%", 100 * df) + ", " + std::to_string(pf.removed.size()) + " removed)"};
}

Outcome frequency_vs_reference() {
    const EndToEnd& f = frequency_run();
    if (!f.error.empty()) return {false, "run failed: " + f.error};
    const PruneReport& pr = *f.result.pruned;
    // Reference: every web of the initial grid at one thickness, built as
    // drawn (no thin-web penalty), with the same total mass as the optimum.
    Problem physical = f.cfg.problem;
    physical.setup.penalty.t_min = 1e-6;
    GroundStructure ref = initial_layout(f.cfg);
    auto mass_at = [&](double t) {
        for (auto& s : ref.stiffeners) s.t = t;
        return evaluate(physical, ref, {false, false}).sys.total_mass;
    };
    try {
        const Evaluation opt = evaluate(f.cfg.problem, pr.layout, {false, true});
        const double m_opt = opt.sys.total_mass;
        // Web thickness does not change the mesh, so the mass is linear in t.
        const double m2 = mass_at(2.0), m4 = mass_at(4.0);
        const double t_ref = 2.0 + 2.0 * (m_opt - m2) / (m4 - m2);
        for (auto& s : ref.stiffeners) s.t = t_ref;
        const Evaluation ev = evaluate(physical, ref, {false, true});
        const double m_err = std::abs(ev.sys.total_mass - m_opt) / m_opt;
        const double f_ref = ev.modal->frequency(0);
        const double f_opt = opt.modal->frequency(0);
        const double gain = f_opt / f_ref - 1.0;
        return {f_opt > f_ref && m_err <= 1e-3,
                "optimized (thin webs removed, " + std::to_string(pr.layout.stiffeners.size()) + " webs) f1 " +
                    fmt("%.2f Hz", f_opt) + " vs uniform grid (" + std::to_string(ref.stiffeners.size()) + " webs, t = " +
                    fmt("%.3f mm", t_ref) + ") " + fmt("%.2f Hz", f_ref) + fmt(" at equal mass (%.1e rel)", m_err) +
                    fmt(": %+.2f%%", 100 * gain)};
    } catch (const std::exception& ex) {
        return {false, std::string("analysis failed: ") + ex.what()};
    }
}

// --- 11: determinism of the CLI ---------------------------------------------

Outcome determinism() {
    nlohmann::json j = nlohmann::json::parse(slurp(config_path("compliance_trapezoid.json")));
    j["optimizer"]["max_iterations"] = 6;
    const fs::path dir = work_dir() / "determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path cfg = dir / "config.json";
    std::ofstream(cfg) << j.dump(2);
    std::string outputs[2];
    for (int r = 0; r < 2; ++r) {
        const fs::path out = dir / ("run" + std::to_string(r));
        const std::string cmd = std::string("RUDDER_VERBOSE=0 \"") + RUDDER_OPT_EXE + "\" run --config \"" + cfg.string() +
                                "\" --out \"" + out.string() + "\"";
        const int status = std::system(cmd.c_str());
        if (status == -1 || !fs::exists(out / "history.csv") || !fs::exists(out / "layout.json")) {
            return {false, "run " + std::to_string(r) + " did not produce history.csv and layout.json"};
        }
        outputs[r] = slurp(out / "history.csv") + '\0' + slurp(out / "layout.json");
    }
    return {outputs[0] == outputs[1] && !outputs[0].empty(),
            std::string(outputs[0] == outputs[1] ? "history.csv and layout.json byte-identical" : "outputs differ") +
                " across two 6-iteration runs"};
}

// --- 12: MMA ------------------------------------------------------------------

Outcome mma_cantilever() {
    const double A[5] = {61.0, 37.0, 19.0, 7.0, 1.0};
    const double c = 0.0624;
    double s = 0.0;
    for (double a : A) s += std::pow(a, 0.25);
    const double optimum = c * std::pow(s, 4.0 / 3.0);
    Mma mma(Eigen::VectorXd::Constant(5, 1.0), Eigen::VectorXd::Constant(5, 10.0), Eigen::VectorXd::Constant(5, 9.0), 1);
    Eigen::VectorXd x = Eigen::VectorXd::Constant(5, 5.0);
    for (int k = 0; k < 100; ++k) {
        double g = -1.0;
        Eigen::MatrixXd dg(1, 5);
        for (int i = 0; i < 5; ++i) {
            g += A[i] / std::pow(x(i), 3);
            dg(0, i) = -3.0 * A[i] / std::pow(x(i), 4);
        }
        x = mma.step(x, c * x.sum(), Eigen::VectorXd::Constant(5, c), Eigen::VectorXd::Constant(1, g), dg);
    }
    double g = -1.0;
    for (int i = 0; i < 5; ++i) g += A[i] / std::pow(x(i), 3);
    const double err = std::abs(c * x.sum() - optimum) / optimum;
    return {err <= 5e-3 && g <= 1e-4, "weight " + fmt("%.5f", c * x.sum()) + " vs optimum " + fmt("%.5f", optimum) +
                                          fmt(" (%.3f%%)", 100 * err) + fmt(", constraint %.1e", g)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"penalty exactness", penalty_exactness},
        {"Heaviside contract", heaviside_contract},
        {"volume gradient oracle", volume_gradient},
        {"compliance gradient oracle", compliance_gradient},
        {"frequency gradient oracle", frequency_gradient},
        {"FEM verification", fem_verification},
        {"spurious-mode suppression", spurious_modes},
        {"end-to-end compliance run", compliance_end_to_end},
        {"thin-stiffener removal", pruning},
        {"frequency vs equal-mass reference", frequency_vs_reference},
        {"determinism", determinism},
        {"MMA sanity", mma_cantilever},
    };
    std::set<int> wanted;
    for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
    setenv("RUDDER_VERBOSE", "0", 0);

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!wanted.empty() && !wanted.count(id)) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& ex) {
            o = {false, std::string("exception: ") + ex.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << id << " (" << criteria[i].first << "): " << o.detail
                  << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
