#include "rudder/config.hpp"

#include "rudder/error.hpp"
#include "rudder/layout_io.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace rudder {

using nlohmann::json;

namespace {

const json* find(const json& j, const char* key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

template <class T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
    const json* v = find(j, key);
    if (!v) return fallback;
    try {
        return v->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("'" + where + "." + key + "' has the wrong type");
    }
}

const json& require(const json& j, const char* key, const std::string& where) {
    const json* v = find(j, key);
    if (!v) throw ConfigError("missing '" + where + "." + key + "'");
    return *v;
}

Vec2 point(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ConfigError("'" + where + "' must be [x, y]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

Plane plane(const json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError("'" + where + "' must be an object {a, b, c, d}");
    Plane p;
    p.a = get_or(j, "a", 0.0, where);
    p.b = get_or(j, "b", 0.0, where);
    p.c = get_or(j, "c", 1.0, where);
    p.d = get_or(j, "d", 0.0, where);
    return p;
}

Vec2 pair_or(const json& j, const char* key, Vec2 fallback, const std::string& where) {
    const json* v = find(j, key);
    if (!v) return fallback;
    if (v->is_number()) return Vec2::Constant(v->get<double>());
    return point(*v, where + "." + key);
}

int material_index(const std::vector<Material>& mats, const json& assign, const char* key) {
    const json* v = find(assign, key);
    if (!v) return 0;
    if (!v->is_string()) throw ConfigError("'assign." + std::string(key) + "' must name a material");
    for (std::size_t i = 0; i < mats.size(); ++i) {
        if (mats[i].name == v->get<std::string>()) return static_cast<int>(i);
    }
    throw ConfigError("'assign." + std::string(key) + "' refers to unknown material '" + v->get<std::string>() + "'");
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    RunConfig cfg;
    PlanformDomain& d = cfg.problem.domain;

    const json& pf = require(j, "planform", "");
    const json& outline = require(pf, "outline", "planform");
    if (!outline.is_array() || outline.size() < 3) throw ConfigError("'planform.outline' needs at least 3 points");
    for (std::size_t i = 0; i < outline.size(); ++i) d.outline.push_back(point(outline[i], "planform.outline"));
    if (polygon_area(d.outline) < 0.0) std::reverse(d.outline.begin(), d.outline.end());
    const json& shaft = require(pf, "shaft", "planform");
    d.shaft.center = point(require(shaft, "center", "planform.shaft"), "planform.shaft.center");
    d.shaft.radius = get_or(shaft, "radius", 0.0, "planform.shaft");
    d.upper = plane(require(pf, "upper", "planform"), "planform.upper");
    d.lower = plane(require(pf, "lower", "planform"), "planform.lower");
    if (const json* le = find(pf, "leading_edge"); le && !le->is_null()) d.leading_edge = plane(*le, "planform.leading_edge");
    d.skin_thickness = get_or(pf, "skin_thickness", d.skin_thickness, "planform");
    d.leading_edge_thickness = get_or(pf, "leading_edge_thickness", d.leading_edge_thickness, "planform");
    if (!(d.shaft.radius > 0.0)) throw ConfigError("'planform.shaft.radius' must be positive");
    if (!(d.skin_thickness > 0.0) || !(d.leading_edge_thickness > 0.0)) throw ConfigError("skin thicknesses must be positive");
    d.validate();

    AnalysisSetup& setup = cfg.problem.setup;
    if (const json* mats = find(j, "materials")) {
        if (!mats->is_array() || mats->empty()) throw ConfigError("'materials' must be a non-empty array");
        setup.materials.clear();
        for (const json& m : *mats) {
            Material mat;
            mat.name = get_or<std::string>(m, "name", "material" + std::to_string(setup.materials.size()), "materials");
            mat.E = get_or(m, "E", mat.E, "materials");
            mat.nu = get_or(m, "nu", mat.nu, "materials");
            mat.rho = get_or(m, "rho", mat.rho, "materials");
            if (!(mat.E > 0.0) || !(mat.rho > 0.0) || !(mat.nu > -1.0 && mat.nu < 0.5)) {
                throw ConfigError("material '" + mat.name + "' has out-of-range properties");
            }
            setup.materials.push_back(mat);
        }
    }
    if (const json* a = find(j, "assign")) {
        setup.assign.skin = material_index(setup.materials, *a, "skin");
        setup.assign.stiffener = material_index(setup.materials, *a, "stiffener");
        setup.assign.leading_edge = material_index(setup.materials, *a, "leading_edge");
        setup.assign.collar = material_index(setup.materials, *a, "collar");
    }
    if (const json* loads = find(j, "loads")) {
        if (!loads->is_object()) throw ConfigError("'loads' must map part names to pressures");
        for (auto it = loads->begin(); it != loads->end(); ++it) {
            if (!it.value().is_number()) throw ConfigError("'loads." + it.key() + "' must be a number (MPa)");
            setup.pressures[it.key()] = it.value().get<double>();
        }
    }
    if (const json* p = find(j, "penalty")) {
        setup.penalty.eps = get_or(*p, "epsilon", setup.penalty.eps, "penalty");
        setup.penalty.alpha = get_or(*p, "alpha", setup.penalty.alpha, "penalty");
        setup.penalty.P = get_or(*p, "P", setup.penalty.P, "penalty");
        setup.penalty.t_min = get_or(*p, "t_min", setup.penalty.t_min, "penalty");
    }
    setup.penalty.validate();

    cfg.problem.objective = objective_from_string(get_or<std::string>(j, "objective", "compliance", ""));
    cfg.problem.modes = get_or(j, "modes", cfg.problem.modes, "");
    cfg.problem.shape_gradient = shape_gradient_from_string(get_or<std::string>(j, "shape_gradient", "domain", ""));
    cfg.volume_fraction = get_or(j, "volume_fraction", cfg.volume_fraction, "");
    if (!(cfg.volume_fraction > 0.0 && cfg.volume_fraction < 1.0)) throw ConfigError("'volume_fraction' must lie in (0, 1)");

    if (const json* g = find(j, "grid")) {
        cfg.nx = get_or(*g, "nx", cfg.nx, "grid");
        cfg.ny = get_or(*g, "ny", cfg.ny, "grid");
        cfg.pattern = cell_pattern_from_string(get_or<std::string>(*g, "pattern", to_string(cfg.pattern), "grid"));
    }
    if (const json* t = find(j, "initial_thickness")) {
        cfg.t_boundary = get_or(*t, "boundary", cfg.t_boundary, "initial_thickness");
        cfg.t_interior = get_or(*t, "interior", cfg.t_interior, "initial_thickness");
    }
    if (const json* l = find(j, "initial_layout"); l && !l->is_null()) {
        std::filesystem::path p(l->get<std::string>());
        if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
        cfg.initial_layout = p.string();
    }
    if (const json* m = find(j, "mesh")) {
        cfg.problem.mesh.h_target = get_or(*m, "h", cfg.problem.mesh.h_target, "mesh");
        cfg.problem.mesh.n_layers = get_or(*m, "n_layers", cfg.problem.mesh.n_layers, "mesh");
        cfg.problem.mesh.min_length_factor = get_or(*m, "min_length_factor", cfg.problem.mesh.min_length_factor, "mesh");
        if (cfg.problem.mesh.n_layers < 2) throw ConfigError("'mesh.n_layers' must be at least 2");
    }
    OptimizerSettings& o = cfg.optimizer;
    if (const json* op = find(j, "optimizer")) {
        o.max_iterations = get_or(*op, "max_iterations", o.max_iterations, "optimizer");
        if (const json* tb = find(*op, "t_bounds")) {
            const Vec2 b = point(*tb, "optimizer.t_bounds");
            o.t_lower = b.x();
            o.t_upper = b.y();
        }
        o.t_move = get_or(*op, "t_move", o.t_move, "optimizer");
        o.node_move = pair_or(*op, "node_move", o.node_move, "optimizer");
        o.node_range = pair_or(*op, "node_range", o.node_range, "optimizer");
        o.fixed_boundary_thickness = get_or(*op, "fixed_boundary_thickness", o.fixed_boundary_thickness, "optimizer");
        o.convergence.consecutive = get_or(*op, "consecutive", o.convergence.consecutive, "optimizer");
        o.convergence.objective_tol = get_or(*op, "objective_tol", o.convergence.objective_tol, "optimizer");
        o.convergence.volume_tol = get_or(*op, "volume_tol", o.convergence.volume_tol, "optimizer");
    }
    if (o.max_iterations < 1) throw ConfigError("'optimizer.max_iterations' must be positive");
    if (!(o.t_lower > 0.0 && o.t_upper > o.t_lower)) throw ConfigError("'optimizer.t_bounds' must satisfy 0 < lo < hi");
    if (!(o.t_move > 0.0)) throw ConfigError("'optimizer.t_move' must be positive");
    if (const json* out = find(j, "output")) {
        cfg.output_dir = get_or(*out, "directory", cfg.output_dir, "output");
        cfg.snapshot_every = get_or(*out, "snapshot_every", cfg.snapshot_every, "output");
    }
    cfg.seed = get_or(j, "seed", cfg.seed, "");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read configuration '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), std::filesystem::path(path).parent_path().string());
}

GroundStructure initial_layout(const RunConfig& cfg) {
    if (cfg.initial_layout) return read_layout_file(*cfg.initial_layout).gs;
    const GroundStructure gs = build_ground_structure(cfg.problem.domain, cfg.nx, cfg.ny, cfg.pattern, cfg.t_boundary,
                                                      cfg.t_interior);
    for (const Stiffener& s : gs.stiffeners) {
        if (!(s.t >= cfg.optimizer.t_lower && s.t <= cfg.optimizer.t_upper)) {
            throw ConfigError("initial thickness outside 'optimizer.t_bounds'");
        }
    }
    return gs;
}

}  // namespace rudder
