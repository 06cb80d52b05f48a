#include "rudder/layout_io.hpp"

#include "rudder/error.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace rudder {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr int kVersion = 1;

ordered_json plane_json(const Plane& p) { return {{"a", p.a}, {"b", p.b}, {"c", p.c}, {"d", p.d}}; }

ordered_json point_json(const Vec3& p) { return ordered_json::array({p.x(), p.y(), p.z()}); }

Plane plane_from(const json& j, const char* name) {
    if (!j.is_object()) throw ConfigError(std::string("layout plane '") + name + "' must be an object");
    try {
        return {j.at("a").get<double>(), j.at("b").get<double>(), j.at("c").get<double>(), j.at("d").get<double>()};
    } catch (const json::exception&) {
        throw ConfigError(std::string("layout plane '") + name + "' needs numeric a, b, c, d");
    }
}

bool same_plane(const Plane& p, const Plane& q) {
    auto close = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); };
    return close(p.a, q.a) && close(p.b, q.b) && close(p.c, q.c) && close(p.d, q.d);
}

}  // namespace

std::string layout_to_json(const GroundStructure& gs, const PlanformDomain& domain, const PenaltyParams& penalty) {
    ordered_json doc;
    doc["version"] = kVersion;
    doc["units"] = {{"length", "mm"}, {"force", "N"}, {"stress", "MPa"}, {"mass", "tonne"}, {"time", "s"}};
    ordered_json planes;
    planes["upper"] = plane_json(domain.upper);
    planes["lower"] = plane_json(domain.lower);
    planes["leading_edge"] = domain.leading_edge ? plane_json(*domain.leading_edge) : ordered_json(nullptr);
    doc["planes"] = planes;
    doc["pattern"] = to_string(gs.pattern);

    ordered_json nodes = ordered_json::array();
    for (std::size_t i = 0; i < gs.nodes.size(); ++i) {
        const DrivingNode& n = gs.nodes[i];
        nodes.push_back({{"id", i}, {"x", n.pos.x()}, {"y", n.pos.y()}, {"movable", n.movable}});
    }
    doc["nodes"] = nodes;

    static const std::pair<Face, const char*> faces[] = {
        {Face::I1, "I1"}, {Face::I3, "I3"}, {Face::II1, "II1"}, {Face::II3, "II3"}};
    ordered_json stiffeners = ordered_json::array();
    for (std::size_t i = 0; i < gs.stiffeners.size(); ++i) {
        const Stiffener& s = gs.stiffeners[i];
        const double t_eps = penalized_thickness(s.t, penalty).value;
        ordered_json js;
        js["id"] = i;
        js["node_a"] = s.node_a;
        js["node_b"] = s.node_b;
        js["t"] = s.t;
        js["t_eps"] = t_eps;
        js["boundary"] = s.boundary;
        const Skeleton sk = skeleton_of(gs, static_cast<int>(i));
        ordered_json heights = {{"eta", {0.0, 0.5, 1.0}}, {"upper", ordered_json::array()}, {"lower", ordered_json::array()}};
        for (double eta : {0.0, 0.5, 1.0}) {
            heights["upper"].push_back(stiffener_height(sk, domain, Side::upper, eta));
            heights["lower"].push_back(stiffener_height(sk, domain, Side::lower, eta));
        }
        js["heights"] = heights;
        // Side-face corners at (eta, zeta) = (0,0), (1,0), (1,1), (0,1).
        ordered_json fj;
        if (stiffener_length(sk) > 0.0) {
            for (const auto& [face, name] : faces) {
                ordered_json corners = ordered_json::array();
                for (const auto& [e, z] : {std::pair{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}) {
                    corners.push_back(point_json(face_point(sk, domain, t_eps, face, e, z)));
                }
                fj[name] = corners;
            }
        }
        js["faces"] = fj;
        stiffeners.push_back(js);
    }
    doc["stiffeners"] = stiffeners;
    return doc.dump(1) + "\n";
}

LayoutDocument layout_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("layout is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("layout must be a JSON object");
    if (doc.value("version", 0) != kVersion) throw ConfigError("unsupported layout version");
    LayoutDocument out;
    try {
        const json& planes = doc.at("planes");
        out.upper = plane_from(planes.at("upper"), "upper");
        out.lower = plane_from(planes.at("lower"), "lower");
        if (planes.contains("leading_edge") && !planes["leading_edge"].is_null()) {
            out.leading_edge = plane_from(planes["leading_edge"], "leading_edge");
        }
        if (doc.contains("pattern")) out.gs.pattern = cell_pattern_from_string(doc["pattern"].get<std::string>());
        const json& nodes = doc.at("nodes");
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const json& n = nodes[i];
            if (n.at("id").get<std::size_t>() != i) throw ConfigError("layout node ids must be 0..n-1 in order");
            out.gs.nodes.push_back({{n.at("x").get<double>(), n.at("y").get<double>()}, n.at("movable").get<bool>()});
        }
        const json& stiffeners = doc.at("stiffeners");
        const int nn = static_cast<int>(out.gs.nodes.size());
        for (std::size_t i = 0; i < stiffeners.size(); ++i) {
            const json& s = stiffeners[i];
            if (s.at("id").get<std::size_t>() != i) throw ConfigError("layout stiffener ids must be 0..n-1 in order");
            Stiffener st{s.at("node_a").get<int>(), s.at("node_b").get<int>(), s.at("t").get<double>(),
                         s.value("boundary", false)};
            if (st.node_a < 0 || st.node_a >= nn || st.node_b < 0 || st.node_b >= nn || st.node_a == st.node_b) {
                throw ConfigError("layout stiffener " + std::to_string(i) + " has invalid node references");
            }
            if (!(st.t > 0.0)) throw ConfigError("layout stiffener " + std::to_string(i) + " has non-positive t");
            out.gs.stiffeners.push_back(st);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("layout schema violation: ") + e.what());
    }
    return out;
}

LayoutDocument read_layout_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read layout '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return layout_from_json(ss.str());
}

void check_planes_match(const LayoutDocument& doc, const PlanformDomain& domain) {
    const bool le_match = doc.leading_edge.has_value() == domain.leading_edge.has_value() &&
                          (!doc.leading_edge || same_plane(*doc.leading_edge, *domain.leading_edge));
    if (!same_plane(doc.upper, domain.upper) || !same_plane(doc.lower, domain.lower) || !le_match) {
        throw ConfigError("layout skin planes do not match the configuration");
    }
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    std::error_code ec;
    if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) throw IoError("write to '" + tmp.string() + "' failed");
    }
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot move output into place at '" + path + "'");
    }
}

}  // namespace rudder
