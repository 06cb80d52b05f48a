#pragma once

// Layout JSON: nodes, stiffeners with thickness, heights and face corners.
// Reading only needs nodes and stiffeners; derived fields are for CAD import.

#include "rudder/geometry.hpp"
#include "rudder/penalty.hpp"

#include <string>

namespace rudder {

struct LayoutDocument {
    GroundStructure gs;
    Plane upper;
    Plane lower;
    std::optional<Plane> leading_edge;
};

std::string layout_to_json(const GroundStructure& gs, const PlanformDomain& domain, const PenaltyParams& penalty);

/// Throws ConfigError on a schema violation.
LayoutDocument layout_from_json(const std::string& text);
LayoutDocument read_layout_file(const std::string& path);

/// Writes to a sibling temporary file and renames it over `path`.
/// Throws IoError.
void write_file_atomic(const std::string& path, const std::string& content);

/// Throws ConfigError when the layout planes differ from the domain's.
void check_planes_match(const LayoutDocument& doc, const PlanformDomain& domain);

}  // namespace rudder
