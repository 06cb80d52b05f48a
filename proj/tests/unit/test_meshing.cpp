#include "rudder/error.hpp"
#include "rudder/meshing.hpp"
#include "rudder/model.hpp"

#include "rudder_fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>

using namespace rudder;

namespace {

constexpr double kPi = 3.14159265358979323846;

PlanformDomain square_domain() {
    PlanformDomain d;
    d.outline = {{0, 0}, {100, 0}, {100, 100}, {0, 100}};
    d.shaft = {{25, 25}, 6.0};
    d.upper = {0, 0, 1, -15};
    d.lower = {0, 0, 1, 15};
    return d;
}

double ref_area(const ReferenceMesh& m) {
    double a = 0.0;
    for (const auto& t : m.triangles) a += 0.5 * cross2(m.points[t[1]] - m.points[t[0]], m.points[t[2]] - m.points[t[0]]);
    return a;
}

std::set<std::pair<int, int>> edges(const ReferenceMesh& m) {
    std::set<std::pair<int, int>> e;
    for (const auto& t : m.triangles)
        for (int k = 0; k < 3; ++k) e.insert(std::minmax(t[k], t[(k + 1) % 3]));
    return e;
}

}  // namespace

TEST(ReferenceMesh, EmptySkeletonCoversSquareMinusShaft) {
    const auto d = square_domain();
    MeshParams mp;
    mp.h_target = d.shaft.radius / 10.0 * 5.0;
    const auto m = build_reference_mesh(d, GroundStructure{}, mp);
    const double expected = 100.0 * 100.0 - kPi * 36.0;
    EXPECT_NEAR(ref_area(m), expected, 2e-3 * expected);
    for (const auto& t : m.triangles) EXPECT_GT(cross2(m.points[t[1]] - m.points[t[0]], m.points[t[2]] - m.points[t[0]]), 0.0);
}

TEST(ReferenceMesh, AreaAtFineSpacing) {
    const auto d = square_domain();
    MeshParams mp;
    mp.h_target = d.shaft.radius / 10.0;
    PlanformDomain small = d;
    small.outline = {{0, 0}, {40, 0}, {40, 40}, {0, 40}};
    small.shaft = {{20, 20}, 6.0};
    const auto m = build_reference_mesh(small, GroundStructure{}, mp);
    const double expected = 1600.0 - kPi * 36.0;
    EXPECT_NEAR(ref_area(m), expected, 2e-3 * expected);
}

TEST(ReferenceMesh, DiagonalSkeletonIsResolvedByEdges) {
    const auto d = square_domain();
    GroundStructure gs;
    gs.nodes = {{{40, 10}, false}, {{90, 85}, false}};
    gs.stiffeners = {{0, 1, 5.0, false}};
    MeshParams mp;
    mp.h_target = 8.0;
    const auto m = build_reference_mesh(d, gs, mp);
    ASSERT_TRUE(m.active[0]);
    const auto& tr = m.stiffener_traces[0];
    ASSERT_GE(tr.size(), 2u);
    EXPECT_EQ(m.points[tr.front()], Vec2(40, 10));
    EXPECT_EQ(m.points[tr.back()], Vec2(90, 85));
    const auto e = edges(m);
    for (std::size_t k = 0; k + 1 < tr.size(); ++k) {
        EXPECT_TRUE(e.count(std::minmax(tr[k], tr[k + 1])));
        EXPECT_LE((m.points[tr[k + 1]] - m.points[tr[k]]).norm(), 8.0 * 1.01);
        EXPECT_LT(distance_to_segment(m.points[tr[k]], {40, 10}, {90, 85}), 1e-9);
    }
}

TEST(ReferenceMesh, CrossingStiffenersShareAJunctionPoint) {
    const auto d = square_domain();
    GroundStructure gs;
    gs.nodes = {{{40, 40}, true}, {{90, 90}, true}, {{90, 40}, true}, {{40, 90}, true}};
    gs.stiffeners = {{0, 1, 5.0, false}, {2, 3, 5.0, false}};
    MeshParams mp;
    mp.h_target = 7.0;
    const auto m = build_reference_mesh(d, gs, mp);
    std::set<int> a(m.stiffener_traces[0].begin(), m.stiffener_traces[0].end());
    int shared = 0;
    for (int v : m.stiffener_traces[1]) {
        if (a.count(v)) {
            ++shared;
            EXPECT_NEAR((m.points[v] - Vec2(65, 65)).norm(), 0.0, 1e-9);
        }
    }
    EXPECT_EQ(shared, 1);
}

TEST(ReferenceMesh, ShortStiffenerIsInactive) {
    const auto d = square_domain();
    GroundStructure gs;
    gs.nodes = {{{50, 50}, true}, {{52, 50}, true}};
    gs.stiffeners = {{0, 1, 5.0, false}};
    MeshParams mp;
    mp.h_target = 5.0;
    const auto m = build_reference_mesh(d, gs, mp);
    EXPECT_FALSE(m.active[0]);
    EXPECT_TRUE(m.stiffener_traces[0].empty());
}

TEST(ExtrudeAndLift, StructuredStripCountsAndConformity) {
    auto d = square_domain();
    GroundStructure gs;
    gs.nodes = {{{0, 60}, false}, {{100, 60}, false}};
    gs.stiffeners = {{0, 1, 5.0, false}};
    MeshParams mp;
    mp.h_target = 10.0;
    const auto ref = build_reference_mesh(d, gs, mp);
    const auto mesh = extrude_and_lift(ref, d, gs, 2);
    const auto& els = mesh.stiffener_elements[0];
    const std::size_t segments = ref.stiffener_traces[0].size() - 1;
    EXPECT_EQ(segments, 10u);
    EXPECT_EQ(els.size(), segments * 4);
    double zmin = 1e9, zmax = -1e9;
    std::set<int> upper_nodes;
    for (const auto& e : mesh.elements) {
        if (e.part == ShellMesh::kUpper)
            for (int a = 0; a < 3; ++a) upper_nodes.insert(e.nodes[a]);
    }
    for (int k : els) {
        const auto& e = mesh.elements[k];
        EXPECT_EQ(e.count, 4);
        for (int a = 0; a < 4; ++a) {
            const Vec3& p = mesh.nodes[e.nodes[a]];
            zmin = std::min(zmin, p.z());
            zmax = std::max(zmax, p.z());
            if (std::abs(p.z() - 15.0) < 1e-12) EXPECT_TRUE(upper_nodes.count(e.nodes[a]));
        }
    }
    EXPECT_DOUBLE_EQ(zmin, -15.0);
    EXPECT_DOUBLE_EQ(zmax, 15.0);
}

TEST(ExtrudeAndLift, TopEdgeNodesCoincideWithSkinNodes) {
    const auto d = testsupport::small_rudder_domain();
    const auto gs = testsupport::small_rudder_layout();
    MeshParams mp;
    mp.h_target = 10.0;
    const auto ref = build_reference_mesh(d, gs, mp);
    const auto mesh = extrude_and_lift(ref, d, gs, 3);
    std::set<int> skin;
    for (const auto& e : mesh.elements)
        if (e.part == ShellMesh::kUpper || e.part == ShellMesh::kLower)
            for (int a = 0; a < 3; ++a) skin.insert(e.nodes[a]);
    for (std::size_t i = 0; i < gs.stiffeners.size(); ++i) {
        for (int k : mesh.stiffener_elements[i]) {
            const auto& e = mesh.elements[k];
            for (int a = 0; a < 4; ++a) {
                const Vec3& p = mesh.nodes[e.nodes[a]];
                const Vec2 xy(p.x(), p.y());
                const bool on_skin = std::abs(p.z() - d.skin_z(Side::upper, xy)) < 1e-9 ||
                                     std::abs(p.z() - d.skin_z(Side::lower, xy)) < 1e-9;
                if (on_skin) EXPECT_TRUE(skin.count(e.nodes[a]));
            }
        }
    }
    // No orphan nodes; every element carries exactly one valid part.
    std::vector<int> used(mesh.nodes.size(), 0);
    for (const auto& e : mesh.elements) {
        ASSERT_GE(e.part, 0);
        ASSERT_LT(e.part, static_cast<int>(mesh.parts.size()));
        for (int a = 0; a < e.count; ++a) used[e.nodes[a]] = 1;
    }
    for (int u : used) EXPECT_EQ(u, 1);
    const auto q = mesh_quality(mesh);
    EXPECT_GT(q.min_area, 1e-6);
    EXPECT_LE(q.max_aspect, 20.0);
}

TEST(ExtrudeAndLift, MeshMassMatchesAnalyticMass) {
    const auto d = testsupport::small_rudder_domain();
    const auto gs = testsupport::small_rudder_layout(2.0, 5.0);
    const auto setup = testsupport::default_setup();
    MeshParams mp;
    mp.h_target = 8.0;
    const auto ref = build_reference_mesh(d, gs, mp);
    const auto model = apply_bcs_and_loads(extrude_and_lift(ref, d, gs, 2), d, gs, setup);
    double mesh_mass = 0.0, collar = 0.0;
    for (std::size_t k = 0; k < model.mesh.elements.size(); ++k) {
        const double m = element_area(model.mesh, model.mesh.elements[k]) * model.thickness[k] * model.density[k];
        if (model.mesh.elements[k].part == ShellMesh::kCollar) collar += m;
        else mesh_mass += m;
    }
    const double rho = setup.materials[0].rho;
    // Skins: true (sloped) area over the planform minus the shaft disc.
    const double proj = 160.0 * 100.0 - kPi * 64.0;
    const double su = std::sqrt(1.0 + 0.03 * 0.03), sl = std::sqrt(1.0 + 0.02 * 0.02);
    double analytic = proj * (su + sl) * d.skin_thickness * rho;
    for (std::size_t i = 0; i < gs.stiffeners.size(); ++i) {
        const auto te = penalized_thickness(gs.stiffeners[i].t, setup.penalty).value;
        const auto re = penalized_density(gs.stiffeners[i].t, rho, setup.penalty).value;
        analytic += stiffener_volume(skeleton_of(gs, static_cast<int>(i)), d, 1.0) * te * re;
    }
    EXPECT_NEAR(mesh_mass, analytic, 1e-2 * analytic);
    EXPECT_GT(collar, 0.0);
}

TEST(ExtrudeAndLift, StiffenerAreaTimesThicknessEqualsAnalyticVolume) {
    const auto d = testsupport::small_rudder_domain();
    const auto gs = testsupport::small_rudder_layout(4.5, 5.0);
    MeshParams mp;
    mp.h_target = 9.0;
    const auto ref = build_reference_mesh(d, gs, mp);
    const auto mesh = extrude_and_lift(ref, d, gs, 4);
    for (std::size_t i = 0; i < gs.stiffeners.size(); ++i) {
        double a = 0.0;
        for (int k : mesh.stiffener_elements[i]) a += element_area(mesh, mesh.elements[k]);
        const double v = stiffener_volume(skeleton_of(gs, static_cast<int>(i)), d, 4.5);
        EXPECT_NEAR(a * 4.5, v, 5e-3 * v) << "stiffener " << i;
    }
}

TEST(ApplyBcsAndLoads, ForceFixityAndZeroLoad) {
    const auto d = testsupport::small_rudder_domain();
    const auto gs = testsupport::small_rudder_layout();
    auto setup = testsupport::default_setup();
    MeshParams mp;
    mp.h_target = 10.0;
    const auto ref = build_reference_mesh(d, gs, mp);
    const int nl = 3;
    const auto model = apply_bcs_and_loads(extrude_and_lift(ref, d, gs, nl), d, gs, setup);
    double fz_upper = 0.0;
    for (const auto& e : model.mesh.elements) {
        if (e.part != ShellMesh::kUpper) continue;
        (void)e;
    }
    // Separate the upper-skin contribution by rebuilding with only that pressure.
    setup.pressures = {{"skin-upper", 0.2}};
    const auto up = apply_bcs_and_loads(extrude_and_lift(ref, d, gs, nl), d, gs, setup);
    for (int n = 0; n < up.node_count(); ++n) fz_upper += up.load(6 * n + 2);
    const double proj = ref_area(ref);
    EXPECT_NEAR(fz_upper, -0.2 * proj, 1e-3 * 0.2 * proj);
    EXPECT_EQ(model.mesh.fixed_nodes.size(), ref.shaft_loop.size() * static_cast<std::size_t>(2 * nl + 1));

    setup.pressures = {{"skin-upper", 0.0}};
    const auto zero = apply_bcs_and_loads(extrude_and_lift(ref, d, gs, nl), d, gs, setup);
    EXPECT_EQ(zero.load.norm(), 0.0);

    setup.pressures = {{"skin-middle", 0.1}};
    EXPECT_THROW(apply_bcs_and_loads(extrude_and_lift(ref, d, gs, nl), d, gs, setup), ConfigError);
}

TEST(Remeshing, IdenticalDesignGivesIdenticalMesh) {
    const auto d = testsupport::small_rudder_domain();
    const auto gs = testsupport::small_rudder_layout();
    MeshParams mp;
    mp.h_target = 9.0;
    const auto a = extrude_and_lift(build_reference_mesh(d, gs, mp), d, gs, 2);
    const auto b = extrude_and_lift(build_reference_mesh(d, gs, mp), d, gs, 2);
    ASSERT_EQ(a.nodes.size(), b.nodes.size());
    ASSERT_EQ(a.elements.size(), b.elements.size());
    for (std::size_t i = 0; i < a.nodes.size(); ++i) EXPECT_EQ(a.nodes[i], b.nodes[i]);
    for (std::size_t i = 0; i < a.elements.size(); ++i) EXPECT_EQ(a.elements[i].nodes, b.elements[i].nodes);
}

TEST(ReferenceMesh, LeadingEdgeTraceAndZone) {
    auto d = testsupport::small_rudder_domain();
    d.leading_edge = Plane{1.0, 0.0, 1.0, -140.0};
    const auto gs = build_ground_structure(d, 3, 3, CellPattern::x_braced, 5.0, 2.0);
    MeshParams mp;
    mp.h_target = 10.0;
    const auto ref = build_reference_mesh(d, gs, mp);
    ASSERT_EQ(ref.leading_edge_traces.size(), 1u);
    for (int v : ref.leading_edge_traces[0]) EXPECT_NEAR(ref.points[v].x(), 140.0, 1e-9);
    double zone = 0.0;
    for (std::size_t t = 0; t < ref.triangles.size(); ++t) {
        if (!ref.leading_edge_zone[t]) continue;
        const auto& tr = ref.triangles[t];
        zone += 0.5 * cross2(ref.points[tr[1]] - ref.points[tr[0]], ref.points[tr[2]] - ref.points[tr[0]]);
    }
    EXPECT_NEAR(zone, 20.0 * 100.0, 1e-6);
    const auto mesh = extrude_and_lift(ref, d, gs, 2);
    int le = 0;
    for (const auto& e : mesh.elements) le += e.part == ShellMesh::kLeadingEdge ? 1 : 0;
    EXPECT_GT(le, 0);
}
