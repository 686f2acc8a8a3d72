#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>

#include "rfsi/errors.hpp"
#include "rfsi/mesh.hpp"
#include "rfsi/rotation.hpp"
#include "rfsi/vtk_io.hpp"

using namespace rfsi;

namespace {

ChannelRotorGeometry table1_geometry() {
    ChannelRotorGeometry g;
    g.channel_length = 0.5;
    g.channel_width = 0.2;
    g.arm_length = 0.1;
    g.arm_width = 0.015;
    g.buffer_radius = 0.075;
    g.axis_radius = 0.005;
    g.center = {0.2, 0.1};
    return g;
}

// Independent edge census for the Euler-characteristic check: counts unique
// undirected edges over a triangle subset.
int count_edges(const Mesh& mesh, const std::set<int>& tris) {
    std::set<std::pair<int, int>> edges;
    for (int t : tris)
        for (int v = 0; v < 3; ++v) {
            int a = mesh.tri[t][v], b = mesh.tri[t][(v + 1) % 3];
            if (a > b) std::swap(a, b);
            edges.insert({a, b});
        }
    return static_cast<int>(edges.size());
}

int count_nodes(const Mesh& mesh, const std::set<int>& tris) {
    std::set<int> nodes;
    for (int t : tris)
        for (int v = 0; v < 3; ++v) nodes.insert(mesh.tri[t][v]);
    return static_cast<int>(nodes.size());
}

}  // namespace

TEST_CASE("table-1 geometry meshes cleanly") {
    const Mesh mesh = build_rotor_channel_mesh(table1_geometry(), 0.02);
    CHECK(mesh.n_nodes() > 0);
    CHECK(mesh.ring_rot.size() == mesh.ring_stat.size());
    CHECK(mesh.ring_m() >= 16);
    CHECK(validate_conformity(mesh).empty());

    // subdomain tags cover the whole rectangle: total reference area
    double area[3] = {0, 0, 0};
    for (int t = 0; t < mesh.n_tris(); ++t) {
        CHECK(mesh.tri_area_ref(t) > 0.0);
        area[static_cast<int>(mesh.tri_tag[t])] += mesh.tri_area_ref(t);
    }
    const ChannelRotorGeometry g = table1_geometry();
    const double rect = g.channel_length * g.channel_width;
    const double axis_hole = M_PI * g.axis_radius * g.axis_radius;
    // the axis disk is excluded; circles are polygonal so allow a resolution margin
    CHECK(area[0] + area[1] + area[2] ==
          doctest::Approx(rect - axis_hole).epsilon(0.01));
    CHECK(area[0] > 0.0);  // structure
    CHECK(area[1] > 0.0);  // rotational fluid
    CHECK(area[2] > 0.0);  // stationary fluid

    // both rings coincide exactly at t=0
    for (int i = 0; i < mesh.ring_m(); ++i) {
        CHECK(mesh.ref[mesh.ring_rot[i]].x == mesh.ref[mesh.ring_stat[i]].x);
        CHECK(mesh.ref[mesh.ring_rot[i]].y == mesh.ref[mesh.ring_stat[i]].y);
    }
}

TEST_CASE("Euler characteristic per connected component (annulus topology)") {
    const Mesh mesh = build_rotor_channel_mesh(table1_geometry(), 0.02);
    // component 1: structure + rotational fluid (share Gamma nodes); it is an
    // annulus (outer ring boundary, inner axis-circle hole): V - E + F = 0
    std::set<int> comp1, comp2;
    for (int t = 0; t < mesh.n_tris(); ++t) {
        if (mesh.tri_tag[t] == Subdomain::StatFluid) comp2.insert(t);
        else comp1.insert(t);
    }
    const int v1 = count_nodes(mesh, comp1), e1 = count_edges(mesh, comp1),
              f1 = static_cast<int>(comp1.size());
    CHECK(v1 - e1 + f1 == 0);
    // component 2: channel rectangle with a disk hole: also an annulus
    const int v2 = count_nodes(mesh, comp2), e2 = count_edges(mesh, comp2),
              f2 = static_cast<int>(comp2.size());
    CHECK(v2 - e2 + f2 == 0);
}

TEST_CASE("invalid geometry rejected") {
    ChannelRotorGeometry g = table1_geometry();
    g.buffer_radius = 0.11;  // > W/2
    CHECK_THROWS_AS(build_rotor_channel_mesh(g, 0.02), InvalidGeometry);

    g = table1_geometry();
    g.axis_radius = 0.01;  // >= half arm width
    CHECK_THROWS_AS(build_rotor_channel_mesh(g, 0.02), InvalidGeometry);

    g = table1_geometry();
    g.arm_length = 0.16;  // tip corner outside the buffer
    CHECK_THROWS_AS(build_rotor_channel_mesh(g, 0.02), InvalidGeometry);
}

TEST_CASE("requested ring node count is honored") {
    MeshResolution res;
    res.ring_nodes = 64;
    const Mesh mesh = build_rotor_channel_mesh(table1_geometry(), 0.01, res);
    CHECK(mesh.ring_m() == 64);
    CHECK(validate_conformity(mesh).empty());
}

TEST_CASE("mesh generation is deterministic (bit-identical)") {
    const Mesh a = build_rotor_channel_mesh(table1_geometry(), 0.02);
    const Mesh b = build_rotor_channel_mesh(table1_geometry(), 0.02);
    REQUIRE(a.n_nodes() == b.n_nodes());
    for (int i = 0; i < a.n_nodes(); ++i) {
        CHECK(a.ref[i].x == b.ref[i].x);
        CHECK(a.ref[i].y == b.ref[i].y);
    }
    CHECK(a.tri == b.tri);
}

TEST_CASE("extract_ring ordering and anchoring") {
    const Mesh mesh = build_rotor_channel_mesh(table1_geometry(), 0.02);
    const InterfaceRing rot = extract_ring(mesh, BoundaryTag::InterfaceGammaRs, RingSide::Rotating);
    const InterfaceRing st = extract_ring(mesh, BoundaryTag::InterfaceGammaRs, RingSide::Stationary);
    CHECK(rot.size() == st.size());
    CHECK(rot.size() == mesh.ring_m());
    CHECK(rot.angles.front() == doctest::Approx(0.0).epsilon(1e-14));
    for (int i = 1; i < rot.size(); ++i) CHECK(rot.angles[i] > rot.angles[i - 1]);
    // equal counts verified by an independent walk over tagged edges
    int rot_edges = 0, st_edges = 0;
    for (const TaggedEdge& e : mesh.tagged_edges) {
        if (e.tag != BoundaryTag::InterfaceGammaRs) continue;
        (e.side == Subdomain::RotFluid ? rot_edges : st_edges)++;
    }
    CHECK(rot_edges == st_edges);
    CHECK(rot_edges == rot.size());
}

TEST_CASE("extract_ring error paths on a hand-built square loop") {
    // 4 nodes at angles 10, 100, 190, 280 degrees; ordering starts at 10 deg
    Mesh m;
    m.center = {0, 0};
    const double deg = M_PI / 180.0;
    for (double a : {100.0, 280.0, 10.0, 190.0})
        m.ref.push_back({std::cos(a * deg), std::sin(a * deg)});
    m.cur = m.ref;
    m.node_flags.assign(4, 0);
    m.tagged_edges = {{0, 2, BoundaryTag::InterfaceGammaRs, Subdomain::RotFluid},
                      {0, 3, BoundaryTag::InterfaceGammaRs, Subdomain::RotFluid},
                      {3, 1, BoundaryTag::InterfaceGammaRs, Subdomain::RotFluid},
                      {1, 2, BoundaryTag::InterfaceGammaRs, Subdomain::RotFluid}};
    const InterfaceRing ring = extract_ring(m, BoundaryTag::InterfaceGammaRs, RingSide::Rotating);
    CHECK(ring.nodes == std::vector<int>{2, 0, 3, 1});
    CHECK(ring.angles[0] == doctest::Approx(10.0 * deg));
    CHECK(ring.angles[3] == doctest::Approx(280.0 * deg));

    // drop one edge: open curve
    Mesh open = m;
    open.tagged_edges.pop_back();
    CHECK_THROWS_AS(extract_ring(open, BoundaryTag::InterfaceGammaRs, RingSide::Rotating),
                    OpenCurve);
}

TEST_CASE("mesh quality basics") {
    SUBCASE("single equilateral triangle: min angle 60") {
        Mesh m;
        m.center = {0, 0};
        m.ref = {{0, 0}, {1, 0}, {0.5, std::sqrt(3.0) / 2.0}};
        m.cur = m.ref;
        m.tri = {{0, 1, 2}};
        m.tri_tag = {Subdomain::StatFluid};
        m.node_flags.assign(3, NodeInStatFluid);
        const QualityReport q = mesh_quality(m);
        CHECK(q.min_angle_deg == doctest::Approx(60.0).epsilon(1e-12));
        CHECK(q.nonpositive_count == 0);
    }
    SUBCASE("right isoceles triangle: min angle 45") {
        Mesh m;
        m.center = {0, 0};
        m.ref = {{0, 0}, {1, 0}, {0, 1}};
        m.cur = m.ref;
        m.tri = {{0, 1, 2}};
        m.tri_tag = {Subdomain::StatFluid};
        m.node_flags.assign(3, NodeInStatFluid);
        CHECK(mesh_quality(m).min_angle_deg == doctest::Approx(45.0).epsilon(1e-12));
    }
    SUBCASE("rigid rotation of the rotating region preserves the report") {
        Mesh mesh = build_rotor_channel_mesh(table1_geometry(), 0.02);
        const QualityReport before = mesh_quality(mesh);
        const Mat2 R = rotation_matrix(17.0 * M_PI / 180.0);
        // the rotor rotates rigidly with its buffer (conforming interface)
        for (int nd = 0; nd < mesh.n_nodes(); ++nd)
            if (mesh.flag(nd, NodeInRotFluid) || mesh.flag(nd, NodeInStructure))
                mesh.cur[nd] = mesh.center + R * (mesh.ref[nd] - mesh.center);
        const QualityReport after = mesh_quality(mesh);
        CHECK(after.min_angle_deg == doctest::Approx(before.min_angle_deg).epsilon(1e-12));
        CHECK(after.min_area == doctest::Approx(before.min_area).epsilon(1e-12));
        CHECK(after.max_aspect == doctest::Approx(before.max_aspect).epsilon(1e-12));
    }
}

TEST_CASE("conformity validation catches duplicated nodes") {
    Mesh mesh = build_rotor_channel_mesh(table1_geometry(), 0.02);
    CHECK(validate_conformity(mesh).empty());
    // clone an interior node's coordinates onto another non-paired node
    int a = -1, b = -1;
    for (int nd = 0; nd < mesh.n_nodes() && b < 0; ++nd) {
        if (mesh.flag(nd, NodeInStatFluid) && !mesh.flag(nd, NodeOnRingStat)) {
            if (a < 0) a = nd;
            else b = nd;
        }
    }
    REQUIRE(b >= 0);
    mesh.cur[b] = mesh.cur[a];
    bool found = false;
    for (const auto& d : validate_conformity(mesh))
        if (d.kind == "duplicate node") found = true;
    CHECK(found);
}

TEST_CASE("gamma edges separate structure and rotational fluid") {
    const Mesh mesh = build_rotor_channel_mesh(table1_geometry(), 0.02);
    // exhaustive: the tagged Gamma edge set equals the set of edges shared by
    // a Structure and a RotFluid triangle
    std::map<std::pair<int, int>, std::set<Subdomain>> census;
    for (int t = 0; t < mesh.n_tris(); ++t)
        for (int v = 0; v < 3; ++v) {
            int a = mesh.tri[t][v], b = mesh.tri[t][(v + 1) % 3];
            if (a > b) std::swap(a, b);
            census[{a, b}].insert(mesh.tri_tag[t]);
        }
    std::set<std::pair<int, int>> shared;
    for (const auto& [e, tags] : census)
        if (tags.count(Subdomain::Structure) && tags.count(Subdomain::RotFluid)) shared.insert(e);
    std::set<std::pair<int, int>> tagged;
    for (const TaggedEdge& e : mesh.tagged_edges) {
        if (e.tag != BoundaryTag::InterfaceGamma) continue;
        tagged.insert({std::min(e.a, e.b), std::max(e.a, e.b)});
    }
    CHECK(shared == tagged);
}

TEST_CASE("mesh VTK export round-trips through the engine reader") {
    const Mesh mesh = build_rotor_channel_mesh(table1_geometry(), 0.025);
    const auto path = std::filesystem::temp_directory_path() / "rfsi_mesh_test.vtk";
    write_mesh_vtk(mesh, path.string());
    const VtkSnapshot snap = read_vtk_snapshot(path.string());
    REQUIRE(static_cast<int>(snap.points.size()) == mesh.n_nodes());
    REQUIRE(static_cast<int>(snap.cells.size()) == mesh.n_tris());
    for (int i = 0; i < mesh.n_nodes(); ++i) {
        CHECK(snap.points[i].x == mesh.cur[i].x);
        CHECK(snap.points[i].y == mesh.cur[i].y);
    }
    for (int t = 0; t < mesh.n_tris(); ++t)
        CHECK(snap.subdomain[t] == static_cast<int>(mesh.tri_tag[t]));
    std::filesystem::remove(path);
}
