#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "rfsi/ale.hpp"
#include "rfsi/errors.hpp"
#include "rfsi/rotation.hpp"

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

Mesh make_mesh(int ring_nodes = 0, double h = 0.02) {
    MeshResolution res;
    res.ring_nodes = ring_nodes;
    return build_rotor_channel_mesh(table1_geometry(), h, res);
}

// Brute-force oracle: for each rotated node, search the stationary node
// reached by moving forward (counterclockwise) from its current angle; an
// exact landing counts as reached.
int oracle_forward_target(double current_angle, int m) {
    const double spacing = 2.0 * M_PI / m;
    double best_gap = 1e300;
    int best = -1;
    for (int j = 0; j < m; ++j) {
        double gap = j * spacing - current_angle;
        while (gap < -1e-9) gap += 2.0 * M_PI;
        if (gap < best_gap) {
            best_gap = gap;
            best = j;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("matching at theta=0 is the identity") {
    const Mesh mesh = make_mesh();
    const auto r = match_sliding_interface(rotated_rotating_ring(mesh, 0.0),
                                           stationary_ring(mesh), 0.0);
    CHECK(r.shift == 0);
    for (const Vec2& u : r.u_m) CHECK(norm(u) == 0.0);
}

TEST_CASE("matching at exactly one spacing shifts by one with zero correction") {
    const Mesh mesh = make_mesh();
    const int m = mesh.ring_m();
    const double spacing = 2.0 * M_PI / m;
    const auto r = match_sliding_interface(rotated_rotating_ring(mesh, spacing),
                                           stationary_ring(mesh), spacing);
    CHECK(r.shift == 1);
    for (const Vec2& u : r.u_m) CHECK(norm(u) < 1e-12);
}

TEST_CASE("matching at 1.5 spacings on a 16-node ring: K=2, |u_m| from geometry") {
    MeshResolution res;
    res.ring_nodes = 0;
    res.n_wid = 2;
    res.n_len = 0;  // derive; we only need some mesh to steal the ring layout from
    const Mesh mesh = make_mesh(16 * 8 / 8 * 0 + 0, 0.02);  // default mesh; m may differ
    // Build a synthetic pair of rings with m=16 directly.
    const int m = 16;
    const double rbuf = 0.075;
    const Vec2 c{0.2, 0.1};
    InterfaceRing st, rot;
    st.side = RingSide::Stationary;
    rot.side = RingSide::Rotating;
    st.center = rot.center = c;
    const double theta = 1.5 * (2.0 * M_PI / m);
    for (int k = 0; k < m; ++k) {
        const double a = 2.0 * M_PI * k / m;
        st.nodes.push_back(k);
        st.positions.push_back(c + Vec2{rbuf * std::cos(a), rbuf * std::sin(a)});
        st.angles.push_back(a);
        rot.nodes.push_back(k);
        rot.positions.push_back(c + Vec2{rbuf * std::cos(a + theta), rbuf * std::sin(a + theta)});
        rot.angles.push_back(std::fmod(a + theta, 2.0 * M_PI));
    }
    const auto r = match_sliding_interface(rot, st, theta);
    CHECK(r.shift == 2);
    // all corrections have the chord length of half a spacing
    const double expect = 2.0 * rbuf * std::sin(0.25 * 2.0 * M_PI / m);
    for (const Vec2& u : r.u_m) CHECK(norm(u) == doctest::Approx(expect).epsilon(1e-12));
    // and the brute-force forward search agrees with the cyclic map
    for (int i = 0; i < m; ++i) {
        const double cur = std::fmod(2.0 * M_PI * i / m + theta, 2.0 * M_PI);
        CHECK(oracle_forward_target(cur, m) == static_cast<int>((r.shift + i) % m));
    }
}

TEST_CASE("matching shift is nondecreasing and advances by m per revolution") {
    const Mesh mesh = make_mesh();
    const int m = mesh.ring_m();
    const InterfaceRing st = stationary_ring(mesh);
    long long prev = 0;
    for (int i = 0; i <= 1000; ++i) {
        const double theta = i * (2.0 * M_PI / 1000.0);
        const auto r = match_sliding_interface(rotated_rotating_ring(mesh, theta), st, theta);
        CHECK(r.shift >= prev);
        prev = r.shift;
    }
    CHECK(prev == m);  // theta = 2*pi maps every node one full cycle forward
}

TEST_CASE("ring mismatch raises") {
    const Mesh mesh = make_mesh();
    InterfaceRing st = stationary_ring(mesh);
    st.nodes.pop_back();
    st.positions.pop_back();
    st.angles.pop_back();
    CHECK_THROWS_AS(
        match_sliding_interface(rotated_rotating_ring(mesh, 0.1), st, 0.1), RingMismatch);
}

TEST_CASE("uniform forward matching keeps conformity where nearest-node matching breaks it") {
    Mesh mesh = make_mesh();
    const int m = mesh.ring_m();
    const double spacing = 2.0 * M_PI / m;
    // perturb the stationary ring angles (deterministic jitter), moving the
    // stationary nodes along the circle; their triangles follow the nodes
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> jit(-0.25 * spacing, 0.25 * spacing);
    std::vector<double> st_angle(m);
    for (int k = 0; k < m; ++k) {
        st_angle[k] = k * spacing + jit(rng);
        const int nd = mesh.ring_stat[k];
        const Vec2 p = mesh.center + Vec2{mesh.geom.buffer_radius * std::cos(st_angle[k]),
                                          mesh.geom.buffer_radius * std::sin(st_angle[k])};
        mesh.ref[nd] = p;
        mesh.cur[nd] = p;
    }
    const double theta = 0.5 * spacing;

    auto place_rot_ring = [&](const std::vector<int>& target_of) {
        for (int i = 0; i < m; ++i) {
            const int nd = mesh.ring_rot[i];
            mesh.cur[nd] = mesh.cur[mesh.ring_stat[target_of[i]]];
        }
    };

    // uniform forward rule: i -> (K + i) mod m stays a bijection
    {
        std::vector<int> target(m);
        for (int i = 0; i < m; ++i) target[i] = (1 + i) % m;  // K = 1 for theta in (0, spacing]
        place_rot_ring(target);
        mesh.ring_shift = 1;
        // interior buffer nodes: rotate rigidly so fluid triangles stay valid
        const Mat2 R = rotation_matrix(theta);
        for (int nd = 0; nd < mesh.n_nodes(); ++nd)
            if (mesh.flag(nd, NodeInRotFluid) && !mesh.flag(nd, NodeOnRingRot))
                mesh.cur[nd] = mesh.center + R * (mesh.ref[nd] - mesh.center);
        for (int nd = 0; nd < mesh.n_nodes(); ++nd)
            if (mesh.flag(nd, NodeInStructure) && !mesh.flag(nd, NodeOnGamma))
                mesh.cur[nd] = mesh.center + rotation_matrix(theta) * (mesh.ref[nd] - mesh.center);
        CHECK(validate_conformity(mesh).empty());
    }

    // bidirectional nearest-node rule: two rotated nodes can claim one
    // stationary node, collapsing an edge (duplicate nodes flagged)
    {
        std::vector<int> target(m);
        bool collision = false;
        std::vector<int> claimed(m, 0);
        for (int i = 0; i < m; ++i) {
            const double cur = std::fmod(i * spacing + theta, 2.0 * M_PI);
            double best = 1e300;
            int arg = -1;
            for (int j = 0; j < m; ++j) {
                double gap = std::abs(st_angle[j] - cur);
                gap = std::min(gap, 2.0 * M_PI - gap);
                if (gap < best) {
                    best = gap;
                    arg = j;
                }
            }
            target[i] = arg;
            if (++claimed[arg] > 1) collision = true;
        }
        REQUIRE(collision);  // the jitter guarantees a contested node
        place_rot_ring(target);
        CHECK(!validate_conformity(mesh).empty());
    }
}

TEST_CASE("harmonic extension") {
    const Mesh mesh = make_mesh();
    const int m = mesh.ring_m();

    SUBCASE("zero boundary data gives the zero field") {
        std::vector<Vec2> zg(mesh.gamma_outline.size(), Vec2{});
        std::vector<Vec2> zr(m, Vec2{});
        const auto a_d = solve_ale_deformation(mesh, zg, zr);
        for (const Vec2& v : a_d) CHECK(norm(v) == 0.0);
    }
    SUBCASE("affine data reproduced exactly at interior nodes") {
        auto affine = [](const Vec2& x) {
            return Vec2{1.0 + 2.0 * x.x - 0.5 * x.y, -0.3 + 0.25 * x.x + 1.5 * x.y};
        };
        std::vector<Vec2> bg(mesh.gamma_outline.size()), br(m);
        for (std::size_t i = 0; i < bg.size(); ++i) bg[i] = affine(mesh.ref[mesh.gamma_outline[i]]);
        for (int i = 0; i < m; ++i) br[i] = affine(mesh.ref[mesh.ring_rot[i]]);
        const auto a_d = solve_ale_deformation(mesh, bg, br);
        for (int nd = 0; nd < mesh.n_nodes(); ++nd) {
            if (!mesh.flag(nd, NodeInRotFluid)) continue;
            CHECK(norm(a_d[nd] - affine(mesh.ref[nd])) < 1e-10);
        }
    }
    SUBCASE("discrete maximum principle on a non-obtuse grid") {
        // right-triangle grid: every angle <= 90 degrees, so the P1 harmonic
        // extension obeys the maximum principle
        Mesh sq;
        sq.center = {0.5, 0.5};
        const int ng = 12;
        for (int j = 0; j <= ng; ++j)
            for (int i = 0; i <= ng; ++i)
                sq.ref.push_back({static_cast<double>(i) / ng, static_cast<double>(j) / ng});
        sq.cur = sq.ref;
        auto id = [&](int i, int j) { return j * (ng + 1) + i; };
        for (int j = 0; j < ng; ++j)
            for (int i = 0; i < ng; ++i) {
                sq.tri.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
                sq.tri.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
            }
        sq.tri_tag.assign(sq.tri.size(), Subdomain::RotFluid);
        sq.node_flags.assign(sq.ref.size(), NodeInRotFluid);
        for (int i = 0; i <= ng; ++i) {
            sq.gamma_outline.push_back(id(i, 0));
            sq.gamma_outline.push_back(id(i, ng));
        }
        for (int j = 1; j < ng; ++j) {
            sq.gamma_outline.push_back(id(0, j));
            sq.gamma_outline.push_back(id(ng, j));
        }

        // precheck: the mesh must be non-obtuse for the max principle claim
        double max_angle = 0.0;
        for (const auto& t : sq.tri) {
            const Vec2 A = sq.ref[t[0]], B = sq.ref[t[1]], C = sq.ref[t[2]];
            auto angle = [](const Vec2& v0, const Vec2& v1, const Vec2& v2) {
                const Vec2 e1 = v1 - v0, e2 = v2 - v0;
                return std::acos(dot(e1, e2) / (norm(e1) * norm(e2)));
            };
            max_angle = std::max({max_angle, angle(A, B, C), angle(B, C, A), angle(C, A, B)});
        }
        REQUIRE(max_angle <= M_PI / 2.0 + 1e-9);

        std::mt19937 rng(5);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        std::vector<Vec2> bg(sq.gamma_outline.size());
        std::vector<Vec2> br;  // no ring nodes in this region
        double bmaxx = -1e300, bminx = 1e300, bmaxy = -1e300, bminy = 1e300;
        for (Vec2& v : bg) {
            v = {dist(rng), dist(rng)};
            bmaxx = std::max(bmaxx, v.x);
            bminx = std::min(bminx, v.x);
            bmaxy = std::max(bmaxy, v.y);
            bminy = std::min(bminy, v.y);
        }
        const auto a_d = solve_ale_deformation(sq, bg, br);
        for (std::size_t nd = 0; nd < sq.ref.size(); ++nd) {
            CHECK(a_d[nd].x <= bmaxx + 1e-10);
            CHECK(a_d[nd].x >= bminx - 1e-10);
            CHECK(a_d[nd].y <= bmaxy + 1e-10);
            CHECK(a_d[nd].y >= bminy - 1e-10);
        }
    }
}

TEST_CASE("update_fluid_mesh") {
    Mesh mesh = make_mesh();
    const int n = mesh.n_nodes();

    SUBCASE("no displacement change: w = 0, coordinates unchanged") {
        std::vector<Vec2> a(n, Vec2{});
        const auto w = update_fluid_mesh(mesh, a, a, 0.01, 0);
        for (const Vec2& v : w) CHECK(norm(v) == 0.0);
        for (int nd = 0; nd < n; ++nd) CHECK(norm(mesh.cur[nd] - mesh.ref[nd]) == 0.0);
    }
    SUBCASE("pure rigid increment preserves areas exactly") {
        std::vector<Vec2> areas0(mesh.n_tris());
        std::vector<double> a0(mesh.n_tris());
        for (int t = 0; t < mesh.n_tris(); ++t) a0[t] = mesh.tri_area_ref(t);
        std::vector<Vec2> a_new(n, Vec2{}), a_old(n, Vec2{});
        const double dtheta = 0.12;
        for (int nd = 0; nd < n; ++nd)
            if (mesh.flag(nd, NodeInRotFluid))
                a_new[nd] = rotational_displacement(mesh.ref[nd], mesh.center, dtheta);
        update_fluid_mesh(mesh, a_new, a_old, 0.01, 0);
        for (int t = 0; t < mesh.n_tris(); ++t) {
            if (mesh.tri_tag[t] != Subdomain::RotFluid) continue;
            CHECK(mesh.tri_area_cur(t) == doctest::Approx(a0[t]).epsilon(1e-12));
        }
        // w vanishes on stationary fluid and outer boundary nodes
        const auto w = update_fluid_mesh(mesh, a_new, a_new, 0.01, 0);
        for (int nd = 0; nd < n; ++nd)
            if (!mesh.flag(nd, NodeInRotFluid)) CHECK(norm(w[nd]) == 0.0);
    }
    SUBCASE("60-degree single-step rotation of the ring without re-matching inverts") {
        // move the rotating ring far while pinning the plus outline: the
        // buffer shears until some triangle flips; the update must abort
        std::vector<Vec2> a_new(n, Vec2{}), a_old(n, Vec2{});
        const double big = M_PI / 3.0;
        std::vector<Vec2> bg(mesh.gamma_outline.size(), Vec2{});
        std::vector<Vec2> br(mesh.ring_m());
        for (int i = 0; i < mesh.ring_m(); ++i)
            br[i] = rotational_displacement(mesh.ref[mesh.ring_rot[i]], mesh.center, big);
        const auto a_d = solve_ale_deformation(mesh, bg, br);
        for (int nd = 0; nd < n; ++nd)
            if (mesh.flag(nd, NodeInRotFluid)) a_new[nd] = a_d[nd];
        CHECK_THROWS_AS(update_fluid_mesh(mesh, a_new, a_old, 0.01, 0), MeshInversion);
    }
}

TEST_CASE("conformity across the sliding interface after matching") {
    Mesh mesh = make_mesh(64, 0.015);
    const double spacing = 2.0 * M_PI / mesh.ring_m();
    const double theta = 3.7 * spacing;  // generic non-commensurate angle
    const auto match = match_sliding_interface(rotated_rotating_ring(mesh, theta),
                                               stationary_ring(mesh), theta);
    std::vector<Vec2> bg(mesh.gamma_outline.size());
    for (std::size_t i = 0; i < bg.size(); ++i)
        bg[i] = Vec2{};  // rigid structure: u_s - u_theta = 0 on Gamma
    const auto a_d = solve_ale_deformation(mesh, bg, match.u_m);
    std::vector<Vec2> a_new(mesh.n_nodes(), Vec2{}), a_old(mesh.n_nodes(), Vec2{});
    for (int nd = 0; nd < mesh.n_nodes(); ++nd)
        if (mesh.flag(nd, NodeInRotFluid))
            a_new[nd] = rotational_displacement(mesh.ref[nd], mesh.center, theta) + a_d[nd];
    update_fluid_mesh(mesh, a_new, a_old, 0.01, match.shift);
    // structure nodes rotate rigidly (rigid test): keep their triangles sane
    for (int nd = 0; nd < mesh.n_nodes(); ++nd)
        if (mesh.flag(nd, NodeInStructure) && !mesh.flag(nd, NodeOnGamma))
            mesh.cur[nd] = mesh.center + rotation_matrix(theta) * (mesh.ref[nd] - mesh.center);

    // every rotating node now coincides with its matched stationary node
    for (int i = 0; i < mesh.ring_m(); ++i) {
        const int target = mesh.stat_of_rot(i);
        CHECK(norm(mesh.cur[mesh.ring_rot[i]] - mesh.cur[target]) < 1e-12 * mesh.diameter());
    }
    CHECK(validate_conformity(mesh).empty());
}

TEST_CASE("quality preservation over a full revolution with exact per-step matching") {
    // omega*dt equal to one ring spacing: every step lands nodes on nodes, so
    // u_m = 0 and the buffer motion is rigid; min angle must hold to 1e-9
    Mesh mesh = make_mesh(64, 0.015);
    const int m = mesh.ring_m();
    const double spacing = 2.0 * M_PI / m;
    const double q0 = mesh_quality(mesh).min_angle_deg;
    std::vector<Vec2> a_old(mesh.n_nodes(), Vec2{});
    for (int step = 1; step <= m; ++step) {
        const double theta = step * spacing;
        const auto match = match_sliding_interface(rotated_rotating_ring(mesh, theta),
                                                   stationary_ring(mesh), theta);
        CHECK(match.shift == step);
        std::vector<Vec2> bg(mesh.gamma_outline.size(), Vec2{});
        const auto a_d = solve_ale_deformation(mesh, bg, match.u_m);
        std::vector<Vec2> a_new(mesh.n_nodes(), Vec2{});
        for (int nd = 0; nd < mesh.n_nodes(); ++nd)
            if (mesh.flag(nd, NodeInRotFluid))
                a_new[nd] = rotational_displacement(mesh.ref[nd], mesh.center, theta) + a_d[nd];
        update_fluid_mesh(mesh, a_new, a_old, 0.01, match.shift);
        for (int nd = 0; nd < mesh.n_nodes(); ++nd)
            if (mesh.flag(nd, NodeInStructure) && !mesh.flag(nd, NodeOnGamma))
                mesh.cur[nd] = mesh.center + rotation_matrix(theta) * (mesh.ref[nd] - mesh.center);
        a_old = a_new;
        CHECK(mesh_quality(mesh).min_angle_deg >= q0 - 1e-9);
        CHECK(validate_conformity(mesh).empty());
    }
}
