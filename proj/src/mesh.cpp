#include "rfsi/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>

#include "rfsi/errors.hpp"

namespace rfsi {

namespace {

constexpr double kPi = M_PI;

struct Builder {
    Mesh mesh;

    int add_node(Vec2 p) {
        mesh.ref.push_back(p);
        return static_cast<int>(mesh.ref.size()) - 1;
    }

    void emit_tri(int a, int b, int c, Subdomain tag) {
        const double area = signed_area(mesh.ref[a], mesh.ref[b], mesh.ref[c]);
        if (std::abs(area) < 1e-16)
            throw MeshGenerationFailure("degenerate triangle during generation");
        if (area < 0.0) std::swap(b, c);
        mesh.tri.push_back({a, b, c});
        mesh.tri_tag.push_back(tag);
    }

    // Split a quad (corners in cyclic order) along the shorter diagonal.
    void emit_quad(int n0, int n1, int n2, int n3, Subdomain tag) {
        const double d02 = norm(mesh.ref[n0] - mesh.ref[n2]);
        const double d13 = norm(mesh.ref[n1] - mesh.ref[n3]);
        if (d02 <= d13) {
            emit_tri(n0, n1, n2, tag);
            emit_tri(n0, n2, n3, tag);
        } else {
            emit_tri(n1, n2, n3, tag);
            emit_tri(n1, n3, n0, tag);
        }
    }
};

int derive_even(double len, double h, int minimum) {
    int n = 2 * std::max(1L, std::lround(len / (2.0 * h)));
    return std::max(n, minimum);
}

}  // namespace

void ChannelRotorGeometry::validate() const {
    auto fail = [](const std::string& m) { throw InvalidGeometry(m); };
    if (channel_length <= 0 || channel_width <= 0 || arm_length <= 0 || arm_width <= 0 ||
        buffer_radius <= 0 || axis_radius <= 0)
        fail("all geometry lengths must be positive");
    if (!(arm_width < arm_length)) fail("arm_width must be less than arm_length");
    if (!(axis_radius < 0.5 * arm_width))
        fail("axis_radius must be less than half the arm width (axis circle inside the rotor)");
    const double tip_corner = std::hypot(0.5 * arm_length, 0.5 * arm_width);
    if (!(tip_corner < buffer_radius))
        fail("rotor not fully inside buffer zone: hypot(L_c/2, W_c/2) >= r_buf");
    const double margin = std::min(std::min(center.x, channel_length - center.x),
                                   std::min(center.y, channel_width - center.y));
    if (!(buffer_radius < margin))
        fail("buffer zone not fully inside channel: r_buf >= distance from center to channel boundary");
}

double Mesh::diameter() const {
    double lx = 1e300, ly = 1e300, hx = -1e300, hy = -1e300;
    for (const Vec2& p : ref) {
        lx = std::min(lx, p.x);
        hx = std::max(hx, p.x);
        ly = std::min(ly, p.y);
        hy = std::max(hy, p.y);
    }
    return std::hypot(hx - lx, hy - ly);
}

double Mesh::tri_area_ref(int t) const {
    return signed_area(ref[tri[t][0]], ref[tri[t][1]], ref[tri[t][2]]);
}

double Mesh::tri_area_cur(int t) const {
    return signed_area(cur[tri[t][0]], cur[tri[t][1]], cur[tri[t][2]]);
}

Mesh build_rotor_channel_mesh(const ChannelRotorGeometry& geom, double h,
                              const MeshResolution& res) {
    geom.validate();
    if (h <= 0.0) throw InvalidGeometry("target edge length h must be positive");

    const double a = 0.5 * geom.arm_length;   // arm tip radius
    const double w = 0.5 * geom.arm_width;    // arm half width
    const double r_in = geom.axis_radius;
    const double r_buf = geom.buffer_radius;
    const Vec2 c = geom.center;
    const double L = geom.channel_length, W = geom.channel_width;

    // --- resolution ---------------------------------------------------------
    int n_wid, n_len;
    if (res.ring_nodes > 0) {
        const int m_req = res.ring_nodes;
        if (m_req % 8 != 0 || m_req < 24)
            throw InvalidGeometry("ring_nodes must be a multiple of 8 and >= 24");
        double best = 1e300;
        n_wid = 2;
        n_len = (m_req - 8) / 8;
        for (int cand = 2; 8 * 2 <= m_req - 4 * cand; cand += 2) {
            const int len = (m_req - 4 * cand) / 8;
            if (len < 2) break;
            const double score = std::abs(std::log(((a - w) / len) / (geom.arm_width / cand)));
            if (score < best) {
                best = score;
                n_wid = cand;
                n_len = len;
            }
        }
    } else {
        n_wid = res.n_wid > 0 ? res.n_wid : derive_even(geom.arm_width, h, 2);
        if (n_wid % 2 != 0) throw InvalidGeometry("n_wid must be even");
        n_len = res.n_len > 0 ? res.n_len : std::max(2L, std::lround((a - w) / h));
    }
    const int n_c = 4 * n_wid;                    // angular count around the center square
    const int m = 4 * (2 * n_len + n_wid);        // ring node count
    if (m < 16) throw MeshGenerationFailure("interface ring would receive fewer than 16 nodes");

    const double circ_in = 2.0 * kPi * r_in / n_c;
    const int n_ann = res.n_annulus > 0
                          ? res.n_annulus
                          : std::clamp<int>(std::lround((1.2 * w - r_in) / std::max(circ_in, 1e-12)), 1, 4);
    const double rho_mid = 0.5 * (a + w * std::sqrt(2.0));
    // Layer thickness must exceed the inner-boundary radius jump at the tip
    // corners (about one side spacing), or the first layer crosses the
    // corner and produces slivers.
    const double tip_gap = r_buf - std::hypot(a, w);
    const int n_rf_cap =
        std::max(2L, std::lround(std::floor(tip_gap * n_len / (1.3 * (a - w)))));
    const int n_rf = res.n_rf_layers > 0
                         ? res.n_rf_layers
                         : std::min<int>(n_rf_cap, std::max(3L, std::lround((r_buf - rho_mid) / h)));

    const double margin = std::min(std::min(c.x, L - c.x), std::min(c.y, W - c.y));
    const double s = std::min(0.5 * (r_buf + margin), 1.25 * r_buf);  // bounding square half side
    const int n_sf1 = res.n_sf_layers > 0 ? res.n_sf_layers
                                          : std::max(1L, std::lround((1.08 * s - r_buf) / h));
    const int n_west = std::max(1L, std::lround((c.x - s) / h));
    const int n_east = std::max(1L, std::lround((L - c.x - s) / h));
    const int n_south = std::max(1L, std::lround((c.y - s) / h));
    const int n_north = std::max(1L, std::lround((W - c.y - s) / h));

    Builder b;
    b.mesh.geom = geom;
    b.mesh.center = c;

    // --- transverse arm coordinates (exact endpoints/midpoint) --------------
    std::vector<double> tj(n_wid + 1);
    for (int j = 0; j <= n_wid; ++j) tj[j] = std::tan(-kPi / 4.0 + j * (kPi / 2.0) / n_wid);
    tj[0] = -1.0;
    tj[n_wid] = 1.0;
    tj[n_wid / 2] = 0.0;

    // --- axis circle (Gamma_in) and center square ---------------------------
    std::vector<int> circle_nodes(n_c), square_nodes(n_c);
    for (int k = 0; k < n_c; ++k) {
        const double phi = -kPi / 4.0 + k * (2.0 * kPi / n_c);
        circle_nodes[k] = b.add_node(c + Vec2{r_in * std::cos(phi), r_in * std::sin(phi)});
    }
    for (int k = 0; k < n_c; ++k) {
        const int side = k / n_wid, j = k % n_wid;
        Vec2 p;
        switch (side) {
            case 0: p = {c.x + w, c.y + w * tj[j]}; break;
            case 1: p = {c.x - w * tj[j], c.y + w}; break;
            case 2: p = {c.x - w, c.y - w * tj[j]}; break;
            default: p = {c.x + w * tj[j], c.y - w}; break;
        }
        square_nodes[k] = b.add_node(p);
    }

    // annulus between circle and square (structure)
    std::vector<std::vector<int>> ann(n_ann + 1);
    ann[0] = circle_nodes;
    ann[n_ann] = square_nodes;
    for (int l = 1; l < n_ann; ++l) {
        ann[l].resize(n_c);
        const double t = static_cast<double>(l) / n_ann;
        for (int k = 0; k < n_c; ++k) {
            const Vec2 p = b.mesh.ref[circle_nodes[k]] * (1.0 - t) + b.mesh.ref[square_nodes[k]] * t;
            ann[l][k] = b.add_node(p);
        }
    }
    for (int l = 0; l < n_ann; ++l)
        for (int k = 0; k < n_c; ++k)
            b.emit_quad(ann[l][k], ann[l][(k + 1) % n_c], ann[l + 1][(k + 1) % n_c], ann[l + 1][k],
                        Subdomain::Structure);

    // --- four arms -----------------------------------------------------------
    // arm d frame: d=0 points +x, 1 +y, 2 -x, 3 -y
    auto rot_frame = [](int d, Vec2 local) -> Vec2 {
        switch (d & 3) {
            case 0: return {local.x, local.y};
            case 1: return {-local.y, local.x};
            case 2: return {-local.x, -local.y};
            default: return {local.y, -local.x};
        }
    };
    // arm_node[d][i][j], i=0..n_len (radial), j=0..n_wid (transverse)
    std::vector<std::vector<std::vector<int>>> arm(4);
    for (int d = 0; d < 4; ++d) {
        arm[d].assign(n_len + 1, std::vector<int>(n_wid + 1));
        for (int j = 0; j <= n_wid; ++j) arm[d][0][j] = square_nodes[(d * n_wid + j) % n_c];
        for (int i = 1; i <= n_len; ++i) {
            const double x = w + i * (a - w) / n_len;
            for (int j = 0; j <= n_wid; ++j)
                arm[d][i][j] = b.add_node(c + rot_frame(d, {x, w * tj[j]}));
        }
        for (int i = 0; i < n_len; ++i)
            for (int j = 0; j < n_wid; ++j)
                b.emit_quad(arm[d][i][j], arm[d][i + 1][j], arm[d][i + 1][j + 1], arm[d][i][j + 1],
                            Subdomain::Structure);
    }

    // --- plus outline (Gamma), counterclockwise walk starting at -45 deg ----
    std::vector<int>& outline = b.mesh.gamma_outline;
    outline.reserve(m);
    for (int d = 0; d < 4; ++d) {
        outline.push_back(square_nodes[(d * n_wid) % n_c]);
        for (int i = 1; i <= n_len; ++i) outline.push_back(arm[d][i][0]);
        for (int j = 1; j <= n_wid; ++j) outline.push_back(arm[d][n_len][j]);
        for (int i = n_len - 1; i >= 1; --i) outline.push_back(arm[d][i][n_wid]);
    }
    if (static_cast<int>(outline.size()) != m)
        throw MeshGenerationFailure("outline node count mismatch");

    // --- rotational fluid buffer (outline -> ring circle) -------------------
    // outline index l pairs with ring angle index (l - anchor) mod m, anchoring
    // the +x arm tip center to ring angle 0.
    const int anchor = n_len + n_wid / 2;
    auto ring_index_of_outline = [&](int l) { return ((l - anchor) % m + m) % m; };

    std::vector<int>& ring_rot = b.mesh.ring_rot;
    ring_rot.resize(m);
    std::vector<Vec2> ring_pos(m);
    for (int k = 0; k < m; ++k) {
        const double psi = 2.0 * kPi * k / m;
        ring_pos[k] = c + Vec2{r_buf * std::cos(psi), r_buf * std::sin(psi)};
        ring_rot[k] = b.add_node(ring_pos[k]);
    }

    std::vector<std::vector<int>> rf(n_rf + 1, std::vector<int>(m));
    for (int l_idx = 0; l_idx < m; ++l_idx) {
        rf[0][l_idx] = outline[l_idx];
        rf[n_rf][l_idx] = ring_rot[ring_index_of_outline(l_idx)];
    }
    std::vector<double> t_of_layer(n_rf + 1, 0.0);
    if (res.rf_grading > 1.0) {
        const double g = res.rf_grading;
        for (int l = 0; l <= n_rf; ++l)
            t_of_layer[l] = (std::pow(g, l) - 1.0) / (std::pow(g, n_rf) - 1.0);
    } else {
        for (int l = 0; l <= n_rf; ++l) t_of_layer[l] = static_cast<double>(l) / n_rf;
    }
    for (int l = 1; l < n_rf; ++l) {
        const double t = t_of_layer[l];
        // angular grading between outline rays (t=0) and uniform ring angles
        // (t=1); default smoothstep keeps both interface neighborhoods
        // aligned and carries the tilt in the large middle layers
        const double s_ang = res.rf_ang_profile == 1   ? t
                             : res.rf_ang_profile == 2 ? t * (2.0 - t)
                                                       : t * t * (3.0 - 2.0 * t);
        for (int l_idx = 0; l_idx < m; ++l_idx) {
            const Vec2 pin = b.mesh.ref[outline[l_idx]] - c;
            const double rho_in = norm(pin);
            const double phi_in = std::atan2(pin.y, pin.x);
            const double psi = 2.0 * kPi * ring_index_of_outline(l_idx) / m;
            double dphi = psi - phi_in;
            while (dphi > kPi) dphi -= 2.0 * kPi;
            while (dphi < -kPi) dphi += 2.0 * kPi;
            const double phi = phi_in + s_ang * dphi;
            const double rho = rho_in + t * (r_buf - rho_in);
            rf[l][l_idx] = b.add_node(c + Vec2{rho * std::cos(phi), rho * std::sin(phi)});
        }
    }
    for (int l = 0; l < n_rf; ++l)
        for (int l_idx = 0; l_idx < m; ++l_idx)
            b.emit_quad(rf[l][l_idx], rf[l][(l_idx + 1) % m], rf[l + 1][(l_idx + 1) % m],
                        rf[l + 1][l_idx], Subdomain::RotFluid);

    // --- stationary ring (coincident with rotating ring at t=0) -------------
    std::vector<int>& ring_stat = b.mesh.ring_stat;
    ring_stat.resize(m);
    for (int k = 0; k < m; ++k) ring_stat[k] = b.add_node(ring_pos[k]);

    // --- stationary O-grid: ring circle -> bounding square ------------------
    const int q = m / 8;  // ring index step per 45 degrees
    std::vector<double> cross_t(m / 4 + 1);
    for (int j = 0; j <= m / 4; ++j) cross_t[j] = s * std::tan(-kPi / 4.0 + j * (2.0 * kPi / m));
    cross_t[0] = -s;
    cross_t[m / 4] = s;
    cross_t[q] = 0.0;

    std::vector<int> bsq(m);
    {
        std::vector<Vec2> bp(m);
        for (int k = 0; k < m; ++k) {
            const int kp = (k + q) % m;
            const int side = kp / (2 * q);
            const int j = kp - side * 2 * q;
            switch (side) {
                case 0: bp[k] = {c.x + s, c.y + cross_t[j]}; break;
                case 1: bp[k] = {c.x - cross_t[j], c.y + s}; break;
                case 2: bp[k] = {c.x - s, c.y - cross_t[j]}; break;
                default: bp[k] = {c.x + cross_t[j], c.y - s}; break;
            }
        }
        for (int k = 0; k < m; ++k) bsq[k] = b.add_node(bp[k]);
    }

    std::vector<std::vector<int>> sf1(n_sf1 + 1, std::vector<int>(m));
    sf1[0] = ring_stat;
    sf1[n_sf1] = bsq;
    for (int l = 1; l < n_sf1; ++l) {
        const double t = static_cast<double>(l) / n_sf1;
        for (int k = 0; k < m; ++k) {
            const Vec2 p = b.mesh.ref[ring_stat[k]] * (1.0 - t) + b.mesh.ref[bsq[k]] * t;
            sf1[l][k] = b.add_node(p);
        }
    }
    for (int l = 0; l < n_sf1; ++l)
        for (int k = 0; k < m; ++k)
            b.emit_quad(sf1[l][k], sf1[l][(k + 1) % m], sf1[l + 1][(k + 1) % m], sf1[l + 1][k],
                        Subdomain::StatFluid);

    // --- outer tensor grid with square hole ----------------------------------
    std::vector<double> X, Y;
    {
        const double x0 = c.x - s, x1 = c.x + s;
        for (int i = 0; i < n_west; ++i) X.push_back(i * x0 / n_west);
        for (int j = 0; j <= m / 4; ++j) X.push_back(c.x + cross_t[j]);
        for (int i = 1; i <= n_east; ++i) X.push_back(x1 + i * (L - x1) / n_east);
        X.back() = L;
        const double y0 = c.y - s, y1 = c.y + s;
        for (int i = 0; i < n_south; ++i) Y.push_back(i * y0 / n_south);
        for (int j = 0; j <= m / 4; ++j) Y.push_back(c.y + cross_t[j]);
        for (int i = 1; i <= n_north; ++i) Y.push_back(y1 + i * (W - y1) / n_north);
        Y.back() = W;
    }
    const int nx = static_cast<int>(X.size()) - 1;
    const int ny = static_cast<int>(Y.size()) - 1;
    const int iw0 = n_west, iw1 = n_west + m / 4;
    const int is0 = n_south, is1 = n_south + m / 4;

    auto in_hole_interior = [&](int ix, int iy) {
        return ix > iw0 && ix < iw1 && iy > is0 && iy < is1;
    };
    auto on_hole_boundary = [&](int ix, int iy) {
        const bool inside = ix >= iw0 && ix <= iw1 && iy >= is0 && iy <= is1;
        return inside && (ix == iw0 || ix == iw1 || iy == is0 || iy == is1);
    };
    auto hole_ring_index = [&](int ix, int iy) -> int {
        if (ix == iw1) return ((iy - is0) - q + m) % m;           // east side
        if (iy == is1) return (q + (iw1 - ix)) % m;               // north side
        if (ix == iw0) return (3 * q + (is1 - iy)) % m;           // west side
        return (5 * q + (ix - iw0)) % m;                          // south side
    };

    std::vector<int> grid((nx + 1) * (ny + 1), -1);
    auto gid = [&](int ix, int iy) -> int& { return grid[iy * (nx + 1) + ix]; };
    for (int iy = 0; iy <= ny; ++iy) {
        for (int ix = 0; ix <= nx; ++ix) {
            if (in_hole_interior(ix, iy)) continue;
            if (on_hole_boundary(ix, iy)) {
                gid(ix, iy) = bsq[hole_ring_index(ix, iy)];
            } else {
                gid(ix, iy) = b.add_node({X[ix], Y[iy]});
            }
        }
    }
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            if (ix >= iw0 && ix < iw1 && iy >= is0 && iy < is1) continue;  // hole cell
            b.emit_quad(gid(ix, iy), gid(ix + 1, iy), gid(ix + 1, iy + 1), gid(ix, iy + 1),
                        Subdomain::StatFluid);
        }
    }

    // --- tagged edges ---------------------------------------------------------
    auto& edges = b.mesh.tagged_edges;
    for (int k = 0; k < n_c; ++k)
        edges.push_back({circle_nodes[k], circle_nodes[(k + 1) % n_c], BoundaryTag::AxisGammaIn,
                         Subdomain::Structure});
    for (int l_idx = 0; l_idx < m; ++l_idx)
        edges.push_back({outline[l_idx], outline[(l_idx + 1) % m], BoundaryTag::InterfaceGamma,
                         Subdomain::Structure});
    for (int k = 0; k < m; ++k) {
        edges.push_back({ring_rot[k], ring_rot[(k + 1) % m], BoundaryTag::InterfaceGammaRs,
                         Subdomain::RotFluid});
        edges.push_back({ring_stat[k], ring_stat[(k + 1) % m], BoundaryTag::InterfaceGammaRs,
                         Subdomain::StatFluid});
    }
    for (int iy = 0; iy < ny; ++iy) {
        edges.push_back({gid(0, iy), gid(0, iy + 1), BoundaryTag::Inlet, Subdomain::StatFluid});
        edges.push_back({gid(nx, iy), gid(nx, iy + 1), BoundaryTag::Outlet, Subdomain::StatFluid});
    }
    for (int ix = 0; ix < nx; ++ix) {
        edges.push_back({gid(ix, 0), gid(ix + 1, 0), BoundaryTag::Wall, Subdomain::StatFluid});
        edges.push_back({gid(ix, ny), gid(ix + 1, ny), BoundaryTag::Wall, Subdomain::StatFluid});
    }

    // --- node flags -----------------------------------------------------------
    Mesh& mesh = b.mesh;
    mesh.node_flags.assign(mesh.n_nodes(), 0);
    for (int t = 0; t < mesh.n_tris(); ++t) {
        std::uint8_t f = 0;
        switch (mesh.tri_tag[t]) {
            case Subdomain::Structure: f = NodeInStructure; break;
            case Subdomain::RotFluid: f = NodeInRotFluid; break;
            case Subdomain::StatFluid: f = NodeInStatFluid; break;
        }
        for (int v = 0; v < 3; ++v) mesh.node_flags[mesh.tri[t][v]] |= f;
    }
    for (int n : outline) mesh.node_flags[n] |= NodeOnGamma;
    for (int n : ring_rot) mesh.node_flags[n] |= NodeOnRingRot;
    for (int n : ring_stat) mesh.node_flags[n] |= NodeOnRingStat;
    for (int n : circle_nodes) mesh.node_flags[n] |= NodeOnGammaIn;

    mesh.rf_layer_t.assign(mesh.n_nodes(), 0.0);
    for (int l = 0; l <= n_rf; ++l)
        for (int l_idx = 0; l_idx < m; ++l_idx) mesh.rf_layer_t[rf[l][l_idx]] = t_of_layer[l];

    mesh.cur = mesh.ref;
    mesh.ring_shift = 0;

    for (int t = 0; t < mesh.n_tris(); ++t)
        if (mesh.tri_area_ref(t) <= 0.0)
            throw MeshGenerationFailure("nonpositive reference area at triangle " + std::to_string(t));
    auto defects = validate_conformity(mesh);
    if (!defects.empty())
        throw MeshGenerationFailure("generated mesh is not conforming: " + defects.front().kind +
                                    " (" + defects.front().detail + ")");
    return mesh;
}

// ---------------------------------------------------------------------------

InterfaceRing extract_ring(const Mesh& mesh, BoundaryTag tag, RingSide side) {
    const Subdomain want =
        (side == RingSide::Rotating) ? Subdomain::RotFluid : Subdomain::StatFluid;
    std::map<int, std::vector<int>> adj;
    int n_edges = 0;
    for (const TaggedEdge& e : mesh.tagged_edges) {
        if (e.tag != tag) continue;
        if (tag == BoundaryTag::InterfaceGammaRs && e.side != want) continue;
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
        ++n_edges;
    }
    if (n_edges < 3) throw OpenCurve("fewer than 3 tagged edges for the requested ring");
    for (const auto& [node, nbrs] : adj) {
        if (nbrs.size() == 1) throw OpenCurve("ring is not closed at node " + std::to_string(node));
        if (nbrs.size() != 2)
            throw MultipleLoops("node " + std::to_string(node) + " has " +
                                std::to_string(nbrs.size()) + " tagged ring edges");
    }

    // walk the cycle
    std::vector<int> cycle;
    const int start = adj.begin()->first;
    int prev = -1, cur = start;
    do {
        cycle.push_back(cur);
        const auto& nb = adj.at(cur);
        const int next = (nb[0] != prev) ? nb[0] : nb[1];
        prev = cur;
        cur = next;
    } while (cur != start && cycle.size() <= adj.size());
    if (cycle.size() != adj.size())
        throw MultipleLoops("tagged edges form more than one closed loop");

    // orient counterclockwise about the rotation center (signed polygon area)
    double area2 = 0.0;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        const Vec2 p = mesh.cur[cycle[i]] - mesh.center;
        const Vec2 r = mesh.cur[cycle[(i + 1) % cycle.size()]] - mesh.center;
        area2 += cross(p, r);
    }
    if (area2 < 0.0) std::reverse(cycle.begin(), cycle.end());

    // rotate so the first node has the smallest angle in [0, 2*pi)
    std::size_t first = 0;
    double best = 1e300;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
        const double ang = angle_about(mesh.cur[cycle[i]], mesh.center);
        if (ang < best) {
            best = ang;
            first = i;
        }
    }
    std::rotate(cycle.begin(), cycle.begin() + first, cycle.end());

    InterfaceRing ring;
    ring.side = side;
    ring.center = mesh.center;
    ring.nodes = cycle;
    ring.positions.reserve(cycle.size());
    ring.angles.reserve(cycle.size());
    for (int n : cycle) {
        ring.positions.push_back(mesh.cur[n]);
        ring.angles.push_back(angle_about(mesh.cur[n], mesh.center));
    }
    for (std::size_t i = 1; i < ring.angles.size(); ++i)
        if (!(ring.angles[i] > ring.angles[i - 1]))
            throw MultipleLoops("ring angles not strictly increasing; curve not star-shaped about center");
    return ring;
}

QualityReport mesh_quality(const Mesh& mesh, bool current_coords) {
    const auto& p = current_coords ? mesh.cur : mesh.ref;
    QualityReport q;
    q.min_angle_deg = 180.0;
    q.min_area = 1e300;
    q.max_area = -1e300;
    for (int t = 0; t < mesh.n_tris(); ++t) {
        const Vec2& A = p[mesh.tri[t][0]];
        const Vec2& B = p[mesh.tri[t][1]];
        const Vec2& C = p[mesh.tri[t][2]];
        const double area = signed_area(A, B, C);
        q.min_area = std::min(q.min_area, area);
        q.max_area = std::max(q.max_area, area);
        if (area <= 0.0) {
            ++q.nonpositive_count;
            continue;
        }
        const double la = norm(B - C), lb = norm(C - A), lc = norm(A - B);
        const double lmax = std::max({la, lb, lc});
        const double perim = la + lb + lc;
        q.max_aspect = std::max(q.max_aspect, lmax * perim / (4.0 * area));
        auto corner = [](const Vec2& v0, const Vec2& v1, const Vec2& v2) {
            const Vec2 e1 = v1 - v0, e2 = v2 - v0;
            const double cosv = std::clamp(dot(e1, e2) / (norm(e1) * norm(e2)), -1.0, 1.0);
            return std::acos(cosv) * 180.0 / kPi;
        };
        q.min_angle_deg = std::min({q.min_angle_deg, corner(A, B, C), corner(B, C, A), corner(C, A, B)});
    }
    q.area_ratio = (q.max_area != 0.0) ? q.min_area / q.max_area : 0.0;
    return q;
}

std::vector<ConformityDefect> validate_conformity(const Mesh& mesh) {
    std::vector<ConformityDefect> defects;
    const double tol = 1e-12 * mesh.diameter();
    const int m = mesh.ring_m();

    // canonical id: rotating ring node -> matched stationary node
    std::vector<int> canon(mesh.n_nodes());
    std::iota(canon.begin(), canon.end(), 0);
    for (int i = 0; i < m; ++i) canon[mesh.ring_rot[i]] = mesh.stat_of_rot(i);

    // matched pairs must coincide in current coordinates
    for (int i = 0; i < m; ++i) {
        const int r = mesh.ring_rot[i], st = canon[mesh.ring_rot[i]];
        if (norm(mesh.cur[r] - mesh.cur[st]) > tol)
            defects.push_back({"ring pair mismatch",
                               "rotating node " + std::to_string(r) + " vs stationary node " +
                                   std::to_string(st)});
    }

    // duplicate nodes among canonical representatives (sweep sorted by x)
    {
        std::vector<int> ids;
        ids.reserve(mesh.n_nodes());
        for (int n = 0; n < mesh.n_nodes(); ++n)
            if (canon[n] == n) ids.push_back(n);
        std::sort(ids.begin(), ids.end(), [&](int a, int b) {
            if (mesh.cur[a].x != mesh.cur[b].x) return mesh.cur[a].x < mesh.cur[b].x;
            return mesh.cur[a].y < mesh.cur[b].y;
        });
        for (std::size_t i = 0; i < ids.size(); ++i) {
            for (std::size_t j = i + 1; j < ids.size(); ++j) {
                if (mesh.cur[ids[j]].x - mesh.cur[ids[i]].x > tol) break;
                if (norm(mesh.cur[ids[j]] - mesh.cur[ids[i]]) <= tol)
                    defects.push_back({"duplicate node", std::to_string(ids[i]) + " and " +
                                                             std::to_string(ids[j])});
            }
        }
    }

    // edge census in the merged view
    struct EdgeInfo {
        int count = 0;
        bool has[3] = {false, false, false};  // subdomains incident
    };
    std::map<std::pair<int, int>, EdgeInfo> census;
    for (int t = 0; t < mesh.n_tris(); ++t) {
        for (int v = 0; v < 3; ++v) {
            int a = canon[mesh.tri[t][v]], b2 = canon[mesh.tri[t][(v + 1) % 3]];
            if (a > b2) std::swap(a, b2);
            EdgeInfo& e = census[{a, b2}];
            ++e.count;
            e.has[static_cast<int>(mesh.tri_tag[t])] = true;
        }
    }
    // collect tagged outer-boundary edges (canonical)
    std::map<std::pair<int, int>, BoundaryTag> outer;
    for (const TaggedEdge& e : mesh.tagged_edges) {
        if (e.tag == BoundaryTag::InterfaceGamma || e.tag == BoundaryTag::InterfaceGammaRs) continue;
        int a = canon[e.a], b2 = canon[e.b];
        if (a > b2) std::swap(a, b2);
        outer[{a, b2}] = e.tag;
    }
    for (const auto& [key, info] : census) {
        if (info.count == 1) {
            if (outer.find(key) == outer.end())
                defects.push_back({"untagged boundary edge",
                                   std::to_string(key.first) + "-" + std::to_string(key.second)});
        } else if (info.count != 2) {
            defects.push_back({"nonmanifold edge", std::to_string(key.first) + "-" +
                                                       std::to_string(key.second) + " has " +
                                                       std::to_string(info.count) + " triangles"});
        }
    }

    // interface separation: Gamma edges must join Structure and RotFluid,
    // Gamma_rs edges RotFluid and StatFluid (merged view)
    for (const TaggedEdge& e : mesh.tagged_edges) {
        if (e.tag != BoundaryTag::InterfaceGamma && e.tag != BoundaryTag::InterfaceGammaRs) continue;
        if (e.tag == BoundaryTag::InterfaceGammaRs && e.side == Subdomain::StatFluid)
            continue;  // the rotating-side copy covers the merged edge
        int a = canon[e.a], b2 = canon[e.b];
        if (a > b2) std::swap(a, b2);
        auto it = census.find({a, b2});
        if (it == census.end()) {
            defects.push_back({"missing interface edge",
                               std::to_string(a) + "-" + std::to_string(b2)});
            continue;
        }
        const EdgeInfo& info = it->second;
        const bool ok = (e.tag == BoundaryTag::InterfaceGamma)
                            ? (info.count == 2 && info.has[0] && info.has[1])
                            : (info.count == 2 && info.has[1] && info.has[2]);
        if (!ok)
            defects.push_back({e.tag == BoundaryTag::InterfaceGamma
                                   ? "gamma edge does not separate structure and rotating fluid"
                                   : "gamma_rs edge does not separate rotating and stationary fluid",
                               std::to_string(a) + "-" + std::to_string(b2)});
    }
    return defects;
}

void write_mesh_vtk(const Mesh& mesh, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    char buf[128];
    os << "# vtk DataFile Version 3.0\n";
    os << "rotor channel mesh\n";
    os << "ASCII\n";
    os << "DATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.n_nodes() << " double\n";
    for (const Vec2& p : mesh.cur) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", p.x, p.y);
        os << buf;
    }
    os << "CELLS " << mesh.n_tris() << " " << 4 * mesh.n_tris() << "\n";
    for (const auto& t : mesh.tri) os << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
    os << "CELL_TYPES " << mesh.n_tris() << "\n";
    for (int t = 0; t < mesh.n_tris(); ++t) os << "5\n";
    os << "CELL_DATA " << mesh.n_tris() << "\n";
    os << "SCALARS subdomain int 1\nLOOKUP_TABLE default\n";
    for (Subdomain s : mesh.tri_tag) os << static_cast<int>(s) << "\n";
    if (!os) throw IoError("write failed: " + path);
}

}  // namespace rfsi
