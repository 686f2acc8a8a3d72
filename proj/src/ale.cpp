#include "rfsi/ale.hpp"

#include <algorithm>
#include <cmath>

#include "rfsi/errors.hpp"
#include "rfsi/rotation.hpp"

namespace rfsi {

MatchResult match_sliding_interface(const InterfaceRing& ring_r, const InterfaceRing& ring_st,
                                    double theta) {
    const int m = ring_r.size();
    if (m != ring_st.size())
        throw RingMismatch("ring node counts differ: " + std::to_string(m) + " vs " +
                           std::to_string(ring_st.size()));
    if (m < 3) throw RingMismatch("ring has fewer than 3 nodes");

    const double spacing = 2.0 * M_PI / m;
    // Node 0 sits at angle theta past its reference slot; it falls between
    // stationary nodes K-1 and K and maps onto K. Exact landings (theta a
    // multiple of the spacing) map onto that node, the limit from below.
    const double s = theta / spacing;
    const long long K = static_cast<long long>(std::ceil(s - 1e-9));

    MatchResult out;
    out.shift = K;
    out.u_m.resize(m);
    double max_edge = 0.0;
    for (int i = 0; i < m; ++i)
        max_edge = std::max(max_edge, norm(ring_st.positions[(i + 1) % m] - ring_st.positions[i]));
    for (int i = 0; i < m; ++i) {
        const int target = static_cast<int>((((K + i) % m) + m) % m);
        out.u_m[i] = ring_st.positions[target] - ring_r.positions[i];
        if (norm(out.u_m[i]) > 1.6 * max_edge)
            throw RingMismatch("matching displacement exceeds ring spacing at node " +
                               std::to_string(i) + " (ring positions inconsistent with theta)");
    }
    return out;
}

InterfaceRing rotated_rotating_ring(const Mesh& mesh, double theta) {
    InterfaceRing ring;
    ring.side = RingSide::Rotating;
    ring.center = mesh.center;
    ring.nodes = mesh.ring_rot;
    const Mat2 R = rotation_matrix(theta);
    ring.positions.reserve(ring.nodes.size());
    ring.angles.reserve(ring.nodes.size());
    for (int n : ring.nodes) {
        const Vec2 p = mesh.center + R * (mesh.ref[n] - mesh.center);
        ring.positions.push_back(p);
        ring.angles.push_back(angle_about(p, mesh.center));
    }
    return ring;
}

InterfaceRing stationary_ring(const Mesh& mesh) {
    InterfaceRing ring;
    ring.side = RingSide::Stationary;
    ring.center = mesh.center;
    ring.nodes = mesh.ring_stat;
    for (int n : ring.nodes) {
        ring.positions.push_back(mesh.ref[n]);
        ring.angles.push_back(angle_about(mesh.ref[n], mesh.center));
    }
    return ring;
}

namespace {

// P1 scalar Laplacian element on reference coordinates.
void laplace_element(const Vec2& c0, const Vec2& c1, const Vec2& c2, double k[3][3]) {
    const double area2 = cross(c1 - c0, c2 - c0);
    const double area = 0.5 * area2;
    const Vec2 g[3] = {{(c1.y - c2.y) / area2, (c2.x - c1.x) / area2},
                       {(c2.y - c0.y) / area2, (c0.x - c2.x) / area2},
                       {(c0.y - c1.y) / area2, (c1.x - c0.x) / area2}};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) k[a][b] = area * dot(g[a], g[b]);
}

}  // namespace

HarmonicExtension::HarmonicExtension(const Mesh& mesh) {
    const int n = mesh.n_nodes();
    std::vector<bool> in_region(n, false), is_bc(n, false);
    for (int t = 0; t < mesh.n_tris(); ++t) {
        if (mesh.tri_tag[t] != Subdomain::RotFluid) continue;
        for (int v = 0; v < 3; ++v) in_region[mesh.tri[t][v]] = true;
    }
    for (int nd : mesh.gamma_outline) is_bc[nd] = true;
    for (int nd : mesh.ring_rot) is_bc[nd] = true;

    unknown_of_node_.assign(n, -1);
    std::vector<int> bc_col_of_node(n, -1);
    for (int nd = 0; nd < n; ++nd) {
        if (!in_region[nd]) continue;
        region_nodes_.push_back(nd);
        if (is_bc[nd]) {
            bc_col_of_node[nd] = static_cast<int>(boundary_nodes_.size());
            boundary_nodes_.push_back(nd);
        } else {
            unknown_of_node_[nd] = static_cast<int>(unknown_nodes_.size());
            unknown_nodes_.push_back(nd);
        }
    }

    const int n_unknown = static_cast<int>(unknown_nodes_.size());
    const int n_bc = static_cast<int>(boundary_nodes_.size());
    TripletList aii(n_unknown, n_unknown), aib(n_unknown, n_bc);
    double k[3][3];
    for (int t = 0; t < mesh.n_tris(); ++t) {
        if (mesh.tri_tag[t] != Subdomain::RotFluid) continue;
        const auto& tr = mesh.tri[t];
        laplace_element(mesh.ref[tr[0]], mesh.ref[tr[1]], mesh.ref[tr[2]], k);
        for (int a = 0; a < 3; ++a) {
            const int ra = unknown_of_node_[tr[a]];
            if (ra < 0) continue;
            for (int bb = 0; bb < 3; ++bb) {
                const int cb = unknown_of_node_[tr[bb]];
                if (cb >= 0) aii.add(ra, cb, k[a][bb]);
                else aib.add(ra, bc_col_of_node[tr[bb]], k[a][bb]);
            }
        }
    }
    interior_ = aii.to_csr();
    boundary_ = aib.to_csr();
    if (n_unknown > 0) lu_.factor(interior_);
}

std::vector<Vec2> HarmonicExtension::solve(const Mesh& mesh, const std::vector<Vec2>& bc_gamma,
                                           const std::vector<Vec2>& bc_ring) const {
    if (bc_gamma.size() != mesh.gamma_outline.size() || bc_ring.size() != mesh.ring_rot.size())
        throw SolveFailure("ALE boundary data sized incompatibly with the mesh interfaces");
    const int n = mesh.n_nodes();
    std::vector<Vec2> a_d(n, Vec2{});
    for (std::size_t i = 0; i < mesh.gamma_outline.size(); ++i) a_d[mesh.gamma_outline[i]] = bc_gamma[i];
    for (std::size_t i = 0; i < mesh.ring_rot.size(); ++i) a_d[mesh.ring_rot[i]] = bc_ring[i];

    const int n_unknown = static_cast<int>(unknown_nodes_.size());
    if (n_unknown == 0) return a_d;

    std::vector<double> bvals(boundary_nodes_.size());
    for (int comp = 0; comp < 2; ++comp) {
        for (std::size_t i = 0; i < boundary_nodes_.size(); ++i) {
            const Vec2& v = a_d[boundary_nodes_[i]];
            bvals[i] = comp == 0 ? v.x : v.y;
        }
        std::vector<double> rhs(n_unknown, 0.0);
        boundary_.multiply(bvals, rhs);
        for (double& v : rhs) v = -v;
        std::vector<double> x = lu_.solve(rhs);

        // discrete residual must be <= 1e-10 relative
        std::vector<double> res(n_unknown, 0.0);
        interior_.multiply(x, res);
        double rn = 0.0, bn = 0.0;
        for (int i = 0; i < n_unknown; ++i) {
            rn += (res[i] - rhs[i]) * (res[i] - rhs[i]);
            bn += rhs[i] * rhs[i];
        }
        if (bn > 0.0 && std::sqrt(rn) > 1e-10 * std::sqrt(bn))
            throw SolveFailure("ALE harmonic solve residual above 1e-10 relative");

        for (int i = 0; i < n_unknown; ++i) {
            if (comp == 0) a_d[unknown_nodes_[i]].x = x[i];
            else a_d[unknown_nodes_[i]].y = x[i];
        }
    }
    return a_d;
}

std::vector<Vec2> solve_ale_deformation(const Mesh& mesh, const std::vector<Vec2>& bc_gamma,
                                        const std::vector<Vec2>& bc_ring) {
    return HarmonicExtension(mesh).solve(mesh, bc_gamma, bc_ring);
}

std::vector<Vec2> update_fluid_mesh(Mesh& mesh, const std::vector<Vec2>& A_u_new,
                                    const std::vector<Vec2>& A_u_old, double dt,
                                    long long new_shift) {
    if (dt <= 0.0) throw MeshInversion("update_fluid_mesh: dt must be positive");
    const int n = mesh.n_nodes();
    std::vector<Vec2> w(n, Vec2{});
    for (int nd = 0; nd < n; ++nd) {
        if (!mesh.flag(nd, NodeInRotFluid)) continue;
        mesh.cur[nd] = mesh.ref[nd] + A_u_new[nd];
        w[nd] = (A_u_new[nd] - A_u_old[nd]) * (1.0 / dt);
    }
    mesh.ring_shift = new_shift;
    for (int t = 0; t < mesh.n_tris(); ++t) {
        if (mesh.tri_tag[t] == Subdomain::Structure) continue;
        const double area = mesh.tri_area_cur(t);
        if (area <= 0.0)
            throw MeshInversion("fluid triangle " + std::to_string(t) +
                                " inverted (area " + std::to_string(area) + ")");
    }
    return w;
}

}  // namespace rfsi
