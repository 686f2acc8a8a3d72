#pragma once

#include <vector>

#include "rfsi/linsolve.hpp"
#include "rfsi/mesh.hpp"

namespace rfsi {

/// ALE bookkeeping for the rotational fluid buffer. All node-indexed arrays
/// span the full mesh; entries are nonzero only on the rotational-fluid
/// region (its interior, Gamma, and the rotating ring).
struct AleState {
    std::vector<Vec2> A_u;      // total fluid-mesh displacement
    std::vector<Vec2> A_D;      // deformation part (harmonic extension)
    std::vector<Vec2> u_theta;  // rotational part
    std::vector<Vec2> w;        // mesh velocity
    std::vector<Vec2> u_m;      // matching correction on rotating ring nodes
    long long shift = 0;        // cyclic offset K, unreduced
    double theta_mesh = 0.0;    // rotation angle the buffer mesh currently obeys

    static AleState zero(int n_nodes) {
        AleState s;
        s.A_u.assign(n_nodes, Vec2{});
        s.A_D.assign(n_nodes, Vec2{});
        s.u_theta.assign(n_nodes, Vec2{});
        s.w.assign(n_nodes, Vec2{});
        s.u_m.assign(n_nodes, Vec2{});
        return s;
    }
};

struct MatchResult {
    long long shift = 0;     // K, unreduced (index pairing uses K mod m)
    std::vector<Vec2> u_m;   // per rotating-ring index, target minus current position
};

/// Cyclic re-matching of the sliding interface: rotating node i maps onto
/// stationary node [K+i]_m, K chosen so node 0 maps to the stationary node
/// ahead of it in the rotation direction (exact landings map onto the node).
/// ring_r must be in material (reference) order with positions rotated by
/// theta; ring_st is the fixed stationary ring ordered from angle 0.
MatchResult match_sliding_interface(const InterfaceRing& ring_r, const InterfaceRing& ring_st,
                                    double theta);

/// Rotating ring in material order with positions at rotation angle theta.
InterfaceRing rotated_rotating_ring(const Mesh& mesh, double theta);
InterfaceRing stationary_ring(const Mesh& mesh);

/// P1 harmonic extension on the reference rotational-fluid mesh. The
/// Laplacian is factored once per mesh and reused across sweeps.
class HarmonicExtension {
public:
    explicit HarmonicExtension(const Mesh& mesh);

    // bc_gamma: values per gamma_outline position; bc_ring: values per
    // rotating-ring index. Returns the deformation field A_D on all nodes
    // (zero outside the rotational-fluid region).
    std::vector<Vec2> solve(const Mesh& mesh, const std::vector<Vec2>& bc_gamma,
                            const std::vector<Vec2>& bc_ring) const;

private:
    std::vector<int> region_nodes_;    // all rotational-fluid region nodes
    std::vector<int> unknown_of_node_; // node -> unknown id or -1
    std::vector<int> unknown_nodes_;
    SparseMatrix interior_;            // unknown x unknown Laplacian
    SparseMatrix boundary_;            // unknown x boundary coupling
    std::vector<int> boundary_nodes_;  // column order of boundary_
    SparseLu lu_;
};

/// Convenience wrapper matching the one-shot operation contract.
std::vector<Vec2> solve_ale_deformation(const Mesh& mesh, const std::vector<Vec2>& bc_gamma,
                                        const std::vector<Vec2>& bc_ring);

/// Moves the rotational-fluid nodes to reference + A_u_new, updates the ring
/// shift, recomputes the mesh velocity w = (A_u_new - A_u_old)/dt, and aborts
/// with MeshInversion if any fluid triangle area becomes nonpositive.
std::vector<Vec2> update_fluid_mesh(Mesh& mesh, const std::vector<Vec2>& A_u_new,
                                    const std::vector<Vec2>& A_u_old, double dt,
                                    long long new_shift);

}  // namespace rfsi
