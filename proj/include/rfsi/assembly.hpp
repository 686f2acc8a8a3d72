#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rfsi/mesh.hpp"
#include "rfsi/rotation.hpp"
#include "rfsi/sparse.hpp"

namespace rfsi {

struct MaterialParams {
    double rho_f = 1000.0;  // kg/m^3
    double mu_f = 1.0;      // kg/(m s)
    double rho_s = 1280.0;  // kg/m^3 (reference density, constant in time)
    double youngs = 2.5e6;  // Pa
    double poisson = 0.384;

    double lambda_s() const { return youngs * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson)); }
    double mu_s() const { return youngs / (2.0 * (1.0 + poisson)); }
    void validate() const;  // throws ValidationError
};

/// Global unknown numbering with master-slave merging: rotating-ring nodes
/// share the DOFs of their matched stationary nodes, interface nodes are
/// single mesh nodes so fluid and structure share one velocity unknown, and
/// Dirichlet nodes are excluded from the unknown set entirely (no constraint
/// rows or multipliers exist downstream).
struct DofMap {
    std::vector<int> canon;            // node -> canonical node
    std::vector<int> vdof;             // canonical node -> x-component dof, or kDirichlet
    std::vector<int> pdof;             // canonical node -> pressure dof, or kNone
    std::vector<Vec2> dirichlet_value; // per canonical node, valid when vdof == kDirichlet
    int n_v = 0;  // velocity unknowns (both components)
    int n_p = 0;

    static constexpr int kDirichlet = -1;
    static constexpr int kNone = -3;

    bool is_dirichlet(int node) const { return vdof[canon[node]] == kDirichlet; }
    int vx(int node) const { return vdof[canon[node]]; }  // y component is vx+1
    int pressure(int node) const { return pdof[canon[node]]; }
};

/// Master-slave merging plus Dirichlet elimination. `vel_dirichlet[n]`
/// carries the prescribed velocity for node n (may target slave or master;
/// conflicting prescriptions on one canonical node raise
/// InconsistentConstraint unless they agree to 1e-12).
DofMap build_dof_map(const Mesh& mesh, const std::vector<std::optional<Vec2>>& vel_dirichlet);

struct FlowBc {
    double inlet_peak = 1.5;   // m/s, parabolic profile maximum
    double ramp_time = 0.2;    // s, cosine startup ramp
};

/// Tag-driven Dirichlet values for the channel problem at time t: no-slip
/// walls, ramped parabolic inlet, prescribed rotation velocity on Gamma_in.
/// Corner conflicts resolve by priority Wall > Inlet > Gamma_in; disagreeing
/// prescriptions beyond 1e-12 raise InconsistentConstraint.
std::vector<std::optional<Vec2>> channel_dirichlet_values(const Mesh& mesh, const FlowBc& bc,
                                                          const RotationSpec& spec, double t);

double inlet_ramp(double t, double ramp_time);

struct Discretization {
    double delta0 = 0.1;        // pressure stabilization
    double delta_supg = 1.0;    // streamline upwinding (Peclet-gated)
    double viscous_factor = 2.0;  // 2 -> sigma_f = -pI + 2 mu eps(v)
    bool convection = true;       // false: Stokes regime (linear solves)
};

/// Monolithic saddle-point blocks in the unscaled convention:
///   [ A  -B^T ] [v]   [f]
///   [ B    C  ] [p] = [g]
struct MonolithicSystem {
    SparseMatrix A, B, C;
    std::vector<double> f, g;
    double r_scale = 1.0;  // max{1, mu_f, rho_f/dt, rho_s/dt, dt*mu_s, dt*lambda_s}
    int n_v = 0, n_p = 0;

    SparseMatrix full_matrix() const;
    std::vector<double> full_rhs() const;
};

struct AssemblyInput {
    // nodal fields indexed by mesh node id
    const std::vector<Vec2>* v_old = nullptr;     // previous time step velocity
    const std::vector<Vec2>* u_s_old = nullptr;   // previous structure displacement
    const std::vector<Vec2>* v_newton = nullptr;  // previous Newton iterate
    const std::vector<Vec2>* w_mesh = nullptr;    // mesh velocity
    double dt = 0.01;
    double theta = 0.0;  // rotation angle at t_n
    bool include_fluid = true;
    bool include_structure = true;
    bool include_convection = true;
    bool include_time_terms = true;  // false: steady solve (no mass / old-step terms)
    bool supg = true;
    std::function<Vec2(const Vec2&)> body_force;  // fluid body force (tests only)
};

MonolithicSystem assemble_monolithic(const Mesh& mesh, const DofMap& dofs,
                                     const MaterialParams& mat, const Discretization& disc,
                                     const AssemblyInput& in);

/// Stationary rotating-structure system: K_R u = rhs_rot with
/// K_R(u, phi) = (D eps(R^T u), eps(R^T phi)) and rhs_rot = K_R applied to the
/// nodal rotational displacement field (exact, the field is affine).
struct StaticStructureSystem {
    SparseMatrix K;
    std::vector<double> rhs;
};
StaticStructureSystem assemble_static_structure(const Mesh& mesh, const DofMap& dofs,
                                                const MaterialParams& mat, double theta);

/// Standalone Newton-linearized convection (also folded into
/// assemble_monolithic): matrix rows rho*((u*-w).grad v, phi) + rho*(v.grad u*, phi),
/// rhs correction +rho*(u*.grad u*, phi).
void assemble_convection(const Mesh& mesh, const DofMap& dofs, double rho,
                         const std::vector<Vec2>& v_newton, const std::vector<Vec2>& w_mesh,
                         TripletList& A, std::vector<double>& f);

/// Closed-form STVK first Piola-Kirchhoff stress and its linearization about
/// H = 0, both premultiplied by R(theta).
Mat2 piola_stvk_full(const Mat2& H, double lambda, double mu, double theta);
Mat2 piola_stvk_linear(const Mat2& H, double lambda, double mu, double theta);

/// ||P_full(s H) - P_lin(s H)||_F for s in {1, 1/2}; the halving ratio sits
/// near 4 (second-order remainder).
std::pair<double, double> linearization_consistency_check(const Mat2& H, double lambda, double mu,
                                                          double theta = 0.3);

/// Element Peclet number rho*|v-w|*h/(2 mu) used to gate SUPG.
double element_peclet(double rho, double speed, double h, double mu);

double r_scaling(const MaterialParams& mat, double dt);

/// Extract the triangles of one subdomain as a standalone mesh (used by the
/// structure-only solves); tagged edges with both nodes retained survive.
Mesh extract_submesh(const Mesh& mesh, Subdomain keep);

}  // namespace rfsi
