#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "rfsi/ale.hpp"
#include "rfsi/assembly.hpp"
#include "rfsi/linsolve.hpp"
#include "rfsi/mesh.hpp"
#include "rfsi/rotation.hpp"

namespace rfsi {

/// All time-step fields. Nodal arrays span the whole mesh; slaves (rotating
/// ring nodes) mirror their master's values after every solve, so fluid and
/// structure read identical numbers at shared interface nodes.
struct State {
    std::vector<Vec2> v;       // fluid velocity / structure velocity (shared at Gamma)
    std::vector<double> p;     // pressure (fluid nodes)
    std::vector<Vec2> u_s;     // accumulated structure displacement
    AleState ale;
    double t = 0.0;
    long long step = 0;
    double theta = 0.0;        // rotation angle at t
};

struct LoopConfig {
    double dt = 0.01;
    double t_end = 2.0;
    double relaxation = 0.7;      // omega in (0, 1]
    double fp_tol = 1e-6;         // fixed-point tolerance on interface displacement
    double newton_tol = 1e-8;
    int max_sweeps = 50;
    int max_newton = 20;

    void validate() const;
};

struct SolverConfig {
    double outer_tol = 1e-8;
    int restart = 50;
    int max_outer = 400;
    double inner_tol = 1e-2;
    int inner_max_iter = 120;
};

struct StepStats {
    int sweeps = 0;
    int newton_iters = 0;    // total over sweeps
    int krylov_iters = 0;    // total outer FGMRES iterations
    double fp_residual = 0.0;
    double min_angle_deg = 0.0;
    bool used_direct_fallback = false;
};

struct NewtonResult {
    int iterations = 0;
    int krylov_iters = 0;
    double residual = 0.0;
    bool used_direct_fallback = false;
};

// u_s^n = u_s^{n-1} + dt/2 (v^n + v^{n-1}) (exact for velocities linear in t).
std::vector<Vec2> trapezoid_update(const std::vector<Vec2>& u_old, const std::vector<Vec2>& v_new,
                                   const std::vector<Vec2>& v_old, double dt);

// Convex relaxation u_* = (1-omega) u_prev + omega u_new.
std::vector<Vec2> relax_interface(const std::vector<Vec2>& u_prev, const std::vector<Vec2>& u_new,
                                  double omega);

/// Owns the mesh and drives Algorithm-style time steps: monolithic Newton
/// solve, trapezoidal displacement update, relaxed interface displacements,
/// sliding-interface matching, harmonic mesh extension, mesh velocity update,
/// fixed-point convergence control.
class Engine {
public:
    Engine(Mesh mesh, MaterialParams mat, RotationSpec spec, LoopConfig loop, FlowBc flow,
           Discretization disc, SolverConfig solver);

    const Mesh& mesh() const { return mesh_; }
    Mesh& mesh() { return mesh_; }
    const RotationSpec& rotation() const { return spec_; }
    const LoopConfig& loop() const { return loop_; }
    const MaterialParams& materials() const { return mat_; }
    MaterialParams& materials() { return mat_; }

    State initial_state() const;

    StepStats advance_time_step(State& state);

    /// Newton loop on the current mesh configuration: solves the monolithic
    /// system until the nonlinear convection residual drops below tol.
    /// Updates v/p nodal values in place.
    NewtonResult newton_loop(std::vector<Vec2>& v_nodal, std::vector<double>& p_nodal,
                             const State& old_state, const std::vector<Vec2>& w_mesh,
                             double t_n, const DofMap& dofs);

    /// Mesh-motion-only step (rigid structure): matching + harmonic extension
    /// + mesh update, no flow solve. Used by the sliding-interface checks.
    StepStats advance_mesh_only(State& state);

private:
    void scatter_solution(const DofMap& dofs, const std::vector<double>& x,
                          std::vector<Vec2>& v_nodal, std::vector<double>& p_nodal) const;
    std::vector<double> gather_solution(const DofMap& dofs, const std::vector<Vec2>& v_nodal,
                                        const std::vector<double>& p_nodal) const;
    void sync_slaves(const DofMap& dofs, std::vector<Vec2>& v_nodal,
                     std::vector<double>& p_nodal) const;
    void mesh_update_from_interface(State& state, const std::vector<Vec2>& u_star_gamma,
                                    double theta_star, double dt);

    Mesh mesh_;
    MaterialParams mat_;
    RotationSpec spec_;
    LoopConfig loop_;
    FlowBc flow_;
    Discretization disc_;
    SolverConfig solver_;
    std::unique_ptr<HarmonicExtension> harmonic_;
    std::vector<int> structure_nodes_;
    std::vector<int> gamma_in_nodes_;
    std::vector<Vec2> iterate_a_u_;  // A_u of the current fixed-point iterate
};

}  // namespace rfsi
