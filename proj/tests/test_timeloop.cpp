#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "rfsi/errors.hpp"
#include "rfsi/linsolve.hpp"
#include "rfsi/timeloop.hpp"
#include "test_meshes.hpp"

using namespace rfsi;
using namespace rfsi::testutil;

namespace {

MaterialParams table1_materials() {
    MaterialParams m;
    m.rho_f = 1000.0;
    m.mu_f = 1.0;
    m.rho_s = 1280.0;
    m.youngs = 2.5e6;
    m.poisson = 0.384;
    return m;
}

Engine make_engine(double omega, double inlet_peak, MaterialParams mat = table1_materials(),
                   LoopConfig loop = {}) {
    ChannelRotorGeometry g = table1_geometry();
    g.buffer_radius = 0.085;
    Mesh mesh = build_rotor_channel_mesh(g, 0.02);
    FlowBc bc;
    bc.inlet_peak = inlet_peak;
    bc.ramp_time = 0.2;
    return Engine(std::move(mesh), mat, RotationSpec::constant(g.center, omega), loop, bc,
                  Discretization{}, SolverConfig{});
}

}  // namespace

TEST_CASE("trapezoid update") {
    SUBCASE("constant velocity advances by dt*c") {
        std::vector<Vec2> u0(5, Vec2{1.0, -2.0}), v(5, Vec2{0.3, 0.7});
        const auto u1 = trapezoid_update(u0, v, v, 0.25);
        for (const Vec2& u : u1) {
            CHECK(u.x == doctest::Approx(1.0 + 0.25 * 0.3).epsilon(1e-15));
            CHECK(u.y == doctest::Approx(-2.0 + 0.25 * 0.7).epsilon(1e-15));
        }
    }
    SUBCASE("exact for velocities linear in time") {
        const double alpha = 1.7, t0 = 0.4, t1 = 0.65;
        std::vector<Vec2> u0(1, Vec2{}), va(1, Vec2{alpha * t0, 0}), vb(1, Vec2{alpha * t1, 0});
        const auto u1 = trapezoid_update(u0, vb, va, t1 - t0);
        CHECK(u1[0].x == doctest::Approx(alpha * (t1 * t1 - t0 * t0) / 2.0).epsilon(1e-14));
    }
    SUBCASE("second-order convergence against the analytic integral of sin t") {
        auto integrate = [](double dt) {
            const double T = 2.0;
            const int n = static_cast<int>(std::round(T / dt));
            std::vector<Vec2> u(1, Vec2{});
            for (int k = 1; k <= n; ++k) {
                std::vector<Vec2> va(1, Vec2{std::sin((k - 1) * dt), 0});
                std::vector<Vec2> vb(1, Vec2{std::sin(k * dt), 0});
                u = trapezoid_update(u, vb, va, dt);
            }
            return std::abs(u[0].x - (1.0 - std::cos(T)));
        };
        const double e1 = integrate(0.01), e2 = integrate(0.005);
        CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.02));
    }
}

TEST_CASE("interface relaxation") {
    std::vector<Vec2> prev(3, Vec2{0, 0}), next(3, Vec2{2, -4});
    const auto w1 = relax_interface(prev, next, 1.0);
    for (const Vec2& u : w1) CHECK(norm(u - Vec2{2, -4}) == 0.0);
    const auto w05 = relax_interface(prev, next, 0.5);
    for (const Vec2& u : w05) CHECK(norm(u - Vec2{1, -2}) == 0.0);
    const auto fix = relax_interface(next, next, 0.37);
    for (const Vec2& u : fix) CHECK(norm(u - Vec2{2, -4}) < 1e-16);
}

TEST_CASE("rest state is a fixed point reached in one sweep") {
    Engine eng = make_engine(0.0, 0.0);
    State s = eng.initial_state();
    const State before = s;
    const StepStats st = eng.advance_time_step(s);
    CHECK(st.sweeps == 1);
    for (int nd = 0; nd < eng.mesh().n_nodes(); ++nd) {
        CHECK(norm(s.v[nd]) == 0.0);
        CHECK(norm(s.u_s[nd] - before.u_s[nd]) == 0.0);
        CHECK(std::abs(s.p[nd]) < 1e-12);
    }
}

TEST_CASE("structure-only rigid limit tracks the pure rotation") {
    // fluid removed; E = 2.5e9 so the rotor is effectively rigid
    ChannelRotorGeometry g = table1_geometry();
    const Mesh full = build_rotor_channel_mesh(g, 0.02);
    const Mesh s_mesh = extract_submesh(full, Subdomain::Structure);
    MaterialParams mat = table1_materials();
    mat.youngs = 2.5e9;
    RotationSpec spec = RotationSpec::constant(g.center, 1.0);
    const double dt = 0.005;
    const int n = s_mesh.n_nodes();

    std::vector<Vec2> v(n), u(n, Vec2{}), zero(n, Vec2{});
    for (int nd = 0; nd < n; ++nd) v[nd] = axis_velocity(s_mesh.ref[nd], spec, 0.0);

    for (int step = 1; step <= 40; ++step) {
        const double t_n = step * dt;
        std::vector<std::optional<Vec2>> bc(n);
        for (int nd = 0; nd < n; ++nd)
            if (s_mesh.flag(nd, NodeOnGammaIn)) bc[nd] = axis_velocity(s_mesh.ref[nd], spec, t_n);
        const DofMap dofs = build_dof_map(s_mesh, bc);
        AssemblyInput in;
        in.v_old = &v;
        in.u_s_old = &u;
        in.v_newton = &zero;
        in.w_mesh = &zero;
        in.dt = dt;
        in.theta = spec.angle(t_n);
        in.include_fluid = false;
        in.include_convection = false;
        const MonolithicSystem sys = assemble_monolithic(s_mesh, dofs, mat, Discretization{}, in);
        const auto x = sparse_lu_solve(sys.full_matrix(), sys.full_rhs());
        std::vector<Vec2> vn(n);
        for (int nd = 0; nd < n; ++nd) {
            const int vd = dofs.vx(nd);
            vn[nd] = vd >= 0 ? Vec2{x[vd], x[vd + 1]} : *bc[nd];
        }
        u = trapezoid_update(u, vn, v, dt);
        // the rotation constraint is projected exactly, as in the engine loop
        for (int nd = 0; nd < n; ++nd)
            if (s_mesh.flag(nd, NodeOnGammaIn))
                u[nd] = rotational_displacement(s_mesh.ref[nd], g.center, spec.angle(t_n));
        v = vn;
        // after each step the displacement stays within 1e-6 * L_c of u_theta
        double worst = 0.0;
        for (int nd = 0; nd < n; ++nd) {
            const Vec2 ut = rotational_displacement(s_mesh.ref[nd], g.center, spec.angle(t_n));
            worst = std::max(worst, norm(u[nd] - ut));
        }
        CHECK(worst <= 1e-6 * g.arm_length);
    }
}

TEST_CASE("coupled desk run maintains the interface invariants") {
    LoopConfig loop;
    loop.dt = 0.01;
    loop.t_end = 0.05;
    Engine eng = make_engine(1.0, 1.5, table1_materials(), loop);
    State s = eng.initial_state();
    for (int step = 1; step <= 5; ++step) {
        const StepStats st = eng.advance_time_step(s);
        CHECK(st.fp_residual <= loop.fp_tol);
        CHECK(validate_conformity(eng.mesh()).empty());

        // Gamma_in displacement tracks the prescribed rotation to 1e-10 * r_in
        const double theta = s.theta;
        for (int nd = 0; nd < eng.mesh().n_nodes(); ++nd) {
            if (!eng.mesh().flag(nd, NodeOnGammaIn)) continue;
            const Vec2 expect =
                rotational_displacement(eng.mesh().ref[nd], eng.mesh().center, theta);
            CHECK(norm(s.u_s[nd] - expect) <= 1e-10 * eng.mesh().geom.axis_radius);
        }
        // interface kinematic condition: fluid and structure share the DOF,
        // so the stored numbers agree bit for bit on Gamma and on the merged
        // sliding-interface pairs
        for (int i = 0; i < eng.mesh().ring_m(); ++i) {
            const int rot = eng.mesh().ring_rot[i];
            const int st_node = eng.mesh().stat_of_rot(i);
            CHECK(s.v[rot].x == s.v[st_node].x);
            CHECK(s.v[rot].y == s.v[st_node].y);
            CHECK(s.p[rot] == s.p[st_node]);
        }
        // ALE bookkeeping invariant A_u = u_theta + A_D
        for (int nd = 0; nd < eng.mesh().n_nodes(); ++nd) {
            const Vec2 lhs = s.ale.A_u[nd];
            const Vec2 rhs = s.ale.u_theta[nd] + s.ale.A_D[nd];
            CHECK(norm(lhs - rhs) <= 1e-13 * std::max(1.0, norm(lhs)));
        }
    }
}

TEST_CASE("relaxation 1.0 and 0.7 agree at the converged step") {
    MaterialParams mat = table1_materials();
    LoopConfig l1;
    l1.dt = 0.01;
    l1.relaxation = 1.0;
    LoopConfig l2 = l1;
    l2.relaxation = 0.7;
    Engine e1 = make_engine(1.0, 1.5, mat, l1);
    Engine e2 = make_engine(1.0, 1.5, mat, l2);
    State s1 = e1.initial_state(), s2 = e2.initial_state();
    for (int step = 0; step < 3; ++step) {
        e1.advance_time_step(s1);
        e2.advance_time_step(s2);
    }
    double diff = 0.0, scale = 0.0;
    for (int nd = 0; nd < e1.mesh().n_nodes(); ++nd) {
        diff = std::max(diff, norm(s1.u_s[nd] - s2.u_s[nd]));
        scale = std::max(scale, norm(s1.u_s[nd]));
    }
    CHECK(diff <= 10.0 * l1.fp_tol * std::max(1.0, scale));
}

TEST_CASE("Stokes regime: Newton converges in one iteration") {
    // convection coefficient switched off -> every solve is linear
    ChannelRotorGeometry g = table1_geometry();
    g.buffer_radius = 0.085;
    Mesh mesh = build_rotor_channel_mesh(g, 0.02);
    LoopConfig loop;
    loop.dt = 0.01;
    Discretization disc;
    disc.convection = false;
    FlowBc bc;
    bc.inlet_peak = 1.5;
    Engine eng(std::move(mesh), table1_materials(), RotationSpec::constant(g.center, 1.0), loop,
               bc, disc, SolverConfig{});
    State s = eng.initial_state();
    const StepStats st = eng.advance_time_step(s);
    // at most one Newton solve per sweep (later sweeps may need none at all)
    CHECK(st.newton_iters <= st.sweeps);
    CHECK(st.newton_iters >= 1);
}

TEST_CASE("desk Newton at the table-1 operating point stays within budget") {
    LoopConfig loop;
    loop.dt = 0.01;
    Engine eng = make_engine(1.0, 1.5, table1_materials(), loop);
    State s = eng.initial_state();
    int max_newton_per_sweep = 0;
    for (int step = 1; step <= 5; ++step) {
        const StepStats st = eng.advance_time_step(s);
        max_newton_per_sweep =
            std::max(max_newton_per_sweep, (st.newton_iters + st.sweeps - 1) / st.sweeps);
    }
    CHECK(max_newton_per_sweep <= 6);  // regression bound, Re ~ 100 regime
}

TEST_CASE("over-large rotation in one sweep aborts with MeshInversion") {
    // structure rotated by 60 degrees while the ring stays put: the harmonic
    // extension must shear the whole buffer and some triangle flips
    ChannelRotorGeometry g = table1_geometry();
    Mesh mesh = build_rotor_channel_mesh(g, 0.02);
    const double big = M_PI / 3.0;
    std::vector<Vec2> bg(mesh.gamma_outline.size());
    for (std::size_t i = 0; i < bg.size(); ++i) {
        const int nd = mesh.gamma_outline[i];
        bg[i] = rotational_displacement(mesh.ref[nd], mesh.center, big);
    }
    std::vector<Vec2> br(mesh.ring_m(), Vec2{});
    const auto a_d = solve_ale_deformation(mesh, bg, br);
    std::vector<Vec2> a_new(mesh.n_nodes(), Vec2{}), a_old(mesh.n_nodes(), Vec2{});
    for (int nd = 0; nd < mesh.n_nodes(); ++nd)
        if (mesh.flag(nd, NodeInRotFluid)) a_new[nd] = a_d[nd];
    CHECK_THROWS_AS(update_fluid_mesh(mesh, a_new, a_old, 0.01, 0), MeshInversion);
}

TEST_CASE("steady manufactured vortex: first-order H1 rate under refinement") {
    // steady Navier-Stokes with a manufactured divergence-free solution;
    // Newton iteration on each mesh, then H1 velocity error vs refinement
    const double mu = 1.0, rho = 1.0;
    auto exact_u = [](const Vec2& p) {
        const double sx = std::sin(M_PI * p.x), sy = std::sin(M_PI * p.y);
        const double cx = std::cos(M_PI * p.x), cy = std::cos(M_PI * p.y);
        return Vec2{sx * sx * 2.0 * sy * cy, -2.0 * sx * cx * sy * sy};
    };
    auto exact_grad = [](const Vec2& p) {
        const double sx = std::sin(M_PI * p.x), sy = std::sin(M_PI * p.y);
        const double cx = std::cos(M_PI * p.x), cy = std::cos(M_PI * p.y);
        Mat2 g;
        g(0, 0) = 4.0 * M_PI * sx * cx * sy * cy;
        g(0, 1) = 2.0 * M_PI * sx * sx * (cy * cy - sy * sy);
        g(1, 0) = -2.0 * M_PI * (cx * cx - sx * sx) * sy * sy;
        g(1, 1) = -4.0 * M_PI * sx * cx * sy * cy;
        return g;
    };
    // f = -mu lap(u) + rho (u.grad)u + grad p with p = sin(pi x) sin(pi y) + const
    auto forcing = [&](const Vec2& p) {
        const double sx = std::sin(M_PI * p.x), sy = std::sin(M_PI * p.y);
        const double cx = std::cos(M_PI * p.x), cy = std::cos(M_PI * p.y);
        const double pi2 = M_PI * M_PI;
        const double s2y = std::sin(2.0 * M_PI * p.y), c2y = std::cos(2.0 * M_PI * p.y);
        const double s2x = std::sin(2.0 * M_PI * p.x), c2x = std::cos(2.0 * M_PI * p.x);
        const double lap_u1 = 2.0 * pi2 * c2x * s2y - 4.0 * pi2 * sx * sx * s2y;
        const double lap_u2 = -2.0 * pi2 * s2x * c2y + 4.0 * pi2 * s2x * sy * sy;
        const Vec2 u = exact_u(p);
        const Mat2 g = exact_grad(p);
        const Vec2 conv{u.x * g(0, 0) + u.y * g(0, 1), u.x * g(1, 0) + u.y * g(1, 1)};
        const Vec2 grad_p{M_PI * cx * sy, M_PI * sx * cy};
        return Vec2{-mu * lap_u1 + rho * conv.x + grad_p.x,
                    -mu * lap_u2 + rho * conv.y + grad_p.y};
    };

    std::vector<double> errors;
    for (int ngrid : {8, 16, 32}) {
        Mesh m = square_fluid_mesh(ngrid);
        std::vector<std::optional<Vec2>> bc(m.n_nodes());
        for (int nd = 0; nd < m.n_nodes(); ++nd)
            if (on_square_boundary(m, nd)) bc[nd] = exact_u(m.ref[nd]);
        const DofMap dofs = build_dof_map(m, bc);
        MaterialParams mat;
        mat.rho_f = rho;
        mat.mu_f = mu;
        Discretization disc;
        disc.viscous_factor = 2.0;
        disc.delta_supg = 0.0;

        const int n = m.n_nodes();
        std::vector<Vec2> v(n, Vec2{}), zero(n, Vec2{});
        for (int k = 0; k < 20; ++k) {
            AssemblyInput in;
            in.v_old = &zero;
            in.u_s_old = &zero;
            in.v_newton = &v;
            in.w_mesh = &zero;
            in.dt = 1.0;
            in.include_time_terms = false;
            in.body_force = forcing;
            MonolithicSystem sys = assemble_monolithic(m, dofs, mat, disc, in);
            SparseMatrix K = sys.full_matrix();
            std::vector<double> rhs = sys.full_rhs();
            // pin pressure dof 0 (constant nullspace on the all-Dirichlet square)
            const int prow = sys.n_v;
            for (int kk = K.row_ptr[prow]; kk < K.row_ptr[prow + 1]; ++kk)
                K.values[kk] = (K.col_idx[kk] == prow) ? 1.0 : 0.0;
            rhs[prow] = 0.0;
            const auto x = sparse_lu_solve(K, rhs);
            double delta = 0.0;
            for (int nd = 0; nd < n; ++nd) {
                const int vd = dofs.vx(nd);
                if (vd < 0) continue;
                delta = std::max({delta, std::abs(x[vd] - v[nd].x), std::abs(x[vd + 1] - v[nd].y)});
            }
            for (int nd = 0; nd < n; ++nd) {
                const int vd = dofs.vx(nd);
                if (vd >= 0) v[nd] = {x[vd], x[vd + 1]};
                else v[nd] = *bc[nd];
            }
            if (delta < 1e-10) break;
        }
        // H1 seminorm error with a degree-5 quadrature
        const double qp[7][3] = {
            {1.0 / 3, 1.0 / 3, 0.225},
            {0.059715871789770, 0.470142064105115, 0.132394152788506},
            {0.470142064105115, 0.059715871789770, 0.132394152788506},
            {0.470142064105115, 0.470142064105115, 0.132394152788506},
            {0.797426985353087, 0.101286507323456, 0.125939180544827},
            {0.101286507323456, 0.797426985353087, 0.125939180544827},
            {0.101286507323456, 0.101286507323456, 0.125939180544827}};
        double err2 = 0.0;
        for (int t = 0; t < m.n_tris(); ++t) {
            const auto& tr = m.tri[t];
            const Vec2 c0 = m.ref[tr[0]], c1 = m.ref[tr[1]], c2 = m.ref[tr[2]];
            const double area2 = cross(c1 - c0, c2 - c0);
            const Vec2 g[3] = {{(c1.y - c2.y) / area2, (c2.x - c1.x) / area2},
                               {(c2.y - c0.y) / area2, (c0.x - c2.x) / area2},
                               {(c0.y - c1.y) / area2, (c1.x - c0.x) / area2}};
            Mat2 gh = Mat2::zero();
            for (int a = 0; a < 3; ++a) {
                gh(0, 0) += v[tr[a]].x * g[a].x;
                gh(0, 1) += v[tr[a]].x * g[a].y;
                gh(1, 0) += v[tr[a]].y * g[a].x;
                gh(1, 1) += v[tr[a]].y * g[a].y;
            }
            for (const auto& q : qp) {
                const Vec2 xq = c0 * q[0] + c1 * q[1] + c2 * (1.0 - q[0] - q[1]);
                const Mat2 diff = gh - exact_grad(xq);
                err2 += 0.5 * area2 * q[2] * diff.norm_fro() * diff.norm_fro();
            }
        }
        errors.push_back(std::sqrt(err2));
    }
    const double rate1 = std::log2(errors[0] / errors[1]);
    const double rate2 = std::log2(errors[1] / errors[2]);
    CHECK(rate1 >= 0.9);
    CHECK(rate2 >= 0.9);
}
