#include "rfsi/check.hpp"

#include <cmath>
#include <random>

#include "rfsi/ale.hpp"
#include "rfsi/assembly.hpp"
#include "rfsi/driver.hpp"
#include "rfsi/errors.hpp"
#include "rfsi/linsolve.hpp"

namespace rfsi {

namespace {

using CheckFn = CheckResult (*)(const RunConfig&);

CheckResult check_mesh(const RunConfig& cfg) {
    CheckResult r{"mesh: conformity, orientation, ring structure", false, ""};
    MeshResolution res;
    res.ring_nodes = cfg.ring_nodes;
    const Mesh mesh = build_rotor_channel_mesh(cfg.geometry, cfg.mesh_h, res);
    const auto defects = validate_conformity(mesh);
    if (!defects.empty()) {
        r.detail = defects.front().kind;
        return r;
    }
    for (int t = 0; t < mesh.n_tris(); ++t)
        if (mesh.tri_area_ref(t) <= 0.0) {
            r.detail = "nonpositive area";
            return r;
        }
    if (mesh.ring_rot.size() != mesh.ring_stat.size() || mesh.ring_m() < 16) {
        r.detail = "ring sizes";
        return r;
    }
    for (int i = 0; i < mesh.ring_m(); ++i)
        if (norm(mesh.ref[mesh.ring_rot[i]] - mesh.ref[mesh.ring_stat[i]]) > 1e-15) {
            r.detail = "rings not coincident at t=0";
            return r;
        }
    r.passed = true;
    r.detail = std::to_string(mesh.n_nodes()) + " nodes, m=" + std::to_string(mesh.ring_m());
    return r;
}

CheckResult check_rotation(const RunConfig&) {
    CheckResult r{"rotation: orthogonality, group law, decomposition round-trip", false, ""};
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> ang(-10.0, 10.0);
    for (int i = 0; i < 100; ++i) {
        const double a = ang(rng), b = ang(rng);
        const Mat2 Ra = rotation_matrix(a);
        const Mat2 prod = Ra * rotation_matrix(b) - rotation_matrix(a + b);
        if (prod.norm_fro() > 1e-13 || std::abs(Ra.det() - 1.0) > 1e-14) {
            r.detail = "group law / det";
            return r;
        }
        const Mat2 orth = Ra.transposed() * Ra - Mat2::identity();
        if (orth.norm_fro() > 1e-14) {
            r.detail = "orthogonality";
            return r;
        }
    }
    RotationSpec spec = RotationSpec::constant({0.3, 0.4}, 2.0);
    std::uniform_real_distribution<double> coord(-1.0, 1.0);
    std::vector<Vec2> xs, us;
    for (int i = 0; i < 50; ++i) {
        xs.push_back({coord(rng), coord(rng)});
        us.push_back({coord(rng), coord(rng)});
    }
    const auto ud = decompose_displacement(us, xs, spec, 1.7);
    const auto back = recompose_displacement(ud, xs, spec, 1.7);
    for (std::size_t i = 0; i < us.size(); ++i)
        if (norm(back[i] - us[i]) > 1e-13) {
            r.detail = "round-trip";
            return r;
        }
    r.passed = true;
    return r;
}

CheckResult check_matching(const RunConfig& cfg) {
    CheckResult r{"ale: sliding-interface matching conventions", false, ""};
    MeshResolution res;
    res.ring_nodes = cfg.ring_nodes;
    const Mesh mesh = build_rotor_channel_mesh(cfg.geometry, cfg.mesh_h, res);
    const InterfaceRing st = stationary_ring(mesh);
    const int m = mesh.ring_m();
    const double spacing = 2.0 * M_PI / m;

    auto match_at = [&](double theta) {
        return match_sliding_interface(rotated_rotating_ring(mesh, theta), st, theta);
    };
    if (match_at(0.0).shift != 0) {
        r.detail = "K(0) != 0";
        return r;
    }
    if (match_at(spacing).shift != 1) {
        r.detail = "K(spacing) != 1";
        return r;
    }
    const auto m15 = match_at(1.5 * spacing);
    if (m15.shift != 2) {
        r.detail = "K(1.5 spacing) != 2";
        return r;
    }
    long long prev = 0;
    for (int i = 0; i <= 4 * m; ++i) {
        const double theta = i * (2.0 * M_PI) / (4 * m) + 1e-4;
        const long long k = match_at(theta).shift;
        if (k < prev) {
            r.detail = "K not monotone";
            return r;
        }
        prev = k;
    }
    r.passed = true;
    return r;
}

CheckResult check_harmonic(const RunConfig& cfg) {
    CheckResult r{"ale: harmonic extension zero/affine reproduction", false, ""};
    MeshResolution res;
    res.ring_nodes = cfg.ring_nodes;
    const Mesh mesh = build_rotor_channel_mesh(cfg.geometry, cfg.mesh_h, res);
    std::vector<Vec2> zero_g(mesh.gamma_outline.size(), Vec2{});
    std::vector<Vec2> zero_r(mesh.ring_m(), Vec2{});
    auto a_d = solve_ale_deformation(mesh, zero_g, zero_r);
    for (const Vec2& v : a_d)
        if (norm(v) > 1e-14) {
            r.detail = "zero data not reproduced";
            return r;
        }
    // affine field a + Bx reproduced exactly at interior nodes
    auto affine = [](const Vec2& x) {
        return Vec2{0.3 + 0.1 * x.x - 0.4 * x.y, -0.2 + 0.7 * x.x + 0.05 * x.y};
    };
    std::vector<Vec2> bg(mesh.gamma_outline.size()), br(mesh.ring_m());
    for (std::size_t i = 0; i < bg.size(); ++i) bg[i] = affine(mesh.ref[mesh.gamma_outline[i]]);
    for (int i = 0; i < mesh.ring_m(); ++i) br[i] = affine(mesh.ref[mesh.ring_rot[i]]);
    a_d = solve_ale_deformation(mesh, bg, br);
    for (int nd = 0; nd < mesh.n_nodes(); ++nd) {
        if (!mesh.flag(nd, NodeInRotFluid)) continue;
        if (norm(a_d[nd] - affine(mesh.ref[nd])) > 1e-10) {
            r.detail = "affine reproduction";
            return r;
        }
    }
    r.passed = true;
    return r;
}

CheckResult check_assembly(const RunConfig& cfg) {
    CheckResult r{"assembly: frame equivalence, stiffness symmetry, r-scaling", false, ""};
    MeshResolution res;
    res.ring_nodes = cfg.ring_nodes;
    const Mesh full = build_rotor_channel_mesh(cfg.geometry, cfg.mesh_h, res);
    const Mesh s_mesh = extract_submesh(full, Subdomain::Structure);
    std::vector<std::optional<Vec2>> no_bc(s_mesh.n_nodes());
    const DofMap dofs = build_dof_map(s_mesh, no_bc);
    const double theta = 0.83;
    const auto sys_rot = assemble_static_structure(s_mesh, dofs, cfg.materials, theta);

    Mesh rotated = s_mesh;
    const Mat2 R = rotation_matrix(theta);
    for (int nd = 0; nd < rotated.n_nodes(); ++nd)
        rotated.ref[nd] = rotated.center + R * (s_mesh.ref[nd] - s_mesh.center);
    rotated.cur = rotated.ref;
    const auto sys_plain = assemble_static_structure(rotated, dofs, cfg.materials, 0.0);

    double max_entry = 0.0;
    for (double v : sys_rot.K.values) max_entry = std::max(max_entry, std::abs(v));
    if (sys_rot.K.nnz() != sys_plain.K.nnz()) {
        r.detail = "sparsity mismatch";
        return r;
    }
    for (int i = 0; i < sys_rot.K.nnz(); ++i)
        if (std::abs(sys_rot.K.values[i] - sys_plain.K.values[i]) > 1e-12 * max_entry) {
            r.detail = "frame equivalence";
            return r;
        }
    // symmetry
    const SparseMatrix Kt = sys_rot.K.transposed();
    for (int i = 0; i < sys_rot.K.nnz(); ++i)
        if (std::abs(sys_rot.K.values[i] - Kt.values[i]) > 1e-13 * max_entry) {
            r.detail = "stiffness not symmetric";
            return r;
        }
    const double expect_r = std::max({1.0, cfg.materials.mu_f, cfg.materials.rho_f / cfg.loop.dt,
                                      cfg.materials.rho_s / cfg.loop.dt,
                                      cfg.loop.dt * cfg.materials.mu_s(),
                                      cfg.loop.dt * cfg.materials.lambda_s()});
    if (r_scaling(cfg.materials, cfg.loop.dt) != expect_r) {
        r.detail = "r-scaling";
        return r;
    }
    r.passed = true;
    return r;
}

CheckResult check_linsolve(const RunConfig&) {
    CheckResult r{"linsolve: Gauss-Seidel, FGMRES, sparse LU sanity", false, ""};
    // identity: one iteration
    TripletList t(5, 5);
    for (int i = 0; i < 5; ++i) t.add(i, i, 1.0);
    const SparseMatrix I = t.to_csr();
    std::vector<double> b{1, 2, 3, 4, 5};
    const auto res = fgmres(LinearOperator::from_matrix(I), b, nullptr, {});
    if (res.iterations != 1) {
        r.detail = "identity iterations";
        return r;
    }
    // GS fixed point on [[2,1],[1,2]] x = (1,1) -> (1/3, 1/3)
    TripletList t2(2, 2);
    t2.add(0, 0, 2.0);
    t2.add(0, 1, 1.0);
    t2.add(1, 0, 1.0);
    t2.add(1, 1, 2.0);
    const SparseMatrix M = t2.to_csr();
    std::vector<double> x{0.0, 0.0}, rhs{1.0, 1.0};
    gauss_seidel_sweeps(M, x, rhs, 40);
    if (std::abs(x[0] - 1.0 / 3.0) > 1e-12 || std::abs(x[1] - 1.0 / 3.0) > 1e-12) {
        r.detail = "gauss-seidel fixed point";
        return r;
    }
    const auto lu = sparse_lu_solve(M, rhs);
    if (std::abs(lu[0] - 1.0 / 3.0) > 1e-12) {
        r.detail = "sparse lu";
        return r;
    }
    r.passed = true;
    return r;
}

CheckResult check_config(const RunConfig& cfg) {
    CheckResult r{"io: config serialization idempotent", false, ""};
    const std::string once = serialize_config(load_config(serialize_config(cfg)));
    const std::string twice = serialize_config(load_config(once));
    if (once != twice) {
        r.detail = "round-trip not idempotent";
        return r;
    }
    r.passed = true;
    return r;
}

}  // namespace

std::vector<CheckResult> run_check_suites(const RunConfig& cfg) {
    const CheckFn fns[] = {check_mesh,     check_rotation, check_matching, check_harmonic,
                           check_assembly, check_linsolve, check_config};
    std::vector<CheckResult> out;
    for (CheckFn fn : fns) {
        try {
            out.push_back(fn(cfg));
        } catch (const std::exception& e) {
            out.push_back({"(exception)", false, e.what()});
        }
    }
    return out;
}

}  // namespace rfsi
