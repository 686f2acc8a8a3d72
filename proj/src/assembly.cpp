#include "rfsi/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rfsi/errors.hpp"

namespace rfsi {

void MaterialParams::validate() const {
    if (!(rho_f > 0.0)) throw ValidationError("rho_f must be positive");
    if (!(mu_f > 0.0)) throw ValidationError("mu_f must be positive");
    if (!(rho_s > 0.0)) throw ValidationError("rho_s must be positive");
    if (!(youngs > 0.0)) throw ValidationError("youngs_modulus must be positive");
    if (!(poisson > 0.0 && poisson < 0.5))
        throw ValidationError("poisson_ratio must satisfy 0 < nu < 0.5");
}

double inlet_ramp(double t, double ramp_time) {
    if (ramp_time <= 0.0 || t >= ramp_time) return 1.0;
    if (t <= 0.0) return 0.0;
    return 0.5 * (1.0 - std::cos(M_PI * t / ramp_time));
}

double element_peclet(double rho, double speed, double h, double mu) {
    return rho * speed * h / (2.0 * mu);
}

double r_scaling(const MaterialParams& mat, double dt) {
    return std::max({1.0, mat.mu_f, mat.rho_f / dt, mat.rho_s / dt, dt * mat.mu_s(),
                     dt * mat.lambda_s()});
}

// ---------------------------------------------------------------------------
// DofMap
// ---------------------------------------------------------------------------

DofMap build_dof_map(const Mesh& mesh, const std::vector<std::optional<Vec2>>& vel_dirichlet) {
    const int n = mesh.n_nodes();
    DofMap d;
    d.canon.resize(n);
    std::iota(d.canon.begin(), d.canon.end(), 0);
    const int m = mesh.ring_m();
    for (int i = 0; i < m; ++i) d.canon[mesh.ring_rot[i]] = mesh.stat_of_rot(i);

    d.vdof.assign(n, DofMap::kNone);
    d.pdof.assign(n, DofMap::kNone);
    d.dirichlet_value.assign(n, Vec2{});

    // merge prescriptions onto canonical nodes, detecting conflicts
    std::vector<bool> has_bc(n, false);
    for (int nd = 0; nd < n; ++nd) {
        if (!vel_dirichlet[nd]) continue;
        const int c = d.canon[nd];
        const Vec2 val = *vel_dirichlet[nd];
        if (has_bc[c]) {
            if (norm(d.dirichlet_value[c] - val) > 1e-12 * std::max(1.0, norm(val)))
                throw InconsistentConstraint("node " + std::to_string(nd) +
                                             " received two different Dirichlet values");
        } else {
            has_bc[c] = true;
            d.dirichlet_value[c] = val;
        }
    }

    for (int nd = 0; nd < n; ++nd) {
        const int c = d.canon[nd];
        if (c != nd) continue;  // slaves carry no own dofs
        const bool fluid = mesh.flag(nd, NodeInRotFluid) || mesh.flag(nd, NodeInStatFluid) ||
                           mesh.flag(nd, NodeOnRingStat);
        const bool structure = mesh.flag(nd, NodeInStructure);
        if (!fluid && !structure) continue;
        if (has_bc[c]) {
            d.vdof[c] = DofMap::kDirichlet;
        } else {
            d.vdof[c] = d.n_v;
            d.n_v += 2;
        }
        if (fluid) {
            d.pdof[c] = d.n_p;
            ++d.n_p;
        }
    }
    return d;
}

std::vector<std::optional<Vec2>> channel_dirichlet_values(const Mesh& mesh, const FlowBc& bc,
                                                          const RotationSpec& spec, double t) {
    const int n = mesh.n_nodes();
    // priority: Wall(3) > Inlet(2) > Gamma_in(1)
    std::vector<int> priority(n, 0);
    std::vector<Vec2> value(n, Vec2{});
    const double W = mesh.geom.channel_width;
    const double ramp = inlet_ramp(t, bc.ramp_time);

    auto offer = [&](int node, int prio, Vec2 v) {
        if (priority[node] == 0) {
            priority[node] = prio;
            value[node] = v;
            return;
        }
        if (norm(value[node] - v) > 1e-12 * std::max(1.0, norm(v)) &&
            ((priority[node] >= 2 && prio >= 2)))
            throw InconsistentConstraint("conflicting Dirichlet values at node " +
                                         std::to_string(node));
        if (prio > priority[node]) {
            priority[node] = prio;
            value[node] = v;
        }
    };

    for (const TaggedEdge& e : mesh.tagged_edges) {
        for (int nd : {e.a, e.b}) {
            switch (e.tag) {
                case BoundaryTag::Wall:
                    offer(nd, 3, Vec2{0.0, 0.0});
                    break;
                case BoundaryTag::Inlet: {
                    const double y = mesh.ref[nd].y;
                    const double u = bc.inlet_peak * 4.0 * y * (W - y) / (W * W) * ramp;
                    offer(nd, 2, Vec2{u, 0.0});
                    break;
                }
                case BoundaryTag::AxisGammaIn:
                    offer(nd, 1, axis_velocity(mesh.ref[nd], spec, t));
                    break;
                default:
                    break;
            }
        }
    }
    std::vector<std::optional<Vec2>> out(n);
    for (int nd = 0; nd < n; ++nd)
        if (priority[nd] > 0) out[nd] = value[nd];
    return out;
}

// ---------------------------------------------------------------------------
// element kernels
// ---------------------------------------------------------------------------

namespace {

struct P1Element {
    Vec2 g[3];    // basis gradients (constant)
    double area;
    double h;     // longest edge
};

P1Element p1_element(const Vec2& c0, const Vec2& c1, const Vec2& c2) {
    const double area2 = cross(c1 - c0, c2 - c0);
    P1Element e;
    e.area = 0.5 * area2;
    e.g[0] = {(c1.y - c2.y) / area2, (c2.x - c1.x) / area2};
    e.g[1] = {(c2.y - c0.y) / area2, (c0.x - c2.x) / area2};
    e.g[2] = {(c0.y - c1.y) / area2, (c1.x - c0.x) / area2};
    e.h = std::max({norm(c1 - c0), norm(c2 - c1), norm(c0 - c2)});
    return e;
}

// consistent P1 mass matrix (exact): area/6 diagonal, area/12 off-diagonal
inline double mass_entry(double area, int a, int b) { return (a == b) ? area / 6.0 : area / 12.0; }

// Strain of R^T (phi_a e_i) in Voigt form (exx, eyy, 2*exy): d = R^T e_i.
struct Voigt {
    double xx, yy, xy2;
};
inline Voigt strain_rot(const Vec2& g, const Vec2& d) {
    return {d.x * g.x, d.y * g.y, d.x * g.y + d.y * g.x};
}
inline double contract(const Voigt& a, const Voigt& b, double lambda, double mu) {
    const double tra = a.xx + a.yy, trb = b.xx + b.yy;
    return lambda * tra * trb + 2.0 * mu * (a.xx * b.xx + a.yy * b.yy + 0.5 * a.xy2 * b.xy2);
}

// 6x6 rotated elasticity element: k[2a+i][2b+j] = area * D eps(R^T phi_bj) : eps(R^T phi_ai)
void rotated_elastic_element(const P1Element& e, double lambda, double mu, const Mat2& R,
                             double k[6][6]) {
    const Vec2 dx{R(0, 0), R(0, 1)};  // R^T e_x = row 0 of R
    const Vec2 dy{R(1, 0), R(1, 1)};
    Voigt s[6];
    for (int a = 0; a < 3; ++a) {
        s[2 * a] = strain_rot(e.g[a], dx);
        s[2 * a + 1] = strain_rot(e.g[a], dy);
    }
    for (int p = 0; p < 6; ++p)
        for (int q = 0; q < 6; ++q) k[p][q] = e.area * contract(s[p], s[q], lambda, mu);
}

// quadrature at edge midpoints (degree 2): barycentric coords per point
constexpr double kMid[3][3] = {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}};

}  // namespace

// ---------------------------------------------------------------------------
// scatter helper: element dof -> global with Dirichlet elimination
// ---------------------------------------------------------------------------

namespace {

struct Scatter {
    int vrow[6];      // global velocity dof or -1 (Dirichlet/none)
    double dval[6];   // prescribed value when vrow < 0
    int prow[3];      // pressure dof or -1
    bool any_dirichlet = false;
};

Scatter make_scatter(const DofMap& dofs, const int nodes[3]) {
    Scatter s{};
    for (int a = 0; a < 3; ++a) {
        const int c = dofs.canon[nodes[a]];
        const int vd = dofs.vdof[c];
        if (vd >= 0) {
            s.vrow[2 * a] = vd;
            s.vrow[2 * a + 1] = vd + 1;
            s.dval[2 * a] = s.dval[2 * a + 1] = 0.0;
        } else {
            s.vrow[2 * a] = s.vrow[2 * a + 1] = -1;
            s.dval[2 * a] = dofs.dirichlet_value[c].x;
            s.dval[2 * a + 1] = dofs.dirichlet_value[c].y;
            s.any_dirichlet = true;
        }
        s.prow[a] = (dofs.pdof[c] >= 0) ? dofs.pdof[c] : -1;
    }
    return s;
}

// add k_local (6x6) into A, moving Dirichlet columns to f
void scatter_vv(const Scatter& s, const double k[6][6], TripletList& A, std::vector<double>& f) {
    for (int p = 0; p < 6; ++p) {
        if (s.vrow[p] < 0) continue;
        for (int q = 0; q < 6; ++q) {
            if (k[p][q] == 0.0) continue;
            if (s.vrow[q] >= 0) A.add(s.vrow[p], s.vrow[q], k[p][q]);
            else f[s.vrow[p]] -= k[p][q] * s.dval[q];
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// monolithic assembly
// ---------------------------------------------------------------------------

SparseMatrix MonolithicSystem::full_matrix() const {
    TripletList k(n_v + n_p, n_v + n_p);
    for (int r = 0; r < A.rows; ++r)
        for (int i = A.row_ptr[r]; i < A.row_ptr[r + 1]; ++i) k.add(r, A.col_idx[i], A.values[i]);
    for (int r = 0; r < B.rows; ++r)
        for (int i = B.row_ptr[r]; i < B.row_ptr[r + 1]; ++i) {
            k.add(n_v + r, B.col_idx[i], B.values[i]);      //  B
            k.add(B.col_idx[i], n_v + r, -B.values[i]);     // -B^T
        }
    for (int r = 0; r < C.rows; ++r)
        for (int i = C.row_ptr[r]; i < C.row_ptr[r + 1]; ++i)
            k.add(n_v + r, n_v + C.col_idx[i], C.values[i]);
    return k.to_csr();
}

std::vector<double> MonolithicSystem::full_rhs() const {
    std::vector<double> rhs(f);
    rhs.insert(rhs.end(), g.begin(), g.end());
    return rhs;
}

MonolithicSystem assemble_monolithic(const Mesh& mesh, const DofMap& dofs,
                                     const MaterialParams& mat, const Discretization& disc,
                                     const AssemblyInput& in) {
    MonolithicSystem sys;
    sys.n_v = dofs.n_v;
    sys.n_p = dofs.n_p;
    sys.r_scale = r_scaling(mat, in.dt);
    sys.f.assign(dofs.n_v, 0.0);
    sys.g.assign(dofs.n_p, 0.0);
    TripletList At(dofs.n_v, dofs.n_v), Bt(dofs.n_p, dofs.n_v), Ct(dofs.n_p, dofs.n_p);

    const double lambda = mat.lambda_s(), mu_s = mat.mu_s();
    const Mat2 R = rotation_matrix(in.theta);
    const double visc_mu = 0.5 * disc.viscous_factor * mat.mu_f;  // elastic kernel carries 2*mu

    double k66[6][6];

    for (int t = 0; t < mesh.n_tris(); ++t) {
        const Subdomain tag = mesh.tri_tag[t];
        const int* nd = mesh.tri[t].data();
        const Scatter sc = make_scatter(dofs, nd);

        if (tag == Subdomain::Structure) {
            if (!in.include_structure) continue;
            const P1Element e = p1_element(mesh.ref[nd[0]], mesh.ref[nd[1]], mesh.ref[nd[2]]);
            rotated_elastic_element(e, lambda, mu_s, R, k66);
            // stiffness (dt/2) K_R on the velocity unknown
            double kscaled[6][6];
            for (int p = 0; p < 6; ++p)
                for (int q = 0; q < 6; ++q) kscaled[p][q] = 0.5 * in.dt * k66[p][q];
            scatter_vv(sc, kscaled, At, sys.f);
            // mass rho_s/dt
            double km[6][6] = {};
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    const double mm = mat.rho_s / in.dt * mass_entry(e.area, a, b);
                    km[2 * a][2 * b] = mm;
                    km[2 * a + 1][2 * b + 1] = mm;
                }
            scatter_vv(sc, km, At, sys.f);
            // rhs: rho_s/dt M v_old - K_R (u_old + dt/2 v_old - u_theta^n)
            Vec2 vold[3], resid[3];
            for (int a = 0; a < 3; ++a) {
                vold[a] = (*in.v_old)[nd[a]];
                const Vec2 u_theta = rotational_displacement(mesh.ref[nd[a]], mesh.center, in.theta);
                resid[a] = (*in.u_s_old)[nd[a]] + vold[a] * (0.5 * in.dt) - u_theta;
            }
            for (int a = 0; a < 3; ++a) {
                if (sc.vrow[2 * a] < 0) continue;
                Vec2 acc{};
                for (int b = 0; b < 3; ++b) {
                    acc += vold[b] * (mat.rho_s / in.dt * mass_entry(e.area, a, b));
                    acc.x -= k66[2 * a][2 * b] * resid[b].x + k66[2 * a][2 * b + 1] * resid[b].y;
                    acc.y -= k66[2 * a + 1][2 * b] * resid[b].x + k66[2 * a + 1][2 * b + 1] * resid[b].y;
                }
                sys.f[sc.vrow[2 * a]] += acc.x;
                sys.f[sc.vrow[2 * a + 1]] += acc.y;
            }
            continue;
        }

        if (!in.include_fluid) continue;
        const P1Element e = p1_element(mesh.cur[nd[0]], mesh.cur[nd[1]], mesh.cur[nd[2]]);
        if (e.area <= 0.0)
            throw QuadratureOnInvertedElement("fluid triangle " + std::to_string(t) +
                                              " has nonpositive area during assembly");

        // viscous: viscous_factor * mu_f * (eps(v), eps(phi))
        rotated_elastic_element(e, 0.0, visc_mu, Mat2::identity(), k66);
        scatter_vv(sc, k66, At, sys.f);

        // time derivative (characteristic scheme: old nodal values reused on
        // the moved nodes, mass assembled on current coordinates)
        if (in.include_time_terms) {
            double km[6][6] = {};
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    const double mm = mat.rho_f / in.dt * mass_entry(e.area, a, b);
                    km[2 * a][2 * b] = mm;
                    km[2 * a + 1][2 * b + 1] = mm;
                }
            scatter_vv(sc, km, At, sys.f);
            for (int a = 0; a < 3; ++a) {
                if (sc.vrow[2 * a] < 0) continue;
                Vec2 acc{};
                for (int b = 0; b < 3; ++b)
                    acc += (*in.v_old)[nd[b]] * (mat.rho_f / in.dt * mass_entry(e.area, a, b));
                sys.f[sc.vrow[2 * a]] += acc.x;
                sys.f[sc.vrow[2 * a + 1]] += acc.y;
            }
        }

        // convection (Newton-linearized) and SUPG on the frozen advection field
        if (in.include_convection) {
            const Vec2 us[3] = {(*in.v_newton)[nd[0]], (*in.v_newton)[nd[1]], (*in.v_newton)[nd[2]]};
            const Vec2 wm[3] = {(*in.w_mesh)[nd[0]], (*in.w_mesh)[nd[1]], (*in.w_mesh)[nd[2]]};
            Vec2 beta[3];
            for (int a = 0; a < 3; ++a) beta[a] = us[a] - wm[a];
            Mat2 G = Mat2::zero();  // grad u*: G(i,k) = sum_c u*[c][i] g_c[k]
            for (int c = 0; c < 3; ++c) {
                G(0, 0) += us[c].x * e.g[c].x;
                G(0, 1) += us[c].x * e.g[c].y;
                G(1, 0) += us[c].y * e.g[c].x;
                G(1, 1) += us[c].y * e.g[c].y;
            }
            double n1[3][3] = {};
            double supg[3][3] = {};
            double beta_max = 0.0;
            for (int a = 0; a < 3; ++a) beta_max = std::max(beta_max, norm(beta[a]));
            const bool supg_active = in.supg && disc.delta_supg > 0.0 && beta_max >= 1e-12 &&
                                     element_peclet(mat.rho_f, beta_max, e.h, mat.mu_f) > 1.0;
            const double tau = supg_active ? disc.delta_supg * e.h / beta_max : 0.0;
            for (int q = 0; q < 3; ++q) {
                Vec2 bq{}, uq{};
                for (int c = 0; c < 3; ++c) {
                    bq += beta[c] * kMid[q][c];
                    uq += us[c] * kMid[q][c];
                }
                const double wq = e.area / 3.0;
                for (int a = 0; a < 3; ++a) {
                    const double phia = kMid[q][a];
                    for (int b = 0; b < 3; ++b) {
                        n1[a][b] += mat.rho_f * wq * phia * dot(bq, e.g[b]);
                        if (supg_active)
                            supg[a][b] += tau * wq * dot(bq, e.g[a]) * dot(bq, e.g[b]);
                    }
                    // Newton rhs: +rho (u*.grad u*, phi)
                    if (sc.vrow[2 * a] >= 0) {
                        const Vec2 conv{uq.x * G(0, 0) + uq.y * G(0, 1),
                                        uq.x * G(1, 0) + uq.y * G(1, 1)};
                        sys.f[sc.vrow[2 * a]] += mat.rho_f * wq * phia * conv.x;
                        sys.f[sc.vrow[2 * a + 1]] += mat.rho_f * wq * phia * conv.y;
                    }
                }
            }
            double kc[6][6] = {};
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    kc[2 * a][2 * b] += n1[a][b] + supg[a][b];
                    kc[2 * a + 1][2 * b + 1] += n1[a][b] + supg[a][b];
                    // N2: rho (phi_b grad u* v, phi_a): couples components
                    const double mm = mat.rho_f * mass_entry(e.area, a, b);
                    kc[2 * a][2 * b] += mm * G(0, 0);
                    kc[2 * a][2 * b + 1] += mm * G(0, 1);
                    kc[2 * a + 1][2 * b] += mm * G(1, 0);
                    kc[2 * a + 1][2 * b + 1] += mm * G(1, 1);
                }
            scatter_vv(sc, kc, At, sys.f);
        }

        // divergence block: B[p_a, (b,j)] = (area/3) g_b[j]
        for (int a = 0; a < 3; ++a) {
            if (sc.prow[a] < 0) continue;
            for (int b = 0; b < 3; ++b) {
                const double bx = e.area / 3.0 * e.g[b].x;
                const double by = e.area / 3.0 * e.g[b].y;
                if (sc.vrow[2 * b] >= 0) {
                    Bt.add(sc.prow[a], sc.vrow[2 * b], bx);
                    Bt.add(sc.prow[a], sc.vrow[2 * b] + 1, by);
                } else {
                    sys.g[sc.prow[a]] -= bx * sc.dval[2 * b] + by * sc.dval[2 * b + 1];
                }
            }
        }

        // pressure stabilization: (delta0 h^2 / mu_f) (grad p, grad q)
        const double cstab = disc.delta0 * e.h * e.h / mat.mu_f;
        for (int a = 0; a < 3; ++a) {
            if (sc.prow[a] < 0) continue;
            for (int b = 0; b < 3; ++b)
                if (sc.prow[b] >= 0) Ct.add(sc.prow[a], sc.prow[b], cstab * e.area * dot(e.g[a], e.g[b]));
        }

        if (in.body_force) {
            for (int q = 0; q < 3; ++q) {
                Vec2 xq{};
                for (int c = 0; c < 3; ++c) xq += mesh.cur[nd[c]] * kMid[q][c];
                const Vec2 bf = in.body_force(xq);
                const double wq = e.area / 3.0;
                for (int a = 0; a < 3; ++a) {
                    if (sc.vrow[2 * a] < 0) continue;
                    sys.f[sc.vrow[2 * a]] += wq * kMid[q][a] * bf.x;
                    sys.f[sc.vrow[2 * a + 1]] += wq * kMid[q][a] * bf.y;
                }
            }
        }
    }

    sys.A = At.to_csr();
    sys.B = Bt.to_csr();
    sys.C = Ct.to_csr();
    return sys;
}

void assemble_convection(const Mesh& mesh, const DofMap& dofs, double rho,
                         const std::vector<Vec2>& v_newton, const std::vector<Vec2>& w_mesh,
                         TripletList& A, std::vector<double>& f) {
    for (int t = 0; t < mesh.n_tris(); ++t) {
        if (mesh.tri_tag[t] == Subdomain::Structure) continue;
        const int* nd = mesh.tri[t].data();
        const Scatter sc = make_scatter(dofs, nd);
        const P1Element e = p1_element(mesh.cur[nd[0]], mesh.cur[nd[1]], mesh.cur[nd[2]]);
        const Vec2 us[3] = {v_newton[nd[0]], v_newton[nd[1]], v_newton[nd[2]]};
        Vec2 beta[3];
        for (int a = 0; a < 3; ++a) beta[a] = us[a] - w_mesh[nd[a]];
        Mat2 G = Mat2::zero();
        for (int c = 0; c < 3; ++c) {
            G(0, 0) += us[c].x * e.g[c].x;
            G(0, 1) += us[c].x * e.g[c].y;
            G(1, 0) += us[c].y * e.g[c].x;
            G(1, 1) += us[c].y * e.g[c].y;
        }
        double kc[6][6] = {};
        for (int q = 0; q < 3; ++q) {
            Vec2 bq{}, uq{};
            for (int c = 0; c < 3; ++c) {
                bq += beta[c] * kMid[q][c];
                uq += us[c] * kMid[q][c];
            }
            const double wq = e.area / 3.0;
            for (int a = 0; a < 3; ++a) {
                const double phia = kMid[q][a];
                for (int b = 0; b < 3; ++b) {
                    const double n1 = rho * wq * phia * dot(bq, e.g[b]);
                    kc[2 * a][2 * b] += n1;
                    kc[2 * a + 1][2 * b + 1] += n1;
                }
                if (sc.vrow[2 * a] >= 0) {
                    const Vec2 conv{uq.x * G(0, 0) + uq.y * G(0, 1), uq.x * G(1, 0) + uq.y * G(1, 1)};
                    f[sc.vrow[2 * a]] += rho * wq * phia * conv.x;
                    f[sc.vrow[2 * a + 1]] += rho * wq * phia * conv.y;
                }
            }
        }
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                const double mm = rho * mass_entry(e.area, a, b);
                kc[2 * a][2 * b] += mm * G(0, 0);
                kc[2 * a][2 * b + 1] += mm * G(0, 1);
                kc[2 * a + 1][2 * b] += mm * G(1, 0);
                kc[2 * a + 1][2 * b + 1] += mm * G(1, 1);
            }
        scatter_vv(sc, kc, A, f);
    }
}

StaticStructureSystem assemble_static_structure(const Mesh& mesh, const DofMap& dofs,
                                                const MaterialParams& mat, double theta) {
    StaticStructureSystem out;
    out.rhs.assign(dofs.n_v, 0.0);
    TripletList Kt(dofs.n_v, dofs.n_v);
    const double lambda = mat.lambda_s(), mu = mat.mu_s();
    const Mat2 R = rotation_matrix(theta);
    double k66[6][6];
    for (int t = 0; t < mesh.n_tris(); ++t) {
        if (mesh.tri_tag[t] != Subdomain::Structure) continue;
        const int* nd = mesh.tri[t].data();
        const Scatter sc = make_scatter(dofs, nd);
        const P1Element e = p1_element(mesh.ref[nd[0]], mesh.ref[nd[1]], mesh.ref[nd[2]]);
        rotated_elastic_element(e, lambda, mu, R, k66);
        scatter_vv(sc, k66, Kt, out.rhs);
        // rotation source: K_R applied to the nodal u_theta field (affine,
        // interpolated exactly)
        Vec2 ut[3];
        for (int a = 0; a < 3; ++a)
            ut[a] = rotational_displacement(mesh.ref[nd[a]], mesh.center, theta);
        for (int a = 0; a < 3; ++a) {
            if (sc.vrow[2 * a] < 0) continue;
            double accx = 0.0, accy = 0.0;
            for (int b = 0; b < 3; ++b) {
                accx += k66[2 * a][2 * b] * ut[b].x + k66[2 * a][2 * b + 1] * ut[b].y;
                accy += k66[2 * a + 1][2 * b] * ut[b].x + k66[2 * a + 1][2 * b + 1] * ut[b].y;
            }
            out.rhs[sc.vrow[2 * a]] += accx;
            out.rhs[sc.vrow[2 * a + 1]] += accy;
        }
    }
    out.K = Kt.to_csr();
    return out;
}

// ---------------------------------------------------------------------------
// STVK linearization check
// ---------------------------------------------------------------------------

Mat2 piola_stvk_full(const Mat2& H, double lambda, double mu, double theta) {
    const Mat2 R = rotation_matrix(theta);
    const Mat2 Ht = H.transposed();
    const Mat2 E2 = H + Ht + Ht * H;  // 2 * Green-Lagrange strain
    Mat2 S = E2 * mu;
    const double tr = 0.5 * lambda * E2.trace();
    S(0, 0) += tr;
    S(1, 1) += tr;
    Mat2 F = H;
    F(0, 0) += 1.0;
    F(1, 1) += 1.0;
    return R * (F * S);
}

Mat2 piola_stvk_linear(const Mat2& H, double lambda, double mu, double theta) {
    const Mat2 R = rotation_matrix(theta);
    const Mat2 eps = (H + H.transposed()) * 0.5;
    Mat2 S = eps * (2.0 * mu);
    const double tr = lambda * eps.trace();
    S(0, 0) += tr;
    S(1, 1) += tr;
    return R * S;
}

std::pair<double, double> linearization_consistency_check(const Mat2& H, double lambda, double mu,
                                                          double theta) {
    auto err = [&](double s) {
        const Mat2 Hs = H * s;
        return (piola_stvk_full(Hs, lambda, mu, theta) - piola_stvk_linear(Hs, lambda, mu, theta))
            .norm_fro();
    };
    return {err(1.0), err(0.5)};
}

Mesh extract_submesh(const Mesh& mesh, Subdomain keep) {
    Mesh out;
    out.geom = mesh.geom;
    out.center = mesh.center;
    std::vector<int> remap(mesh.n_nodes(), -1);
    auto map_node = [&](int nd) {
        if (remap[nd] < 0) {
            remap[nd] = out.n_nodes();
            out.ref.push_back(mesh.ref[nd]);
            out.cur.push_back(mesh.cur[nd]);
        }
        return remap[nd];
    };
    for (int t = 0; t < mesh.n_tris(); ++t) {
        if (mesh.tri_tag[t] != keep) continue;
        out.tri.push_back({map_node(mesh.tri[t][0]), map_node(mesh.tri[t][1]),
                           map_node(mesh.tri[t][2])});
        out.tri_tag.push_back(keep);
    }
    for (const TaggedEdge& e : mesh.tagged_edges) {
        if (remap[e.a] >= 0 && remap[e.b] >= 0)
            out.tagged_edges.push_back({remap[e.a], remap[e.b], e.tag, e.side});
    }
    out.node_flags.assign(out.n_nodes(), 0);
    std::uint8_t f = keep == Subdomain::Structure
                         ? NodeInStructure
                         : (keep == Subdomain::RotFluid ? NodeInRotFluid : NodeInStatFluid);
    for (auto& fl : out.node_flags) fl = f;
    for (int nd = 0; nd < mesh.n_nodes(); ++nd) {
        if (remap[nd] < 0) continue;
        if (mesh.flag(nd, NodeOnGamma)) out.node_flags[remap[nd]] |= NodeOnGamma;
        if (mesh.flag(nd, NodeOnGammaIn)) out.node_flags[remap[nd]] |= NodeOnGammaIn;
    }
    for (int nd : mesh.gamma_outline)
        if (remap[nd] >= 0) out.gamma_outline.push_back(remap[nd]);
    return out;
}

}  // namespace rfsi
