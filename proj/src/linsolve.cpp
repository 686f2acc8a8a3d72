#include "rfsi/linsolve.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "rfsi/errors.hpp"
#include "rfsi/kernels.hpp"

namespace rfsi {

using kernels::axpy;
using kernels::dot;
using kernels::nrm2;
using kernels::scal;

int FgmresResult::iterations_to(double rel_tol) const {
    for (std::size_t i = 0; i < residual_history.size(); ++i)
        if (residual_history[i] <= rel_tol) return static_cast<int>(i) + 1;
    return -1;
}

FgmresResult fgmres(const LinearOperator& op, std::span<const double> b,
                    const Preconditioner& precond, const FgmresOptions& opts,
                    std::span<const double> x0) {
    const int n = op.n;
    FgmresResult res;
    res.x.assign(n, 0.0);
    if (!x0.empty()) std::copy(x0.begin(), x0.end(), res.x.begin());

    const double bnorm = nrm2(b);
    if (bnorm == 0.0) {
        res.x.assign(n, 0.0);
        res.converged = true;
        return res;
    }

    const int restart = std::max(1, opts.restart);
    std::vector<std::vector<double>> V(restart + 1, std::vector<double>(n));
    std::vector<std::vector<double>> Z(restart, std::vector<double>(n));
    // Hessenberg in column-major packed form: H[j] holds column j (j+2 entries).
    std::vector<std::vector<double>> H(restart);
    std::vector<double> cs(restart), sn(restart), gamma(restart + 1);
    std::vector<double> w(n), tmp(n);

    int total_iter = 0;
    double prev_cycle_res = std::numeric_limits<double>::max();

    while (true) {
        // r = b - A x
        op.apply(res.x, w);
        for (int i = 0; i < n; ++i) w[i] = b[i] - w[i];
        double beta = nrm2(w);
        double rel = beta / bnorm;
        if (rel <= opts.tol) {
            res.converged = true;
            if (res.residual_history.empty()) res.residual_history.push_back(rel);
            return res;
        }
        if (total_iter >= opts.max_iter) break;

        V[0] = w;
        scal(1.0 / beta, V[0]);
        std::fill(gamma.begin(), gamma.end(), 0.0);
        gamma[0] = beta;

        int j = 0;
        bool cycle_converged = false;
        bool singular_break = false;
        for (; j < restart && total_iter < opts.max_iter; ++j, ++total_iter) {
            if (precond) {
                precond(V[j], Z[j]);
            } else {
                Z[j] = V[j];
            }
            op.apply(Z[j], w);
            H[j].assign(j + 2, 0.0);
            for (int i = 0; i <= j; ++i) {
                const double hij = dot(w, V[i]);
                H[j][i] = hij;
                axpy(-hij, V[i], w);
            }
            const double hnext = nrm2(w);
            H[j][j + 1] = hnext;
            if (hnext > 0.0) {
                V[j + 1] = w;
                scal(1.0 / hnext, V[j + 1]);
            }
            // apply accumulated Givens rotations to the new column
            for (int i = 0; i < j; ++i) {
                const double t = cs[i] * H[j][i] + sn[i] * H[j][i + 1];
                H[j][i + 1] = -sn[i] * H[j][i] + cs[i] * H[j][i + 1];
                H[j][i] = t;
            }
            const double denom = std::hypot(H[j][j], H[j][j + 1]);
            if (denom < 1e-300) {
                // A annihilated the new direction: the operator is singular on
                // this Krylov space and the residual cannot decrease further.
                singular_break = true;
                ++total_iter;
                break;  // discard column j
            }
            cs[j] = H[j][j] / denom;
            sn[j] = H[j][j + 1] / denom;
            H[j][j] = cs[j] * H[j][j] + sn[j] * H[j][j + 1];
            H[j][j + 1] = 0.0;
            gamma[j + 1] = -sn[j] * gamma[j];
            gamma[j] = cs[j] * gamma[j];

            rel = std::abs(gamma[j + 1]) / bnorm;
            res.residual_history.push_back(rel);
            if (rel <= opts.tol || hnext == 0.0) {
                ++j;
                ++total_iter;
                cycle_converged = true;
                break;
            }
        }

        // back substitution over the j columns actually built
        for (int i = j - 1; i >= 0; --i) {
            double s = gamma[i];
            for (int k = i + 1; k < j; ++k) s -= H[k][i] * gamma[k];
            gamma[i] = s / H[i][i];
        }
        for (int i = 0; i < j; ++i) axpy(gamma[i], Z[i], res.x);
        res.iterations = total_iter;

        if (cycle_converged) {
            res.converged = true;
            return res;
        }
        if (singular_break) {
            if (opts.throw_on_stagnation)
                throw Stagnation("fgmres: singular operator (no progress possible), relative residual " +
                                 std::to_string(rel));
            return res;
        }
        const double cycle_res = rel;
        if (cycle_res >= prev_cycle_res * (1.0 - 1e-12)) {
            if (opts.throw_on_stagnation)
                throw Stagnation("fgmres stagnated: relative residual " + std::to_string(cycle_res) +
                                 " after " + std::to_string(total_iter) + " iterations");
            return res;
        }
        prev_cycle_res = cycle_res;
    }

    res.iterations = total_iter;
    if (opts.throw_on_maxiter)
        throw MaxIterations("fgmres hit max_iter=" + std::to_string(opts.max_iter) +
                            " at relative residual " +
                            std::to_string(res.residual_history.empty() ? 1.0 : res.residual_history.back()));
    return res;
}

void write_residual_history_csv(const std::string& path, const FgmresResult& r) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << "iteration,relative_residual\n";
    char buf[64];
    for (std::size_t i = 0; i < r.residual_history.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i + 1, r.residual_history[i]);
        os << buf;
    }
}

void gauss_seidel_sweeps(const SparseMatrix& m, std::span<double> x,
                         std::span<const double> b, int sweeps) {
    const int n = m.rows;
    std::vector<double> diag(n, 0.0);
    for (int r = 0; r < n; ++r) {
        for (int k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k)
            if (m.col_idx[k] == r) diag[r] = m.values[k];
        if (diag[r] == 0.0)
            throw ZeroDiagonal("gauss_seidel_sweeps: zero diagonal at row " + std::to_string(r));
    }
    for (int s = 0; s < sweeps; ++s) {
        for (int r = 0; r < n; ++r) {
            double acc = b[r];
            for (int k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k) {
                const int c = m.col_idx[k];
                if (c != r) acc -= m.values[k] * x[c];
            }
            x[r] = acc / diag[r];
        }
    }
}

// ---------------------------------------------------------------------------
// SparseLu (Eigen::SparseLU behind the module contract)
// ---------------------------------------------------------------------------

struct SparseLu::Impl {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    int n = 0;
    bool ok = false;
};

SparseLu::SparseLu() : impl_(new Impl) {}
SparseLu::~SparseLu() = default;
SparseLu::SparseLu(SparseLu&&) noexcept = default;
SparseLu& SparseLu::operator=(SparseLu&&) noexcept = default;

void SparseLu::factor(const SparseMatrix& m) {
    if (m.rows != m.cols) throw SingularMatrix("sparse_lu: matrix not square");
    Eigen::SparseMatrix<double> a(m.rows, m.cols);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(m.values.size());
    for (int r = 0; r < m.rows; ++r)
        for (int k = m.row_ptr[r]; k < m.row_ptr[r + 1]; ++k)
            trips.emplace_back(r, m.col_idx[k], m.values[k]);
    a.setFromTriplets(trips.begin(), trips.end());
    a.makeCompressed();
    impl_->lu.compute(a);
    impl_->n = m.rows;
    impl_->ok = (impl_->lu.info() == Eigen::Success);
    if (!impl_->ok) throw SingularMatrix("sparse_lu: factorization failed (singular matrix)");
}

bool SparseLu::factored() const { return impl_->ok; }

std::vector<double> SparseLu::solve(std::span<const double> b) const {
    if (!impl_->ok) throw SingularMatrix("sparse_lu: solve before successful factorization");
    Eigen::VectorXd rhs(impl_->n);
    for (int i = 0; i < impl_->n; ++i) rhs[i] = b[i];
    Eigen::VectorXd x = impl_->lu.solve(rhs);
    if (impl_->lu.info() != Eigen::Success) throw SingularMatrix("sparse_lu: solve failed");
    return std::vector<double>(x.data(), x.data() + impl_->n);
}

std::vector<double> sparse_lu_solve(const SparseMatrix& m, std::span<const double> b) {
    SparseLu lu;
    lu.factor(m);
    auto x = lu.solve(b);
    // Contract: relative residual <= 1e-10; a quietly garbage solve means the
    // matrix was numerically singular.
    std::vector<double> r(m.rows, 0.0);
    m.multiply(x, r);
    double rn = 0.0, bn = 0.0;
    for (int i = 0; i < m.rows; ++i) {
        rn += (r[i] - b[i]) * (r[i] - b[i]);
        bn += b[i] * b[i];
    }
    if (bn > 0.0 && std::sqrt(rn) > 1e-7 * std::sqrt(bn))
        throw SingularMatrix("sparse_lu: residual check failed (numerically singular)");
    return x;
}

// ---------------------------------------------------------------------------
// BlockPreconditioner
// ---------------------------------------------------------------------------

BlockPreconditioner::BlockPreconditioner(const SparseMatrix& A, const SparseMatrix& B,
                                         const SparseMatrix& C, InnerSolveConfig a_solve,
                                         InnerSolveConfig s_solve)
    : A_(&A), B_(&B), C_(&C), a_cfg_(a_solve), s_cfg_(s_solve) {
    diag_a_inv_ = A.diagonal();
    for (double& d : diag_a_inv_) {
        if (d <= 0.0)
            throw InnerSolveFailure("block preconditioner: nonpositive diag(A) entry after Dirichlet reduction");
        d = 1.0 / d;
    }
    S_ = schur_diag_approx(B, diag_a_inv_, C);
}

std::vector<double> BlockPreconditioner::inner_solve(const SparseMatrix& m, const SparseLu& lu_cache,
                                                     std::span<const double> rhs,
                                                     const InnerSolveConfig& cfg,
                                                     const char* label) const {
    LinearOperator op = LinearOperator::from_matrix(m);
    Preconditioner gs = [&m, &cfg](std::span<const double> r, std::span<double> z) {
        std::fill(z.begin(), z.end(), 0.0);
        gauss_seidel_sweeps(m, z, r, cfg.gs_presmooth);
    };
    FgmresOptions o;
    o.tol = cfg.tol;
    o.max_iter = cfg.max_iter;
    o.restart = std::min(cfg.max_iter, 50);
    o.throw_on_maxiter = false;
    o.throw_on_stagnation = false;
    FgmresResult r = fgmres(op, rhs, gs, o);
    if (!r.converged) {
        if (!cfg.lu_fallback)
            throw InnerSolveFailure(std::string("inner solve failed on block ") + label);
        SparseLu& lu = const_cast<SparseLu&>(lu_cache);
        if (!lu.factored()) lu.factor(m);
        return lu.solve(rhs);
    }
    (label[0] == 'A' ? stats_.a_iters : stats_.s_iters) += r.iterations;
    return std::move(r.x);
}

void BlockPreconditioner::apply_block_triangular(std::span<const double> f,
                                                 std::span<const double> g,
                                                 std::span<double> v, std::span<double> p) const {
    // Step 1: solve A v = f.
    std::vector<double> vs = inner_solve(*A_, a_lu_, f, a_cfg_, "A");
    // Step 2: solve S p = -g + B v.
    std::vector<double> rhs_p(B_->rows, 0.0);
    B_->multiply(vs, rhs_p);
    for (int i = 0; i < B_->rows; ++i) rhs_p[i] -= g[i];
    std::vector<double> ps = inner_solve(S_, s_lu_, rhs_p, s_cfg_, "S");
    std::copy(vs.begin(), vs.end(), v.begin());
    std::copy(ps.begin(), ps.end(), p.begin());
}

Preconditioner BlockPreconditioner::for_monolithic() const {
    const int nv = A_->rows, np = B_->rows;
    return [this, nv, np](std::span<const double> r, std::span<double> z) {
        apply_block_triangular(r.subspan(0, nv), r.subspan(nv, np),
                               z.subspan(0, nv), z.subspan(nv, np));
        // internal pressure is the -1-rescaled one; flip on exit
        for (int i = 0; i < np; ++i) z[nv + i] = -z[nv + i];
    };
}

}  // namespace rfsi
