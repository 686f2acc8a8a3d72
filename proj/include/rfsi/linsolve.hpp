#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rfsi/sparse.hpp"

namespace rfsi {

/// Matrix-free operator for the Krylov solvers.
struct LinearOperator {
    int n = 0;
    std::function<void(std::span<const double>, std::span<double>)> apply;

    static LinearOperator from_matrix(const SparseMatrix& m) {
        return {m.rows, [&m](std::span<const double> x, std::span<double> y) { m.multiply(x, y); }};
    }
};

using Preconditioner = std::function<void(std::span<const double>, std::span<double>)>;

struct FgmresOptions {
    double tol = 1e-8;        // relative residual target
    int max_iter = 400;       // total outer iterations
    int restart = 50;
    bool throw_on_maxiter = true;
    bool throw_on_stagnation = true;
};

struct FgmresResult {
    std::vector<double> x;
    int iterations = 0;
    bool converged = false;
    std::vector<double> residual_history;  // relative, one entry per iteration

    // First iteration whose recursive residual dropped below rel_tol, or -1.
    int iterations_to(double rel_tol) const;
};

/// Flexible restarted GMRES (right preconditioning, modified Gram-Schmidt).
/// The preconditioner may change between iterations (inner iterative solves).
FgmresResult fgmres(const LinearOperator& op, std::span<const double> b,
                    const Preconditioner& precond, const FgmresOptions& opts,
                    std::span<const double> x0 = {});

void write_residual_history_csv(const std::string& path, const FgmresResult& r);

/// k forward Gauss-Seidel sweeps on M x = b starting from x0 (in place).
void gauss_seidel_sweeps(const SparseMatrix& m, std::span<double> x,
                         std::span<const double> b, int sweeps);

/// Direct sparse LU (verification oracle and small-system path).
class SparseLu {
public:
    SparseLu();
    ~SparseLu();
    SparseLu(SparseLu&&) noexcept;
    SparseLu& operator=(SparseLu&&) noexcept;

    void factor(const SparseMatrix& m);  // throws SingularMatrix
    std::vector<double> solve(std::span<const double> b) const;
    bool factored() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::vector<double> sparse_lu_solve(const SparseMatrix& m, std::span<const double> b);

struct InnerSolveConfig {
    double tol = 1e-2;      // loose inner, tight outer
    int max_iter = 100;
    int gs_presmooth = 1;   // Gauss-Seidel sweeps used as the inner preconditioner
    bool lu_fallback = true;
};

/// The block triangular preconditioner: approximates the inverse of
/// [[A, 0], [B, -S]] with S = C + B diag(A)^-1 B^T. Inner solves are
/// Gauss-Seidel-preconditioned GMRES with a direct fallback.
class BlockPreconditioner {
public:
    BlockPreconditioner(const SparseMatrix& A, const SparseMatrix& B, const SparseMatrix& C,
                        InnerSolveConfig a_solve = {}, InnerSolveConfig s_solve = {});

    int n_v() const { return A_->rows; }
    int n_p() const { return B_->rows; }
    const SparseMatrix& schur() const { return S_; }

    // Paper-convention application on the symmetric saddle form
    // [[A, B^T], [B, -C]]: solve A v = f, then S p = -g + B v.
    void apply_block_triangular(std::span<const double> f, std::span<const double> g,
                                std::span<double> v, std::span<double> p) const;

    // Preconditioner for the assembled (unscaled) system
    // [[A, -B^T], [B, C]]; flips the pressure sign on exit so the rest of the
    // engine never sees the internal -1 pressure rescaling.
    Preconditioner for_monolithic() const;

    int inner_a_iterations() const { return stats_.a_iters; }
    int inner_s_iterations() const { return stats_.s_iters; }

private:
    std::vector<double> inner_solve(const SparseMatrix& m, const SparseLu& lu_cache,
                                    std::span<const double> rhs, const InnerSolveConfig& cfg,
                                    const char* label) const;

    const SparseMatrix* A_;
    const SparseMatrix* B_;
    const SparseMatrix* C_;
    std::vector<double> diag_a_inv_;
    SparseMatrix S_;
    InnerSolveConfig a_cfg_, s_cfg_;
    mutable SparseLu a_lu_, s_lu_;
    mutable struct { int a_iters = 0, s_iters = 0; } stats_;
};

}  // namespace rfsi
