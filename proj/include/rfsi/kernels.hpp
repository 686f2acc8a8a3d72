#pragma once

#include <cstddef>
#include <span>
#include <string>

namespace rfsi::kernels {

// Dense vector and CSR kernels used by the Krylov solvers. Each kernel has a
// scalar reference implementation and an AVX2 variant; the active variant is
// chosen once at startup from CPU capabilities and can be forced through the
// RFSI_KERNEL_ISA environment variable ("scalar", "avx2", "auto").
//
// The SIMD variants reassociate reductions, so they agree with the scalar
// reference only to rounding (equivalence-tested, not bit-tested). Within one
// process the dispatch is fixed, which keeps runs reproducible.

enum class Isa { Scalar, Avx2 };

Isa active_isa();
const char* isa_name(Isa isa);

// Force the active ISA (used by the equivalence tests). Throws
// std::invalid_argument when the requested ISA is unsupported on this CPU.
void force_isa(Isa isa);
bool avx2_supported();

double dot(std::span<const double> x, std::span<const double> y);
double nrm2(std::span<const double> x);
void axpy(double a, std::span<const double> x, std::span<double> y);  // y += a*x
void scal(double a, std::span<double> x);
// y = A*x for a CSR matrix given by (row_ptr, col_idx, values).
void csr_spmv(std::span<const int> row_ptr, std::span<const int> col_idx,
              std::span<const double> values, std::span<const double> x,
              std::span<double> y);

// Scalar reference implementations, always available (equivalence oracles).
namespace scalar {
double dot(std::span<const double> x, std::span<const double> y);
double nrm2(std::span<const double> x);
void axpy(double a, std::span<const double> x, std::span<double> y);
void scal(double a, std::span<double> x);
void csr_spmv(std::span<const int> row_ptr, std::span<const int> col_idx,
              std::span<const double> values, std::span<const double> x,
              std::span<double> y);
}  // namespace scalar

namespace avx2 {
double dot(std::span<const double> x, std::span<const double> y);
double nrm2(std::span<const double> x);
void axpy(double a, std::span<const double> x, std::span<double> y);
void scal(double a, std::span<double> x);
void csr_spmv(std::span<const int> row_ptr, std::span<const int> col_idx,
              std::span<const double> values, std::span<const double> x,
              std::span<double> y);
}  // namespace avx2

}  // namespace rfsi::kernels
