// AVX2 variants of the vector/CSR kernels. Compiled with target attributes so
// the rest of the build stays baseline; only reached after the runtime CPU
// check in kernels.cpp.

#include "rfsi/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#include <immintrin.h>
#define RFSI_HAVE_X86 1
#else
#define RFSI_HAVE_X86 0
#endif

#include <cmath>

namespace rfsi::kernels::avx2 {

#if RFSI_HAVE_X86

namespace {

__attribute__((target("avx2,fma"))) inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

}  // namespace

__attribute__((target("avx2,fma")))
double dot(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    std::size_t i = 0;
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(&x[i + 4]), _mm256_loadu_pd(&y[i + 4]), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

__attribute__((target("avx2,fma")))
double nrm2(std::span<const double> x) {
    const std::size_t n = x.size();
    std::size_t i = 0;
    __m256d acc = _mm256_setzero_pd();
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(&x[i]);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += x[i] * x[i];
    return std::sqrt(s);
}

__attribute__((target("avx2,fma")))
void axpy(double a, std::span<const double> x, std::span<double> y) {
    const std::size_t n = x.size();
    std::size_t i = 0;
    const __m256d av = _mm256_set1_pd(a);
    for (; i + 4 <= n; i += 4) {
        __m256d yi = _mm256_loadu_pd(&y[i]);
        yi = _mm256_fmadd_pd(av, _mm256_loadu_pd(&x[i]), yi);
        _mm256_storeu_pd(&y[i], yi);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

__attribute__((target("avx2,fma")))
void scal(double a, std::span<double> x) {
    const std::size_t n = x.size();
    std::size_t i = 0;
    const __m256d av = _mm256_set1_pd(a);
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(&x[i], _mm256_mul_pd(av, _mm256_loadu_pd(&x[i])));
    for (; i < n; ++i) x[i] *= a;
}

__attribute__((target("avx2,fma")))
void csr_spmv(std::span<const int> row_ptr, std::span<const int> col_idx,
              std::span<const double> values, std::span<const double> x,
              std::span<double> y) {
    const std::size_t n = row_ptr.size() - 1;
    for (std::size_t r = 0; r < n; ++r) {
        int k = row_ptr[r];
        const int end = row_ptr[r + 1];
        __m256d acc = _mm256_setzero_pd();
        for (; k + 4 <= end; k += 4) {
            __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(&col_idx[k]));
            __m256d xv = _mm256_i32gather_pd(x.data(), idx, 8);
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(&values[k]), xv, acc);
        }
        double s = hsum(acc);
        for (; k < end; ++k) s += values[k] * x[col_idx[k]];
        y[r] = s;
    }
}

#else  // !RFSI_HAVE_X86: fall back to the scalar reference (never dispatched).

double dot(std::span<const double> x, std::span<const double> y) { return scalar::dot(x, y); }
double nrm2(std::span<const double> x) { return scalar::nrm2(x); }
void axpy(double a, std::span<const double> x, std::span<double> y) { scalar::axpy(a, x, y); }
void scal(double a, std::span<double> x) { scalar::scal(a, x); }
void csr_spmv(std::span<const int> row_ptr, std::span<const int> col_idx,
              std::span<const double> values, std::span<const double> x,
              std::span<double> y) {
    scalar::csr_spmv(row_ptr, col_idx, values, x, y);
}

#endif

}  // namespace rfsi::kernels::avx2
