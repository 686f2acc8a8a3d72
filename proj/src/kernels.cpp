#include "rfsi/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace rfsi::kernels {

namespace scalar {

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double nrm2(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void scal(double a, std::span<double> x) {
    for (double& v : x) v *= a;
}

void csr_spmv(std::span<const int> row_ptr, std::span<const int> col_idx,
              std::span<const double> values, std::span<const double> x,
              std::span<double> y) {
    const std::size_t n = row_ptr.size() - 1;
    for (std::size_t r = 0; r < n; ++r) {
        double s = 0.0;
        for (int k = row_ptr[r]; k < row_ptr[r + 1]; ++k) s += values[k] * x[col_idx[k]];
        y[r] = s;
    }
}

}  // namespace scalar

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa detect_isa() {
    const char* env = std::getenv("RFSI_KERNEL_ISA");
    if (env != nullptr) {
        const std::string s(env);
        if (s == "scalar") return Isa::Scalar;
        if (s == "avx2") {
            if (!cpu_has_avx2()) throw std::invalid_argument("RFSI_KERNEL_ISA=avx2 but CPU lacks AVX2");
            return Isa::Avx2;
        }
        // anything else (including "auto") falls through to detection
    }
    return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

Isa g_isa = detect_isa();

}  // namespace

Isa active_isa() { return g_isa; }

const char* isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool avx2_supported() { return cpu_has_avx2(); }

void force_isa(Isa isa) {
    if (isa == Isa::Avx2 && !cpu_has_avx2())
        throw std::invalid_argument("AVX2 not supported on this CPU");
    g_isa = isa;
}

double dot(std::span<const double> x, std::span<const double> y) {
    return g_isa == Isa::Avx2 ? avx2::dot(x, y) : scalar::dot(x, y);
}

double nrm2(std::span<const double> x) {
    return g_isa == Isa::Avx2 ? avx2::nrm2(x) : scalar::nrm2(x);
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    g_isa == Isa::Avx2 ? avx2::axpy(a, x, y) : scalar::axpy(a, x, y);
}

void scal(double a, std::span<double> x) {
    g_isa == Isa::Avx2 ? avx2::scal(a, x) : scalar::scal(a, x);
}

void csr_spmv(std::span<const int> row_ptr, std::span<const int> col_idx,
              std::span<const double> values, std::span<const double> x,
              std::span<double> y) {
    g_isa == Isa::Avx2 ? avx2::csr_spmv(row_ptr, col_idx, values, x, y)
                       : scalar::csr_spmv(row_ptr, col_idx, values, x, y);
}

}  // namespace rfsi::kernels
