#pragma once

#include <cstddef>
#include <string_view>

// Numeric inner loops shared by the learners and the dataset statistics.
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The active variant is chosen once at runtime from CPU features
// (override with force_backend or the CHARTML_KERNELS env var). SIMD and
// scalar results may differ in the last ulps because the summation order
// differs; the equivalence tests bound that difference.

namespace chartml::kernels {

enum class Backend {
    Auto,    // pick the best supported variant
    Scalar,  // portable reference
    Avx2,    // 256-bit FMA path
};

/// Backend currently answering kernel calls (never Auto).
Backend active_backend();
std::string_view backend_name();

/// Force a specific backend. Throws ValueError if it is not available in
/// this build / on this CPU. Intended for tests and benchmarking.
void force_backend(Backend b);

/// True when the AVX2 variants are compiled in and the CPU supports them.
bool avx2_available();

double dot(const double* a, const double* b, std::size_t n);
double l2sq(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
/// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n);
double l2sq_scalar(const double* a, const double* b, std::size_t n);
double sum_scalar(const double* a, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);

#if defined(CHARTML_HAVE_AVX2)
double dot_avx2(const double* a, const double* b, std::size_t n);
double l2sq_avx2(const double* a, const double* b, std::size_t n);
double sum_avx2(const double* a, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
#endif

}  // namespace detail

}  // namespace chartml::kernels
