// Compiled with -mavx2 -mfma; only reached after the dispatcher has checked
// CPU support at runtime.

#include "chartml/kernels.hpp"

#if defined(CHARTML_HAVE_AVX2)

#include <immintrin.h>

namespace chartml::kernels::detail {

namespace {

inline double hsum256(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

}  // namespace

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    }
    double acc = hsum256(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double l2sq_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
        acc0 = _mm256_fmadd_pd(d0, d0, acc0);
        acc1 = _mm256_fmadd_pd(d1, d1, acc1);
    }
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc0 = _mm256_fmadd_pd(d, d, acc0);
    }
    double acc = hsum256(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double sum_avx2(const double* a, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a + i + 4));
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
    }
    double acc = hsum256(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) acc += a[i];
    return acc;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
    __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace chartml::kernels::detail

#endif  // CHARTML_HAVE_AVX2
