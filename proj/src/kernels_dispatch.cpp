#include <atomic>
#include <cstdlib>
#include <mutex>
#include <string>

#include "chartml/error.hpp"
#include "chartml/kernels.hpp"

namespace chartml::kernels {

namespace {

struct KernelTable {
    double (*dot)(const double*, const double*, std::size_t);
    double (*l2sq)(const double*, const double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
};

constexpr KernelTable kScalarTable{detail::dot_scalar, detail::l2sq_scalar, detail::sum_scalar,
                                   detail::axpy_scalar};

#if defined(CHARTML_HAVE_AVX2)
constexpr KernelTable kAvx2Table{detail::dot_avx2, detail::l2sq_avx2, detail::sum_avx2,
                                 detail::axpy_avx2};
#endif

bool cpu_has_avx2() {
#if defined(CHARTML_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

std::atomic<const KernelTable*> g_table{nullptr};
std::atomic<Backend> g_backend{Backend::Auto};
std::once_flag g_init_once;

Backend backend_from_env() {
    const char* v = std::getenv("CHARTML_KERNELS");
    if (v == nullptr) return Backend::Auto;
    std::string s(v);
    if (s == "scalar") return Backend::Scalar;
    if (s == "avx2") return Backend::Avx2;
    return Backend::Auto;
}

void select(Backend b) {
    switch (b) {
        case Backend::Scalar:
            g_table.store(&kScalarTable, std::memory_order_release);
            g_backend.store(Backend::Scalar, std::memory_order_release);
            return;
        case Backend::Avx2:
#if defined(CHARTML_HAVE_AVX2)
            if (cpu_has_avx2()) {
                g_table.store(&kAvx2Table, std::memory_order_release);
                g_backend.store(Backend::Avx2, std::memory_order_release);
                return;
            }
#endif
            throw ValueError("AVX2 kernel backend not available on this build/CPU");
        case Backend::Auto:
            select(cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar);
            return;
    }
}

const KernelTable& table() {
    const KernelTable* t = g_table.load(std::memory_order_acquire);
    if (t == nullptr) {
        std::call_once(g_init_once, [] {
            if (g_table.load(std::memory_order_acquire) != nullptr) return;
            Backend wanted = backend_from_env();
            // An env request for an unavailable backend degrades to Auto.
            if (wanted == Backend::Avx2 && !cpu_has_avx2()) wanted = Backend::Auto;
            select(wanted);
        });
        t = g_table.load(std::memory_order_acquire);
    }
    return *t;
}

}  // namespace

Backend active_backend() {
    table();
    return g_backend.load(std::memory_order_acquire);
}

std::string_view backend_name() {
    return active_backend() == Backend::Avx2 ? "avx2" : "scalar";
}

void force_backend(Backend b) { select(b); }

bool avx2_available() { return cpu_has_avx2(); }

double dot(const double* a, const double* b, std::size_t n) { return table().dot(a, b, n); }
double l2sq(const double* a, const double* b, std::size_t n) { return table().l2sq(a, b, n); }
double sum(const double* a, std::size_t n) { return table().sum(a, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { table().axpy(alpha, x, y, n); }

}  // namespace chartml::kernels
