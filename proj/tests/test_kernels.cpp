#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "chartml/error.hpp"
#include "chartml/kernels.hpp"

using namespace chartml;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
    std::normal_distribution<double> dist(0.0, scale);
    std::vector<double> v(n);
    for (double& x : v) x = dist(rng);
    return v;
}

// long-double reference, independent of both production variants
long double ref_dot(const std::vector<double>& a, const std::vector<double>& b) {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<long double>(a[i]) * b[i];
    return acc;
}

}  // namespace

TEST_CASE("scalar kernels match a long-double reference") {
    std::mt19937_64 rng(7);
    for (std::size_t n : {0UL, 1UL, 3UL, 7UL, 64UL, 1000UL}) {
        auto a = random_vec(rng, n);
        auto b = random_vec(rng, n);
        long double expected = ref_dot(a, b);
        double tol = 1e-12 * (1.0 + static_cast<double>(n));
        CHECK(std::fabs(static_cast<double>(expected) - kernels::detail::dot_scalar(a.data(), b.data(), n)) <= tol);

        long double l2 = 0.0L;
        long double sum = 0.0L;
        for (std::size_t i = 0; i < n; ++i) {
            long double d = static_cast<long double>(a[i]) - b[i];
            l2 += d * d;
            sum += a[i];
        }
        CHECK(kernels::detail::l2sq_scalar(a.data(), b.data(), n) ==
              doctest::Approx(static_cast<double>(l2)).epsilon(1e-12));
        CHECK(kernels::detail::sum_scalar(a.data(), n) ==
              doctest::Approx(static_cast<double>(sum)).epsilon(1e-12));
    }
}

TEST_CASE("axpy accumulates y += alpha x") {
    std::vector<double> x{1.0, -2.0, 3.0};
    std::vector<double> y{10.0, 10.0, 10.0};
    kernels::detail::axpy_scalar(0.5, x.data(), y.data(), 3);
    CHECK(y == std::vector<double>{10.5, 9.0, 11.5});
}

#if defined(CHARTML_HAVE_AVX2)
TEST_CASE("avx2 variants agree with the scalar reference") {
    if (!kernels::avx2_available()) return;
    std::mt19937_64 rng(99);
    // odd lengths cover every remainder path of the vector loops
    for (std::size_t n = 0; n <= 70; ++n) {
        auto a = random_vec(rng, n, 3.0);
        auto b = random_vec(rng, n, 3.0);

        double abs_scale = 1e-15;
        for (std::size_t i = 0; i < n; ++i) abs_scale += std::fabs(a[i] * b[i]);
        CHECK(std::fabs(kernels::detail::dot_scalar(a.data(), b.data(), n) -
                        kernels::detail::dot_avx2(a.data(), b.data(), n)) <= 1e-13 * abs_scale);

        double l2_scale = 1e-15;
        for (std::size_t i = 0; i < n; ++i) l2_scale += (a[i] - b[i]) * (a[i] - b[i]);
        CHECK(std::fabs(kernels::detail::l2sq_scalar(a.data(), b.data(), n) -
                        kernels::detail::l2sq_avx2(a.data(), b.data(), n)) <= 1e-13 * l2_scale);

        double sum_scale = 1e-15;
        for (std::size_t i = 0; i < n; ++i) sum_scale += std::fabs(a[i]);
        CHECK(std::fabs(kernels::detail::sum_scalar(a.data(), n) -
                        kernels::detail::sum_avx2(a.data(), n)) <= 1e-13 * sum_scale);

        auto y1 = b;
        auto y2 = b;
        kernels::detail::axpy_scalar(0.77, a.data(), y1.data(), n);
        kernels::detail::axpy_avx2(0.77, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-14));
    }
}

TEST_CASE("avx2 equivalence on large random blocks") {
    if (!kernels::avx2_available()) return;
    std::mt19937_64 rng(123);
    for (int rep = 0; rep < 20; ++rep) {
        std::size_t n = 500 + static_cast<std::size_t>(rng() % 2000);
        auto a = random_vec(rng, n, 10.0);
        auto b = random_vec(rng, n, 10.0);
        double abs_scale = 0.0;
        for (std::size_t i = 0; i < n; ++i) abs_scale += std::fabs(a[i] * b[i]);
        CHECK(std::fabs(kernels::detail::dot_scalar(a.data(), b.data(), n) -
                        kernels::detail::dot_avx2(a.data(), b.data(), n)) <= 1e-13 * abs_scale);
    }
}
#endif

TEST_CASE("backend dispatch is overridable and reports its choice") {
    kernels::force_backend(kernels::Backend::Scalar);
    CHECK(kernels::active_backend() == kernels::Backend::Scalar);
    CHECK(kernels::backend_name() == "scalar");
    std::vector<double> a{1, 2, 3};
    CHECK(kernels::dot(a.data(), a.data(), 3) == doctest::Approx(14.0));

    if (kernels::avx2_available()) {
        kernels::force_backend(kernels::Backend::Avx2);
        CHECK(kernels::backend_name() == "avx2");
        CHECK(kernels::dot(a.data(), a.data(), 3) == doctest::Approx(14.0));
    } else {
        CHECK_THROWS_AS(kernels::force_backend(kernels::Backend::Avx2), ValueError);
    }
    kernels::force_backend(kernels::Backend::Auto);
}
