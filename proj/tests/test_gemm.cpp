#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "airbench/gemm.hpp"
#include "airbench/rng.hpp"

using namespace airbench;

namespace {

// Double-precision reference with the same alpha/beta semantics.
void naive_gemm(bool ta, bool tb, int64_t m, int64_t n, int64_t k,
                float alpha, const std::vector<float>& a, int64_t lda,
                const std::vector<float>& b, int64_t ldb,
                float beta, std::vector<double>& c, int64_t ldc) {
    for (int64_t i = 0; i < m; ++i) {
        for (int64_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (int64_t kk = 0; kk < k; ++kk) {
                double av = ta ? a[static_cast<size_t>(kk * lda + i)]
                               : a[static_cast<size_t>(i * lda + kk)];
                double bv = tb ? b[static_cast<size_t>(j * ldb + kk)]
                               : b[static_cast<size_t>(kk * ldb + j)];
                s += av * bv;
            }
            double& cv = c[static_cast<size_t>(i * ldc + j)];
            cv = alpha * s + (beta == 0.0f ? 0.0 : beta * cv);
        }
    }
}

void check_case(uint64_t seed, bool ta, bool tb, int64_t m, int64_t n, int64_t k,
                float alpha, float beta) {
    RngStream rng(seed, RngPurpose::Test);
    int64_t lda = ta ? m : k;
    int64_t ldb = tb ? k : n;
    std::vector<float> a(static_cast<size_t>((ta ? k : m) * lda));
    std::vector<float> b(static_cast<size_t>((tb ? n : k) * ldb));
    std::vector<float> c(static_cast<size_t>(m * n));
    for (auto& v : a) v = rng.uniform(-1.0f, 1.0f);
    for (auto& v : b) v = rng.uniform(-1.0f, 1.0f);
    for (auto& v : c) v = rng.uniform(-1.0f, 1.0f);

    std::vector<double> ref(c.begin(), c.end());
    naive_gemm(ta, tb, m, n, k, alpha, a, lda, b, ldb, beta, ref, n);
    gemm(ta, tb, m, n, k, alpha, a.data(), lda, b.data(), ldb, beta, c.data(), n);

    // Normwise comparison: float accumulation noise scales with sqrt(k);
    // ~20 ulp headroom, still orders of magnitude below any indexing bug.
    double scale = std::sqrt(static_cast<double>(std::max<int64_t>(k, 1)));
    double tol = 2.4e-6 * scale + 1e-6;
    for (int64_t i = 0; i < m * n; ++i) {
        double err = std::abs(static_cast<double>(c[static_cast<size_t>(i)]) - ref[static_cast<size_t>(i)]);
        if (err > tol) {
            CAPTURE(ta); CAPTURE(tb); CAPTURE(m); CAPTURE(n); CAPTURE(k);
            CAPTURE(alpha); CAPTURE(beta); CAPTURE(i); CAPTURE(err);
            REQUIRE(err <= tol);
        }
    }
}

} // namespace

TEST_CASE("gemm matches the double reference across shapes and trans flags") {
    struct Shape { int64_t m, n, k; };
    std::vector<Shape> shapes = {
        {1, 1, 1}, {6, 32, 384}, {7, 33, 1}, {5, 17, 40}, {13, 100, 7},
        {64, 960, 216}, {150, 70, 401}, {2, 37, 385}, {191, 65, 33},
    };
    uint64_t seed = 1;
    for (const auto& s : shapes)
        for (bool ta : {false, true})
            for (bool tb : {false, true})
                check_case(seed++, ta, tb, s.m, s.n, s.k, 1.0f, 0.0f);
}

TEST_CASE("gemm honors alpha and beta") {
    uint64_t seed = 100;
    for (auto [alpha, beta] : std::vector<std::pair<float, float>>{
             {1.0f, 1.0f}, {0.5f, -2.0f}, {2.0f, 0.25f}, {0.0f, 0.3f}, {-1.0f, 0.0f}}) {
        check_case(seed++, false, false, 37, 53, 29, alpha, beta);
        check_case(seed++, true, true, 37, 53, 29, alpha, beta);
    }
}

TEST_CASE("gemm crosses cache-blocking boundaries") {
    // MC=144, KC=384, NC=4096 internally; straddle each.
    check_case(200, false, false, 145, 40, 385, 1.0f, 0.0f);
    check_case(201, true, false, 300, 4100, 3, 1.0f, 0.0f);
    check_case(202, false, true, 6, 33, 769, 1.0f, 1.0f);
}

TEST_CASE("gemm with beta=0 never reads C") {
    int64_t m = 11, n = 35, k = 17;
    RngStream rng(7, RngPurpose::Test);
    std::vector<float> a(static_cast<size_t>(m * k)), b(static_cast<size_t>(k * n));
    for (auto& v : a) v = rng.uniform(-1.0f, 1.0f);
    for (auto& v : b) v = rng.uniform(-1.0f, 1.0f);
    std::vector<float> c(static_cast<size_t>(m * n), std::numeric_limits<float>::quiet_NaN());
    gemm(false, false, m, n, k, 1.0f, a.data(), k, b.data(), n, 0.0f, c.data(), n);
    for (float v : c) CHECK(std::isfinite(v));
}

TEST_CASE("gemm degenerate sizes") {
    std::vector<float> a(4, 1.0f), b(4, 1.0f), c(4, 5.0f);
    // k = 0 scales C by beta.
    gemm(false, false, 2, 2, 0, 1.0f, a.data(), 0, b.data(), 2, 0.5f, c.data(), 2);
    for (float v : c) CHECK(v == 2.5f);
    gemm(false, false, 2, 2, 0, 1.0f, a.data(), 0, b.data(), 2, 0.0f, c.data(), 2);
    for (float v : c) CHECK(v == 0.0f);
    // m or n zero: no-op, no crash.
    gemm(false, false, 0, 2, 2, 1.0f, a.data(), 2, b.data(), 2, 0.0f, c.data(), 2);
    gemm(false, false, 2, 0, 2, 1.0f, a.data(), 2, b.data(), 2, 0.0f, c.data(), 2);
}

TEST_CASE("gemm is repeatable bit-for-bit") {
    int64_t m = 67, n = 129, k = 250;
    RngStream rng(9, RngPurpose::Test);
    std::vector<float> a(static_cast<size_t>(m * k)), b(static_cast<size_t>(k * n));
    for (auto& v : a) v = rng.uniform(-1.0f, 1.0f);
    for (auto& v : b) v = rng.uniform(-1.0f, 1.0f);
    std::vector<float> c1(static_cast<size_t>(m * n)), c2(static_cast<size_t>(m * n));
    gemm(false, false, m, n, k, 1.0f, a.data(), k, b.data(), n, 0.0f, c1.data(), n);
    gemm(false, false, m, n, k, 1.0f, a.data(), k, b.data(), n, 0.0f, c2.data(), n);
    CHECK(c1 == c2);
}

TEST_CASE("gemm randomized shapes against the reference") {
    RngStream shapes(555, RngPurpose::Test);
    for (int trial = 0; trial < 25; ++trial) {
        int64_t m = 1 + shapes.below(90);
        int64_t n = 1 + shapes.below(90);
        int64_t k = 1 + shapes.below(420);
        bool ta = shapes.coin(), tb = shapes.coin();
        check_case(1000 + static_cast<uint64_t>(trial), ta, tb, m, n, k, 1.0f, 0.0f);
    }
}
