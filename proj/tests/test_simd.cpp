// Copyright 2026 The FCNR Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "doctest.h"

#include <cmath>
#include <cstring>
#include <tuple>
#include <vector>

#include "fcnr/simd/kernels.hpp"
#include "fcnr/util/random.hpp"

using namespace fcnr;
using simd::SimdLevel;

namespace {

bool have_avx2() { return simd::detected_simd_level() == SimdLevel::avx2; }

template <class T>
std::vector<T> random_vec(std::size_t n, Rng& rng) {
    std::vector<T> v(n);
    for (auto& x : v) x = static_cast<T>(rng.uniform(-1, 1));
    return v;
}

// Long-double triple loop over the logical (possibly transposed) operands.
template <class T>
std::vector<long double> gemm_oracle(bool ta, bool tb, int m, int n, int k, T alpha, const std::vector<T>& a, int lda,
                                     const std::vector<T>& b, int ldb, T beta, const std::vector<T>& c, int ldc) {
    std::vector<long double> out(static_cast<std::size_t>(m) * ldc);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            long double s = 0;
            for (int p = 0; p < k; ++p) {
                const long double av = ta ? a[static_cast<std::size_t>(p) * lda + i] : a[static_cast<std::size_t>(i) * lda + p];
                const long double bv = tb ? b[static_cast<std::size_t>(j) * ldb + p] : b[static_cast<std::size_t>(p) * ldb + j];
                s += av * bv;
            }
            out[static_cast<std::size_t>(i) * ldc + j] = alpha * s + beta * static_cast<long double>(c[static_cast<std::size_t>(i) * ldc + j]);
        }
    return out;
}

template <class T>
void check_gemm(SimdLevel level, double tol) {
    Rng rng(42);
    const auto& kt = simd::kernels_for<T>(level);
    const int shapes[][3] = {{1, 1, 1}, {7, 5, 3}, {16, 16, 16}, {33, 70, 129}, {100, 9, 300}, {6, 600, 17}};
    for (const auto& s : shapes)
        for (int ta = 0; ta < 2; ++ta)
            for (int tb = 0; tb < 2; ++tb)
                for (const T beta : {T(0), T(1), T(-0.5)}) {
                    const int m = s[0], n = s[1], k = s[2];
                    const int lda = (ta ? m : k) + 3, ldb = (tb ? k : n) + 1, ldc = n + 2;
                    const auto a = random_vec<T>(static_cast<std::size_t>(ta ? k : m) * lda, rng);
                    const auto b = random_vec<T>(static_cast<std::size_t>(tb ? n : k) * ldb, rng);
                    auto c = random_vec<T>(static_cast<std::size_t>(m) * ldc, rng);
                    const auto want = gemm_oracle<T>(ta, tb, m, n, k, T(0.75), a, lda, b, ldb, beta, c, ldc);
                    kt.gemm(ta, tb, m, n, k, T(0.75), a.data(), lda, b.data(), ldb, beta, c.data(), ldc);
                    double worst = 0;
                    for (int i = 0; i < m; ++i)
                        for (int j = 0; j < n; ++j) {
                            const std::size_t idx = static_cast<std::size_t>(i) * ldc + j;
                            worst = std::max(worst, static_cast<double>(std::abs(want[idx] - c[idx])) / std::sqrt(double(k)));
                        }
                    CHECK(worst < tol);
                }
}

}  // namespace

TEST_CASE("dispatch reports and pins the level") {
    const auto before = simd::active_simd_level();
    simd::set_simd_level(SimdLevel::scalar);
    CHECK(simd::active_simd_level() == SimdLevel::scalar);
    if (have_avx2()) {
        simd::set_simd_level(SimdLevel::avx2);
        CHECK(simd::active_simd_level() == SimdLevel::avx2);
    } else {
        CHECK_THROWS(simd::set_simd_level(SimdLevel::avx2));
    }
    simd::set_simd_level(before);
    CHECK(simd::simd_level_name(SimdLevel::avx2) == "avx2");
}

TEST_CASE("gemm matches a long-double oracle") {
    check_gemm<float>(SimdLevel::scalar, 1e-5);
    check_gemm<double>(SimdLevel::scalar, 1e-13);
    if (have_avx2()) {
        check_gemm<float>(SimdLevel::avx2, 1e-5);
        check_gemm<double>(SimdLevel::avx2, 1e-13);
    }
}

TEST_CASE("axpy and dot agree across levels") {
    if (!have_avx2()) return;
    Rng rng(7);
    for (std::size_t n : {std::size_t{0}, std::size_t{1}, std::size_t{7}, std::size_t{8}, std::size_t{33}, std::size_t{1000}}) {
        const auto x = random_vec<double>(n, rng);
        auto y1 = random_vec<double>(n, rng);
        auto y2 = y1;
        simd::kernels_for<double>(SimdLevel::scalar).axpy(n, 0.3, x.data(), y1.data());
        simd::kernels_for<double>(SimdLevel::avx2).axpy(n, 0.3, x.data(), y2.data());
        for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-15));
        const double d1 = simd::kernels_for<double>(SimdLevel::scalar).dot(n, x.data(), y1.data());
        const double d2 = simd::kernels_for<double>(SimdLevel::avx2).dot(n, x.data(), y1.data());
        CHECK(std::abs(d1 - d2) <= 1e-12 * (1 + std::abs(d1)));

        const auto xf = random_vec<float>(n, rng);
        const auto yf = random_vec<float>(n, rng);
        long double ref = 0;
        for (std::size_t i = 0; i < n; ++i) ref += static_cast<long double>(xf[i]) * yf[i];
        for (auto lv : {SimdLevel::scalar, SimdLevel::avx2})
            CHECK(std::abs(simd::kernels_for<float>(lv).dot(n, xf.data(), yf.data()) - static_cast<double>(ref)) < 1e-4 * (1 + std::sqrt(double(n))));
    }
}

TEST_CASE("adam step is bit-identical across levels") {
    if (!have_avx2()) return;
    Rng rng(9);
    const std::size_t n = 1037;
    auto run = [&](SimdLevel lv, auto tag) {
        using T = decltype(tag);
        Rng r(11);
        auto p = random_vec<T>(n, r), m = random_vec<T>(n, r), v = random_vec<T>(n, r);
        for (auto& x : v) x = std::abs(x);
        for (int step = 1; step <= 5; ++step) {
            const auto g = random_vec<T>(n, r);
            const T c1 = static_cast<T>(1 - std::pow(0.9, step)), c2 = static_cast<T>(1 - std::pow(0.999, step));
            simd::kernels_for<T>(lv).adam(n, p.data(), g.data(), m.data(), v.data(), T(1e-3), T(0.9), T(0.999), T(1e-8), c1, c2);
        }
        return std::make_tuple(p, m, v);
    };
    CHECK(run(SimdLevel::scalar, 0.0f) == run(SimdLevel::avx2, 0.0f));
    CHECK(run(SimdLevel::scalar, 0.0) == run(SimdLevel::avx2, 0.0));
    (void)rng;
}

TEST_CASE("scalar adam follows the textbook update") {
    Rng rng(3);
    const std::size_t n = 64;
    auto p = random_vec<double>(n, rng), g = random_vec<double>(n, rng);
    std::vector<double> m(n, 0.0), v(n, 0.0);
    const auto p0 = p;
    const double c1 = 1 - 0.9, c2 = 1 - 0.999;
    simd::kernels_for<double>(SimdLevel::scalar).adam(n, p.data(), g.data(), m.data(), v.data(), 1e-3, 0.9, 0.999, 1e-8, c1, c2);
    for (std::size_t i = 0; i < n; ++i) {
        const double mi = 0.1 * g[i], vi = 0.001 * g[i] * g[i];
        const double want = p0[i] - 1e-3 * (mi / c1) / (std::sqrt(vi / c2) + 1e-8);
        CHECK(m[i] == doctest::Approx(mi).epsilon(1e-14));
        CHECK(v[i] == doctest::Approx(vi).epsilon(1e-14));
        CHECK(p[i] == doctest::Approx(want).epsilon(1e-14));
    }
}
