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

#include <cmath>

#include "gemm_driver.hpp"
#include "kernels_internal.hpp"

namespace fcnr::simd::detail {
namespace {

constexpr int kScalarMr = 4;
constexpr int kScalarNr = 4;

template <class T>
void micro_scalar(int kc, const T* a, const T* b, T* c, int ldc, T alpha) {
    T acc[kScalarMr][kScalarNr] = {};
    for (int p = 0; p < kc; ++p) {
        const T* ap = a + p * kScalarMr;
        const T* bp = b + p * kScalarNr;
        for (int i = 0; i < kScalarMr; ++i)
            for (int j = 0; j < kScalarNr; ++j) acc[i][j] += ap[i] * bp[j];
    }
    for (int i = 0; i < kScalarMr; ++i)
        for (int j = 0; j < kScalarNr; ++j) c[i * ldc + j] += alpha * acc[i][j];
}

template <class T>
void gemm_scalar(bool ta, bool tb, int m, int n, int k, T alpha, const T* a, int lda, const T* b,
                 int ldb, T beta, T* c, int ldc) {
    gemm_blocked<T, kScalarMr, kScalarNr>(&micro_scalar<T>, ta, tb, m, n, k, alpha, a, lda, b, ldb,
                                          beta, c, ldc);
}

template <class T>
void axpy_scalar(std::size_t n, T alpha, const T* x, T* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <class T>
T dot_scalar(std::size_t n, const T* x, const T* y) {
    T s = 0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
    return s;
}

template <class T>
void adam_scalar(std::size_t n, T* param, const T* grad, T* m, T* v, T lr, T beta1, T beta2,
                 T eps, T c1, T c2) {
    const T one_b1 = T(1) - beta1;
    const T one_b2 = T(1) - beta2;
    for (std::size_t i = 0; i < n; ++i) {
        const T g = grad[i];
        m[i] = beta1 * m[i] + one_b1 * g;
        v[i] = beta2 * v[i] + one_b2 * (g * g);
        const T m_hat = m[i] / c1;
        const T v_hat = v[i] / c2;
        param[i] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
}

}  // namespace

template <class T>
KernelTable<T> scalar_table() {
    return {&gemm_scalar<T>, &axpy_scalar<T>, &dot_scalar<T>, &adam_scalar<T>};
}

template KernelTable<float> scalar_table<float>();
template KernelTable<double> scalar_table<double>();

}  // namespace fcnr::simd::detail
