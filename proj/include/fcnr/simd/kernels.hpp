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

#pragma once

// Data-parallel inner loops used by the network and the optimizer.
//
// Every kernel has a portable scalar reference and, where the CPU supports
// it, an AVX2+FMA variant. The variant is chosen once at startup from CPUID
// and can be pinned with FCNR_SIMD=scalar|avx2 or set_simd_level().
// All matrices are row-major.

#include <cstddef>
#include <string_view>

namespace fcnr::simd {

enum class SimdLevel { scalar = 0, avx2 = 1 };

SimdLevel detected_simd_level();
SimdLevel active_simd_level();
// Throws std::runtime_error if the CPU cannot run the requested level.
void set_simd_level(SimdLevel level);
std::string_view simd_level_name(SimdLevel level);

template <class T>
struct KernelTable {
    // C = alpha * op(A) * op(B) + beta * C, op(A) is MxK and op(B) is KxN.
    void (*gemm)(bool trans_a, bool trans_b, int m, int n, int k, T alpha,
                 const T* a, int lda, const T* b, int ldb, T beta, T* c, int ldc);
    // y += alpha * x
    void (*axpy)(std::size_t n, T alpha, const T* x, T* y);
    T (*dot)(std::size_t n, const T* x, const T* y);
    // One Adam step; c1 and c2 are the bias corrections 1-beta1^t, 1-beta2^t.
    void (*adam)(std::size_t n, T* param, const T* grad, T* m, T* v, T lr, T beta1, T beta2,
                 T eps, T c1, T c2);
};

template <class T>
const KernelTable<T>& kernels_for(SimdLevel level);

template <class T>
const KernelTable<T>& kernels() {
    return kernels_for<T>(active_simd_level());
}

template <class T>
inline void gemm(bool trans_a, bool trans_b, int m, int n, int k, T alpha, const T* a, int lda,
                 const T* b, int ldb, T beta, T* c, int ldc) {
    kernels<T>().gemm(trans_a, trans_b, m, n, k, alpha, a, lda, b, ldb, beta, c, ldc);
}

template <class T>
inline void axpy(std::size_t n, T alpha, const T* x, T* y) {
    kernels<T>().axpy(n, alpha, x, y);
}

template <class T>
inline T dot(std::size_t n, const T* x, const T* y) {
    return kernels<T>().dot(n, x, y);
}

}  // namespace fcnr::simd
