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

// Cache-blocked GEMM driver shared by every ISA variant. The variant only
// supplies the MR x NR micro-kernel; packing and edge handling live here.

#include <algorithm>
#include <cstring>
#include <vector>

namespace fcnr::simd::detail {

template <class T>
using MicroKernel = void (*)(int kc, const T* a_pack, const T* b_pack, T* c, int ldc, T alpha);

constexpr int kBlockK = 256;
constexpr int kBlockM = 96;
constexpr int kBlockN = 2048;

template <class T, int MR, int NR>
void gemm_blocked(MicroKernel<T> micro, bool trans_a, bool trans_b, int m, int n, int k, T alpha,
                  const T* a, int lda, const T* b, int ldb, T beta, T* c, int ldc) {
    if (m <= 0 || n <= 0) return;
    for (int i = 0; i < m; ++i) {
        T* row = c + static_cast<std::ptrdiff_t>(i) * ldc;
        if (beta == T(0))
            std::fill(row, row + n, T(0));
        else if (beta != T(1))
            for (int j = 0; j < n; ++j) row[j] *= beta;
    }
    if (k <= 0 || alpha == T(0)) return;

    auto a_at = [&](int i, int p) -> T {
        return trans_a ? a[static_cast<std::ptrdiff_t>(p) * lda + i]
                       : a[static_cast<std::ptrdiff_t>(i) * lda + p];
    };

    thread_local std::vector<T> a_pack;
    thread_local std::vector<T> b_pack;
    alignas(64) T edge[MR * NR];

    for (int jc = 0; jc < n; jc += kBlockN) {
        const int nc = std::min(kBlockN, n - jc);
        const int n_panels = (nc + NR - 1) / NR;
        for (int pc = 0; pc < k; pc += kBlockK) {
            const int kc = std::min(kBlockK, k - pc);
            b_pack.assign(static_cast<std::size_t>(n_panels) * NR * kc, T(0));
            for (int jp = 0; jp < n_panels; ++jp) {
                T* dst = b_pack.data() + static_cast<std::size_t>(jp) * NR * kc;
                const int j0 = jc + jp * NR;
                const int jn = std::min(NR, n - j0);
                if (!trans_b) {
                    for (int p = 0; p < kc; ++p) {
                        const T* src = b + static_cast<std::ptrdiff_t>(pc + p) * ldb + j0;
                        std::memcpy(dst + p * NR, src, sizeof(T) * jn);
                    }
                } else {
                    for (int jj = 0; jj < jn; ++jj) {
                        const T* src = b + static_cast<std::ptrdiff_t>(j0 + jj) * ldb + pc;
                        for (int p = 0; p < kc; ++p) dst[p * NR + jj] = src[p];
                    }
                }
            }
            for (int ic = 0; ic < m; ic += kBlockM) {
                const int mc = std::min(kBlockM, m - ic);
                const int m_panels = (mc + MR - 1) / MR;
                a_pack.assign(static_cast<std::size_t>(m_panels) * MR * kc, T(0));
                for (int ip = 0; ip < m_panels; ++ip) {
                    T* dst = a_pack.data() + static_cast<std::size_t>(ip) * MR * kc;
                    const int i0 = ic + ip * MR;
                    const int in = std::min(MR, m - i0);
                    for (int ii = 0; ii < in; ++ii)
                        for (int p = 0; p < kc; ++p) dst[p * MR + ii] = a_at(i0 + ii, pc + p);
                }
                for (int jp = 0; jp < n_panels; ++jp) {
                    const int j0 = jc + jp * NR;
                    const int jn = std::min(NR, n - j0);
                    const T* bp = b_pack.data() + static_cast<std::size_t>(jp) * NR * kc;
                    for (int ip = 0; ip < m_panels; ++ip) {
                        const int i0 = ic + ip * MR;
                        const int in = std::min(MR, m - i0);
                        const T* ap = a_pack.data() + static_cast<std::size_t>(ip) * MR * kc;
                        T* cp = c + static_cast<std::ptrdiff_t>(i0) * ldc + j0;
                        if (in == MR && jn == NR) {
                            micro(kc, ap, bp, cp, ldc, alpha);
                        } else {
                            std::fill(edge, edge + MR * NR, T(0));
                            micro(kc, ap, bp, edge, NR, alpha);
                            for (int ii = 0; ii < in; ++ii)
                                for (int jj = 0; jj < jn; ++jj)
                                    cp[static_cast<std::ptrdiff_t>(ii) * ldc + jj] +=
                                        edge[ii * NR + jj];
                        }
                    }
                }
            }
        }
    }
}

}  // namespace fcnr::simd::detail
