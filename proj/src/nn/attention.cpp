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

#include "fcnr/nn/attention.hpp"

#include <algorithm>
#include <cmath>

#include "fcnr/simd/kernels.hpp"

namespace fcnr::nn {

namespace {

constexpr int kQueryBlock = 256;

template <class T>
void softmax_rows(T* s, int rows, int cols) {
    for (int i = 0; i < rows; ++i) {
        T* row = s + static_cast<std::size_t>(i) * cols;
        const T mx = *std::max_element(row, row + cols);
        T sum = 0;
        for (int j = 0; j < cols; ++j) {
            row[j] = std::exp(row[j] - mx);
            sum += row[j];
        }
        const T inv = T(1) / sum;
        for (int j = 0; j < cols; ++j) row[j] *= inv;
    }
}

}  // namespace

template <class T>
Jctm<T>::Jctm(const std::string& name, int channels, int heads)
    : channels_(channels), heads_(heads),
      wq_(name + ".q", channels, channels, 1, 1),
      wk_(name + ".k", channels, channels, 1, 1),
      wv_(name + ".v", channels, channels, 1, 1),
      wo_(name + ".o", channels, channels, 1, 1) {
    if (heads < 1 || channels % heads != 0)
        contract_fail(name + ": channels " + std::to_string(channels) + " not divisible by " +
                      std::to_string(heads) + " heads");
}

template <class T>
Tensor<T> Jctm<T>::attend(const Tensor<T>& query_src, const Tensor<T>& kv_src, DirCache* cache) const {
    typename Conv2d<T>::Cache* qc = cache ? &cache->q_cache : nullptr;
    typename Conv2d<T>::Cache* kc = cache ? &cache->k_cache : nullptr;
    typename Conv2d<T>::Cache* vc = cache ? &cache->v_cache : nullptr;
    typename Conv2d<T>::Cache* oc = cache ? &cache->o_cache : nullptr;

    Tensor<T> q = wq_.forward(query_src, qc);
    Tensor<T> k = wk_.forward(kv_src, kc);
    Tensor<T> v = wv_.forward(kv_src, vc);

    const int n = q.h * q.w;
    const int d = channels_ / heads_;
    const T scale = T(1) / std::sqrt(static_cast<T>(d));
    Tensor<T> o(channels_, q.h, q.w);

    if (cache) {
        cache->attn.assign(static_cast<std::size_t>(heads_) * n * n, T(0));
        for (int h = 0; h < heads_; ++h) {
            const T* qh = q.plane(h * d);
            const T* kh = k.plane(h * d);
            const T* vh = v.plane(h * d);
            T* a = cache->attn.data() + static_cast<std::size_t>(h) * n * n;
            simd::gemm<T>(true, false, n, n, d, scale, qh, n, kh, n, T(0), a, n);
            softmax_rows(a, n, n);
            simd::gemm<T>(false, true, d, n, n, T(1), vh, n, a, n, T(0), o.plane(h * d), n);
        }
    } else {
        std::vector<T> s(static_cast<std::size_t>(std::min(kQueryBlock, n)) * n);
        for (int h = 0; h < heads_; ++h) {
            const T* qh = q.plane(h * d);
            const T* kh = k.plane(h * d);
            const T* vh = v.plane(h * d);
            T* oh = o.plane(h * d);
            for (int i0 = 0; i0 < n; i0 += kQueryBlock) {
                const int bq = std::min(kQueryBlock, n - i0);
                simd::gemm<T>(true, false, bq, n, d, scale, qh + i0, n, kh, n, T(0), s.data(), n);
                softmax_rows(s.data(), bq, n);
                simd::gemm<T>(false, true, d, bq, n, T(1), vh, n, s.data(), n, T(0), oh + i0, n);
            }
        }
    }

    Tensor<T> out = wo_.forward(o, oc);
    add_inplace(out, query_src);
    if (cache) {
        cache->q = std::move(q);
        cache->k = std::move(k);
        cache->v = std::move(v);
    }
    return out;
}

template <class T>
std::pair<Tensor<T>, Tensor<T>> Jctm<T>::forward(const Tensor<T>& f_l, const Tensor<T>& f_r,
                                                 Cache* cache) const {
    require_same_shape(f_l, f_r, "jctm");
    if (f_l.c != channels_)
        contract_fail("jctm: expected " + std::to_string(channels_) + " channels, got " + std::to_string(f_l.c));
    Tensor<T> out_l = attend(f_l, f_r, cache ? &cache->l : nullptr);
    Tensor<T> out_r = attend(f_r, f_l, cache ? &cache->r : nullptr);
    return {std::move(out_l), std::move(out_r)};
}

template <class T>
void Jctm<T>::attend_backward(const DirCache& cache, const Tensor<T>& d_out, Tensor<T>& d_query,
                              Tensor<T>& d_kv) {
    add_inplace(d_query, d_out);
    Tensor<T> d_o = wo_.backward(cache.o_cache, d_out);

    const Tensor<T>& q = cache.q;
    const Tensor<T>& k = cache.k;
    const Tensor<T>& v = cache.v;
    const int n = q.h * q.w;
    const int d = channels_ / heads_;
    const T scale = T(1) / std::sqrt(static_cast<T>(d));

    Tensor<T> d_q(channels_, q.h, q.w), d_k(channels_, q.h, q.w), d_v(channels_, q.h, q.w);
    std::vector<T> d_a(static_cast<std::size_t>(n) * n);
    for (int h = 0; h < heads_; ++h) {
        const T* a = cache.attn.data() + static_cast<std::size_t>(h) * n * n;
        const T* doh = d_o.plane(h * d);
        // dV = dO A ; dA = dO^T V
        simd::gemm<T>(false, false, d, n, n, T(1), doh, n, a, n, T(0), d_v.plane(h * d), n);
        simd::gemm<T>(true, false, n, n, d, T(1), doh, n, v.plane(h * d), n, T(0), d_a.data(), n);
        // softmax backward, in place: dS = A o (dA - rowsum(A o dA))
        for (int i = 0; i < n; ++i) {
            const T* ar = a + static_cast<std::size_t>(i) * n;
            T* gr = d_a.data() + static_cast<std::size_t>(i) * n;
            T acc = 0;
            for (int j = 0; j < n; ++j) acc += ar[j] * gr[j];
            for (int j = 0; j < n; ++j) gr[j] = ar[j] * (gr[j] - acc);
        }
        // dQ = scale K dS^T ; dK = scale Q dS
        simd::gemm<T>(false, true, d, n, n, scale, k.plane(h * d), n, d_a.data(), n, T(0), d_q.plane(h * d), n);
        simd::gemm<T>(false, false, d, n, n, scale, q.plane(h * d), n, d_a.data(), n, T(0), d_k.plane(h * d), n);
    }

    add_inplace(d_query, wq_.backward(cache.q_cache, d_q));
    add_inplace(d_kv, wk_.backward(cache.k_cache, d_k));
    add_inplace(d_kv, wv_.backward(cache.v_cache, d_v));
}

template <class T>
std::pair<Tensor<T>, Tensor<T>> Jctm<T>::backward(const Cache& cache, const Tensor<T>& d_l,
                                                  const Tensor<T>& d_r) {
    Tensor<T> g_l(d_l.c, d_l.h, d_l.w), g_r(d_r.c, d_r.h, d_r.w);
    attend_backward(cache.l, d_l, g_l, g_r);
    attend_backward(cache.r, d_r, g_r, g_l);
    return {std::move(g_l), std::move(g_r)};
}

template <class T>
void Jctm<T>::init(Rng& rng) {
    wq_.init(rng, false);
    wk_.init(rng, false);
    wv_.init(rng, false);
    wo_.init(rng, false);
}

template <class T>
void Jctm<T>::append_params(ParamList<T>& out) {
    wq_.append_params(out);
    wk_.append_params(out);
    wv_.append_params(out);
    wo_.append_params(out);
}

template class Jctm<float>;
template class Jctm<double>;

}  // namespace fcnr::nn
