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

#include "fcnr/nn/layers.hpp"

#include <cmath>
#include <cstring>

#include "fcnr/simd/kernels.hpp"

namespace fcnr::nn {

template <class T>
Param<T>::Param(std::string n, std::vector<int> s) : name(std::move(n)), shape(std::move(s)) {
    std::size_t count = 1;
    for (int d : shape) count *= static_cast<std::size_t>(d);
    value.assign(count, T(0));
    grad.assign(count, T(0));
}

template <class T>
void Param<T>::zero_grad() {
    std::fill(grad.begin(), grad.end(), T(0));
}

double init_bound(int fan_in, bool followed_by_prelu) {
    const double gain2 = followed_by_prelu ? 2.0 / (1.0 + 0.25 * 0.25) : 1.0;
    return std::sqrt(3.0 * gain2 / static_cast<double>(fan_in));
}

namespace {

template <class T>
void fill_uniform(std::vector<T>& v, Rng& rng, double bound) {
    for (auto& x : v) x = static_cast<T>(rng.uniform(-bound, bound));
}

int conv_out(int in, int k, int stride, int pad) { return (in + 2 * pad - k) / stride + 1; }

}  // namespace

template <class T>
void im2col(const T* img, int c, int h, int w, int k, int stride, int pad, int oh, int ow, T* col) {
    const std::size_t p_count = static_cast<std::size_t>(oh) * ow;
    for (int ch = 0; ch < c; ++ch) {
        const T* src = img + static_cast<std::size_t>(ch) * h * w;
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                T* dst = col + (static_cast<std::size_t>(ch) * k * k + ky * k + kx) * p_count;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * stride - pad + ky;
                    T* drow = dst + static_cast<std::size_t>(oy) * ow;
                    if (iy < 0 || iy >= h) {
                        std::fill(drow, drow + ow, T(0));
                        continue;
                    }
                    const T* srow = src + static_cast<std::size_t>(iy) * w;
                    if (stride == 1) {
                        for (int ox = 0; ox < ow; ++ox) {
                            const int ix = ox - pad + kx;
                            drow[ox] = (ix >= 0 && ix < w) ? srow[ix] : T(0);
                        }
                    } else {
                        for (int ox = 0; ox < ow; ++ox) {
                            const int ix = ox * stride - pad + kx;
                            drow[ox] = (ix >= 0 && ix < w) ? srow[ix] : T(0);
                        }
                    }
                }
            }
        }
    }
}

template <class T>
void col2im(const T* col, int c, int h, int w, int k, int stride, int pad, int oh, int ow, T* img) {
    const std::size_t p_count = static_cast<std::size_t>(oh) * ow;
    for (int ch = 0; ch < c; ++ch) {
        T* dst = img + static_cast<std::size_t>(ch) * h * w;
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const T* src = col + (static_cast<std::size_t>(ch) * k * k + ky * k + kx) * p_count;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * stride - pad + ky;
                    if (iy < 0 || iy >= h) continue;
                    T* drow = dst + static_cast<std::size_t>(iy) * w;
                    const T* srow = src + static_cast<std::size_t>(oy) * ow;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * stride - pad + kx;
                        if (ix >= 0 && ix < w) drow[ix] += srow[ox];
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Conv2d

template <class T>
Conv2d<T>::Conv2d(const std::string& name, int in_c, int out_c, int kernel, int stride)
    : in_c_(in_c), out_c_(out_c), k_(kernel), stride_(stride), pad_(kernel / 2),
      weight_(name + ".weight", {out_c, in_c * kernel * kernel}),
      bias_(name + ".bias", {out_c}) {}

template <class T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x, Cache* cache) const {
    if (x.c != in_c_)
        contract_fail(weight_.name + ": expected " + std::to_string(in_c_) + " input channels, got " +
                      std::to_string(x.c));
    const int oh = conv_out(x.h, k_, stride_, pad_);
    const int ow = conv_out(x.w, k_, stride_, pad_);
    const int p_count = oh * ow;
    const int kdim = in_c_ * k_ * k_;
    Tensor<T> y(out_c_, oh, ow);

    const bool pointwise = (k_ == 1 && stride_ == 1);
    std::vector<T> local_col;
    const T* col = x.data.data();
    if (!pointwise) {
        std::vector<T>& buf = cache ? cache->col : local_col;
        buf.resize(static_cast<std::size_t>(kdim) * p_count);
        im2col(x.data.data(), x.c, x.h, x.w, k_, stride_, pad_, oh, ow, buf.data());
        col = buf.data();
    }
    simd::gemm<T>(false, false, out_c_, p_count, kdim, T(1), weight_.value.data(), kdim, col,
                  p_count, T(0), y.data.data(), p_count);
    for (int o = 0; o < out_c_; ++o) {
        T* row = y.plane(o);
        const T b = bias_.value[o];
        for (int p = 0; p < p_count; ++p) row[p] += b;
    }
    if (cache) cache->input = x;
    return y;
}

template <class T>
Tensor<T> Conv2d<T>::backward(const Cache& cache, const Tensor<T>& dy) {
    const Tensor<T>& x = cache.input;
    const int oh = dy.h, ow = dy.w;
    const int p_count = oh * ow;
    const int kdim = in_c_ * k_ * k_;
    const bool pointwise = (k_ == 1 && stride_ == 1);
    const T* col = pointwise ? x.data.data() : cache.col.data();

    simd::gemm<T>(false, true, out_c_, kdim, p_count, T(1), dy.data.data(), p_count, col, p_count,
                  T(1), weight_.grad.data(), kdim);
    for (int o = 0; o < out_c_; ++o) {
        const T* row = dy.plane(o);
        T s = 0;
        for (int p = 0; p < p_count; ++p) s += row[p];
        bias_.grad[o] += s;
    }

    Tensor<T> dx(x.c, x.h, x.w);
    if (pointwise) {
        simd::gemm<T>(true, false, kdim, p_count, out_c_, T(1), weight_.value.data(), kdim,
                      dy.data.data(), p_count, T(0), dx.data.data(), p_count);
    } else {
        std::vector<T> dcol(static_cast<std::size_t>(kdim) * p_count);
        simd::gemm<T>(true, false, kdim, p_count, out_c_, T(1), weight_.value.data(), kdim,
                      dy.data.data(), p_count, T(0), dcol.data(), p_count);
        col2im(dcol.data(), x.c, x.h, x.w, k_, stride_, pad_, oh, ow, dx.data.data());
    }
    return dx;
}

template <class T>
void Conv2d<T>::init(Rng& rng, bool followed_by_prelu) {
    fill_uniform(weight_.value, rng, init_bound(in_c_ * k_ * k_, followed_by_prelu));
    std::fill(bias_.value.begin(), bias_.value.end(), T(0));
}

template <class T>
void Conv2d<T>::append_params(ParamList<T>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
}

// ---------------------------------------------------------------------------
// ConvTranspose2d

template <class T>
ConvTranspose2d<T>::ConvTranspose2d(const std::string& name, int in_c, int out_c, int kernel,
                                    int stride)
    : in_c_(in_c), out_c_(out_c), k_(kernel), stride_(stride), pad_(kernel / 2),
      weight_(name + ".weight", {in_c, out_c * kernel * kernel}),
      bias_(name + ".bias", {out_c}) {}

template <class T>
Tensor<T> ConvTranspose2d<T>::forward(const Tensor<T>& x, Cache* cache) const {
    if (x.c != in_c_)
        contract_fail(weight_.name + ": expected " + std::to_string(in_c_) + " input channels, got " +
                      std::to_string(x.c));
    const int out_pad = stride_ - 1;
    const int oh = (x.h - 1) * stride_ - 2 * pad_ + k_ + out_pad;
    const int ow = (x.w - 1) * stride_ - 2 * pad_ + k_ + out_pad;
    const int p_in = x.h * x.w;
    const int kdim = out_c_ * k_ * k_;

    std::vector<T> col(static_cast<std::size_t>(kdim) * p_in);
    simd::gemm<T>(true, false, kdim, p_in, in_c_, T(1), weight_.value.data(), kdim, x.data.data(),
                  p_in, T(0), col.data(), p_in);
    Tensor<T> y(out_c_, oh, ow);
    col2im(col.data(), out_c_, oh, ow, k_, stride_, pad_, x.h, x.w, y.data.data());
    for (int o = 0; o < out_c_; ++o) {
        T* row = y.plane(o);
        const T b = bias_.value[o];
        for (std::size_t p = 0; p < y.plane_size(); ++p) row[p] += b;
    }
    if (cache) cache->input = x;
    return y;
}

template <class T>
Tensor<T> ConvTranspose2d<T>::backward(const Cache& cache, const Tensor<T>& dy) {
    const Tensor<T>& x = cache.input;
    const int p_in = x.h * x.w;
    const int kdim = out_c_ * k_ * k_;

    for (int o = 0; o < out_c_; ++o) {
        const T* row = dy.plane(o);
        T s = 0;
        for (std::size_t p = 0; p < dy.plane_size(); ++p) s += row[p];
        bias_.grad[o] += s;
    }
    std::vector<T> dcol(static_cast<std::size_t>(kdim) * p_in);
    im2col(dy.data.data(), out_c_, dy.h, dy.w, k_, stride_, pad_, x.h, x.w, dcol.data());
    simd::gemm<T>(false, true, in_c_, kdim, p_in, T(1), x.data.data(), p_in, dcol.data(), p_in,
                  T(1), weight_.grad.data(), kdim);
    Tensor<T> dx(x.c, x.h, x.w);
    simd::gemm<T>(false, false, in_c_, p_in, kdim, T(1), weight_.value.data(), kdim, dcol.data(),
                  p_in, T(0), dx.data.data(), p_in);
    return dx;
}

template <class T>
void ConvTranspose2d<T>::init(Rng& rng, bool followed_by_prelu) {
    // Each output pixel receives in_c * (k / stride)^2 taps on average.
    const int fan_in = std::max(1, in_c_ * k_ * k_ / (stride_ * stride_));
    fill_uniform(weight_.value, rng, init_bound(fan_in, followed_by_prelu));
    std::fill(bias_.value.begin(), bias_.value.end(), T(0));
}

template <class T>
void ConvTranspose2d<T>::append_params(ParamList<T>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
}

// ---------------------------------------------------------------------------
// PReLU

template <class T>
PRelu<T>::PRelu(const std::string& name, int channels) : slope_(name + ".slope", {channels}) {
    init();
}

template <class T>
Tensor<T> PRelu<T>::forward(const Tensor<T>& x, Cache* cache) const {
    if (static_cast<std::size_t>(x.c) != slope_.size()) contract_fail(slope_.name + ": channel mismatch");
    Tensor<T> y(x.c, x.h, x.w);
    const std::size_t n = x.plane_size();
    for (int ch = 0; ch < x.c; ++ch) {
        const T a = slope_.value[ch];
        const T* src = x.plane(ch);
        T* dst = y.plane(ch);
        for (std::size_t i = 0; i < n; ++i) dst[i] = src[i] > T(0) ? src[i] : a * src[i];
    }
    if (cache) cache->input = x;
    return y;
}

template <class T>
Tensor<T> PRelu<T>::backward(const Cache& cache, const Tensor<T>& dy) {
    const Tensor<T>& x = cache.input;
    Tensor<T> dx(x.c, x.h, x.w);
    const std::size_t n = x.plane_size();
    for (int ch = 0; ch < x.c; ++ch) {
        const T a = slope_.value[ch];
        const T* src = x.plane(ch);
        const T* g = dy.plane(ch);
        T* dst = dx.plane(ch);
        T da = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (src[i] > T(0)) {
                dst[i] = g[i];
            } else {
                dst[i] = a * g[i];
                da += g[i] * src[i];
            }
        }
        slope_.grad[ch] += da;
    }
    return dx;
}

template <class T>
void PRelu<T>::init() {
    std::fill(slope_.value.begin(), slope_.value.end(), T(0.25));
}

template <class T>
void PRelu<T>::append_params(ParamList<T>& out) {
    out.push_back(&slope_);
}

// ---------------------------------------------------------------------------
// Linear

template <class T>
Linear<T>::Linear(const std::string& name, int in_f, int out_f)
    : in_f_(in_f), out_f_(out_f), weight_(name + ".weight", {out_f, in_f}), bias_(name + ".bias", {out_f}) {}

template <class T>
std::vector<T> Linear<T>::forward(const std::vector<T>& x, Cache* cache) const {
    if (static_cast<int>(x.size()) != in_f_)
        contract_fail(weight_.name + ": expected " + std::to_string(in_f_) + " features, got " +
                      std::to_string(x.size()));
    std::vector<T> y(bias_.value);
    for (int o = 0; o < out_f_; ++o)
        y[o] += simd::dot<T>(in_f_, weight_.value.data() + static_cast<std::size_t>(o) * in_f_, x.data());
    if (cache) cache->input = x;
    return y;
}

template <class T>
std::vector<T> Linear<T>::backward(const Cache& cache, const std::vector<T>& dy) {
    std::vector<T> dx(in_f_, T(0));
    for (int o = 0; o < out_f_; ++o) {
        const T g = dy[o];
        bias_.grad[o] += g;
        if (g == T(0)) continue;
        T* wg = weight_.grad.data() + static_cast<std::size_t>(o) * in_f_;
        const T* wv = weight_.value.data() + static_cast<std::size_t>(o) * in_f_;
        simd::axpy<T>(in_f_, g, cache.input.data(), wg);
        simd::axpy<T>(in_f_, g, wv, dx.data());
    }
    return dx;
}

template <class T>
void Linear<T>::init(Rng& rng, bool followed_by_prelu) {
    fill_uniform(weight_.value, rng, init_bound(in_f_, followed_by_prelu));
    std::fill(bias_.value.begin(), bias_.value.end(), T(0));
}

template <class T>
void Linear<T>::append_params(ParamList<T>& out) {
    out.push_back(&weight_);
    out.push_back(&bias_);
}

// ---------------------------------------------------------------------------
// VectorPRelu

template <class T>
VectorPRelu<T>::VectorPRelu(const std::string& name, int features)
    : slope_(name + ".slope", {features}) {
    init();
}

template <class T>
std::vector<T> VectorPRelu<T>::forward(const std::vector<T>& x, Cache* cache) const {
    std::vector<T> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > T(0) ? x[i] : slope_.value[i] * x[i];
    if (cache) cache->input = x;
    return y;
}

template <class T>
std::vector<T> VectorPRelu<T>::backward(const Cache& cache, const std::vector<T>& dy) {
    std::vector<T> dx(dy.size());
    for (std::size_t i = 0; i < dy.size(); ++i) {
        const T xi = cache.input[i];
        if (xi > T(0)) {
            dx[i] = dy[i];
        } else {
            dx[i] = slope_.value[i] * dy[i];
            slope_.grad[i] += dy[i] * xi;
        }
    }
    return dx;
}

template <class T>
void VectorPRelu<T>::init() {
    std::fill(slope_.value.begin(), slope_.value.end(), T(0.25));
}

template <class T>
void VectorPRelu<T>::append_params(ParamList<T>& out) {
    out.push_back(&slope_);
}

#define FCNR_INSTANTIATE_LAYERS(T)                                                            \
    template struct Param<T>;                                                                 \
    template class Conv2d<T>;                                                                 \
    template class ConvTranspose2d<T>;                                                        \
    template class PRelu<T>;                                                                  \
    template class Linear<T>;                                                                 \
    template class VectorPRelu<T>;                                                            \
    template void im2col<T>(const T*, int, int, int, int, int, int, int, int, T*);            \
    template void col2im<T>(const T*, int, int, int, int, int, int, int, int, T*);

FCNR_INSTANTIATE_LAYERS(float)
FCNR_INSTANTIATE_LAYERS(double)

}  // namespace fcnr::nn
