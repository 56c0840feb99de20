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

#include <string>
#include <vector>

#include "fcnr/nn/tensor.hpp"
#include "fcnr/util/random.hpp"

namespace fcnr::nn {

template <class T>
struct Param {
    std::string name;
    std::vector<int> shape;
    std::vector<T> value;
    std::vector<T> grad;

    Param() = default;
    Param(std::string n, std::vector<int> s);
    std::size_t size() const { return value.size(); }
    void zero_grad();
};

template <class T>
using ParamList = std::vector<Param<T>*>;

// Uniform init with bound sqrt(3 * gain^2 / fan_in); gain^2 = 2 / (1 + 0.25^2)
// ahead of a PReLU, 1 otherwise.
double init_bound(int fan_in, bool followed_by_prelu);

// 2-D convolution with zero padding k/2 (so stride 2 halves even sizes).
// Weight layout [out_c, in_c * k * k].
template <class T>
class Conv2d {
public:
    struct Cache {
        Tensor<T> input;
        std::vector<T> col;
    };

    Conv2d() = default;
    Conv2d(const std::string& name, int in_c, int out_c, int kernel, int stride);

    Tensor<T> forward(const Tensor<T>& x, Cache* cache) const;
    // Accumulates parameter gradients and returns dL/dx.
    Tensor<T> backward(const Cache& cache, const Tensor<T>& dy);

    void init(Rng& rng, bool followed_by_prelu);
    void append_params(ParamList<T>& out);

    int in_channels() const { return in_c_; }
    int out_channels() const { return out_c_; }
    Param<T>& weight() { return weight_; }
    Param<T>& bias() { return bias_; }

private:
    int in_c_ = 0, out_c_ = 0, k_ = 1, stride_ = 1, pad_ = 0;
    Param<T> weight_, bias_;
};

// Transposed convolution that exactly doubles (stride 2) the spatial size:
// padding k/2 and output padding stride-1. Weight layout [in_c, out_c * k * k].
template <class T>
class ConvTranspose2d {
public:
    struct Cache {
        Tensor<T> input;
    };

    ConvTranspose2d() = default;
    ConvTranspose2d(const std::string& name, int in_c, int out_c, int kernel, int stride);

    Tensor<T> forward(const Tensor<T>& x, Cache* cache) const;
    Tensor<T> backward(const Cache& cache, const Tensor<T>& dy);

    void init(Rng& rng, bool followed_by_prelu);
    void append_params(ParamList<T>& out);

private:
    int in_c_ = 0, out_c_ = 0, k_ = 1, stride_ = 1, pad_ = 0;
    Param<T> weight_, bias_;
};

// Per-channel PReLU, slopes initialised to 0.25.
template <class T>
class PRelu {
public:
    struct Cache {
        Tensor<T> input;
    };

    PRelu() = default;
    PRelu(const std::string& name, int channels);

    Tensor<T> forward(const Tensor<T>& x, Cache* cache) const;
    Tensor<T> backward(const Cache& cache, const Tensor<T>& dy);

    void init();
    void append_params(ParamList<T>& out);

private:
    Param<T> slope_;
};

template <class T>
class Linear {
public:
    struct Cache {
        std::vector<T> input;
    };

    Linear() = default;
    Linear(const std::string& name, int in_f, int out_f);

    std::vector<T> forward(const std::vector<T>& x, Cache* cache) const;
    std::vector<T> backward(const Cache& cache, const std::vector<T>& dy);

    void init(Rng& rng, bool followed_by_prelu);
    void append_params(ParamList<T>& out);
    Param<T>& weight() { return weight_; }
    Param<T>& bias() { return bias_; }

private:
    int in_f_ = 0, out_f_ = 0;
    Param<T> weight_, bias_;
};

// PReLU over a flat feature vector, one slope per feature.
template <class T>
class VectorPRelu {
public:
    struct Cache {
        std::vector<T> input;
    };

    VectorPRelu() = default;
    VectorPRelu(const std::string& name, int features);

    std::vector<T> forward(const std::vector<T>& x, Cache* cache) const;
    std::vector<T> backward(const Cache& cache, const std::vector<T>& dy);

    void init();
    void append_params(ParamList<T>& out);

private:
    Param<T> slope_;
};

// im2col for a k x k window; col is [c * k * k, oh * ow].
template <class T>
void im2col(const T* img, int c, int h, int w, int k, int stride, int pad, int oh, int ow, T* col);
// Adjoint of im2col: accumulates col into img.
template <class T>
void col2im(const T* col, int c, int h, int w, int k, int stride, int pad, int oh, int ow, T* img);

}  // namespace fcnr::nn
