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

#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "fcnr/nn/attention.hpp"
#include "fcnr/nn/layers.hpp"

namespace fcnr::nn {

// A plain chain of per-side layers. The same weights serve both views.
template <class T>
class LayerStack {
public:
    using Layer = std::variant<Conv2d<T>, ConvTranspose2d<T>, PRelu<T>>;
    using LayerCache =
        std::variant<typename Conv2d<T>::Cache, typename ConvTranspose2d<T>::Cache, typename PRelu<T>::Cache>;
    using Cache = std::vector<LayerCache>;

    void add_conv(const std::string& name, int in_c, int out_c, int k, int stride);
    void add_deconv(const std::string& name, int in_c, int out_c, int k, int stride);
    void add_prelu(const std::string& name, int channels);

    Tensor<T> forward(const Tensor<T>& x, Cache* cache) const;
    Tensor<T> backward(const Cache& cache, const Tensor<T>& dy);

    // Linear layers get PReLU-aware init when the next layer is a PReLU.
    void init(Rng& rng);
    void append_params(ParamList<T>& out);
    bool empty() const { return layers_.empty(); }

private:
    std::vector<Layer> layers_;
};

// pre-stack -> optional JCTM -> post-stack, applied to a pair of views.
template <class T>
class PairTrunk {
public:
    struct Cache {
        typename LayerStack<T>::Cache pre_l, pre_r, post_l, post_r;
        typename Jctm<T>::Cache jctm;
    };

    PairTrunk() = default;
    PairTrunk(LayerStack<T> pre, std::optional<Jctm<T>> jctm, LayerStack<T> post);

    std::pair<Tensor<T>, Tensor<T>> forward(const Tensor<T>& a, const Tensor<T>& b, Cache* cache) const;
    std::pair<Tensor<T>, Tensor<T>> backward(const Cache& cache, const Tensor<T>& d_a, const Tensor<T>& d_b);

    void init(Rng& rng);
    void append_params(ParamList<T>& out);
    bool has_jctm() const { return jctm_.has_value(); }
    Jctm<T>* jctm() { return jctm_ ? &*jctm_ : nullptr; }

private:
    LayerStack<T> pre_;
    std::optional<Jctm<T>> jctm_;
    LayerStack<T> post_;
};

struct TrunkShape {
    int channels = 192;
    int latent = 48;
    int hyper = 48;
    int heads = 2;
    bool use_jctm = true;
};

template <class T>
PairTrunk<T> make_encoder(const TrunkShape& s);
template <class T>
PairTrunk<T> make_hyper_encoder(const TrunkShape& s);
template <class T>
PairTrunk<T> make_hyper_decoder(const TrunkShape& s);
template <class T>
PairTrunk<T> make_decoder(const TrunkShape& s);

// Stereo context module: refines the right view's entropy parameters from
// the left view's decoded latent ("ctx") and the side prediction phi, which
// carries (mu, b) as 2*latent channels.
template <class T>
class Scm {
public:
    struct Cache {
        typename LayerStack<T>::Cache ctx, head;
    };

    Scm() = default;
    Scm(const std::string& name, int latent, int channels);

    // Returns (mu, raw_b) stacked as 2*latent channels.
    Tensor<T> forward(const Tensor<T>& ctx, const Tensor<T>& phi, Cache* cache) const;
    // Returns (d ctx, d phi).
    std::pair<Tensor<T>, Tensor<T>> backward(const Cache& cache, const Tensor<T>& d_out);

    void init(Rng& rng);
    void append_params(ParamList<T>& out);
    LayerStack<T>& context_branch() { return ctx_; }

private:
    int latent_ = 0;
    LayerStack<T> ctx_;
    LayerStack<T> head_;
};

// Vis-parameter MLP: pe -> 128 -> PReLU -> 128 -> PReLU -> 2*hyper.
template <class T>
class Mlp {
public:
    struct Cache {
        typename Linear<T>::Cache l1, l2, l3;
        typename VectorPRelu<T>::Cache a1, a2;
    };

    Mlp() = default;
    Mlp(const std::string& name, int in_f, int hidden, int out_channels);

    std::vector<T> forward(const std::vector<T>& x, Cache* cache) const;
    std::vector<T> backward(const Cache& cache, const std::vector<T>& dy);

    void init(Rng& rng);
    void append_params(ParamList<T>& out);
    int in_features() const { return in_f_; }

private:
    int in_f_ = 0, out_c_ = 0;
    Linear<T> l1_, l2_, l3_;
    VectorPRelu<T> a1_, a2_;
};

}  // namespace fcnr::nn
