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

#include "fcnr/nn/modules.hpp"

#include <cmath>

namespace fcnr::nn {

template <class T>
void LayerStack<T>::add_conv(const std::string& name, int in_c, int out_c, int k, int stride) {
    layers_.emplace_back(std::in_place_type<Conv2d<T>>, name, in_c, out_c, k, stride);
}

template <class T>
void LayerStack<T>::add_deconv(const std::string& name, int in_c, int out_c, int k, int stride) {
    layers_.emplace_back(std::in_place_type<ConvTranspose2d<T>>, name, in_c, out_c, k, stride);
}

template <class T>
void LayerStack<T>::add_prelu(const std::string& name, int channels) {
    layers_.emplace_back(std::in_place_type<PRelu<T>>, name, channels);
}

template <class T>
Tensor<T> LayerStack<T>::forward(const Tensor<T>& x, Cache* cache) const {
    if (cache) cache->clear();
    Tensor<T> cur = x;
    for (const auto& layer : layers_) {
        cur = std::visit(
            [&](const auto& l) {
                using L = std::decay_t<decltype(l)>;
                if (!cache) return l.forward(cur, nullptr);
                cache->emplace_back(std::in_place_type<typename L::Cache>);
                return l.forward(cur, &std::get<typename L::Cache>(cache->back()));
            },
            layer);
    }
    return cur;
}

template <class T>
Tensor<T> LayerStack<T>::backward(const Cache& cache, const Tensor<T>& dy) {
    Tensor<T> grad = dy;
    for (std::size_t i = layers_.size(); i-- > 0;) {
        grad = std::visit(
            [&](auto& l) {
                using L = std::decay_t<decltype(l)>;
                return l.backward(std::get<typename L::Cache>(cache[i]), grad);
            },
            layers_[i]);
    }
    return grad;
}

template <class T>
void LayerStack<T>::init(Rng& rng) {
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const bool prelu_next = i + 1 < layers_.size() && std::holds_alternative<PRelu<T>>(layers_[i + 1]);
        std::visit(
            [&](auto& l) {
                using L = std::decay_t<decltype(l)>;
                if constexpr (std::is_same_v<L, PRelu<T>>)
                    l.init();
                else
                    l.init(rng, prelu_next);
            },
            layers_[i]);
    }
}

template <class T>
void LayerStack<T>::append_params(ParamList<T>& out) {
    for (auto& layer : layers_) std::visit([&](auto& l) { l.append_params(out); }, layer);
}

// ---------------------------------------------------------------------------

template <class T>
PairTrunk<T>::PairTrunk(LayerStack<T> pre, std::optional<Jctm<T>> jctm, LayerStack<T> post)
    : pre_(std::move(pre)), jctm_(std::move(jctm)), post_(std::move(post)) {}

template <class T>
std::pair<Tensor<T>, Tensor<T>> PairTrunk<T>::forward(const Tensor<T>& a, const Tensor<T>& b,
                                                      Cache* cache) const {
    require_same_shape(a, b, "trunk input");
    Tensor<T> ha = pre_.forward(a, cache ? &cache->pre_l : nullptr);
    Tensor<T> hb = pre_.forward(b, cache ? &cache->pre_r : nullptr);
    if (jctm_) std::tie(ha, hb) = jctm_->forward(ha, hb, cache ? &cache->jctm : nullptr);
    return {post_.forward(ha, cache ? &cache->post_l : nullptr),
            post_.forward(hb, cache ? &cache->post_r : nullptr)};
}

template <class T>
std::pair<Tensor<T>, Tensor<T>> PairTrunk<T>::backward(const Cache& cache, const Tensor<T>& d_a,
                                                       const Tensor<T>& d_b) {
    Tensor<T> ga = post_.backward(cache.post_l, d_a);
    Tensor<T> gb = post_.backward(cache.post_r, d_b);
    if (jctm_) std::tie(ga, gb) = jctm_->backward(cache.jctm, ga, gb);
    return {pre_.backward(cache.pre_l, ga), pre_.backward(cache.pre_r, gb)};
}

template <class T>
void PairTrunk<T>::init(Rng& rng) {
    pre_.init(rng);
    if (jctm_) jctm_->init(rng);
    post_.init(rng);
}

template <class T>
void PairTrunk<T>::append_params(ParamList<T>& out) {
    pre_.append_params(out);
    if (jctm_) jctm_->append_params(out);
    post_.append_params(out);
}

namespace {

template <class T>
std::optional<Jctm<T>> maybe_jctm(const std::string& name, const TrunkShape& s) {
    if (!s.use_jctm) return std::nullopt;
    return Jctm<T>(name, s.channels, s.heads);
}

}  // namespace

template <class T>
PairTrunk<T> make_encoder(const TrunkShape& s) {
    LayerStack<T> pre, post;
    pre.add_conv("E.conv1", 3, s.channels, 5, 2);
    pre.add_prelu("E.act1", s.channels);
    pre.add_conv("E.conv2", s.channels, s.channels, 5, 2);
    pre.add_prelu("E.act2", s.channels);
    post.add_conv("E.conv3", s.channels, s.channels, 5, 2);
    post.add_prelu("E.act3", s.channels);
    post.add_conv("E.conv4", s.channels, s.channels, 5, 2);
    post.add_prelu("E.act4", s.channels);
    post.add_conv("E.out", s.channels, s.latent, 1, 1);
    return PairTrunk<T>(std::move(pre), maybe_jctm<T>("E.jctm", s), std::move(post));
}

template <class T>
PairTrunk<T> make_hyper_encoder(const TrunkShape& s) {
    LayerStack<T> pre, post;
    pre.add_conv("hE.conv1", s.latent, s.channels, 3, 2);
    pre.add_prelu("hE.act1", s.channels);
    post.add_conv("hE.conv2", s.channels, s.hyper, 3, 2);
    return PairTrunk<T>(std::move(pre), maybe_jctm<T>("hE.jctm", s), std::move(post));
}

template <class T>
PairTrunk<T> make_hyper_decoder(const TrunkShape& s) {
    LayerStack<T> pre, post;
    pre.add_deconv("hD.deconv1", s.hyper, s.channels, 3, 2);
    pre.add_prelu("hD.act1", s.channels);
    post.add_deconv("hD.deconv2", s.channels, 2 * s.latent, 3, 2);
    return PairTrunk<T>(std::move(pre), maybe_jctm<T>("hD.jctm", s), std::move(post));
}

template <class T>
PairTrunk<T> make_decoder(const TrunkShape& s) {
    LayerStack<T> pre, post;
    pre.add_conv("D.in", s.latent, s.channels, 1, 1);
    pre.add_prelu("D.act0", s.channels);
    pre.add_deconv("D.deconv1", s.channels, s.channels, 5, 2);
    pre.add_prelu("D.act1", s.channels);
    pre.add_deconv("D.deconv2", s.channels, s.channels, 5, 2);
    pre.add_prelu("D.act2", s.channels);
    post.add_deconv("D.deconv3", s.channels, s.channels, 5, 2);
    post.add_prelu("D.act3", s.channels);
    post.add_deconv("D.deconv4", s.channels, 3, 5, 2);
    return PairTrunk<T>(std::move(pre), maybe_jctm<T>("D.jctm", s), std::move(post));
}

// ---------------------------------------------------------------------------

template <class T>
Scm<T>::Scm(const std::string& name, int latent, int channels) : latent_(latent) {
    ctx_.add_conv(name + ".ctx1", latent, channels, 3, 1);
    ctx_.add_prelu(name + ".ctx_act1", channels);
    ctx_.add_conv(name + ".ctx2", channels, channels, 3, 1);
    ctx_.add_prelu(name + ".ctx_act2", channels);
    head_.add_conv(name + ".fuse", channels + 2 * latent, channels, 1, 1);
    head_.add_prelu(name + ".fuse_act", channels);
    head_.add_conv(name + ".out", channels, 2 * latent, 1, 1);
}

template <class T>
Tensor<T> Scm<T>::forward(const Tensor<T>& ctx, const Tensor<T>& phi, Cache* cache) const {
    if (phi.c != 2 * latent_) contract_fail("scm: phi must carry 2*latent channels, got " + phi.shape_str());
    if (ctx.h != phi.h || ctx.w != phi.w)
        contract_fail("scm: context " + ctx.shape_str() + " vs phi " + phi.shape_str());
    Tensor<T> feat = ctx_.forward(ctx, cache ? &cache->ctx : nullptr);
    return head_.forward(concat_channels(feat, phi), cache ? &cache->head : nullptr);
}

template <class T>
std::pair<Tensor<T>, Tensor<T>> Scm<T>::backward(const Cache& cache, const Tensor<T>& d_out) {
    Tensor<T> d_cat = head_.backward(cache.head, d_out);
    const int feat_c = d_cat.c - 2 * latent_;
    Tensor<T> d_feat = slice_channels(d_cat, 0, feat_c);
    Tensor<T> d_phi = slice_channels(d_cat, feat_c, 2 * latent_);
    return {ctx_.backward(cache.ctx, d_feat), std::move(d_phi)};
}

template <class T>
void Scm<T>::init(Rng& rng) {
    ctx_.init(rng);
    head_.init(rng);
}

template <class T>
void Scm<T>::append_params(ParamList<T>& out) {
    ctx_.append_params(out);
    head_.append_params(out);
}

// ---------------------------------------------------------------------------

template <class T>
Mlp<T>::Mlp(const std::string& name, int in_f, int hidden, int out_channels)
    : in_f_(in_f), out_c_(out_channels),
      l1_(name + ".fc1", in_f, hidden), l2_(name + ".fc2", hidden, hidden),
      l3_(name + ".fc3", hidden, 2 * out_channels),
      a1_(name + ".act1", hidden), a2_(name + ".act2", hidden) {}

template <class T>
std::vector<T> Mlp<T>::forward(const std::vector<T>& x, Cache* cache) const {
    auto h = a1_.forward(l1_.forward(x, cache ? &cache->l1 : nullptr), cache ? &cache->a1 : nullptr);
    h = a2_.forward(l2_.forward(h, cache ? &cache->l2 : nullptr), cache ? &cache->a2 : nullptr);
    return l3_.forward(h, cache ? &cache->l3 : nullptr);
}

template <class T>
std::vector<T> Mlp<T>::backward(const Cache& cache, const std::vector<T>& dy) {
    auto g = l3_.backward(cache.l3, dy);
    g = l2_.backward(cache.l2, a2_.backward(cache.a2, g));
    return l1_.backward(cache.l1, a1_.backward(cache.a1, g));
}

template <class T>
void Mlp<T>::init(Rng& rng) {
    l1_.init(rng, true);
    a1_.init();
    l2_.init(rng, true);
    a2_.init();
    l3_.init(rng, false);
    // softplus(raw) = 1 at start.
    const T raw_one = static_cast<T>(std::log(std::exp(1.0) - 1.0));
    auto& bias = l3_.bias().value;
    for (int c = 0; c < out_c_; ++c) bias[out_c_ + c] = raw_one;
}

template <class T>
void Mlp<T>::append_params(ParamList<T>& out) {
    l1_.append_params(out);
    a1_.append_params(out);
    l2_.append_params(out);
    a2_.append_params(out);
    l3_.append_params(out);
}

#define FCNR_INSTANTIATE_MODULES(T)                                 \
    template class LayerStack<T>;                                   \
    template class PairTrunk<T>;                                    \
    template class Scm<T>;                                          \
    template class Mlp<T>;                                          \
    template PairTrunk<T> make_encoder<T>(const TrunkShape&);       \
    template PairTrunk<T> make_hyper_encoder<T>(const TrunkShape&); \
    template PairTrunk<T> make_hyper_decoder<T>(const TrunkShape&); \
    template PairTrunk<T> make_decoder<T>(const TrunkShape&);

FCNR_INSTANTIATE_MODULES(float)
FCNR_INSTANTIATE_MODULES(double)

}  // namespace fcnr::nn
