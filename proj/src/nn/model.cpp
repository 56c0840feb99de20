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

#include "fcnr/nn/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "fcnr/entropy/laplace.hpp"
#include "json.hpp"

namespace fcnr::nn {

using entropy::positive_scale;
using entropy::positive_scale_grad;

std::string_view ablation_name(Ablation a) {
    switch (a) {
        case Ablation::full: return "full";
        case Ablation::jct_only: return "jct_only";
        case Ablation::pe_only: return "pe_only";
        case Ablation::neither: return "neither";
    }
    return "?";
}

Ablation parse_ablation(std::string_view s) {
    for (Ablation a : {Ablation::full, Ablation::jct_only, Ablation::pe_only, Ablation::neither})
        if (s == ablation_name(a)) return a;
    contract_fail("unknown ablation '" + std::string(s) + "' (expected full, jct_only, pe_only, neither)");
}

void ModelConfig::validate() const {
    if (channels < 1 || latent < 1 || hyper < 1 || mlp_hidden < 1) contract_fail("ModelConfig: widths must be positive");
    if (heads < 1 || channels % heads != 0) contract_fail("ModelConfig: channels must divide into heads");
    nn::validate(pe);
}

template <class T>
EntropyParams<T> to_entropy_params(const Tensor<T>& mu_raw) {
    if (mu_raw.c % 2 != 0) contract_fail("entropy params need an even channel count, got " + mu_raw.shape_str());
    const int c = mu_raw.c / 2;
    EntropyParams<T> p{slice_channels(mu_raw, 0, c), Tensor<T>(c, mu_raw.h, mu_raw.w), slice_channels(mu_raw, c, c)};
    for (std::size_t i = 0; i < p.b.size(); ++i) p.b.data[i] = positive_scale(p.raw.data[i]);
    return p;
}

template <class T>
Tensor<T> entropy_params_backward(const EntropyParams<T>& p, const Tensor<T>& d_mu, const Tensor<T>& d_b) {
    Tensor<T> d_raw(p.raw.c, p.raw.h, p.raw.w);
    for (std::size_t i = 0; i < d_raw.size(); ++i) d_raw.data[i] = d_b.data[i] * positive_scale_grad(p.raw.data[i]);
    return concat_channels(d_mu, d_raw);
}

template <class T>
ChannelParams<T> to_channel_params(const std::vector<T>& mu_raw) {
    const std::size_t c = mu_raw.size() / 2;
    ChannelParams<T> p;
    p.mu.assign(mu_raw.begin(), mu_raw.begin() + static_cast<std::ptrdiff_t>(c));
    p.raw.assign(mu_raw.begin() + static_cast<std::ptrdiff_t>(c), mu_raw.end());
    p.b.resize(c);
    for (std::size_t i = 0; i < c; ++i) p.b[i] = positive_scale(p.raw[i]);
    return p;
}

template <class T>
EntropyParams<T> broadcast(const ChannelParams<T>& p, int h, int w) {
    const int c = static_cast<int>(p.mu.size());
    EntropyParams<T> out{Tensor<T>(c, h, w), Tensor<T>(c, h, w), Tensor<T>(c, h, w)};
    for (int ch = 0; ch < c; ++ch) {
        std::fill(out.mu.plane(ch), out.mu.plane(ch) + out.mu.plane_size(), p.mu[ch]);
        std::fill(out.b.plane(ch), out.b.plane(ch) + out.b.plane_size(), p.b[ch]);
        std::fill(out.raw.plane(ch), out.raw.plane(ch) + out.raw.plane_size(), p.raw[ch]);
    }
    return out;
}

// ---------------------------------------------------------------------------

template <class T>
FcnrModel<T>::FcnrModel(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    const TrunkShape shape{cfg.channels, cfg.latent, cfg.hyper, cfg.heads, cfg.use_jctm()};
    enc = make_encoder<T>(shape);
    hyper_enc = make_hyper_encoder<T>(shape);
    hyper_dec = make_hyper_decoder<T>(shape);
    dec = make_decoder<T>(shape);
    cont_z = Scm<T>("cont_z", cfg.hyper, cfg.channels);
    cont_y = Scm<T>("cont_y", cfg.latent, cfg.channels);
    if (cfg.use_pe()) {
        mlp_l.emplace("mlp_l", pe_width(cfg.pe), cfg.mlp_hidden, cfg.hyper);
        mlp_r.emplace("mlp_r", pe_width(cfg.pe), cfg.mlp_hidden, cfg.hyper);
    } else {
        prior_z_l.emplace("prior_z_l", std::vector<int>{2 * cfg.hyper});
        prior_z_r.emplace("prior_z_r", std::vector<int>{2 * cfg.hyper});
    }

    Rng rng(seed);
    enc.init(rng);
    hyper_enc.init(rng);
    hyper_dec.init(rng);
    dec.init(rng);
    cont_z.init(rng);
    cont_y.init(rng);
    if (mlp_l) {
        mlp_l->init(rng);
        mlp_r->init(rng);
    } else {
        const T raw_one = static_cast<T>(std::log(std::exp(1.0) - 1.0));
        for (auto* p : {&*prior_z_l, &*prior_z_r})
            for (int c = 0; c < cfg.hyper; ++c) {
                p->value[c] = T(0);
                p->value[cfg.hyper + c] = raw_one;
            }
    }
}

namespace {

void require_multiple_of_64(int h, int w) {
    if (h <= 0 || w <= 0 || h % 64 != 0 || w % 64 != 0)
        throw PaddingRequiredError("image size " + std::to_string(h) + "x" + std::to_string(w) +
                                   " is not a multiple of 64; pad before encoding");
}

}  // namespace

template <class T>
std::pair<Tensor<T>, Tensor<T>> FcnrModel<T>::encode(const Tensor<T>& x_l, const Tensor<T>& x_r) const {
    require_same_shape(x_l, x_r, "encode");
    if (x_l.c != 3) contract_fail("encode: expected 3-channel images, got " + x_l.shape_str());
    require_multiple_of_64(x_l.h, x_l.w);
    return enc.forward(x_l, x_r, nullptr);
}

template <class T>
std::pair<Tensor<T>, Tensor<T>> FcnrModel<T>::hyper_encode(const Tensor<T>& y_l, const Tensor<T>& y_r) const {
    return hyper_enc.forward(y_l, y_r, nullptr);
}

template <class T>
ChannelParams<T> FcnrModel<T>::mlp_entropy_params(const std::vector<double>& pe_vec, Side side) const {
    if (!mlp_l) contract_fail("mlp_entropy_params: PE path is disabled in this model");
    if (static_cast<int>(pe_vec.size()) != pe_width(cfg_.pe))
        contract_fail("mlp_entropy_params: expected " + std::to_string(pe_width(cfg_.pe)) + " features, got " +
                      std::to_string(pe_vec.size()));
    std::vector<T> x(pe_vec.begin(), pe_vec.end());
    const Mlp<T>& mlp = side == Side::left ? *mlp_l : *mlp_r;
    return to_channel_params(mlp.forward(x, nullptr));
}

template <class T>
ChannelParams<T> FcnrModel<T>::vis_entropy_params(const VisParams& vp, Side side) const {
    if (mlp_l) return mlp_entropy_params(pe_vis(vp, cfg_.pe), side);
    return to_channel_params((side == Side::left ? *prior_z_l : *prior_z_r).value);
}

template <class T>
EntropyParams<T> FcnrModel<T>::scm_cont_z(const Tensor<T>& z_hat_l, const ChannelParams<T>& phi_z_r) const {
    const EntropyParams<T> phi = broadcast(phi_z_r, z_hat_l.h, z_hat_l.w);
    return to_entropy_params(cont_z.forward(z_hat_l, phi.stacked(), nullptr));
}

template <class T>
std::pair<EntropyParams<T>, EntropyParams<T>> FcnrModel<T>::hyper_decode(const Tensor<T>& z_hat_l,
                                                                         const Tensor<T>& z_hat_r) const {
    auto [a, b] = hyper_dec.forward(z_hat_l, z_hat_r, nullptr);
    return {to_entropy_params(a), to_entropy_params(b)};
}

template <class T>
EntropyParams<T> FcnrModel<T>::scm_cont_y(const Tensor<T>& y_hat_l, const EntropyParams<T>& phi_y_r) const {
    return to_entropy_params(cont_y.forward(y_hat_l, phi_y_r.stacked(), nullptr));
}

template <class T>
std::pair<Tensor<T>, Tensor<T>> FcnrModel<T>::decode(const Tensor<T>& y_hat_l, const Tensor<T>& y_hat_r,
                                                     bool clamp) const {
    auto out = dec.forward(y_hat_l, y_hat_r, nullptr);
    if (clamp)
        for (auto* t : {&out.first, &out.second})
            for (auto& v : t->data) v = std::clamp(v, T(0), T(1));
    return out;
}

template <class T>
ParamList<T> FcnrModel<T>::params() {
    ParamList<T> out;
    enc.append_params(out);
    hyper_enc.append_params(out);
    hyper_dec.append_params(out);
    dec.append_params(out);
    cont_z.append_params(out);
    cont_y.append_params(out);
    if (mlp_l) {
        mlp_l->append_params(out);
        mlp_r->append_params(out);
    } else {
        out.push_back(&*prior_z_l);
        out.push_back(&*prior_z_r);
    }
    return out;
}

template <class T>
std::size_t FcnrModel<T>::param_count() {
    std::size_t n = 0;
    for (auto* p : params()) n += p->size();
    return n;
}

template <class T>
void FcnrModel<T>::zero_grad() {
    for (auto* p : params()) p->zero_grad();
}

namespace {

struct Fnv1a {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    void add(const void* data, std::size_t n) {
        const auto* p = static_cast<const std::uint8_t*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ULL;
        }
    }
};

}  // namespace

template <class T>
std::uint64_t FcnrModel<T>::fingerprint() const {
    Fnv1a f;
    const std::string meta = config_to_json(cfg_);
    f.add(meta.data(), meta.size());
    for (auto* p : const_cast<FcnrModel*>(this)->params()) {
        f.add(p->name.data(), p->name.size());
        for (int d : p->shape) {
            const std::int32_t d32 = d;
            f.add(&d32, sizeof d32);
        }
        f.add(p->value.data(), p->value.size() * sizeof(T));
    }
    return f.h;
}

std::string config_to_json(const ModelConfig& cfg) {
    nlohmann::ordered_json j;
    j["channels"] = cfg.channels;
    j["latent"] = cfg.latent;
    j["hyper"] = cfg.hyper;
    j["heads"] = cfg.heads;
    j["mlp_hidden"] = cfg.mlp_hidden;
    j["pe_base_b"] = cfg.pe.base_b;
    j["pe_levels_L"] = cfg.pe.levels_L;
    j["ablation"] = std::string(ablation_name(cfg.ablation));
    return j.dump();
}

ModelConfig config_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    ModelConfig cfg;
    cfg.channels = j.at("channels").get<int>();
    cfg.latent = j.at("latent").get<int>();
    cfg.hyper = j.at("hyper").get<int>();
    cfg.heads = j.at("heads").get<int>();
    cfg.mlp_hidden = j.at("mlp_hidden").get<int>();
    cfg.pe.base_b = j.at("pe_base_b").get<double>();
    cfg.pe.levels_L = j.at("pe_levels_L").get<int>();
    cfg.ablation = parse_ablation(j.at("ablation").get<std::string>());
    cfg.validate();
    return cfg;
}

LatentShapes latent_shapes(const ModelConfig& cfg, int height, int width) {
    require_multiple_of_64(height, width);
    return {cfg.latent, height / 16, width / 16, cfg.hyper, height / 64, width / 64};
}

#define FCNR_INSTANTIATE_MODEL(T)                                                                            \
    template struct EntropyParams<T>;                                                                        \
    template EntropyParams<T> to_entropy_params<T>(const Tensor<T>&);                                        \
    template Tensor<T> entropy_params_backward<T>(const EntropyParams<T>&, const Tensor<T>&, const Tensor<T>&); \
    template ChannelParams<T> to_channel_params<T>(const std::vector<T>&);                                   \
    template EntropyParams<T> broadcast<T>(const ChannelParams<T>&, int, int);                               \
    template class FcnrModel<T>;

FCNR_INSTANTIATE_MODEL(float)
FCNR_INSTANTIATE_MODEL(double)

}  // namespace fcnr::nn
