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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fcnr/nn/modules.hpp"
#include "fcnr/nn/pe.hpp"

namespace fcnr::nn {

// Which couplings are active. jct_only drops the PE/MLP path, pe_only drops
// every JCTM.
enum class Ablation { full, jct_only, pe_only, neither };

std::string_view ablation_name(Ablation a);
Ablation parse_ablation(std::string_view s);

struct ModelConfig {
    int channels = 192;
    int latent = 48;
    int hyper = 48;
    int heads = 2;
    int mlp_hidden = 128;
    PEConfig pe;
    Ablation ablation = Ablation::full;

    bool use_jctm() const { return ablation == Ablation::full || ablation == Ablation::jct_only; }
    bool use_pe() const { return ablation == Ablation::full || ablation == Ablation::pe_only; }
    void validate() const;
    bool operator==(const ModelConfig&) const = default;
};

// Per-element Laplace parameters; raw keeps the pre-softplus scale so that
// gradients can flow back through b = softplus(raw) + 1e-6.
template <class T>
struct EntropyParams {
    Tensor<T> mu;
    Tensor<T> b;
    Tensor<T> raw;

    // The (mu, b) stack fed to the context modules.
    Tensor<T> stacked() const { return concat_channels(mu, b); }
};

// Splits a [2C, h, w] network output into (mu, b).
template <class T>
EntropyParams<T> to_entropy_params(const Tensor<T>& mu_raw);
// Gradient of to_entropy_params: (d mu, d b) -> d [mu; raw].
template <class T>
Tensor<T> entropy_params_backward(const EntropyParams<T>& p, const Tensor<T>& d_mu, const Tensor<T>& d_b);

// Channel-wise parameters broadcast over space.
template <class T>
struct ChannelParams {
    std::vector<T> mu;
    std::vector<T> b;
    std::vector<T> raw;
};

template <class T>
ChannelParams<T> to_channel_params(const std::vector<T>& mu_raw);
template <class T>
EntropyParams<T> broadcast(const ChannelParams<T>& p, int h, int w);

enum class Side { left, right };

template <class T>
class FcnrModel {
public:
    FcnrModel(const ModelConfig& cfg, std::uint64_t seed);
    FcnrModel(const FcnrModel&) = delete;
    FcnrModel& operator=(const FcnrModel&) = delete;

    const ModelConfig& config() const { return cfg_; }

    // Throws PaddingRequiredError unless H and W are multiples of 64.
    std::pair<Tensor<T>, Tensor<T>> encode(const Tensor<T>& x_l, const Tensor<T>& x_r) const;
    std::pair<Tensor<T>, Tensor<T>> hyper_encode(const Tensor<T>& y_l, const Tensor<T>& y_r) const;
    // Per-channel (mu, b) for the hyper-latent: psi^z_l on the left, the
    // conditioning input phi^z_r on the right. Learned constants when the PE
    // path is ablated.
    ChannelParams<T> mlp_entropy_params(const std::vector<double>& pe_vec, Side side) const;
    ChannelParams<T> vis_entropy_params(const VisParams& vp, Side side) const;
    EntropyParams<T> scm_cont_z(const Tensor<T>& z_hat_l, const ChannelParams<T>& phi_z_r) const;
    // (phi^y_l, phi^y_r); phi^y_l is also the coding parameter psi^y_l.
    std::pair<EntropyParams<T>, EntropyParams<T>> hyper_decode(const Tensor<T>& z_hat_l,
                                                               const Tensor<T>& z_hat_r) const;
    EntropyParams<T> scm_cont_y(const Tensor<T>& y_hat_l, const EntropyParams<T>& phi_y_r) const;
    // Linear output; clamp = true gives the inference reconstruction in [0, 1].
    std::pair<Tensor<T>, Tensor<T>> decode(const Tensor<T>& y_hat_l, const Tensor<T>& y_hat_r, bool clamp) const;

    // Stable order: E, hE, hD, D, cont_z, cont_y, mlp_l, mlp_r (or priors).
    ParamList<T> params();
    std::size_t param_count();
    void zero_grad();

    // FNV-1a 64 over the config and every parameter's name, shape and bytes.
    std::uint64_t fingerprint() const;

    // Trunks and heads are public so the training graph can drive them with caches.
    PairTrunk<T> enc, hyper_enc, hyper_dec, dec;
    Scm<T> cont_z, cont_y;
    std::optional<Mlp<T>> mlp_l, mlp_r;
    std::optional<Param<T>> prior_z_l, prior_z_r;  // [mu; raw] per channel when PE is off

private:
    ModelConfig cfg_;
};

std::string config_to_json(const ModelConfig& cfg);
ModelConfig config_from_json(const std::string& json);

// Shape of y for an H x W input and of z (both [C, h, w]).
struct LatentShapes {
    int y_c, y_h, y_w;
    int z_c, z_h, z_w;
};
LatentShapes latent_shapes(const ModelConfig& cfg, int height, int width);

}  // namespace fcnr::nn
