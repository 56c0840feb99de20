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

#include "fcnr/nn/model.hpp"

namespace fcnr::train {

template <class T>
struct PairSample {
    nn::Tensor<T> x_l, x_r;
    nn::VisParams vp_l, vp_r;
};

// What the downstream modules see in place of the quantized latents.
// ste: round(y - mu) + mu with identity gradient (training default).
// noise: y + U(-0.5, 0.5); a smooth map, used for finite-difference checks.
enum class QuantPath { ste, noise };

struct LossTerms {
    double r_zl = 0, r_zr = 0, r_yl = 0, r_yr = 0;  // bits, noise-relaxed
    double distortion = 0;                            // mean-squared error summed over the two views

    double rate() const { return r_zl + r_zr + r_yl + r_yr; }
    double total(double lambda) const { return rate() + lambda * distortion; }
};

// One forward/backward pass of the rate-distortion objective
//   L = R(z_l) + R(z_r | z_l) + R(y_l | z) + R(y_r | y_l, z) + lambda * L_D.
// forward() keeps every activation needed by backward().
template <class T>
class TrainGraph {
public:
    LossTerms forward(const nn::FcnrModel<T>& model, const PairSample<T>& sample, std::uint64_t noise_seed,
                      QuantPath path = QuantPath::ste);
    // Accumulates dL/dtheta into the model's parameter gradients.
    void backward(nn::FcnrModel<T>& model, double lambda);

    const nn::Tensor<T>& recon_l() const { return xh_l_; }
    const nn::Tensor<T>& recon_r() const { return xh_r_; }

private:
    struct RateGrad {
        nn::Tensor<T> d_value, d_mu, d_b;
    };

    nn::ChannelParams<T> side_params(const nn::FcnrModel<T>& model, const nn::VisParams& vp, nn::Side side,
                                     typename nn::Mlp<T>::Cache* cache, std::vector<T>* raw_out);
    void side_backward(nn::FcnrModel<T>& model, nn::Side side, const typename nn::Mlp<T>::Cache& cache,
                       const std::vector<T>& raw, const nn::Tensor<T>& d_mu, const nn::Tensor<T>& d_b);

    const PairSample<T>* sample_ = nullptr;
    typename nn::PairTrunk<T>::Cache c_enc_, c_henc_, c_hdec_, c_dec_;
    typename nn::Scm<T>::Cache c_cz_, c_cy_;
    typename nn::Mlp<T>::Cache c_mlp_l_, c_mlp_r_;
    std::vector<T> raw_zl_, raw_zr_;
    nn::EntropyParams<T> psi_zl_, phi_zr_, psi_zr_, phi_yl_, phi_yr_, psi_yr_;
    RateGrad g_zl_, g_zr_, g_yl_, g_yr_;
    nn::Tensor<T> xh_l_, xh_r_;
};

}  // namespace fcnr::train
