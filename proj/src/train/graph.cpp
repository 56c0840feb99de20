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

#include "fcnr/train/graph.hpp"

#include "fcnr/entropy/laplace.hpp"
#include "fcnr/util/random.hpp"

namespace fcnr::train {

using nn::EntropyParams;
using nn::Tensor;

namespace {

template <class T>
Tensor<T> zeros_like(const Tensor<T>& t) {
    return Tensor<T>(t.c, t.h, t.w);
}

template <class T>
double relaxed_rate(const Tensor<T>& noisy, const EntropyParams<T>& p, Tensor<T>& d_value, Tensor<T>& d_mu,
                    Tensor<T>& d_b) {
    d_value = zeros_like(noisy);
    d_mu = zeros_like(noisy);
    d_b = zeros_like(noisy);
    return entropy::rate_bits_relaxed<T>(noisy.data, p.mu.data, p.b.data, d_value.data, d_mu.data, d_b.data);
}

template <class T>
double mse(const Tensor<T>& a, const Tensor<T>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
        s += d * d;
    }
    return s / static_cast<double>(a.size());
}

template <class T>
Tensor<T> downstream(const Tensor<T>& y, const Tensor<T>& noisy, const Tensor<T>& mu, QuantPath path) {
    return path == QuantPath::ste ? entropy::quantize_ste(y, mu) : noisy;
}

}  // namespace

template <class T>
nn::ChannelParams<T> TrainGraph<T>::side_params(const nn::FcnrModel<T>& model, const nn::VisParams& vp,
                                                nn::Side side, typename nn::Mlp<T>::Cache* cache,
                                                std::vector<T>* raw_out) {
    if (model.mlp_l) {
        const auto pe = nn::pe_vis(vp, model.config().pe);
        const std::vector<T> x(pe.begin(), pe.end());
        *raw_out = (side == nn::Side::left ? *model.mlp_l : *model.mlp_r).forward(x, cache);
    } else {
        *raw_out = (side == nn::Side::left ? *model.prior_z_l : *model.prior_z_r).value;
    }
    return nn::to_channel_params(*raw_out);
}

template <class T>
void TrainGraph<T>::side_backward(nn::FcnrModel<T>& model, nn::Side side, const typename nn::Mlp<T>::Cache& cache,
                                  const std::vector<T>& raw, const Tensor<T>& d_mu, const Tensor<T>& d_b) {
    const int c = d_mu.c;
    std::vector<T> d_out(2 * static_cast<std::size_t>(c), T(0));
    for (int ch = 0; ch < c; ++ch) {
        T gm = 0, gb = 0;
        for (std::size_t i = 0; i < d_mu.plane_size(); ++i) {
            gm += d_mu.plane(ch)[i];
            gb += d_b.plane(ch)[i];
        }
        d_out[ch] = gm;
        d_out[c + ch] = gb * entropy::positive_scale_grad(raw[c + ch]);
    }
    if (model.mlp_l) {
        (side == nn::Side::left ? *model.mlp_l : *model.mlp_r).backward(cache, d_out);
    } else {
        auto& prior = side == nn::Side::left ? *model.prior_z_l : *model.prior_z_r;
        for (std::size_t i = 0; i < d_out.size(); ++i) prior.grad[i] += d_out[i];
    }
}

template <class T>
LossTerms TrainGraph<T>::forward(const nn::FcnrModel<T>& model, const PairSample<T>& s, std::uint64_t noise_seed,
                                 QuantPath path) {
    sample_ = &s;
    LossTerms loss;
    require_same_shape(s.x_l, s.x_r, "train pair");
    (void)nn::latent_shapes(model.config(), s.x_l.h, s.x_l.w);

    auto [y_l, y_r] = model.enc.forward(s.x_l, s.x_r, &c_enc_);
    auto [z_l, z_r] = model.hyper_enc.forward(y_l, y_r, &c_henc_);

    const Tensor<T> zt_l = entropy::quantize_noise(z_l, mix_seed(noise_seed, 0));
    const Tensor<T> zt_r = entropy::quantize_noise(z_r, mix_seed(noise_seed, 1));
    const Tensor<T> yt_l = entropy::quantize_noise(y_l, mix_seed(noise_seed, 2));
    const Tensor<T> yt_r = entropy::quantize_noise(y_r, mix_seed(noise_seed, 3));

    psi_zl_ = nn::broadcast(side_params(model, s.vp_l, nn::Side::left, &c_mlp_l_, &raw_zl_), z_l.h, z_l.w);
    const Tensor<T> zh_l = downstream(z_l, zt_l, psi_zl_.mu, path);
    phi_zr_ = nn::broadcast(side_params(model, s.vp_r, nn::Side::right, &c_mlp_r_, &raw_zr_), z_l.h, z_l.w);
    psi_zr_ = nn::to_entropy_params(model.cont_z.forward(zh_l, phi_zr_.stacked(), &c_cz_));
    const Tensor<T> zh_r = downstream(z_r, zt_r, psi_zr_.mu, path);

    auto [hd_l, hd_r] = model.hyper_dec.forward(zh_l, zh_r, &c_hdec_);
    phi_yl_ = nn::to_entropy_params(hd_l);
    phi_yr_ = nn::to_entropy_params(hd_r);
    const Tensor<T> yh_l = downstream(y_l, yt_l, phi_yl_.mu, path);
    psi_yr_ = nn::to_entropy_params(model.cont_y.forward(yh_l, phi_yr_.stacked(), &c_cy_));
    const Tensor<T> yh_r = downstream(y_r, yt_r, psi_yr_.mu, path);

    std::tie(xh_l_, xh_r_) = model.dec.forward(yh_l, yh_r, &c_dec_);

    loss.r_zl = relaxed_rate(zt_l, psi_zl_, g_zl_.d_value, g_zl_.d_mu, g_zl_.d_b);
    loss.r_zr = relaxed_rate(zt_r, psi_zr_, g_zr_.d_value, g_zr_.d_mu, g_zr_.d_b);
    loss.r_yl = relaxed_rate(yt_l, phi_yl_, g_yl_.d_value, g_yl_.d_mu, g_yl_.d_b);
    loss.r_yr = relaxed_rate(yt_r, psi_yr_, g_yr_.d_value, g_yr_.d_mu, g_yr_.d_b);
    loss.distortion = mse(s.x_l, xh_l_) + mse(s.x_r, xh_r_);
    return loss;
}

template <class T>
void TrainGraph<T>::backward(nn::FcnrModel<T>& model, double lambda) {
    if (!sample_) contract_fail("TrainGraph::backward called before forward");
    const PairSample<T>& s = *sample_;

    // Distortion: d/dxh of lambda * mean((x - xh)^2).
    auto d_recon = [&](const Tensor<T>& x, const Tensor<T>& xh) {
        Tensor<T> d = zeros_like(xh);
        const T k = static_cast<T>(2.0 * lambda / static_cast<double>(x.size()));
        for (std::size_t i = 0; i < d.size(); ++i) d.data[i] = k * (xh.data[i] - x.data[i]);
        return d;
    };
    auto [d_yh_l, d_yh_r] = model.dec.backward(c_dec_, d_recon(s.x_l, xh_l_), d_recon(s.x_r, xh_r_));

    // y_r: straight-through plus its own rate term; mu/b of psi^y_r come from cont_y.
    Tensor<T> d_y_r = d_yh_r;
    add_inplace(d_y_r, g_yr_.d_value);
    auto [d_ctx_y, d_phi_yr_stack] =
        model.cont_y.backward(c_cy_, nn::entropy_params_backward(psi_yr_, g_yr_.d_mu, g_yr_.d_b));
    add_inplace(d_yh_l, d_ctx_y);

    Tensor<T> d_y_l = d_yh_l;
    add_inplace(d_y_l, g_yl_.d_value);

    // phi^y_l gets the rate gradient of y_l; phi^y_r receives what cont_y passed back.
    const int cy = phi_yr_.mu.c;
    Tensor<T> d_mu_yr = nn::slice_channels(d_phi_yr_stack, 0, cy);
    Tensor<T> d_b_yr = nn::slice_channels(d_phi_yr_stack, cy, cy);
    auto [d_zh_l, d_zh_r] =
        model.hyper_dec.backward(c_hdec_, nn::entropy_params_backward(phi_yl_, g_yl_.d_mu, g_yl_.d_b),
                                 nn::entropy_params_backward(phi_yr_, d_mu_yr, d_b_yr));

    Tensor<T> d_z_r = d_zh_r;
    add_inplace(d_z_r, g_zr_.d_value);
    auto [d_ctx_z, d_phi_zr_stack] =
        model.cont_z.backward(c_cz_, nn::entropy_params_backward(psi_zr_, g_zr_.d_mu, g_zr_.d_b));
    add_inplace(d_zh_l, d_ctx_z);
    const int cz = phi_zr_.mu.c;
    side_backward(model, nn::Side::right, c_mlp_r_, raw_zr_, nn::slice_channels(d_phi_zr_stack, 0, cz),
                  nn::slice_channels(d_phi_zr_stack, cz, cz));

    Tensor<T> d_z_l = d_zh_l;
    add_inplace(d_z_l, g_zl_.d_value);
    side_backward(model, nn::Side::left, c_mlp_l_, raw_zl_, g_zl_.d_mu, g_zl_.d_b);

    auto [d_hy_l, d_hy_r] = model.hyper_enc.backward(c_henc_, d_z_l, d_z_r);
    add_inplace(d_y_l, d_hy_l);
    add_inplace(d_y_r, d_hy_r);
    model.enc.backward(c_enc_, d_y_l, d_y_r);
}

template class TrainGraph<float>;
template class TrainGraph<double>;

}  // namespace fcnr::train
