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
#include <span>
#include <vector>

#include "fcnr/nn/tensor.hpp"

namespace fcnr::entropy {

inline constexpr double kProbFloor = 0x1p-16;
inline constexpr double kScaleFloor = 1e-6;
inline constexpr std::int32_t kSymbolLimit = 32767;

// Laplace(0, b) CDF.
double laplace_cdf(double x, double b);

// P(v) = F(v + 0.5 - mu_frac) - F(v - 0.5 - mu_frac), floored at 2^-16.
double laplace_bin_prob(std::int32_t v, double mu_frac, double b);

// log of the bin mass over [x - 0.5, x + 0.5] and its partials. Evaluated in
// the tail-stable closed form on each side of the mode; when the floor is
// active both partials are zero.
struct BinLogProb {
    double log_p;
    double d_x;
    double d_b;
    bool floored;
};
BinLogProb laplace_bin_log_prob(double x, double b);

// Noise-relaxed rate in bits: sum of -log2 P(value - mu) with scale b.
// Gradient spans may be empty; when present, scale * d(bits) is added.
template <class T>
double rate_bits_relaxed(std::span<const T> value, std::span<const T> mu, std::span<const T> b,
                         std::span<T> d_value, std::span<T> d_mu, std::span<T> d_b, double scale = 1.0);

// Inference rate of integer residual symbols (coded with mu_frac = 0).
template <class T>
double rate_bits(std::span<const std::int32_t> symbols, std::span<const T> b);

double round_half_away(double x);

// y_hat = round(y - mu) + mu. The straight-through gradient is d/dy = 1,
// d/dmu = 0; callers pass gradients through unchanged.
template <class T>
nn::Tensor<T> quantize_ste(const nn::Tensor<T>& y, const nn::Tensor<T>& mu);

// Integer residuals round(y - mu), clamped to +-kSymbolLimit.
template <class T>
std::vector<std::int32_t> quantize_symbols(const nn::Tensor<T>& y, const nn::Tensor<T>& mu);

// The exact decoder-side reconstruction v + mu.
template <class T>
nn::Tensor<T> dequantize(std::span<const std::int32_t> symbols, const nn::Tensor<T>& mu);

// y + U(-0.5, 0.5), reproducible from seed.
template <class T>
nn::Tensor<T> quantize_noise(const nn::Tensor<T>& y, std::uint64_t seed);

// b = softplus(raw) + 1e-6 and its derivative.
template <class T>
T positive_scale(T raw);
template <class T>
T positive_scale_grad(T raw);

}  // namespace fcnr::entropy
