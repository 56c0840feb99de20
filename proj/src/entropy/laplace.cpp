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

#include "fcnr/entropy/laplace.hpp"

#include <cmath>
#include <numbers>

#include "fcnr/util/random.hpp"

namespace fcnr::entropy {

namespace {

const double kLogFloor = std::log(kProbFloor);

}  // namespace

double laplace_cdf(double x, double b) {
    return x < 0 ? 0.5 * std::exp(x / b) : 1.0 - 0.5 * std::exp(-x / b);
}

double laplace_bin_prob(std::int32_t v, double mu_frac, double b) {
    const BinLogProb lp = laplace_bin_log_prob(static_cast<double>(v) - mu_frac, b);
    return lp.floored ? kProbFloor : std::exp(lp.log_p);
}

BinLogProb laplace_bin_log_prob(double x, double b) {
    const double lo = x - 0.5;
    const double hi = x + 0.5;
    const double q = std::exp(-1.0 / b);
    const double b2 = b * b;
    BinLogProb out{};
    if (lo >= 0) {
        out.log_p = -std::numbers::ln2 - lo / b + std::log1p(-q);
        out.d_x = -1.0 / b;
        out.d_b = lo / b2 - q / (b2 * (1.0 - q));
    } else if (hi <= 0) {
        out.log_p = -std::numbers::ln2 + hi / b + std::log1p(-q);
        out.d_x = 1.0 / b;
        out.d_b = -hi / b2 - q / (b2 * (1.0 - q));
    } else {
        const double e_hi = std::exp(-hi / b);
        const double e_lo = std::exp(lo / b);
        const double p = 1.0 - 0.5 * e_hi - 0.5 * e_lo;
        out.log_p = std::log(p);
        out.d_x = 0.5 * (e_hi - e_lo) / (b * p);
        out.d_b = 0.5 * (lo * e_lo - hi * e_hi) / (b2 * p);
    }
    if (out.log_p < kLogFloor) {  // NaN passes through
        out.log_p = kLogFloor;
        out.d_x = 0;
        out.d_b = 0;
        out.floored = true;
    }
    return out;
}

template <class T>
double rate_bits_relaxed(std::span<const T> value, std::span<const T> mu, std::span<const T> b,
                         std::span<T> d_value, std::span<T> d_mu, std::span<T> d_b, double scale) {
    if (mu.size() != value.size() || b.size() != value.size())
        contract_fail("rate_bits_relaxed: value/mu/b size mismatch");
    const double inv_ln2 = 1.0 / std::numbers::ln2;
    double bits = 0;
    for (std::size_t i = 0; i < value.size(); ++i) {
        const double x = static_cast<double>(value[i]) - static_cast<double>(mu[i]);
        const BinLogProb lp = laplace_bin_log_prob(x, static_cast<double>(b[i]));
        bits -= lp.log_p * inv_ln2;
        const double gx = -lp.d_x * inv_ln2 * scale;
        if (!d_value.empty()) d_value[i] += static_cast<T>(gx);
        if (!d_mu.empty()) d_mu[i] -= static_cast<T>(gx);
        if (!d_b.empty()) d_b[i] += static_cast<T>(-lp.d_b * inv_ln2 * scale);
    }
    return bits;
}

template <class T>
double rate_bits(std::span<const std::int32_t> symbols, std::span<const T> b) {
    if (b.size() != symbols.size()) contract_fail("rate_bits: symbols/b size mismatch");
    double bits = 0;
    for (std::size_t i = 0; i < symbols.size(); ++i)
        bits -= laplace_bin_log_prob(static_cast<double>(symbols[i]), static_cast<double>(b[i])).log_p;
    return bits / std::numbers::ln2;
}

double round_half_away(double x) { return std::round(x); }

template <class T>
nn::Tensor<T> quantize_ste(const nn::Tensor<T>& y, const nn::Tensor<T>& mu) {
    nn::require_same_shape(y, mu, "quantize_ste");
    nn::Tensor<T> out(y.c, y.h, y.w);
    for (std::size_t i = 0; i < y.size(); ++i) out.data[i] = std::round(y.data[i] - mu.data[i]) + mu.data[i];
    return out;
}

template <class T>
std::vector<std::int32_t> quantize_symbols(const nn::Tensor<T>& y, const nn::Tensor<T>& mu) {
    nn::require_same_shape(y, mu, "quantize_symbols");
    std::vector<std::int32_t> out(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double r = std::round(static_cast<double>(y.data[i] - mu.data[i]));
        out[i] = static_cast<std::int32_t>(std::clamp(r, -double(kSymbolLimit), double(kSymbolLimit)));
    }
    return out;
}

template <class T>
nn::Tensor<T> dequantize(std::span<const std::int32_t> symbols, const nn::Tensor<T>& mu) {
    if (symbols.size() != mu.size()) contract_fail("dequantize: symbol count does not match mu");
    nn::Tensor<T> out(mu.c, mu.h, mu.w);
    for (std::size_t i = 0; i < symbols.size(); ++i) out.data[i] = static_cast<T>(symbols[i]) + mu.data[i];
    return out;
}

template <class T>
nn::Tensor<T> quantize_noise(const nn::Tensor<T>& y, std::uint64_t seed) {
    Rng rng(seed);
    nn::Tensor<T> out(y.c, y.h, y.w);
    for (std::size_t i = 0; i < y.size(); ++i) out.data[i] = y.data[i] + static_cast<T>(rng.uniform() - 0.5);
    return out;
}

template <class T>
T positive_scale(T raw) {
    // softplus without overflow for large raw
    const T sp = raw > T(0) ? raw + std::log1p(std::exp(-raw)) : std::log1p(std::exp(raw));
    return sp + static_cast<T>(kScaleFloor);
}

template <class T>
T positive_scale_grad(T raw) {
    return raw >= T(0) ? T(1) / (T(1) + std::exp(-raw)) : std::exp(raw) / (T(1) + std::exp(raw));
}

#define FCNR_INSTANTIATE_LAPLACE(T)                                                                    \
    template double rate_bits_relaxed<T>(std::span<const T>, std::span<const T>, std::span<const T>,   \
                                         std::span<T>, std::span<T>, std::span<T>, double);           \
    template double rate_bits<T>(std::span<const std::int32_t>, std::span<const T>);                   \
    template nn::Tensor<T> quantize_ste<T>(const nn::Tensor<T>&, const nn::Tensor<T>&);                \
    template std::vector<std::int32_t> quantize_symbols<T>(const nn::Tensor<T>&, const nn::Tensor<T>&); \
    template nn::Tensor<T> dequantize<T>(std::span<const std::int32_t>, const nn::Tensor<T>&);         \
    template nn::Tensor<T> quantize_noise<T>(const nn::Tensor<T>&, std::uint64_t);                     \
    template T positive_scale<T>(T);                                                                   \
    template T positive_scale_grad<T>(T);

FCNR_INSTANTIATE_LAPLACE(float)
FCNR_INSTANTIATE_LAPLACE(double)

}  // namespace fcnr::entropy
