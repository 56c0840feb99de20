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

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "fcnr/codec/container.hpp"
#include "fcnr/entropy/coder_job.hpp"
#include "fcnr/nn/model.hpp"

namespace fcnr::codec {

template <class T>
struct ImagePair {
    nn::Tensor<T> x_l, x_r;  // [3, H, W] in [0, 1]
    nn::VisParams vp_l, vp_r;
    std::int64_t pair_id = 0;
};

// Reflect padding on the bottom/right edges up to a multiple of `multiple`.
template <class T>
nn::Tensor<T> reflect_pad(const nn::Tensor<T>& x, int multiple = 64);
template <class T>
nn::Tensor<T> crop(const nn::Tensor<T>& x, int height, int width);

// Quantized latents as the decoder reconstructs them.
template <class T>
struct DecodedLatents {
    nn::Tensor<T> z_hat_l, z_hat_r, y_hat_l, y_hat_r;
};

template <class T>
Bitstream compress(const nn::FcnrModel<T>& model, const ImagePair<T>& pair, entropy::SymbolCoder& coder);

// Decodes the first `planes` substreams in order z_l, z_r, y_l, y_r.
template <class T>
DecodedLatents<T> decode_latents(const Bitstream& bs, const nn::FcnrModel<T>& model, entropy::SymbolCoder& coder,
                                 int planes = 4);

// Throws WrongModelError before decoding anything if the fingerprint differs.
template <class T>
std::pair<nn::Tensor<T>, nn::Tensor<T>> decompress(const Bitstream& bs, const nn::FcnrModel<T>& model,
                                                   entropy::SymbolCoder& coder);

enum class SimMode { noise, ste };

template <class T>
struct SimResult {
    nn::Tensor<T> x_hat_l, x_hat_r;
    double rate_bits = 0;
    std::array<double, 4> plane_bits{};
};

// ste: the exact symbols compress() would code, rated by the discretized
// model; the reconstruction equals decompress() output. noise: additive
// uniform noise in place of rounding, rated by the relaxed density.
template <class T>
SimResult<T> simulate(const nn::FcnrModel<T>& model, const ImagePair<T>& pair, SimMode mode,
                      std::uint64_t seed = 0);

// Payload bits over the pair's pixels (2 * H * W, original size).
double bits_per_pixel(const Bitstream& bs);

}  // namespace fcnr::codec
