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

#include "fcnr/eval/metrics.hpp"

#include <cmath>

namespace fcnr::eval {

template <class T>
double psnr(const nn::Tensor<T>& x, const nn::Tensor<T>& x_hat) {
    nn::require_same_shape(x, x_hat, "psnr");
    if (x.empty()) contract_fail("psnr: empty image");
    double sse = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = static_cast<double>(x.data[i]) - static_cast<double>(x_hat.data[i]);
        sse += d * d;
    }
    if (sse == 0) return kPsnrCap;
    const double mse = sse / static_cast<double>(x.size());
    return std::min(kPsnrCap, -10.0 * std::log10(mse));
}

double bpp(const std::vector<codec::Bitstream>& streams) {
    if (streams.empty()) contract_fail("bpp: no streams");
    double bits = 0, pixels = 0;
    for (const auto& s : streams) {
        bits += 8.0 * static_cast<double>(s.payload_bytes());
        pixels += 2.0 * s.header.height * s.header.width;
    }
    return bits / pixels;
}

template double psnr<float>(const nn::Tensor<float>&, const nn::Tensor<float>&);
template double psnr<double>(const nn::Tensor<double>&, const nn::Tensor<double>&);

}  // namespace fcnr::eval
