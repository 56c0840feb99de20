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

#include <vector>

#include "fcnr/codec/container.hpp"
#include "fcnr/nn/tensor.hpp"

namespace fcnr::eval {

inline constexpr double kPsnrCap = 100.0;

// 10 log10(1 / MSE) over every element, values in [0, 1]. Identical images
// (and anything above the cap) report kPsnrCap.
template <class T>
double psnr(const nn::Tensor<T>& x, const nn::Tensor<T>& x_hat);

// Payload bits over every coded pixel, both views at original size.
double bpp(const std::vector<codec::Bitstream>& streams);

}  // namespace fcnr::eval
