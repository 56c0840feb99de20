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

namespace fcnr::entropy {

inline constexpr int kCdfPrecision = 16;
inline constexpr std::uint32_t kCdfTotal = 1u << kCdfPrecision;

// Cumulative counts over the alphabet [vmin, vmax]: size vmax - vmin + 2,
// cdf.front() == 0, cdf.back() == 2^16, strictly increasing.
using CdfTable = std::vector<std::uint32_t>;

// Discretized Laplace(0, b) quantized to 2^16 counts. The construction is
// part of the bitstream format; see docs/FORMAT.md.
CdfTable build_cdf(double b, std::int32_t vmin, std::int32_t vmax);

// Quantizes arbitrary nonnegative weights with the same apportionment rule.
CdfTable build_cdf_from_weights(std::span<const double> weights);

// Throws ContractError describing the first violation.
void validate_cdf(std::span<const std::uint32_t> cdf);

}  // namespace fcnr::entropy
