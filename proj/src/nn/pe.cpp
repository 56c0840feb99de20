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

#include "fcnr/nn/pe.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fcnr/error.hpp"

namespace fcnr::nn {

void validate(const PEConfig& cfg) {
    if (!(cfg.base_b > 1.0)) contract_fail("PEConfig: base_b must exceed 1, got " + std::to_string(cfg.base_b));
    if (cfg.levels_L < 1) contract_fail("PEConfig: levels_L must be >= 1");
}

std::vector<double> pe_scalar(double u, const PEConfig& cfg) {
    validate(cfg);
    std::vector<double> out;
    out.reserve(2 * static_cast<std::size_t>(cfg.levels_L));
    for (int i = 0; i < cfg.levels_L; ++i) {
        const double arg = std::pow(cfg.base_b, i) * std::numbers::pi * u;
        out.push_back(std::sin(arg));
        out.push_back(std::cos(arg));
    }
    return out;
}

std::vector<double> pe_vis(const VisParams& v, const PEConfig& cfg) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(pe_width(cfg)));
    for (double u : {v.t, v.theta, v.phi_view}) {
        const auto part = pe_scalar(u, cfg);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

}  // namespace fcnr::nn
