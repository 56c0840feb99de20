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

namespace fcnr::nn {

// Visualization parameters, each normalized to [0, 1].
struct VisParams {
    double t = 0;
    double theta = 0;
    double phi_view = 0;

    bool operator==(const VisParams&) const = default;
};

struct PEConfig {
    double base_b = 1.25;
    int levels_L = 8;

    bool operator==(const PEConfig&) const = default;
};

void validate(const PEConfig& cfg);

// (sin(b^0 pi u), cos(b^0 pi u), ..., sin(b^{L-1} pi u), cos(b^{L-1} pi u)).
std::vector<double> pe_scalar(double u, const PEConfig& cfg);

// PE(t) ++ PE(theta) ++ PE(phi_view); width 6L.
std::vector<double> pe_vis(const VisParams& v, const PEConfig& cfg);

inline int pe_width(const PEConfig& cfg) { return 6 * cfg.levels_L; }

}  // namespace fcnr::nn
