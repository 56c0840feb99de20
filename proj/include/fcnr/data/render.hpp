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
#include <string_view>
#include <vector>

#include "fcnr/data/icosphere.hpp"
#include "fcnr/nn/tensor.hpp"

namespace fcnr::data {

enum class RenderMode { ir, dvr };

std::string_view render_mode_name(RenderMode m);
RenderMode parse_render_mode(std::string_view s);

struct Lobe {
    std::array<double, 3> center{};
    double sigma = 0.25;
    double weight = 1.0;
    std::array<double, 3> color{0.8, 0.3, 0.2};
};

// Sum of isotropic Gaussians.
struct Field {
    std::vector<Lobe> lobes;

    double value(const std::array<double, 3>& p) const;
    std::array<double, 3> gradient(const std::array<double, 3>& p) const;
    // Lobe colors weighted by each lobe's contribution at p.
    std::array<double, 3> color(const std::array<double, 3>& p) const;
};

struct FieldConfig {
    int lobes = 5;
    std::uint64_t seed = 1;
    double spin = 1.5;  // radians of rotation about z over the whole sequence

    bool operator==(const FieldConfig&) const = default;
};

// Lobes rotate about z and pulse with t; t in [0, timesteps - 1].
Field field_at(const FieldConfig& cfg, int t, int timesteps);

struct RenderSettings {
    RenderMode mode = RenderMode::ir;
    int height = 128;
    int width = 128;
    double extent = 1.0;  // half-width of the orthographic window
    double radius = 1.2;  // rays are clipped to this sphere
    int steps = 160;
    double iso = 0.5;
    double density = 6.0;
};

// Orthographic camera at `view.pos` looking at the origin, headlight
// shading, white background. Output [3, H, W] in [0, 1].
nn::Tensor<float> render(const Field& field, const ViewPoint& view, const RenderSettings& rs);

}  // namespace fcnr::data
