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
#include <vector>

namespace fcnr::data {

struct ViewPoint {
    double theta = 0;     // polar angle from +z, [0, pi]
    double phi_view = 0;  // azimuth, [0, 2 pi)
    std::array<double, 3> pos{0, 0, 1};
};

ViewPoint view_from_position(const std::array<double, 3>& p);

// Vertices of an icosahedron subdivided `level` times (each edge split at
// its midpoint and pushed back onto the unit sphere).
std::vector<ViewPoint> icosphere_views(int level);

}  // namespace fcnr::data
