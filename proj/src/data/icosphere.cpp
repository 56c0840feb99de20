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

#include "fcnr/data/icosphere.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include "fcnr/error.hpp"

namespace fcnr::data {

using Vec3 = std::array<double, 3>;

namespace {

Vec3 normalized(const Vec3& v) {
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    return {v[0] / n, v[1] / n, v[2] / n};
}

}  // namespace

ViewPoint view_from_position(const Vec3& p) {
    ViewPoint v;
    v.pos = p;
    v.theta = std::acos(std::clamp(p[2], -1.0, 1.0));
    double phi = std::atan2(p[1], p[0]);
    if (phi < 0) phi += 2 * std::numbers::pi;
    if (phi >= 2 * std::numbers::pi) phi = 0;
    // Poles have no azimuth; atan2 of signed zeros can return +-pi.
    if (std::abs(p[0]) < 1e-12 && std::abs(p[1]) < 1e-12) phi = 0;
    v.phi_view = phi;
    return v;
}

std::vector<ViewPoint> icosphere_views(int level) {
    if (level < 0 || level > 4) contract_fail("icosphere_views: level must be in [0, 4]");

    // Icosahedron with a vertex on each pole.
    std::vector<Vec3> verts;
    verts.push_back({0, 0, 1});
    const double z = 1.0 / std::sqrt(5.0);
    const double r = 2.0 / std::sqrt(5.0);
    for (int i = 0; i < 5; ++i) {
        const double a = 2 * std::numbers::pi * i / 5;
        verts.push_back({r * std::cos(a), r * std::sin(a), z});
    }
    for (int i = 0; i < 5; ++i) {
        const double a = 2 * std::numbers::pi * (i + 0.5) / 5;
        verts.push_back({r * std::cos(a), r * std::sin(a), -z});
    }
    verts.push_back({0, 0, -1});

    std::vector<std::array<int, 3>> faces;
    for (int i = 0; i < 5; ++i) {
        const int u0 = 1 + i, u1 = 1 + (i + 1) % 5;
        const int l0 = 6 + i, l1 = 6 + (i + 1) % 5;
        faces.push_back({0, u0, u1});
        faces.push_back({u0, l0, u1});
        faces.push_back({u1, l0, l1});
        faces.push_back({11, l1, l0});
    }

    for (int s = 0; s < level; ++s) {
        std::map<std::pair<int, int>, int> mid;
        auto midpoint = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            const Vec3& p = verts[a];
            const Vec3& q = verts[b];
            verts.push_back(normalized({(p[0] + q[0]) / 2, (p[1] + q[1]) / 2, (p[2] + q[2]) / 2}));
            const int id = static_cast<int>(verts.size()) - 1;
            mid.emplace(key, id);
            return id;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            const int ab = midpoint(f[0], f[1]);
            const int bc = midpoint(f[1], f[2]);
            const int ca = midpoint(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }

    std::vector<ViewPoint> out;
    out.reserve(verts.size());
    for (const auto& v : verts) out.push_back(view_from_position(v));
    return out;
}

}  // namespace fcnr::data
