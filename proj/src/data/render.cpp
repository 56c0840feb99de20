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

#include "fcnr/data/render.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fcnr/error.hpp"
#include "fcnr/util/random.hpp"

namespace fcnr::data {

using Vec3 = std::array<double, 3>;

namespace {

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross3(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Vec3 unit(const Vec3& v) {
    const double n = std::sqrt(dot3(v, v));
    return {v[0] / n, v[1] / n, v[2] / n};
}

constexpr std::array<Vec3, 6> kPalette{{
    {0.85, 0.33, 0.10},
    {0.00, 0.45, 0.74},
    {0.93, 0.69, 0.13},
    {0.47, 0.67, 0.19},
    {0.49, 0.18, 0.56},
    {0.30, 0.75, 0.93},
}};

struct Camera {
    Vec3 fwd, right, up;
};

Camera camera_for(const ViewPoint& view) {
    Camera cam;
    cam.fwd = {-view.pos[0], -view.pos[1], -view.pos[2]};
    const Vec3 world_up = std::abs(cam.fwd[2]) > 0.999 ? Vec3{0, 1, 0} : Vec3{0, 0, 1};
    cam.right = unit(cross3(cam.fwd, world_up));
    cam.up = cross3(cam.right, cam.fwd);
    return cam;
}

double lobe_term(const Lobe& l, const Vec3& p, Vec3* d) {
    const Vec3 q{p[0] - l.center[0], p[1] - l.center[1], p[2] - l.center[2]};
    if (d) *d = q;
    return l.weight * std::exp(-dot3(q, q) / (2 * l.sigma * l.sigma));
}

}  // namespace

std::string_view render_mode_name(RenderMode m) { return m == RenderMode::ir ? "ir" : "dvr"; }

RenderMode parse_render_mode(std::string_view s) {
    if (s == "ir") return RenderMode::ir;
    if (s == "dvr") return RenderMode::dvr;
    contract_fail("unknown render mode '" + std::string(s) + "'");
}

double Field::value(const Vec3& p) const {
    double v = 0;
    for (const auto& l : lobes) v += lobe_term(l, p, nullptr);
    return v;
}

Vec3 Field::gradient(const Vec3& p) const {
    Vec3 g{0, 0, 0};
    for (const auto& l : lobes) {
        Vec3 q;
        const double e = lobe_term(l, p, &q) / (l.sigma * l.sigma);
        for (int i = 0; i < 3; ++i) g[i] -= e * q[i];
    }
    return g;
}

Vec3 Field::color(const Vec3& p) const {
    Vec3 c{0, 0, 0};
    double total = 0;
    for (const auto& l : lobes) {
        const double e = lobe_term(l, p, nullptr);
        total += e;
        for (int i = 0; i < 3; ++i) c[i] += e * l.color[i];
    }
    if (total <= 0) return {0.5, 0.5, 0.5};
    for (auto& x : c) x /= total;
    return c;
}

Field field_at(const FieldConfig& cfg, int t, int timesteps) {
    if (cfg.lobes < 1) contract_fail("field_at: need at least one lobe");
    if (timesteps < 1 || t < 0 || t >= timesteps) contract_fail("field_at: t out of range");
    const double tn = timesteps > 1 ? static_cast<double>(t) / (timesteps - 1) : 0.0;
    const double angle = cfg.spin * tn;
    const double ca = std::cos(angle), sa = std::sin(angle);

    Rng rng(cfg.seed);
    Field f;
    for (int i = 0; i < cfg.lobes; ++i) {
        const double r = rng.uniform(0.25, 0.5);
        const double az = rng.uniform(0, 2 * std::numbers::pi);
        const double z = rng.uniform(-0.35, 0.35);
        const double sigma = rng.uniform(0.16, 0.24);
        const double phase = rng.uniform(0, 2 * std::numbers::pi);
        const double x = r * std::cos(az), y = r * std::sin(az);
        Lobe l;
        l.center = {ca * x - sa * y, sa * x + ca * y, z * std::cos(std::numbers::pi * tn + phase)};
        l.sigma = sigma * (1.0 + 0.15 * std::sin(2 * std::numbers::pi * tn + phase));
        l.weight = 1.0;
        l.color = kPalette[i % kPalette.size()];
        f.lobes.push_back(l);
    }
    return f;
}

nn::Tensor<float> render(const Field& field, const ViewPoint& view, const RenderSettings& rs) {
    if (rs.height < 1 || rs.width < 1 || rs.steps < 2) contract_fail("render: bad settings");
    const Camera cam = camera_for(view);
    const Vec3 light{view.pos[0], view.pos[1], view.pos[2]};
    nn::Tensor<float> img(3, rs.height, rs.width, 1.0f);
    const double r2 = rs.radius * rs.radius;

    for (int py = 0; py < rs.height; ++py) {
        const double v = (1.0 - 2.0 * (py + 0.5) / rs.height) * rs.extent;
        for (int px = 0; px < rs.width; ++px) {
            const double u = (2.0 * (px + 0.5) / rs.width - 1.0) * rs.extent;
            const double rem = r2 - u * u - v * v;
            if (rem <= 0) continue;
            const double half = std::sqrt(rem);
            const double ds = 2 * half / rs.steps;
            const Vec3 o{u * cam.right[0] + v * cam.up[0], u * cam.right[1] + v * cam.up[1],
                         u * cam.right[2] + v * cam.up[2]};
            auto at = [&](double s) {
                return Vec3{o[0] + s * cam.fwd[0], o[1] + s * cam.fwd[1], o[2] + s * cam.fwd[2]};
            };

            Vec3 rgb{1, 1, 1};
            if (rs.mode == RenderMode::ir) {
                double s_prev = -half;
                double g_prev = field.value(at(s_prev)) - rs.iso;
                bool hit = g_prev >= 0;
                double s_hit = s_prev;
                for (int k = 1; k <= rs.steps && !hit; ++k) {
                    const double s = -half + k * ds;
                    const double g = field.value(at(s)) - rs.iso;
                    if (g >= 0) {
                        double lo = s_prev, hi = s;
                        for (int it = 0; it < 30; ++it) {
                            const double mid = 0.5 * (lo + hi);
                            (field.value(at(mid)) - rs.iso >= 0 ? hi : lo) = mid;
                        }
                        s_hit = hi;
                        hit = true;
                    }
                    s_prev = s;
                }
                if (hit) {
                    const Vec3 p = at(s_hit);
                    const Vec3 g = field.gradient(p);
                    const double gn = std::sqrt(dot3(g, g));
                    double diffuse = 1.0;
                    if (gn > 0) diffuse = std::max(0.0, -dot3(g, light) / gn);
                    const double shade = 0.2 + 0.8 * diffuse;
                    const Vec3 c = field.color(p);
                    for (int i = 0; i < 3; ++i) rgb[i] = c[i] * shade;
                }
            } else {
                Vec3 acc{0, 0, 0};
                double alpha = 0;
                for (int k = 0; k < rs.steps && alpha < 0.995; ++k) {
                    const Vec3 p = at(-half + (k + 0.5) * ds);
                    const double val = field.value(p);
                    const double a = std::pow(std::clamp((val - 0.15) / 0.85, 0.0, 1.0), 1.5);
                    if (a <= 0) continue;
                    const double step_alpha = 1.0 - std::exp(-a * rs.density * ds);
                    const Vec3 c = field.color(p);
                    const double wgt = (1.0 - alpha) * step_alpha;
                    // Denser regions render brighter.
                    const double glow = 0.55 + 0.45 * std::min(1.0, val);
                    for (int i = 0; i < 3; ++i) acc[i] += wgt * c[i] * glow;
                    alpha += wgt;
                }
                for (int i = 0; i < 3; ++i) rgb[i] = acc[i] + (1.0 - alpha);
            }
            for (int i = 0; i < 3; ++i)
                img.at(i, py, px) = static_cast<float>(std::clamp(rgb[i], 0.0, 1.0));
        }
    }
    return img;
}

}  // namespace fcnr::data
