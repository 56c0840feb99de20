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

#include <cmath>
#include <functional>
#include <vector>

#include "fcnr/nn/layers.hpp"
#include "fcnr/util/random.hpp"

namespace fcnr::test {

inline double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-12});
}

// Central difference of f along a random unit direction over params versus
// the analytic directional derivative taken from the accumulated grads.
struct DirectionalCheck {
    double analytic = 0;
    double numeric = 0;
    double rel() const { return rel_err(analytic, numeric); }
};

inline DirectionalCheck directional_check(nn::ParamList<double> params, const std::function<double()>& loss,
                                          std::uint64_t seed, double h = 1e-5) {
    Rng rng(seed);
    std::vector<std::vector<double>> dir;
    double norm2 = 0;
    for (auto* p : params) {
        dir.emplace_back(p->size());
        for (auto& v : dir.back()) {
            v = rng.uniform(-1, 1);
            norm2 += v * v;
        }
    }
    const double inv = 1.0 / std::sqrt(norm2);
    DirectionalCheck out;
    for (std::size_t k = 0; k < params.size(); ++k)
        for (std::size_t i = 0; i < params[k]->size(); ++i) {
            dir[k][i] *= inv;
            out.analytic += dir[k][i] * params[k]->grad[i];
        }
    auto shift = [&](double s) {
        for (std::size_t k = 0; k < params.size(); ++k)
            for (std::size_t i = 0; i < params[k]->size(); ++i) params[k]->value[i] += s * dir[k][i];
    };
    shift(h);
    const double up = loss();
    shift(-2 * h);
    const double down = loss();
    shift(h);
    out.numeric = (up - down) / (2 * h);
    return out;
}

}  // namespace fcnr::test
