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

#include "doctest.h"

#include "fcnr/nn/model.hpp"
#include "fcnr/train/graph.hpp"
#include "grad_util.hpp"

using namespace fcnr;

namespace {

nn::ModelConfig tiny_config(nn::Ablation a = nn::Ablation::full) {
    nn::ModelConfig cfg;
    cfg.channels = 8;
    cfg.latent = 4;
    cfg.hyper = 4;
    cfg.mlp_hidden = 8;
    cfg.ablation = a;
    return cfg;
}

train::PairSample<double> random_pair(int size, std::uint64_t seed) {
    Rng rng(seed);
    train::PairSample<double> s{nn::Tensor<double>(3, size, size), nn::Tensor<double>(3, size, size),
                                {0.4, 0.3, 0.1}, {0.4, 0.3, 0.2}};
    for (auto& v : s.x_l.data) v = rng.uniform();
    for (auto& v : s.x_r.data) v = rng.uniform();
    return s;
}

}  // namespace

TEST_CASE("full model directional derivative matches central differences") {
    for (auto ab : {nn::Ablation::full, nn::Ablation::jct_only, nn::Ablation::pe_only, nn::Ablation::neither}) {
        CAPTURE(nn::ablation_name(ab));
        nn::FcnrModel<double> model(tiny_config(ab), 11);
        const auto sample = random_pair(64, 5);
        const double lambda = 50.0;
        train::TrainGraph<double> g;
        model.zero_grad();
        g.forward(model, sample, 99, train::QuantPath::noise);
        g.backward(model, lambda);
        auto loss = [&] {
            train::TrainGraph<double> g2;
            return g2.forward(model, sample, 99, train::QuantPath::noise).total(lambda);
        };
        const auto chk = test::directional_check(model.params(), loss, 3);
        CAPTURE(chk.analytic);
        CAPTURE(chk.numeric);
        CHECK(chk.rel() < 1e-3);
    }
}
