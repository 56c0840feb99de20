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

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <functional>
#include <set>

#include "fcnr/nn/attention.hpp"
#include "fcnr/nn/model.hpp"
#include "fcnr/nn/pe.hpp"
#include "grad_util.hpp"

using namespace fcnr;
using namespace fcnr::nn;
using fcnr::test::rel_err;

namespace {

Tensor<double> random_tensor(int c, int h, int w, Rng& rng) {
    Tensor<double> t(c, h, w);
    for (auto& v : t.data) v = rng.uniform(-1, 1);
    return t;
}

double weighted_sum(const Tensor<double>& y, const Tensor<double>& wts) {
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += y.data[i] * wts.data[i];
    return s;
}

// Checks dL/dx and dL/dparams of L = <w, f(x)> by central differences on a
// sample of coordinates.
void check_layer(const std::function<Tensor<double>(const Tensor<double>&)>& fwd, Tensor<double> x,
                 const Tensor<double>& dx, const ParamList<double>& params, const Tensor<double>& wts, Rng& rng) {
    const double h = 1e-6;
    auto loss = [&]() { return weighted_sum(fwd(x), wts); };
    for (int s = 0; s < 20; ++s) {
        const std::size_t i = rng.below(x.size());
        const double keep = x.data[i];
        x.data[i] = keep + h;
        const double up = loss();
        x.data[i] = keep - h;
        const double down = loss();
        x.data[i] = keep;
        const double fd = (up - down) / (2 * h);
        CHECK(std::abs(fd - dx.data[i]) < 1e-6 * (1 + std::abs(fd)));
    }
    for (auto* p : params)
        for (int s = 0; s < 8; ++s) {
            const std::size_t i = rng.below(p->size());
            const double keep = p->value[i];
            p->value[i] = keep + h;
            const double up = loss();
            p->value[i] = keep - h;
            const double down = loss();
            p->value[i] = keep;
            const double fd = (up - down) / (2 * h);
            CHECK(std::abs(fd - p->grad[i]) < 1e-6 * (1 + std::abs(fd)));
        }
}

}  // namespace

TEST_CASE("conv layer gradients") {
    Rng rng(1);
    for (auto [k, s] : {std::pair{5, 2}, std::pair{3, 1}, std::pair{1, 1}, std::pair{3, 2}}) {
        Conv2d<double> conv("c", 3, 4, k, s);
        conv.init(rng, true);
        ParamList<double> params;
        conv.append_params(params);
        for (auto* p : params)
            for (auto& v : p->value) v += rng.uniform(-0.1, 0.1);
        const auto x = random_tensor(3, 8, 10, rng);
        Conv2d<double>::Cache cache;
        const auto y = conv.forward(x, &cache);
        CHECK(y.h == (s == 2 ? 4 : 8));
        CHECK(y.w == (s == 2 ? 5 : 10));
        const auto wts = random_tensor(y.c, y.h, y.w, rng);
        for (auto* p : params) p->zero_grad();
        const auto dx = conv.backward(cache, wts);
        check_layer([&](const Tensor<double>& in) { return conv.forward(in, nullptr); }, x, dx, params, wts, rng);
    }
}

TEST_CASE("transposed conv gradients and size doubling") {
    Rng rng(2);
    for (auto k : {5, 3}) {
        ConvTranspose2d<double> deconv("d", 3, 2, k, 2);
        deconv.init(rng, false);
        ParamList<double> params;
        deconv.append_params(params);
        for (auto* p : params)
            for (auto& v : p->value) v += rng.uniform(-0.1, 0.1);
        const auto x = random_tensor(3, 4, 5, rng);
        ConvTranspose2d<double>::Cache cache;
        const auto y = deconv.forward(x, &cache);
        CHECK(y.c == 2);
        CHECK(y.h == 8);
        CHECK(y.w == 10);
        const auto wts = random_tensor(y.c, y.h, y.w, rng);
        for (auto* p : params) p->zero_grad();
        const auto dx = deconv.backward(cache, wts);
        check_layer([&](const Tensor<double>& in) { return deconv.forward(in, nullptr); }, x, dx, params, wts, rng);
    }
}

TEST_CASE("prelu gradients") {
    Rng rng(3);
    PRelu<double> act("a", 3);
    act.init();
    ParamList<double> params;
    act.append_params(params);
    params[0]->value = {0.1, 0.25, -0.3};
    auto x = random_tensor(3, 4, 4, rng);
    for (auto& v : x.data)
        if (std::abs(v) < 1e-3) v = 0.5;  // keep away from the kink
    PRelu<double>::Cache cache;
    const auto y = act.forward(x, &cache);
    CHECK(y.at(1, 0, 0) == (x.at(1, 0, 0) > 0 ? x.at(1, 0, 0) : 0.25 * x.at(1, 0, 0)));
    const auto wts = random_tensor(3, 4, 4, rng);
    params[0]->zero_grad();
    const auto dx = act.backward(cache, wts);
    check_layer([&](const Tensor<double>& in) { return act.forward(in, nullptr); }, x, dx, params, wts, rng);
}

TEST_CASE("linear and vector prelu gradients") {
    Rng rng(4);
    Linear<double> fc("fc", 5, 3);
    fc.init(rng, false);
    VectorPRelu<double> act("act", 3);
    act.init();
    ParamList<double> params;
    fc.append_params(params);
    act.append_params(params);
    std::vector<double> x(5), w(3);
    for (auto& v : x) v = rng.uniform(-1, 1);
    for (auto& v : w) v = rng.uniform(-1, 1);
    auto loss = [&]() {
        const auto y = act.forward(fc.forward(x, nullptr), nullptr);
        double s = 0;
        for (int i = 0; i < 3; ++i) s += y[i] * w[i];
        return s;
    };
    Linear<double>::Cache c1;
    VectorPRelu<double>::Cache c2;
    act.forward(fc.forward(x, &c1), &c2);
    for (auto* p : params) p->zero_grad();
    const auto dx = fc.backward(c1, act.backward(c2, w));
    const double h = 1e-6;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = loss();
        x[i] = keep - h;
        const double down = loss();
        x[i] = keep;
        CHECK(std::abs((up - down) / (2 * h) - dx[i]) < 1e-7);
    }
    const auto check = test::directional_check(params, loss, 5);
    CHECK(check.rel() < 1e-6);
}

TEST_CASE("jctm gradients w.r.t. both views and the weights") {
    Rng rng(5);
    Jctm<double> j("J", 4, 2);
    j.init(rng);
    ParamList<double> params;
    j.append_params(params);
    auto fl = random_tensor(4, 3, 5, rng);
    auto fr = random_tensor(4, 3, 5, rng);
    const auto wl = random_tensor(4, 3, 5, rng), wr = random_tensor(4, 3, 5, rng);
    auto loss = [&]() {
        const auto [a, b] = j.forward(fl, fr, nullptr);
        return weighted_sum(a, wl) + weighted_sum(b, wr);
    };
    Jctm<double>::Cache cache;
    j.forward(fl, fr, &cache);
    for (auto* p : params) p->zero_grad();
    const auto [dl, dr] = j.backward(cache, wl, wr);
    const double h = 1e-6;
    for (auto* side : {&fl, &fr}) {
        const auto& grad = side == &fl ? dl : dr;
        for (std::size_t i = 0; i < side->size(); ++i) {
            const double keep = side->data[i];
            side->data[i] = keep + h;
            const double up = loss();
            side->data[i] = keep - h;
            const double down = loss();
            side->data[i] = keep;
            const double fd = (up - down) / (2 * h);
            CHECK(std::abs(fd - grad.data[i]) < 1e-7 * (1 + std::abs(fd)));
        }
    }
    const auto check = test::directional_check(params, loss, 6);
    CHECK(check.rel() < 1e-6);
}

TEST_CASE("jctm is swap-equivariant and blocked inference matches the cached path") {
    Rng rng(6);
    Jctm<double> j("J", 4, 2);
    j.init(rng);
    const auto fl = random_tensor(4, 24, 20, rng), fr = random_tensor(4, 24, 20, rng);  // 480 tokens
    const auto [a, b] = j.forward(fl, fr, nullptr);
    const auto [b2, a2] = j.forward(fr, fl, nullptr);
    CHECK(a.data == a2.data);
    CHECK(b.data == b2.data);
    Jctm<double>::Cache cache;
    const auto [ca, cb] = j.forward(fl, fr, &cache);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(ca.data[i] == doctest::Approx(a.data[i]).epsilon(1e-12));
        CHECK(cb.data[i] == doctest::Approx(b.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("model shape algebra") {
    const ModelConfig def;
    const auto s = latent_shapes(def, 1024, 1024);
    CHECK(s.y_c == 48);
    CHECK(s.y_h == 64);
    CHECK(s.y_w == 64);
    CHECK(s.z_c == 48);
    CHECK(s.z_h == 16);
    CHECK(s.z_w == 16);

    ModelConfig cfg;
    cfg.channels = 8;
    cfg.latent = 4;
    cfg.hyper = 6;
    cfg.mlp_hidden = 8;
    FcnrModel<float> m(cfg, 1);
    Rng rng(2);
    Tensor<float> xl(3, 128, 64), xr(3, 128, 64);
    for (auto& v : xl.data) v = static_cast<float>(rng.uniform());
    for (auto& v : xr.data) v = static_cast<float>(rng.uniform());
    const auto [yl, yr] = m.encode(xl, xr);
    const auto ls = latent_shapes(cfg, 128, 64);
    CHECK(yl.c == ls.y_c);
    CHECK(yl.h == ls.y_h);
    CHECK(yl.w == ls.y_w);
    const auto [zl, zr] = m.hyper_encode(yl, yr);
    CHECK(zl.c == ls.z_c);
    CHECK(zl.h == ls.z_h);
    CHECK(zl.w == ls.z_w);
    const auto [phl, phr] = m.hyper_decode(zl, zr);
    CHECK(phl.mu.c == 4);
    CHECK(phl.mu.h == yl.h);
    for (float b : phl.b.data) CHECK(b > 0.f);
    for (float b : phr.b.data) CHECK(b > 0.f);
    const auto [xhl, xhr] = m.decode(yl, yr, true);
    CHECK(xhl.same_shape(xl));
    for (float v : xhl.data) CHECK((v >= 0.f && v <= 1.f));

    CHECK_THROWS_AS(m.encode(Tensor<float>(3, 65, 64), Tensor<float>(3, 65, 64)), PaddingRequiredError);
}

TEST_CASE("parameter names are unique and follow the ablation") {
    ModelConfig cfg;
    cfg.channels = 8;
    cfg.latent = 4;
    cfg.hyper = 4;
    cfg.mlp_hidden = 8;
    for (auto a : {Ablation::full, Ablation::jct_only, Ablation::pe_only, Ablation::neither}) {
        cfg.ablation = a;
        FcnrModel<float> m(cfg, 1);
        std::set<std::string> names;
        bool any_jctm = false, any_mlp = false, any_prior = false;
        for (auto* p : m.params()) {
            CHECK(names.insert(p->name).second);
            any_jctm |= p->name.find("jctm") != std::string::npos;
            any_mlp |= p->name.rfind("mlp", 0) == 0;
            any_prior |= p->name.rfind("prior", 0) == 0;
        }
        CHECK(any_jctm == cfg.use_jctm());
        CHECK(any_mlp == cfg.use_pe());
        CHECK(any_prior == !cfg.use_pe());
        CHECK(parse_ablation(ablation_name(a)) == a);
    }
}

TEST_CASE("positional encoding matches a 50-digit oracle") {
    using big = boost::multiprecision::cpp_bin_float_50;
    const PEConfig cfg{1.25, 8};
    const big pi = boost::multiprecision::default_ops::get_constant_pi<big::backend_type>();
    Rng rng(77);
    auto oracle = [&](double u) {
        std::vector<big> out;
        for (int i = 0; i < cfg.levels_L; ++i) {
            const big arg = boost::multiprecision::pow(big(cfg.base_b), i) * big(pi) * big(u);
            out.push_back(boost::multiprecision::sin(arg));
            out.push_back(boost::multiprecision::cos(arg));
        }
        return out;
    };
    double worst = 0;
    for (int n = 0; n < 100; ++n) {
        const VisParams v{rng.uniform(), rng.uniform(), rng.uniform()};
        const auto got = pe_vis(v, cfg);
        REQUIRE(got.size() == 48);
        std::vector<big> want;
        for (double u : {v.t, v.theta, v.phi_view}) {
            const auto part = oracle(u);
            want.insert(want.end(), part.begin(), part.end());
            const auto single = pe_scalar(u, cfg);
            for (std::size_t i = 0; i < single.size(); ++i)
                worst = std::max(worst, std::abs(static_cast<double>(big(single[i]) - part[i])));
        }
        for (std::size_t i = 0; i < got.size(); ++i)
            worst = std::max(worst, std::abs(static_cast<double>(big(got[i]) - want[i])));
    }
    CHECK(worst < 1e-12);
    CHECK(pe_scalar(0.0, cfg)[0] == 0.0);
    CHECK(pe_scalar(0.0, cfg)[1] == 1.0);
    CHECK_THROWS_AS(pe_scalar(0.5, PEConfig{1.0, 8}), ContractError);
    CHECK_THROWS_AS(pe_scalar(0.5, PEConfig{1.25, 0}), ContractError);
}
