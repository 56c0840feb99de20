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

#include "fcnr/codec/container.hpp"
#include "fcnr/codec/pipeline.hpp"
#include "fcnr/nn/checkpoint.hpp"
#include "fcnr/util/random.hpp"

using namespace fcnr;
using namespace fcnr::codec;

namespace {

nn::ModelConfig small_config() {
    nn::ModelConfig cfg;
    cfg.channels = 16;
    cfg.latent = 8;
    cfg.hyper = 8;
    cfg.mlp_hidden = 16;
    return cfg;
}

ImagePair<float> smooth_pair(int h, int w, std::uint64_t seed) {
    Rng rng(seed);
    ImagePair<float> p{nn::Tensor<float>(3, h, w), nn::Tensor<float>(3, h, w), {0.2, 0.5, 0.25}, {0.2, 0.5, 0.3}, 7};
    const double fx = rng.uniform(0.02, 0.2), fy = rng.uniform(0.02, 0.2);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                p.x_l.at(c, y, x) = static_cast<float>(0.5 + 0.4 * std::sin(fx * x + fy * y + c));
                p.x_r.at(c, y, x) = static_cast<float>(0.5 + 0.4 * std::sin(fx * (x + 3) + fy * y + c));
            }
    return p;
}

}  // namespace

TEST_CASE("header round trip and payload accounting") {
    Bitstream bs;
    bs.header.height = 100;
    bs.header.width = 130;
    bs.header.pad_h = 28;
    bs.header.pad_w = 62;
    bs.header.vp_l = {0.1, 0.2, 0.3};
    bs.header.vp_r = {0.1, 0.2, 0.35};
    bs.header.fingerprint = 0x0123456789abcdefULL;
    bs.header.bounds = {{{-1, 2}, {-3, 4}, {-5, 6}, {0, 0}}};
    bs.substreams = {{{1, 2, 3}, {}, {9}, {4, 5}}};
    const auto bytes = serialize(bs);
    CHECK(parse(bytes) == bs);
    CHECK(parse_header(bytes) == bs.header);
    CHECK(bs.payload_bytes() == 6);
    CHECK(bits_per_pixel(bs) == doctest::Approx(48.0 / (2 * 100 * 130)));

    auto flipped = bytes;
    flipped[flipped.size() - 6] ^= 1;  // inside the last substream
    CHECK_THROWS_AS(parse(flipped), CorruptStreamError);
    for (std::size_t cut : {std::size_t{3}, std::size_t{40}, bytes.size() - 1})
        CHECK_THROWS_AS(parse(std::span(bytes).first(cut)), CorruptStreamError);
}

TEST_CASE("bpp over the pair") {
    Bitstream bs;
    bs.header.height = 64;
    bs.header.width = 64;
    bs.substreams[0].assign(1024, 1);
    CHECK(bits_per_pixel(bs) == doctest::Approx(1.0));
}

TEST_CASE("reflect padding and crop") {
    nn::Tensor<float> x(1, 3, 2);
    x.data = {1, 2, 3, 4, 5, 6};
    const auto p = reflect_pad(x, 4);
    CHECK(p.h == 4);
    CHECK(p.w == 4);
    CHECK(p.at(0, 0, 2) == 1);  // mirror of column 0 about column 1
    CHECK(p.at(0, 3, 0) == 3);  // mirror of row 1 about row 2
    CHECK(crop(p, 3, 2).data == x.data);
}

TEST_CASE("compress/decompress is exact and deterministic") {
    nn::FcnrModel<float> model(small_config(), 1);
    entropy::ReferenceCoder coder;
    const auto pair = smooth_pair(64, 64, 3);
    const Bitstream bs = compress(model, pair, coder);
    CHECK(serialize(compress(model, pair, coder)) == serialize(bs));

    const auto [dl, dr] = decompress(parse(serialize(bs)), model, coder);
    const auto sim = simulate(model, pair, SimMode::ste);
    CHECK(dl.data == sim.x_hat_l.data);
    CHECK(dr.data == sim.x_hat_r.data);
    for (float v : dl.data) CHECK((v >= 0.f && v <= 1.f));

    const double coded = bs.payload_bytes() * 8.0;
    CHECK(coded <= sim.rate_bits * 1.01 + 256);
    CHECK(bits_per_pixel(bs) == doctest::Approx(coded / (2 * 64 * 64)));

    CHECK(simulate(model, pair, SimMode::ste, 1).rate_bits == simulate(model, pair, SimMode::ste, 2).rate_bits);
    CHECK(simulate(model, pair, SimMode::noise, 1).rate_bits != simulate(model, pair, SimMode::noise, 2).rate_bits);
}

TEST_CASE("padding is recorded and removed") {
    nn::FcnrModel<float> model(small_config(), 2);
    entropy::ReferenceCoder coder;
    const auto pair = smooth_pair(50, 70, 4);
    const Bitstream bs = compress(model, pair, coder);
    CHECK(bs.header.pad_h == 14);
    CHECK(bs.header.pad_w == 58);
    const auto [dl, dr] = decompress(bs, model, coder);
    CHECK(dl.h == 50);
    CHECK(dl.w == 70);
    CHECK(dl.data == simulate(model, pair, SimMode::ste).x_hat_l.data);
}

TEST_CASE("wrong weights are rejected before decoding") {
    nn::FcnrModel<float> a(small_config(), 1), b(small_config(), 2);
    entropy::ReferenceCoder coder;
    Bitstream bs = compress(a, smooth_pair(64, 64, 5), coder);
    bs.substreams = {};  // nothing to decode: the fingerprint check must come first
    CHECK_THROWS_AS(decompress(bs, b, coder), WrongModelError);
}

TEST_CASE("corrupting y_r cannot change the decoded y_l") {
    nn::FcnrModel<float> model(small_config(), 1);
    entropy::ReferenceCoder coder;
    const Bitstream bs = compress(model, smooth_pair(64, 64, 6), coder);
    Bitstream bad = bs;
    for (auto& byte : bad.substreams[kYr]) byte ^= 0x5A;
    bad.substreams[kYr].push_back(0x77);
    const auto good = decode_latents(bs, model, coder);
    const auto hurt = decode_latents(bad, model, coder, 3);
    CHECK(hurt.y_hat_l.data == good.y_hat_l.data);
    CHECK(hurt.z_hat_r.data == good.z_hat_r.data);

    auto bytes = serialize(bs);
    bytes[bytes.size() - 5] ^= 0x5A;  // last byte of y_r, CRC left stale
    CHECK_THROWS_AS(parse(bytes), CorruptStreamError);
}

TEST_CASE("truncated file raises a corruption error") {
    nn::FcnrModel<float> model(small_config(), 1);
    entropy::ReferenceCoder coder;
    const auto bytes = serialize(compress(model, smooth_pair(64, 64, 8), coder));
    for (std::size_t keep = 0; keep < bytes.size(); keep += 7)
        CHECK_THROWS_AS(parse(std::span(bytes).first(keep)), CorruptStreamError);
}

TEST_CASE("checkpoint round trip is bit exact") {
    nn::FcnrModel<float> model(small_config(), 9);
    const auto bytes = nn::serialize_checkpoint(nn::checkpoint_of(model));
    auto loaded = nn::model_from_checkpoint<float>(nn::parse_checkpoint(bytes));
    CHECK(loaded->fingerprint() == model.fingerprint());
    CHECK(loaded->config() == model.config());
    entropy::ReferenceCoder coder;
    const auto pair = smooth_pair(64, 64, 10);
    CHECK(serialize(compress(*loaded, pair, coder)) == serialize(compress(model, pair, coder)));
    CHECK(nn::serialize_checkpoint(nn::checkpoint_of(*loaded)) == bytes);

    nn::ModelConfig other = small_config();
    other.ablation = nn::Ablation::pe_only;
    nn::FcnrModel<float> ablated(other, 9);
    CHECK(ablated.fingerprint() != model.fingerprint());
    auto ck = nn::checkpoint_of(model);
    ck.tensors.pop_back();
    CHECK_THROWS(nn::model_from_checkpoint<float>(ck));
}
