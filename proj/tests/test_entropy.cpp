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

#include <cmath>
#include <numbers>

#include "fcnr/entropy/cdf.hpp"
#include "fcnr/entropy/coder_job.hpp"
#include "fcnr/entropy/laplace.hpp"
#include "fcnr/entropy/range_coder.hpp"
#include "fcnr/util/random.hpp"

using namespace fcnr;
using namespace fcnr::entropy;

namespace {

// Bin mass straight from the textbook CDF, no tail rewriting.
double oracle_bin(double x, double b) {
    auto F = [b](double t) { return t < 0 ? 0.5 * std::exp(t / b) : 1.0 - 0.5 * std::exp(-t / b); };
    return F(x + 0.5) - F(x - 0.5);
}

std::int32_t sample_laplace(Rng& rng, double b) {
    const double u = rng.uniform() - 0.5;
    const double x = -b * (u < 0 ? -1.0 : 1.0) * std::log1p(-2.0 * std::abs(u));
    return static_cast<std::int32_t>(std::clamp(std::round(x), -32767.0, 32767.0));
}

}  // namespace

TEST_CASE("laplace bin probability matches closed forms") {
    CHECK(laplace_bin_prob(0, 0.0, 1.0) == doctest::Approx(1.0 - std::exp(-0.5)).epsilon(1e-12));
    CHECK(laplace_bin_prob(0, 0.0, 1.0) == doctest::Approx(0.393469).epsilon(1e-6));
    for (int k = 1; k < 20; ++k) CHECK(laplace_bin_prob(k, 0.0, 1.7) == doctest::Approx(laplace_bin_prob(-k, 0.0, 1.7)));
    double total = 0;
    for (int v = -100; v <= 100; ++v) total += oracle_bin(v, 1.0);
    CHECK(total >= 1 - 1e-6);
    Rng rng(4);
    for (int i = 0; i < 500; ++i) {
        const double b = std::exp(rng.uniform(std::log(0.05), std::log(20.0)));
        const double x = rng.uniform(-6, 6);
        const double want = std::max(oracle_bin(x, b), kProbFloor);
        CHECK(std::exp(laplace_bin_log_prob(x, b).log_p) == doctest::Approx(want).epsilon(1e-9));
    }
    CHECK(laplace_bin_prob(1000, 0.0, 1.0) == kProbFloor);
}

TEST_CASE("rate examples") {
    const std::vector<std::int32_t> s{0};
    const std::vector<double> b{1.0};
    CHECK(rate_bits<double>(s, b) == doctest::Approx(-std::log2(0.393469)).epsilon(1e-5));
    CHECK(rate_bits<double>(s, b) == doctest::Approx(1.3458).epsilon(1e-4));
    double prev = 0;
    for (int v = 0; v < 30; ++v) {
        const std::vector<std::int32_t> sv{v};
        const double r = rate_bits<double>(sv, b);
        CHECK(r >= prev);
        prev = r;
    }
    // Moving mu toward the value lowers the relaxed rate.
    const std::vector<double> val{2.3};
    double last = 1e9;
    for (double m : {-1.0, 0.0, 1.0, 2.0, 2.3}) {
        const std::vector<double> mu{m};
        const double r = rate_bits_relaxed<double>(val, mu, b, {}, {}, {});
        CHECK(r < last);
        last = r;
    }
}

TEST_CASE("relaxed rate gradients match central differences") {
    Rng rng(8);
    int checked = 0;
    while (checked < 300) {
        const double b = std::exp(rng.uniform(std::log(0.1), std::log(8.0)));
        const double mu = rng.uniform(-3, 3);
        const double y = mu + rng.uniform(-6, 6);
        const double frac = (y - mu) - std::floor(y - mu);
        if (std::abs(frac - 0.5) < 0.01) continue;  // keep away from bin edges
        std::vector<double> vy{y}, vm{mu}, vb{b}, gy{0}, gm{0}, gb{0};
        const double bits = rate_bits_relaxed<double>(vy, vm, vb, gy, gm, gb);
        if (bits >= 15.99) continue;  // floored region has zero gradient by definition
        auto f = [&](double yy, double mm, double bb) {
            std::vector<double> a{yy}, c{mm}, d{bb};
            return rate_bits_relaxed<double>(a, c, d, {}, {}, {});
        };
        const double h = 1e-6;
        const double ny = (f(y + h, mu, b) - f(y - h, mu, b)) / (2 * h);
        const double nm = (f(y, mu + h, b) - f(y, mu - h, b)) / (2 * h);
        const double nb = (f(y, mu, b + h) - f(y, mu, b - h)) / (2 * h);
        auto rel = [](double a, double n) { return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-8}); };
        CHECK(rel(gy[0], ny) < 1e-4);
        CHECK(rel(gm[0], nm) < 1e-4);
        CHECK(rel(gb[0], nb) < 1e-4);
        ++checked;
    }
}

TEST_CASE("quantization rules") {
    nn::Tensor<double> y(1, 1, 3), mu(1, 1, 3);
    y.data = {2.7, 0.5, -1.3};
    mu.data = {0.5, 0.5, 0.2};
    const auto yh = quantize_ste(y, mu);
    CHECK(yh.data[0] == doctest::Approx(2.5));
    CHECK(yh.data[1] == 0.5);
    CHECK(yh.data[2] == doctest::Approx(-1.8));
    CHECK(round_half_away(-1.5) == -2.0);
    CHECK(round_half_away(2.5) == 3.0);

    nn::Tensor<double> big(1, 1000, 1000);
    const auto n1 = quantize_noise(big, 77);
    const auto n2 = quantize_noise(big, 77);
    CHECK(n1.data == n2.data);
    double sum = 0, mx = 0;
    for (double v : n1.data) {
        sum += v;
        mx = std::max(mx, std::abs(v));
    }
    CHECK(mx < 0.5);
    const double sigma = 1.0 / std::sqrt(12.0 * 1e6);
    CHECK(std::abs(sum / 1e6) < 3 * sigma);
}

TEST_CASE("positive scale mapping") {
    for (double r : {-800.0, -30.0, -1.0, 0.0, 1.0, 50.0, 800.0}) {
        CHECK(positive_scale(r) >= kScaleFloor);
        CHECK(std::isfinite(positive_scale(r)));
    }
    CHECK(positive_scale(std::log(std::exp(1.0) - 1.0)) == doctest::Approx(1.0 + 1e-6));
}

TEST_CASE("cdf construction") {
    const std::vector<double> uni(4, 1.0);
    const auto t = build_cdf_from_weights(uni);
    CHECK(t == CdfTable{0, 16384, 32768, 49152, 65536});

    // Counts follow the Laplace masses renormalized over the alphabet, to
    // within one count; against the raw masses the gap is the truncated tail.
    const auto lap = build_cdf(1.0, -8, 8);
    validate_cdf(lap);
    double inside = 0;
    for (int v = -8; v <= 8; ++v) inside += oracle_bin(v, 1.0);
    for (int v = -8; v <= 8; ++v) {
        const double got = (lap[v + 9] - lap[v + 8]) / 65536.0;
        CHECK(std::abs(got - oracle_bin(v, 1.0) / inside) <= 1.0 / 65536.0);
        CHECK(std::abs(got - oracle_bin(v, 1.0)) <= 1.0 / 65536.0 + (1 - inside));
    }
    CHECK(build_cdf(0.37, -5, 40) == build_cdf(0.37, -5, 40));

    Rng rng(2);
    for (int i = 0; i < 300; ++i) {
        const double b = std::exp(rng.uniform(std::log(1e-6), std::log(5000.0)));
        const int lo = -static_cast<int>(rng.below(3000));
        const int hi = static_cast<int>(rng.below(3000));
        validate_cdf(build_cdf(b, lo, hi));
    }
    validate_cdf(build_cdf(1.0, -32767, 32767));
    validate_cdf(build_cdf(1e-6, 0, 0));
    CHECK_THROWS_AS(build_cdf(1.0, 3, 2), ContractError);
}

TEST_CASE("range coder round trips and stays near the model cost") {
    CHECK(ac_encode({}, std::vector<CdfTable>{build_cdf(1, 0, 0)}, 0, 0).empty());
    CHECK(ac_decode({}, std::vector<CdfTable>{build_cdf(1, 0, 0)}, 0, 0, 0).empty());

    Rng rng(123);
    std::vector<std::int32_t> sym(100000);
    for (auto& s : sym) s = sample_laplace(rng, 3.0);
    const auto [lo, hi] = std::minmax_element(sym.begin(), sym.end());
    const std::vector<CdfTable> table{build_cdf(3.0, *lo, *hi)};
    const auto stream = ac_encode(sym, table, *lo, *hi);
    CHECK(ac_decode(stream, table, *lo, *hi, sym.size()) == sym);

    double model_bits = 0;
    for (auto s : sym) model_bits -= std::log2((table[0][s - *lo + 1] - table[0][s - *lo]) / 65536.0);
    CHECK(stream.size() * 8.0 <= model_bits + 64);
    const std::vector<double> bs(sym.size(), 3.0);
    CHECK(stream.size() * 8.0 <= rate_bits<double>(sym, bs) * 1.01 + 64);

    // A single certain symbol costs nothing.
    const std::vector<std::int32_t> zeros(1000, 0);
    CHECK(ac_encode(zeros, std::vector<CdfTable>{build_cdf(1e-6, 0, 0)}, 0, 0).empty());
}

TEST_CASE("range decoder rejects impossible code values") {
    const std::vector<CdfTable> table{build_cdf(1.0, -3, 3)};
    const std::vector<std::uint8_t> junk(16, 0xFF);
    CHECK_THROWS_AS(ac_decode(junk, table, -3, 3, 10), CorruptStreamError);
}

TEST_CASE("coder job serialization") {
    CoderJob job;
    job.vmin = -2;
    job.vmax = 3;
    job.symbols = {0, 1, -2, 3, 0};
    job.count = job.symbols.size();
    job.tables = {build_cdf(0.8, -2, 3)};
    const auto bytes = serialize_job(job);
    CHECK(parse_job(bytes) == job);

    const JobResult enc = run_job(job);
    REQUIRE(enc.status == JobStatus::ok);
    CHECK(enc.payload == ac_encode(job.symbols, job.tables, -2, 3));
    CHECK(parse_result(serialize_result(enc)).payload == enc.payload);

    CoderJob dj = job;
    dj.direction = CoderDirection::decode;
    dj.symbols.clear();
    dj.stream = enc.payload;
    CHECK(parse_job(serialize_job(dj)) == dj);
    const JobResult dec = run_job(dj);
    REQUIRE(dec.payload.size() == 20);

    auto bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(parse_job(bad), JobFormatError);
    auto bad_table = bytes;
    const std::size_t body = 4 + 2 + 1 + 1 + 8 + 4 + 4 + 4 + 4;
    for (std::size_t k = 4; k < 8; ++k) bad_table[body + k] = 0;  // cdf[1] == cdf[0]
    try {
        parse_job(bad_table);
        FAIL("expected a table validation error");
    } catch (const JobFormatError& e) {
        CHECK(e.offset() == body);
    }
    auto truncated = bytes;
    truncated.resize(bytes.size() - 3);
    CHECK_THROWS_AS(parse_job(truncated), JobFormatError);

    CoderJob empty;
    empty.tables = {build_cdf(1.0, 0, 0)};
    CHECK(run_job(empty).payload.empty());
}
