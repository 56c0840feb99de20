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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failures.

#include <algorithm>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fcnr/codec/container.hpp"
#include "fcnr/codec/pipeline.hpp"
#include "fcnr/data/corpus.hpp"
#include "fcnr/entropy/cdf.hpp"
#include "fcnr/entropy/coder_job.hpp"
#include "fcnr/entropy/laplace.hpp"
#include "fcnr/entropy/range_coder.hpp"
#include "fcnr/eval/experiments.hpp"
#include "fcnr/nn/checkpoint.hpp"
#include "fcnr/nn/pe.hpp"
#include "fcnr/train/graph.hpp"
#include "fcnr/util/log.hpp"
#include "fcnr/util/random.hpp"
#include "grad_util.hpp"

using namespace fcnr;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(const char* name, const Outcome& o, double seconds) {
    std::printf("%s %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str(), seconds);
    std::fflush(stdout);
    failures += !o.pass;
}

void run(const char* name, const std::function<Outcome()>& check) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    report(name, o, std::chrono::duration<double>(Clock::now() - t0).count());
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double log_uniform(Rng& rng, double lo, double hi) { return std::exp(rng.uniform(std::log(lo), std::log(hi))); }

// Continuous Laplace(mu, b) draw.
double laplace_draw(Rng& rng, double mu, double b) {
    const double u = rng.uniform() - 0.5;
    return mu - b * (u < 0 ? -1.0 : 1.0) * std::log1p(-2.0 * std::abs(u));
}

// A fuzzed plane: per-symbol (mu, b) drawn from a small palette so the
// per-symbol tables can be shared by index.
struct Plane {
    std::vector<std::int32_t> symbols;
    std::vector<std::uint16_t> which;  // palette index per symbol
    std::vector<double> scales;        // palette
    std::int32_t vmin = 0, vmax = 0;
};

Plane fuzz_plane(Rng& rng, std::size_t count, bool outliers) {
    Plane p;
    const std::size_t palette = 1 + rng.below(32);
    const double centre = log_uniform(rng, 0.05, 20.0);
    for (std::size_t i = 0; i < palette; ++i) p.scales.push_back(centre * log_uniform(rng, 0.5, 2.0));
    p.symbols.resize(count);
    p.which.resize(count);
    nn::Tensor<double> y(1, 1, static_cast<int>(count)), mu(1, 1, static_cast<int>(count));
    for (std::size_t i = 0; i < count; ++i) {
        p.which[i] = static_cast<std::uint16_t>(rng.below(palette));
        mu.data[i] = rng.uniform(-40, 40);
        y.data[i] = laplace_draw(rng, mu.data[i], p.scales[p.which[i]]);
        if (outliers && rng.below(5000) == 0) y.data[i] = rng.uniform(-40000, 40000);
    }
    p.symbols = entropy::quantize_symbols(y, mu);
    const auto [lo, hi] = std::minmax_element(p.symbols.begin(), p.symbols.end());
    p.vmin = count ? *lo : 0;
    p.vmax = count ? *hi : 0;
    return p;
}

std::vector<entropy::CdfTable> palette_tables(const Plane& p) {
    std::vector<entropy::CdfTable> t;
    for (double b : p.scales) t.push_back(entropy::build_cdf(b, p.vmin, p.vmax));
    return t;
}

std::vector<std::uint8_t> encode_plane(const Plane& p, const std::vector<entropy::CdfTable>& tabs) {
    entropy::RangeEncoder enc;
    for (std::size_t i = 0; i < p.symbols.size(); ++i)
        enc.encode_symbol(static_cast<std::uint32_t>(p.symbols[i] - p.vmin), tabs[p.which[i]]);
    return enc.finish();
}

std::vector<std::int32_t> decode_plane(const Plane& p, const std::vector<entropy::CdfTable>& tabs,
                                       std::span<const std::uint8_t> stream) {
    entropy::RangeDecoder dec(stream);
    std::vector<std::int32_t> out(p.symbols.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = static_cast<std::int32_t>(dec.decode_symbol(tabs[p.which[i]])) + p.vmin;
    return out;
}

// Per-symbol table list as the codec builds it.
std::vector<entropy::CdfTable> expand(const Plane& p, const std::vector<entropy::CdfTable>& tabs) {
    std::vector<entropy::CdfTable> out;
    out.reserve(p.symbols.size());
    for (auto w : p.which) out.push_back(tabs[w]);
    return out;
}

Outcome coding_losslessness() {
    const auto t0 = Clock::now();
    Rng rng(0x10551e55);
    int ok = 0, via_job = 0;
    std::size_t total = 0;
    for (int k = 0; k < 1000; ++k) {
        const auto count = static_cast<std::size_t>(std::floor(log_uniform(rng, 1.0, 100001.0)));
        const Plane p = fuzz_plane(rng, count, k % 4 == 0);
        const auto tabs = palette_tables(p);
        const auto stream = encode_plane(p, tabs);
        bool same = decode_plane(p, tabs, stream) == p.symbols;
        // Small planes also go through the per-symbol job path used by the codec.
        if (count * static_cast<std::size_t>(p.vmax - p.vmin + 2) <= 4'000'000) {
            entropy::CoderJob job;
            job.vmin = p.vmin;
            job.vmax = p.vmax;
            job.count = count;
            job.tables = expand(p, tabs);
            job.symbols = p.symbols;
            entropy::ReferenceCoder coder;
            const auto js = coder.encode(entropy::parse_job(entropy::serialize_job(job)));
            job.direction = entropy::CoderDirection::decode;
            job.symbols.clear();
            job.stream = js;
            same = same && js == stream && coder.decode(job) == p.symbols;
            ++via_job;
        }
        ok += same;
        total += count;
    }
    const double s = seconds_since(t0);
    return {ok == 1000 && s < 120,
            fmt("%.0f/1000 planes identical (%.0f symbols, %.0f via coder jobs), %.1f s of 120", ok,
                static_cast<double>(total), via_job, s)};
}

Outcome rate_consistency() {
    const auto t0 = Clock::now();
    Rng rng(0x4a7e);
    int ok = 0;
    double worst_ratio = 0;
    for (int k = 0; k < 100; ++k) {
        const auto count = static_cast<std::size_t>(std::floor(log_uniform(rng, 1.0, 100001.0)));
        const Plane p = fuzz_plane(rng, count, false);
        const auto tabs = palette_tables(p);
        const auto stream = encode_plane(p, tabs);
        std::vector<double> b(count);
        for (std::size_t i = 0; i < count; ++i) b[i] = p.scales[p.which[i]];
        const double xent = entropy::rate_bits<double>(p.symbols, b);
        const double coded = 8.0 * static_cast<double>(stream.size());
        ok += coded <= xent * 1.01 + 64;
        if (xent > 1000) worst_ratio = std::max(worst_ratio, coded / xent);
    }
    const double s = seconds_since(t0);
    return {ok == 100 && s < 60,
            fmt("%.0f/100 planes within cross-entropy + 1%% + 64 bits, worst coded/model %.4f, %.1f s of 60", ok,
                worst_ratio, s)};
}

Outcome end_to_end(const data::Manifest& m, const fs::path& root) {
    const auto t0 = Clock::now();
    const auto ids = data::pair_ids(m, "all");
    entropy::ReferenceCoder coder;
    int ok = 0;
    for (int k = 0; k < 20; ++k) {
        nn::FcnrModel<float> model(nn::ModelConfig{}, 1000 + static_cast<std::uint64_t>(k));
        const auto pair = data::load_pair(m, root, ids[static_cast<std::size_t>(k) * ids.size() / 20]);
        const auto bytes = codec::serialize(codec::compress(model, pair, coder));
        const auto [dl, dr] = codec::decompress(codec::parse(bytes), model, coder);
        const auto sim = codec::simulate(model, pair, codec::SimMode::ste);
        ok += dl.data == sim.x_hat_l.data && dr.data == sim.x_hat_r.data;
    }
    const double s = seconds_since(t0);
    return {ok == 20 && s < 300, fmt("%.0f/20 pairs decode to the STE reconstruction exactly, %.1f s of 300", ok, s)};
}

Outcome gradient_suite() {
    const auto t0 = Clock::now();
    Rng rng(0x9ad);
    double worst_rate = 0;
    int checked = 0;
    auto f = [](double y, double mu, double b) {
        std::vector<double> a{y}, c{mu}, d{b};
        return entropy::rate_bits_relaxed<double>(a, c, d, {}, {}, {});
    };
    while (checked < 1000) {
        const double b = log_uniform(rng, 0.1, 8.0);
        const double mu = rng.uniform(-3, 3);
        const double y = mu + rng.uniform(-6, 6);
        const double frac = (y - mu) - std::floor(y - mu);
        if (std::abs(frac - 0.5) < 0.01) continue;
        std::vector<double> vy{y}, vm{mu}, vb{b}, gy{0}, gm{0}, gb{0};
        if (entropy::rate_bits_relaxed<double>(vy, vm, vb, gy, gm, gb) >= 15.99) continue;
        const double h = 1e-6;
        worst_rate = std::max({worst_rate, test::rel_err(gy[0], (f(y + h, mu, b) - f(y - h, mu, b)) / (2 * h)),
                               test::rel_err(gm[0], (f(y, mu + h, b) - f(y, mu - h, b)) / (2 * h)),
                               test::rel_err(gb[0], (f(y, mu, b + h) - f(y, mu, b - h)) / (2 * h))});
        ++checked;
    }

    nn::ModelConfig cfg;
    cfg.channels = 8;
    cfg.latent = 4;
    cfg.hyper = 4;
    cfg.mlp_hidden = 8;
    double worst_model = 0;
    for (auto ab : {nn::Ablation::full, nn::Ablation::jct_only, nn::Ablation::pe_only, nn::Ablation::neither}) {
        cfg.ablation = ab;
        nn::FcnrModel<double> model(cfg, 11);
        train::PairSample<double> sample{nn::Tensor<double>(3, 64, 64), nn::Tensor<double>(3, 64, 64),
                                         {0.4, 0.3, 0.1}, {0.4, 0.3, 0.2}};
        for (auto& v : sample.x_l.data) v = rng.uniform();
        for (auto& v : sample.x_r.data) v = rng.uniform();
        const double lambda = 50.0;
        train::TrainGraph<double> g;
        model.zero_grad();
        g.forward(model, sample, 99, train::QuantPath::noise);
        g.backward(model, lambda);
        auto loss = [&] {
            train::TrainGraph<double> g2;
            return g2.forward(model, sample, 99, train::QuantPath::noise).total(lambda);
        };
        worst_model = std::max(worst_model, test::directional_check(model.params(), loss, 3).rel());
    }
    const double s = seconds_since(t0);
    return {worst_rate < 1e-3 && worst_model < 1e-3 && s < 120,
            fmt("worst rel. error: rate (y, mu, b) %.2e over 1000 points, full-model directional %.2e over 4 "
                "variants, %.1f s of 120",
                worst_rate, worst_model, s)};
}

struct ToyResult {
    Outcome training, interpolation;
};

double split_mean(const eval::EvalReport& r, const std::string& split) {
    const auto it = r.splits.find(split);
    return it == r.splits.end() ? std::nan("") : it->second.mean_psnr;
}

ToyResult toy_training(const eval::Corpus& corpus, const fs::path& dir, std::int64_t steps, int channels) {
    const auto t0 = Clock::now();
    train::TrainConfig cfg;
    cfg.lambda_rd = 1e-2;
    cfg.max_steps = steps;
    cfg.epochs = 1 << 20;
    cfg.model.channels = channels;
    cfg.model.latent = std::min(48, channels);
    cfg.model.hyper = std::min(48, channels);
    entropy::ReferenceCoder coder;

    const nn::FcnrModel<float> untrained(cfg.model, cfg.seed);
    const auto before = eval::evaluate_corpus(corpus.manifest, corpus.root, untrained, coder, "all", true);

    std::vector<train::StepRecord> log;
    const auto ckpt = eval::run_training(cfg, eval::load_samples(corpus, "train"), dir, "toy",
                                         [](const train::StepRecord& r) {
                                             if (r.step % 100 == 0)
                                                 log_line("toy: step " + std::to_string(r.step) + " L_total " +
                                                          std::to_string(r.total));
                                         },
                                         {}, &log);
    const auto model = nn::load_model<float>(ckpt.string());
    const auto after = eval::evaluate_corpus(corpus.manifest, corpus.root, *model, coder, "all");
    const double s = seconds_since(t0);

    auto ma50 = [&](std::size_t end) {
        double sum = 0;
        for (std::size_t i = end - 50; i < end; ++i) sum += log[i].total;
        return sum / 50;
    };
    ToyResult out;
    if (log.size() < 100) {
        out.training = {false, "fewer than 100 steps logged"};
        out.interpolation = out.training;
        return out;
    }
    const double ma_start = ma50(50), ma_end = ma50(log.size());
    const double tr0 = split_mean(before, "train"), tr1 = split_mean(after, "train");
    const double ho0 = split_mean(before, "heldout"), ho1 = split_mean(after, "heldout");
    out.training = {ma_end < 0.5 * ma_start && tr1 >= tr0 + 10 && s < 3600,
                    fmt("MA50 L_total %.1f -> %.1f (ratio %.3f, need < 0.5); ", ma_start, ma_end, ma_end / ma_start) +
                        fmt("train PSNR %.2f -> %.2f dB (gain %.2f, need >= 10); ", tr0, tr1, tr1 - tr0) +
                        fmt("%.0f steps at width %.0f, bpp %.4f, %.0f s", static_cast<double>(log.size()), channels,
                            after.overall.bpp, s)};
    out.interpolation = {ho1 >= ho0 + 5,
                         fmt("held-out PSNR %.2f -> %.2f dB (gain %.2f, need >= 5)", ho0, ho1, ho1 - ho0)};
    return out;
}

Outcome ablation(const eval::Corpus& corpus, const fs::path& dir, std::int64_t steps) {
    train::TrainConfig cfg;
    cfg.lambda_rd = 1e-2;
    cfg.max_steps = steps;
    cfg.epochs = 1 << 20;
    cfg.model.channels = 32;
    cfg.model.latent = 32;
    cfg.model.hyper = 32;
    entropy::ReferenceCoder coder;
    const auto rows = eval::ablate(cfg, corpus, coder, dir);
    std::fputs(eval::format_ablation_text(rows).c_str(), stdout);
    bool ok = rows.size() == 4;
    const nn::Ablation want[] = {nn::Ablation::full, nn::Ablation::jct_only, nn::Ablation::pe_only,
                                 nn::Ablation::neither};
    for (std::size_t i = 0; ok && i < 4; ++i) {
        ok = rows[i].ablation == want[i] && std::isfinite(rows[i].psnr) && rows[i].bpp > 0;
        for (std::size_t j = 0; ok && j < i; ++j) ok = rows[i].fingerprint != rows[j].fingerprint;
    }
    ok = ok && rows[0].params > rows[1].params && rows[0].params > rows[2].params && rows[1].params > rows[3].params &&
         rows[2].params > rows[3].params;
    ok = ok && eval::parse_ablation_table(eval::emit_ablation_table(rows)) == rows;
    return {ok, fmt("%.0f rows (Full, JCT-Only, PE-Only, Neither), distinct models, %.0f training steps each",
                    static_cast<double>(rows.size()), static_cast<double>(steps))};
}

// Repeatedly takes the smallest remaining (theta, phi, first-seen) record.
std::vector<std::pair<std::string, std::string>> oracle_pairs(const std::vector<data::ManifestRecord>& recs, int t) {
    std::vector<const data::ManifestRecord*> left;
    for (const auto& r : recs)
        if (r.t == t) left.push_back(&r);
    std::vector<const data::ManifestRecord*> sorted;
    while (!left.empty()) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < left.size(); ++i) {
            const auto* a = left[i];
            const auto* b = left[best];
            const bool theta_tie = std::abs(a->theta - b->theta) < 1e-9;
            if ((!theta_tie && a->theta < b->theta) ||
                (theta_tie && std::abs(a->phi_view - b->phi_view) >= 1e-9 && a->phi_view < b->phi_view))
                best = i;
        }
        sorted.push_back(left[best]);
        left.erase(left.begin() + static_cast<std::ptrdiff_t>(best));
    }
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t j = 0; j + 1 < sorted.size(); j += 2) out.emplace_back(sorted[j]->path, sorted[j + 1]->path);
    return out;
}

std::vector<data::ManifestRecord> records_for(const std::vector<data::ViewPoint>& views, int timesteps) {
    std::vector<data::ManifestRecord> out;
    for (int t = 0; t < timesteps; ++t)
        for (std::size_t v = 0; v < views.size(); ++v) {
            data::ManifestRecord r;
            r.path = "t" + std::to_string(t) + "_v" + std::to_string(v);
            r.t = t;
            r.theta = views[v].theta;
            r.phi_view = views[v].phi_view;
            out.push_back(r);
        }
    return out;
}

Outcome protocol() {
    Rng rng(0x9a12);
    int ok = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int level = trial % 3;
        const int T = 1 + static_cast<int>(rng.below(4));
        auto recs = records_for(data::icosphere_views(level), T);
        for (std::size_t i = recs.size(); i > 1; --i) std::swap(recs[i - 1], recs[rng.below(i)]);
        const auto res = data::sort_and_pair(recs, T);
        bool same = true;
        for (int t = 0; t < T && same; ++t) {
            const auto want = oracle_pairs(recs, t);
            same = static_cast<int>(want.size()) == res.manifest.pairs_per_t;
            for (std::size_t j = 0; same && j < want.size(); ++j) {
                const auto id = static_cast<std::int64_t>(t) * res.manifest.pairs_per_t + static_cast<std::int64_t>(j);
                same = data::record_of(res.manifest, id, data::Side::l).path == want[j].first &&
                       data::record_of(res.manifest, id, data::Side::r).path == want[j].second;
            }
        }
        ok += same;
    }

    // Divisible corpora: pairs per timestep even, timesteps a multiple of 3.
    int ratio_ok = 0, ratio_cases = 0;
    for (int pairs : {2, 12, 40, 162}) {
        for (int T : {3, 6, 9, 30}) {
            std::vector<data::ViewPoint> views(static_cast<std::size_t>(2 * pairs));
            for (std::size_t i = 0; i < views.size(); ++i) views[i].theta = 0.001 * static_cast<double>(i);
            const auto m = data::select_training_subset(data::sort_and_pair(records_for(views, T), T).manifest);
            const auto train = data::pair_ids(m, "train").size();
            ratio_ok += train * 6 == data::pair_ids(m, "all").size();
            ++ratio_cases;
        }
    }
    return {ok == 1000 && ratio_ok == ratio_cases,
            fmt("pairing oracle equal on %.0f/1000 shuffled manifests; exact 1/6 train ratio on %.0f/%.0f divisible "
                "corpora",
                ok, ratio_ok, ratio_cases)};
}

Outcome pe_oracle() {
    using big = boost::multiprecision::cpp_bin_float_50;
    const nn::PEConfig cfg{1.25, 8};
    const big pi = boost::multiprecision::default_ops::get_constant_pi<big::backend_type>();
    Rng rng(0x7e);
    auto oracle = [&](double u) {
        std::vector<big> out;
        for (int i = 0; i < cfg.levels_L; ++i) {
            const big arg = boost::multiprecision::pow(big(cfg.base_b), i) * pi * big(u);
            out.push_back(boost::multiprecision::sin(arg));
            out.push_back(boost::multiprecision::cos(arg));
        }
        return out;
    };
    double worst = 0;
    for (int n = 0; n < 100; ++n) {
        const nn::VisParams v{rng.uniform(), rng.uniform(), rng.uniform()};
        const auto got = nn::pe_vis(v, cfg);
        std::size_t k = 0;
        for (double u : {v.t, v.theta, v.phi_view}) {
            const auto want = oracle(u);
            const auto single = nn::pe_scalar(u, cfg);
            for (std::size_t i = 0; i < want.size(); ++i, ++k) {
                worst = std::max(worst, std::abs(static_cast<double>(big(single[i]) - want[i])));
                worst = std::max(worst, std::abs(static_cast<double>(big(got[k]) - want[i])));
            }
        }
        if (k != got.size()) return {false, "pe_vis length mismatch"};
    }
    return {worst < 1e-12, fmt("worst |error| %.2e over 100 inputs (b = 1.25, L = 8), need < 1e-12", worst)};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fcnr acceptance suite"};
    std::string work = (fs::temp_directory_path() / "fcnr_acceptance").string();
    std::int64_t steps = 2000;
    int channels = 64;
    std::int64_t ablate_steps = 100;
    app.add_option("--work", work, "Scratch directory for the corpus and checkpoints");
    app.add_option("--steps", steps, "Toy training steps");
    app.add_option("--channels", channels, "Toy model width");
    app.add_option("--ablate-steps", ablate_steps, "Training steps per ablation variant");
    CLI11_PARSE(app, argc, argv);

    const fs::path dir(work);
    fs::create_directories(dir);

    run("coding losslessness", coding_losslessness);
    run("rate consistency", rate_consistency);
    run("gradient suite", gradient_suite);
    run("protocol checks", protocol);
    run("pe oracle", pe_oracle);

    eval::Corpus corpus;
    const auto t0 = Clock::now();
    try {
        data::CorpusConfig cc;  // level 1, T = 6, 128 x 128
        const fs::path cdir = dir / "corpus";
        const fs::path cfg_path = cdir / "corpus.cfg";
        bool reuse = false;
        if (fs::exists(cfg_path) && fs::exists(cdir / "manifest.tsv")) {
            std::ifstream in(cfg_path);
            const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
            reuse = data::parse_corpus_config(text) == cc;
        }
        if (!reuse) {
            fs::remove_all(cdir);
            data::generate_corpus(cc, cdir);
        }
        corpus = eval::load_corpus(cdir / "manifest.tsv");
        std::printf("corpus: %d pairs per timestep, %d timesteps, %zu train pairs (%.1f s)\n",
                    corpus.manifest.pairs_per_t, corpus.manifest.timesteps,
                    data::pair_ids(corpus.manifest, "train").size(), seconds_since(t0));
    } catch (const std::exception& e) {
        std::printf("corpus generation failed: %s\n", e.what());
        for (const char* n : {"end-to-end exactness", "toy training", "interpolation", "ablation harness"})
            report(n, {false, "no corpus"}, 0);
        return failures;
    }

    run("end-to-end exactness", [&] { return end_to_end(corpus.manifest, corpus.root); });

    const auto t1 = Clock::now();
    ToyResult toy;
    try {
        toy = toy_training(corpus, dir, steps, channels);
    } catch (const std::exception& e) {
        toy.training = {false, std::string("exception: ") + e.what()};
        toy.interpolation = toy.training;
    }
    const double toy_s = seconds_since(t1);
    report("toy training", toy.training, toy_s);
    report("interpolation", toy.interpolation, toy_s);

    run("ablation harness", [&] { return ablation(corpus, dir / "ablate", ablate_steps); });

    std::printf("%d failed\n", failures);
    return failures;
}
