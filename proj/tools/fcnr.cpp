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

// Command-line front end: corpus generation, training, coding and evaluation.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <iterator>
#include <sstream>

#include "CLI11.hpp"
#include "fcnr/codec/pipeline.hpp"
#include "fcnr/data/corpus.hpp"
#include "fcnr/eval/chart.hpp"
#include "fcnr/eval/experiments.hpp"
#include "fcnr/eval/metrics.hpp"
#include "fcnr/nn/checkpoint.hpp"
#include "fcnr/util/bytes.hpp"
#include "fcnr/util/log.hpp"

namespace fs = std::filesystem;
using namespace fcnr;

namespace {

struct Globals {
    std::string config;
    std::string weights;
    std::string split = "all";
    std::string coder = "reference";
    long long seed = -1;
};

std::string read_text(const std::string& path) {
    const auto b = read_file(path);
    return std::string(b.begin(), b.end());
}

void write_text(const fs::path& path, const std::string& s) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_file(path.string(), std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

train::TrainConfig train_config(const Globals& g) {
    if (g.config.empty()) throw CLI::ValidationError("--config", "a training config file is required");
    auto cfg = train::parse_train_config(read_text(g.config));
    if (g.seed >= 0) cfg.seed = static_cast<std::uint64_t>(g.seed);
    return cfg;
}

std::unique_ptr<nn::FcnrModel<float>> load_weights(const Globals& g) {
    if (g.weights.empty()) throw CLI::ValidationError("--weights", "a checkpoint is required");
    return nn::load_model<float>(g.weights);
}

nn::VisParams parse_vis(const std::string& s) {
    nn::VisParams v;
    char c1 = 0, c2 = 0;
    std::istringstream is(s);
    if (!(is >> v.t >> c1 >> v.theta >> c2 >> v.phi_view) || c1 != ',' || c2 != ',')
        throw CLI::ValidationError("--vis", "expected t,theta,phi normalized to [0, 1]");
    return v;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::istringstream is(s);
    for (std::string item; std::getline(is, item, ',');) {
        std::size_t used = 0;
        out.push_back(std::stod(item, &used));
        if (used != item.size()) throw CLI::ValidationError("--lambdas", "bad number '" + item + "'");
    }
    return out;
}

double mean_psnr(const nn::FcnrModel<float>& model, const std::vector<codec::ImagePair<float>>& pairs) {
    double s = 0;
    for (const auto& p : pairs) {
        const auto r = codec::simulate(model, p, codec::SimMode::ste);
        s += eval::psnr(p.x_l, r.x_hat_l) + eval::psnr(p.x_r, r.x_hat_r);
    }
    return pairs.empty() ? 0.0 : s / (2.0 * static_cast<double>(pairs.size()));
}

int cmd_gen_data(const Globals& g, const std::string& out, int threads) {
    data::CorpusConfig cfg;
    if (!g.config.empty()) cfg = data::parse_corpus_config(read_text(g.config));
    if (g.seed >= 0) cfg.field.seed = static_cast<std::uint64_t>(g.seed);
    const auto m = data::generate_corpus(cfg, out, threads);
    std::printf("wrote %zu images (%zu train pairs, %zu heldout pairs) to %s\n", m.records.size(),
                data::pair_ids(m, "train").size(), data::pair_ids(m, "heldout").size(),
                (fs::path(out) / "manifest.tsv").c_str());
    return 0;
}

int cmd_train(const Globals& g, const std::string& data_path, const std::string& out, const std::string& tag,
              const std::string& resume, bool epoch_psnr) {
    const auto cfg = train_config(g);
    const auto corpus = eval::load_corpus(data_path);
    std::vector<codec::ImagePair<float>> train_pairs;
    if (epoch_psnr)
        for (const auto id : data::pair_ids(corpus.manifest, "train"))
            train_pairs.push_back(data::load_pair(corpus.manifest, corpus.root, id));

    const fs::path dir(out);
    std::vector<train::StepRecord> log;
    std::string epochs = "epoch\tstep\tL_total\tmean_train_psnr\n";
    eval::Series psnr_series{"train PSNR", {}};
    auto on_step = [](const train::StepRecord& r) {
        if (r.step % 50 == 0) log_line(train::log_row(r));
    };
    auto on_epoch = [&](std::int64_t epoch, const train::StepRecord& last, nn::FcnrModel<float>& model) {
        const double p = epoch_psnr ? mean_psnr(model, train_pairs) : NAN;
        char buf[128];
        std::snprintf(buf, sizeof buf, "%lld\t%lld\t%.6f\t%.4f\n", static_cast<long long>(epoch),
                      static_cast<long long>(last.step), last.total, p);
        epochs += buf;
        if (epoch_psnr) psnr_series.points.emplace_back(static_cast<double>(epoch), p);
    };
    const auto final_path =
        eval::run_training(cfg, eval::load_samples(corpus, "train"), dir, tag, on_step, resume, &log, on_epoch);

    write_text(dir / (tag + ".epochs.tsv"), epochs);
    eval::Series loss{"L_total", {}};
    for (const auto& r : log) loss.points.emplace_back(static_cast<double>(r.step), r.total);
    write_text(dir / (tag + ".loss.svg"), eval::svg_line_chart("Training loss", "step", "L_total", {loss}));
    if (epoch_psnr)
        write_text(dir / (tag + ".psnr.svg"), eval::svg_line_chart("Train PSNR per epoch", "epoch", "PSNR (dB)",
                                                                   {psnr_series}));
    std::printf("checkpoint %s\n", final_path.c_str());
    return 0;
}

int cmd_compress(const Globals& g, const std::string& data_path, long long pair, const std::string& left,
                 const std::string& right, const std::string& vis_l, const std::string& vis_r, const std::string& out) {
    auto model = load_weights(g);
    auto coder = entropy::make_coder(g.coder);
    auto write_one = [&](const codec::ImagePair<float>& p, const fs::path& dst) {
        const auto bs = codec::compress(*model, p, *coder);
        const auto bytes = codec::serialize(bs);
        if (dst.has_parent_path()) fs::create_directories(dst.parent_path());
        write_file(dst.string(), bytes);
        std::printf("%s\t%zu bytes\t%.5f bpp\n", dst.c_str(), bytes.size(), codec::bits_per_pixel(bs));
    };
    if (!left.empty() || !right.empty()) {
        if (left.empty() || right.empty() || vis_l.empty() || vis_r.empty())
            throw CLI::ValidationError("compress", "--left, --right, --vis-l and --vis-r go together");
        codec::ImagePair<float> p{data::read_ppm(left), data::read_ppm(right), parse_vis(vis_l), parse_vis(vis_r), 0};
        write_one(p, out);
        return 0;
    }
    if (data_path.empty()) throw CLI::ValidationError("compress", "give --data or --left/--right");
    const auto corpus = eval::load_corpus(data_path);
    const std::vector<std::int64_t> ids =
        pair >= 0 ? std::vector<std::int64_t>{pair} : data::pair_ids(corpus.manifest, g.split);
    for (const auto id : ids) {
        const fs::path dst = pair >= 0 && fs::path(out).extension() == ".fcnr"
                                 ? fs::path(out)
                                 : fs::path(out) / ("pair" + std::to_string(id) + ".fcnr");
        write_one(data::load_pair(corpus.manifest, corpus.root, id), dst);
    }
    return 0;
}

int cmd_decompress(const Globals& g, const std::vector<std::string>& inputs, const std::string& out) {
    auto model = load_weights(g);
    auto coder = entropy::make_coder(g.coder);
    std::vector<fs::path> files;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            for (const auto& e : fs::directory_iterator(in))
                if (e.path().extension() == ".fcnr") files.push_back(e.path());
        } else {
            files.emplace_back(in);
        }
    }
    std::sort(files.begin(), files.end());
    fs::create_directories(out);
    for (const auto& f : files) {
        const auto bs = codec::parse(read_file(f.string()));
        const auto [xl, xr] = codec::decompress(bs, *model, *coder);
        const auto stem = f.stem().string();
        data::write_ppm(fs::path(out) / (stem + "_l.ppm"), xl);
        data::write_ppm(fs::path(out) / (stem + "_r.ppm"), xr);
        std::printf("%s -> %s_{l,r}.ppm\n", f.c_str(), (fs::path(out) / stem).c_str());
    }
    return 0;
}

int cmd_eval(const Globals& g, const std::string& data_path, const std::string& out, bool untrained) {
    const auto corpus = eval::load_corpus(data_path);
    std::unique_ptr<nn::FcnrModel<float>> model;
    if (untrained) {
        const auto cfg = train_config(g);
        model = std::make_unique<nn::FcnrModel<float>>(cfg.model, cfg.seed);
    } else {
        model = load_weights(g);
    }
    auto coder = entropy::make_coder(g.coder);
    const auto rep = eval::evaluate_corpus(corpus.manifest, corpus.root, *model, *coder, g.split, untrained);
    std::cout << eval::format_report_text(rep);
    if (!out.empty()) {
        write_text(out, eval::emit_report_json(rep));
        write_text(fs::path(out).replace_extension(".images.tsv"), eval::emit_image_table(rep));
    }
    return rep.errors.empty() ? 0 : 2;
}

int cmd_rd_sweep(const Globals& g, const std::string& data_path, const std::string& lambdas, const std::string& out) {
    const auto cfg = train_config(g);
    const auto corpus = eval::load_corpus(data_path);
    auto coder = entropy::make_coder(g.coder);
    const auto rows = eval::rd_sweep(parse_list(lambdas), cfg, corpus, *coder, out);
    const std::string table = eval::emit_rd_table(rows);
    write_text(fs::path(out) / "rd.tsv", table);
    eval::Series s{"FCNR", {}};
    for (const auto& r : rows) s.points.emplace_back(r.bpp, r.psnr);
    std::sort(s.points.begin(), s.points.end());
    write_text(fs::path(out) / "rd.svg", eval::svg_line_chart("Rate-distortion", "BPP", "PSNR (dB)", {s}));
    std::cout << table << eval::rd_diagnostic(rows) << "\n";
    return 0;
}

int cmd_ablate(const Globals& g, const std::string& data_path, const std::string& out) {
    const auto cfg = train_config(g);
    const auto corpus = eval::load_corpus(data_path);
    auto coder = entropy::make_coder(g.coder);
    const auto rows = eval::ablate(cfg, corpus, *coder, out);
    write_text(fs::path(out) / "ablation.tsv", eval::emit_ablation_table(rows));
    const std::string text = eval::format_ablation_text(rows);
    write_text(fs::path(out) / "ablation.txt", text);
    std::cout << text;
    return 0;
}

// Reads one serialized job on stdin and writes the framed result to stdout.
int cmd_coder_job() {
    std::vector<std::uint8_t> in((std::istreambuf_iterator<char>(std::cin)), std::istreambuf_iterator<char>());
    entropy::JobResult res;
    try {
        res = entropy::run_job(entropy::parse_job(in));
    } catch (const Error& e) {
        res.status = entropy::JobStatus::error;
        const std::string msg = e.what();
        res.payload.assign(msg.begin(), msg.end());
    }
    const auto bytes = entropy::serialize_result(res);
    std::cout.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    std::cout.flush();
    return res.status == entropy::JobStatus::ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    std::ios::sync_with_stdio(false);
    CLI::App app{"fcnr: learned stereo codec for visualization image pairs"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "Corpus or training config (key = value)");
    app.add_option("--weights", g.weights, "Model checkpoint");
    app.add_option("--split", g.split, "train, heldout or all")->check(CLI::IsMember({"train", "heldout", "all"}));
    app.add_option("--seed", g.seed, "Override the config seed");
    app.add_option("--coder", g.coder, "Symbol coder")->check(CLI::IsMember({"reference", "fast"}));

    std::string out, data_path, tag = "model", resume, left, right, vis_l, vis_r, lambdas = "0.001,0.01,0.1";
    std::vector<std::string> inputs;
    int threads = 0;
    long long pair = -1;
    bool epoch_psnr = false, untrained = false;

    auto* gen = app.add_subcommand("gen-data", "Render the synthetic corpus and write its manifest");
    gen->add_option("--out", out, "Output directory")->required();
    gen->add_option("--threads", threads, "Render threads (0: all cores)");

    auto* tr = app.add_subcommand("train", "Train a model on the train split");
    tr->add_option("--data", data_path, "manifest.tsv")->required();
    tr->add_option("--out", out, "Output directory")->required();
    tr->add_option("--tag", tag, "File name stem for outputs");
    tr->add_option("--resume", resume, "Resume from a training checkpoint");
    tr->add_flag("--epoch-psnr", epoch_psnr, "Score the train split after every epoch");

    auto* cp = app.add_subcommand("compress", "Compress one pair, a split, or two PPM files");
    cp->add_option("--data", data_path, "manifest.tsv");
    cp->add_option("--pair", pair, "Single pair id");
    cp->add_option("--left", left, "Left PPM");
    cp->add_option("--right", right, "Right PPM");
    cp->add_option("--vis-l", vis_l, "Left t,theta,phi in [0, 1]");
    cp->add_option("--vis-r", vis_r, "Right t,theta,phi in [0, 1]");
    cp->add_option("--out", out, ".fcnr file or output directory")->required();

    auto* dp = app.add_subcommand("decompress", "Decode .fcnr files to PPM pairs");
    dp->add_option("inputs", inputs, ".fcnr files or directories")->required();
    dp->add_option("--out", out, "Output directory")->required();

    auto* ev = app.add_subcommand("eval", "Compress and decompress a split and report PSNR, BPP and timing");
    ev->add_option("--data", data_path, "manifest.tsv")->required();
    ev->add_option("--out", out, "JSON report path");
    ev->add_flag("--untrained", untrained, "Use freshly initialized weights from --config");

    auto* rd = app.add_subcommand("rd-sweep", "Train and evaluate one model per lambda");
    rd->add_option("--data", data_path, "manifest.tsv")->required();
    rd->add_option("--lambdas", lambdas, "Comma-separated lambdas");
    rd->add_option("--out", out, "Output directory")->required();

    auto* ab = app.add_subcommand("ablate", "Train full, jct_only, pe_only and neither and compare");
    ab->add_option("--data", data_path, "manifest.tsv")->required();
    ab->add_option("--out", out, "Output directory")->required();

    auto* cj = app.add_subcommand("coder-job", "Run one serialized coder job from stdin (reference coder)");

    CLI11_PARSE(app, argc, argv);
    try {
        if (gen->parsed()) return cmd_gen_data(g, out, threads);
        if (tr->parsed()) return cmd_train(g, data_path, out, tag, resume, epoch_psnr);
        if (cp->parsed()) return cmd_compress(g, data_path, pair, left, right, vis_l, vis_r, out);
        if (dp->parsed()) return cmd_decompress(g, inputs, out);
        if (ev->parsed()) return cmd_eval(g, data_path, out, untrained);
        if (rd->parsed()) return cmd_rd_sweep(g, data_path, lambdas, out);
        if (ab->parsed()) return cmd_ablate(g, data_path, out);
        if (cj->parsed()) return cmd_coder_job();
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "fcnr: %s\n", e.what());
        return 1;
    }
    return 0;
}
