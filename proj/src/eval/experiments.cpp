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

#include "fcnr/eval/experiments.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fcnr/util/bytes.hpp"
#include "fcnr/util/log.hpp"

namespace fcnr::eval {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& s) {
    write_file(p.string(), std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
    return buf;
}

std::vector<std::vector<std::string>> tsv_rows(std::string_view text, const std::string& header) {
    std::istringstream is{std::string(text)};
    std::string line;
    std::vector<std::vector<std::string>> rows;
    bool seen_header = false;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!seen_header) {
            if (line != header) contract_fail("table: unexpected header '" + line + "'");
            seen_header = true;
            continue;
        }
        std::vector<std::string> f;
        std::size_t start = 0;
        while (true) {
            const auto pos = line.find('\t', start);
            f.push_back(line.substr(start, pos - start));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        rows.push_back(std::move(f));
    }
    if (!seen_header) contract_fail("table: missing header");
    return rows;
}

double to_d(const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) contract_fail("table: bad number '" + s + "'");
    return v;
}

std::uint64_t to_hex(const std::string& s) {
    std::size_t used = 0;
    std::uint64_t v = 0;
    try {
        v = std::stoull(s, &used, 16);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) contract_fail("table: bad fingerprint '" + s + "'");
    return v;
}

double split_psnr(const EvalReport& r, const std::string& name) {
    const auto it = r.splits.find(name);
    return it == r.splits.end() ? 0.0 : it->second.mean_psnr;
}

const char* kRdHeader = "lambda\tbpp\tpsnr\tpsnr_train\tpsnr_heldout\tfingerprint";
const char* kAblationHeader =
    "variant\tparams\tbpp\tpsnr\tpsnr_train\tpsnr_heldout\tencode_s\tdecode_s\tfingerprint";

}  // namespace

Corpus load_corpus(const fs::path& manifest_path) {
    Corpus c;
    c.manifest = data::load_manifest(manifest_path);
    c.root = manifest_path.parent_path();
    return c;
}

std::vector<train::PairSample<float>> load_samples(const Corpus& c, std::string_view split_filter) {
    std::vector<train::PairSample<float>> out;
    for (const auto id : data::pair_ids(c.manifest, split_filter)) {
        auto p = data::load_pair(c.manifest, c.root, id);
        out.push_back({std::move(p.x_l), std::move(p.x_r), p.vp_l, p.vp_r});
    }
    return out;
}

fs::path run_training(const train::TrainConfig& cfg, std::vector<train::PairSample<float>> samples,
                      const fs::path& dir, const std::string& tag, const StepHook& hook, const fs::path& resume_from,
                      std::vector<train::StepRecord>* log, const EpochHook& on_epoch) {
    fs::create_directories(dir);
    std::unique_ptr<train::Trainer<float>> tr;
    if (resume_from.empty())
        tr = std::make_unique<train::Trainer<float>>(cfg, std::move(samples));
    else
        tr = std::make_unique<train::Trainer<float>>(cfg, std::move(samples), nn::load_checkpoint(resume_from.string()));

    const fs::path log_path = dir / (tag + ".log.tsv");
    std::ofstream log_file(log_path, resume_from.empty() ? std::ios::trunc : std::ios::app);
    if (!log_file) throw Error("cannot write " + log_path.string());
    if (resume_from.empty()) log_file << train::log_header() << "\n";

    tr->run([&](const train::StepRecord& r) {
        log_file << train::log_row(r) << "\n";
        if (log) log->push_back(r);
        if (hook) hook(r);
        if (cfg.checkpoint_every > 0 && r.step % cfg.checkpoint_every == 0)
            tr->save((dir / (tag + ".step" + std::to_string(r.step) + ".fckp")).string());
        if (on_epoch && r.step % tr->steps_per_epoch() == 0) on_epoch(r.step / tr->steps_per_epoch(), r, tr->model());
    });
    log_file.flush();
    const fs::path final_path = dir / (tag + ".fckp");
    tr->save(final_path.string());
    return final_path;
}

RunOutput train_and_evaluate(const train::TrainConfig& cfg, const Corpus& corpus, entropy::SymbolCoder& coder,
                             const fs::path& dir, const std::string& tag, std::string_view eval_split,
                             const StepHook& hook) {
    RunOutput out;
    out.checkpoint = run_training(cfg, load_samples(corpus, "train"), dir, tag, hook, {}, &out.log);
    const auto model = nn::load_model<float>(out.checkpoint.string());
    out.fingerprint = model->fingerprint();
    out.report = evaluate_corpus(corpus.manifest, corpus.root, *model, coder, eval_split);
    write_text(dir / (tag + ".report.json"), emit_report_json(out.report));
    return out;
}

std::vector<RdRow> rd_sweep(const std::vector<double>& lambdas, const train::TrainConfig& base, const Corpus& corpus,
                            entropy::SymbolCoder& coder, const fs::path& dir, const StepHook& hook) {
    if (lambdas.empty()) contract_fail("rd_sweep: need at least one lambda");
    std::vector<RdRow> rows;
    for (const double lambda : lambdas) {
        train::TrainConfig cfg = base;
        cfg.lambda_rd = lambda;
        log_line("rd-sweep: training lambda = " + g17(lambda));
        const auto run = train_and_evaluate(cfg, corpus, coder, dir, "lambda_" + g17(lambda), "all", hook);
        rows.push_back({lambda, run.report.overall.bpp, run.report.overall.mean_psnr, split_psnr(run.report, "train"),
                        split_psnr(run.report, "heldout"), run.fingerprint});
    }
    return rows;
}

std::string emit_rd_table(const std::vector<RdRow>& rows) {
    std::ostringstream os;
    os << kRdHeader << "\n";
    for (const auto& r : rows)
        os << g17(r.lambda) << '\t' << g17(r.bpp) << '\t' << g17(r.psnr) << '\t' << g17(r.psnr_train) << '\t'
           << g17(r.psnr_heldout) << '\t' << hex64(r.fingerprint) << "\n";
    return os.str();
}

std::vector<RdRow> parse_rd_table(std::string_view text) {
    std::vector<RdRow> rows;
    for (const auto& f : tsv_rows(text, kRdHeader)) {
        if (f.size() != 6) contract_fail("rd table: expected 6 columns");
        rows.push_back({to_d(f[0]), to_d(f[1]), to_d(f[2]), to_d(f[3]), to_d(f[4]), to_hex(f[5])});
    }
    return rows;
}

std::string rd_diagnostic(const std::vector<RdRow>& rows) {
    std::vector<RdRow> sorted = rows;
    std::sort(sorted.begin(), sorted.end(), [](const RdRow& a, const RdRow& b) { return a.lambda > b.lambda; });
    bool monotone = true;
    for (std::size_t i = 1; i < sorted.size(); ++i) monotone &= sorted[i].bpp <= sorted[i - 1].bpp;
    return std::string("bpp nonincreasing as lambda decreases: ") + (monotone ? "yes" : "no") + " (" +
           std::to_string(rows.size()) + " points)";
}

std::vector<AblationRow> ablate(const train::TrainConfig& base, const Corpus& corpus, entropy::SymbolCoder& coder,
                                const fs::path& dir, const StepHook& hook) {
    std::vector<AblationRow> rows;
    for (const auto a : {nn::Ablation::full, nn::Ablation::jct_only, nn::Ablation::pe_only, nn::Ablation::neither}) {
        train::TrainConfig cfg = base;
        cfg.model.ablation = a;
        log_line("ablate: training " + std::string(nn::ablation_name(a)));
        const auto run = train_and_evaluate(cfg, corpus, coder, dir, std::string(nn::ablation_name(a)), "all", hook);
        auto model = nn::load_model<float>(run.checkpoint.string());
        AblationRow row;
        row.ablation = a;
        row.params = static_cast<std::int64_t>(model->param_count());
        row.bpp = run.report.overall.bpp;
        row.psnr = run.report.overall.mean_psnr;
        row.psnr_train = split_psnr(run.report, "train");
        row.psnr_heldout = split_psnr(run.report, "heldout");
        row.encode_s = run.report.overall.encode_s;
        row.decode_s = run.report.overall.decode_s;
        row.fingerprint = run.fingerprint;
        rows.push_back(row);
    }
    return rows;
}

std::string ablation_label(nn::Ablation a) {
    switch (a) {
        case nn::Ablation::full: return "Full";
        case nn::Ablation::jct_only: return "JCT-Only";
        case nn::Ablation::pe_only: return "PE-Only";
        case nn::Ablation::neither: return "Neither";
    }
    return "?";
}

std::string emit_ablation_table(const std::vector<AblationRow>& rows) {
    std::ostringstream os;
    os << kAblationHeader << "\n";
    for (const auto& r : rows)
        os << nn::ablation_name(r.ablation) << '\t' << r.params << '\t' << g17(r.bpp) << '\t' << g17(r.psnr) << '\t'
           << g17(r.psnr_train) << '\t' << g17(r.psnr_heldout) << '\t' << g17(r.encode_s) << '\t'
           << g17(r.decode_s) << '\t' << hex64(r.fingerprint) << "\n";
    return os.str();
}

std::vector<AblationRow> parse_ablation_table(std::string_view text) {
    std::vector<AblationRow> rows;
    for (const auto& f : tsv_rows(text, kAblationHeader)) {
        if (f.size() != 9) contract_fail("ablation table: expected 9 columns");
        AblationRow r;
        r.ablation = nn::parse_ablation(f[0]);
        r.params = static_cast<std::int64_t>(to_d(f[1]));
        r.bpp = to_d(f[2]);
        r.psnr = to_d(f[3]);
        r.psnr_train = to_d(f[4]);
        r.psnr_heldout = to_d(f[5]);
        r.encode_s = to_d(f[6]);
        r.decode_s = to_d(f[7]);
        r.fingerprint = to_hex(f[8]);
        rows.push_back(r);
    }
    return rows;
}

std::string format_ablation_text(const std::vector<AblationRow>& rows) {
    std::ostringstream os;
    char buf[256];
    os << "Variant     JCTM  PE    Params     BPP    PSNR(dB)  train   heldout\n";
    for (const auto& r : rows) {
        nn::ModelConfig probe;
        probe.ablation = r.ablation;
        std::snprintf(buf, sizeof buf, "%-10s  %-4s  %-4s  %8lld  %7.4f  %8.3f  %7.3f  %7.3f\n",
                      ablation_label(r.ablation).c_str(), probe.use_jctm() ? "yes" : "no",
                      probe.use_pe() ? "yes" : "no", static_cast<long long>(r.params), r.bpp, r.psnr, r.psnr_train,
                      r.psnr_heldout);
        os << buf;
    }
    if (!rows.empty()) {
        const auto best_psnr = std::max_element(rows.begin(), rows.end(),
                                                [](const AblationRow& a, const AblationRow& b) { return a.psnr < b.psnr; });
        const auto best_bpp = std::min_element(rows.begin(), rows.end(),
                                               [](const AblationRow& a, const AblationRow& b) { return a.bpp < b.bpp; });
        os << "highest PSNR: " << ablation_label(best_psnr->ablation)
           << ", lowest BPP: " << ablation_label(best_bpp->ablation) << "\n";
    }
    return os.str();
}

}  // namespace fcnr::eval
