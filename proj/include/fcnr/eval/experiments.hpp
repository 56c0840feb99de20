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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "fcnr/eval/report.hpp"
#include "fcnr/train/trainer.hpp"

namespace fcnr::eval {

struct Corpus {
    data::Manifest manifest;
    std::filesystem::path root;
};

Corpus load_corpus(const std::filesystem::path& manifest_path);
std::vector<train::PairSample<float>> load_samples(const Corpus& c, std::string_view split_filter);

struct RunOutput {
    std::filesystem::path checkpoint;
    std::uint64_t fingerprint = 0;
    EvalReport report;
    std::vector<train::StepRecord> log;
};

using StepHook = std::function<void(const train::StepRecord&)>;
using EpochHook = std::function<void(std::int64_t epoch, const train::StepRecord& last, nn::FcnrModel<float>& model)>;

// Trains (or resumes) with a plain-text log at <dir>/<tag>.log.tsv,
// periodic <dir>/<tag>.step<N>.fckp checkpoints and a final <dir>/<tag>.fckp.
// Returns the path of the final checkpoint.
std::filesystem::path run_training(const train::TrainConfig& cfg, std::vector<train::PairSample<float>> samples,
                                   const std::filesystem::path& dir, const std::string& tag, const StepHook& hook = {},
                                   const std::filesystem::path& resume_from = {},
                                   std::vector<train::StepRecord>* log = nullptr, const EpochHook& on_epoch = {});

// Trains from scratch, writes <dir>/<tag>.fckp, <tag>.log.tsv and
// <tag>.report.json, and evaluates the `eval_split` pairs.
RunOutput train_and_evaluate(const train::TrainConfig& cfg, const Corpus& corpus, entropy::SymbolCoder& coder,
                             const std::filesystem::path& dir, const std::string& tag,
                             std::string_view eval_split = "all", const StepHook& hook = {});

struct RdRow {
    double lambda = 0;
    double bpp = 0;
    double psnr = 0;
    double psnr_train = 0;
    double psnr_heldout = 0;
    std::uint64_t fingerprint = 0;

    bool operator==(const RdRow&) const = default;
};

std::vector<RdRow> rd_sweep(const std::vector<double>& lambdas, const train::TrainConfig& base, const Corpus& corpus,
                            entropy::SymbolCoder& coder, const std::filesystem::path& dir, const StepHook& hook = {});
std::string emit_rd_table(const std::vector<RdRow>& rows);
std::vector<RdRow> parse_rd_table(std::string_view text);
// Whether BPP is nonincreasing as lambda decreases; reported, never enforced.
std::string rd_diagnostic(const std::vector<RdRow>& rows);

struct AblationRow {
    nn::Ablation ablation = nn::Ablation::full;
    std::int64_t params = 0;
    double bpp = 0;
    double psnr = 0;
    double psnr_train = 0;
    double psnr_heldout = 0;
    double encode_s = 0;
    double decode_s = 0;
    std::uint64_t fingerprint = 0;

    bool operator==(const AblationRow&) const = default;
};

// Trains full, jct_only, pe_only and neither with the same settings.
std::vector<AblationRow> ablate(const train::TrainConfig& base, const Corpus& corpus, entropy::SymbolCoder& coder,
                                const std::filesystem::path& dir, const StepHook& hook = {});
std::string ablation_label(nn::Ablation a);  // "Full", "JCT-Only", "PE-Only", "Neither"
std::string emit_ablation_table(const std::vector<AblationRow>& rows);
std::vector<AblationRow> parse_ablation_table(std::string_view text);
std::string format_ablation_text(const std::vector<AblationRow>& rows);

}  // namespace fcnr::eval
