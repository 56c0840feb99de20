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
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fcnr/data/corpus.hpp"
#include "fcnr/entropy/coder_job.hpp"
#include "fcnr/nn/model.hpp"

namespace fcnr::eval {

struct ImageScore {
    std::int64_t pair_id = 0;
    std::string side;   // "l" or "r"
    std::string split;  // "train" or "heldout"
    std::string path;
    double psnr = 0;

    bool operator==(const ImageScore&) const = default;
};

struct SplitSummary {
    std::int64_t images = 0;
    double mean_psnr = 0;
    double bpp = 0;
    std::int64_t payload_bits = 0;
    std::int64_t pixels = 0;
    double encode_s = 0;
    double decode_s = 0;

    bool operator==(const SplitSummary&) const = default;
};

struct EvalReport {
    std::string split_filter;
    std::string coder;
    std::uint64_t fingerprint = 0;
    bool untrained = false;
    std::vector<ImageScore> images;
    SplitSummary overall;
    std::map<std::string, SplitSummary> splits;  // keyed by split name
    std::vector<std::string> errors;              // one per pair that could not be evaluated

    bool operator==(const EvalReport&) const = default;
};

// Compresses and decompresses every pair in the filtered split ("train",
// "heldout" or "all"). A pair that fails to load or decode is recorded in
// `errors` and skipped.
EvalReport evaluate_corpus(const data::Manifest& manifest, const std::filesystem::path& root,
                           const nn::FcnrModel<float>& model, entropy::SymbolCoder& coder,
                           std::string_view split_filter, bool untrained = false);

std::string emit_report_json(const EvalReport& r);
EvalReport parse_report_json(std::string_view json);
std::string format_report_text(const EvalReport& r);
// One row per image: pair_id, side, split, path, psnr.
std::string emit_image_table(const EvalReport& r);

}  // namespace fcnr::eval
