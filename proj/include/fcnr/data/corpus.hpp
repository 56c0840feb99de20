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
#include <string>
#include <string_view>
#include <vector>

#include "fcnr/codec/pipeline.hpp"
#include "fcnr/data/icosphere.hpp"
#include "fcnr/data/render.hpp"

namespace fcnr::data {

// 8-bit binary PPM (P6). Values are rounded from [0, 1].
void write_ppm(const std::filesystem::path& path, const nn::Tensor<float>& img);
nn::Tensor<float> read_ppm(const std::filesystem::path& path);
// Rounds to the 8-bit grid, as a write/read round trip would.
nn::Tensor<float> quantize_8bit(const nn::Tensor<float>& img);

enum class Split { train, heldout };
enum class Side { l, r };

struct ManifestRecord {
    std::string path;  // relative to the manifest's directory
    int t = 0;
    double theta = 0;
    double phi_view = 0;
    Split split = Split::heldout;
    std::int64_t pair_id = -1;
    Side side = Side::l;

    bool operator==(const ManifestRecord&) const = default;
};

struct Manifest {
    int timesteps = 1;
    int pairs_per_t = 0;
    std::vector<ManifestRecord> records;  // l then r for each pair, by pair_id

    bool operator==(const Manifest&) const = default;
};

std::string_view split_name(Split s);
Split parse_split(std::string_view s);

// TSV with a "# timesteps=T pairs_per_t=P" line, a column header, then
// path, t, theta, phi, split, pair_id, side per row.
std::string emit_manifest(const Manifest& m);
Manifest parse_manifest(std::string_view text);
void save_manifest(const std::filesystem::path& path, const Manifest& m);
Manifest load_manifest(const std::filesystem::path& path);

// Angles closer than this sort as equal; the tie then falls to phi_view.
inline constexpr double kAngleTieTol = 1e-9;

struct PairingResult {
    Manifest manifest;
    std::vector<ManifestRecord> dropped;
};

// Within each timestep: stable sort by (theta, phi_view), pair sorted
// indices (0,1), (2,3), ...; an odd last view is dropped. pair_id is
// t * pairs_per_t + j. Every timestep must hold the same view count.
PairingResult sort_and_pair(std::vector<ManifestRecord> records, int timesteps);

// Pairs with even index j (time index t % 3 == 0 by default) go to train;
// everything else is held out. Fractions must be 1/k.
Manifest select_training_subset(Manifest m, double view_fraction = 0.5, double time_fraction = 1.0 / 3.0);

struct CorpusConfig {
    int subdiv_level = 1;
    int timesteps = 6;
    int height = 128;
    int width = 128;
    RenderMode mode = RenderMode::ir;
    FieldConfig field{};
    int render_steps = 160;
    double view_fraction = 0.5;
    double time_fraction = 1.0 / 3.0;

    bool operator==(const CorpusConfig&) const = default;
};

// key = value lines; '#' starts a comment. Keys: subdiv, timesteps,
// height, width, mode, seed, lobes, spin, render_steps, view_fraction,
// time_fraction.
CorpusConfig parse_corpus_config(std::string_view text);
std::string emit_corpus_config(const CorpusConfig& c);

// Renders every (t, view) to <dir>/t<t>_v<view>.ppm and writes
// <dir>/manifest.tsv. Returns the manifest.
Manifest generate_corpus(const CorpusConfig& cfg, const std::filesystem::path& dir, int threads = 0,
                         std::vector<ManifestRecord>* dropped = nullptr);

// Normalized (t / (T-1), theta / pi, phi / 2 pi).
nn::VisParams vis_params(const ManifestRecord& r, int timesteps);

std::vector<std::int64_t> pair_ids(const Manifest& m, std::string_view split_filter);  // "train", "heldout", "all"
const ManifestRecord& record_of(const Manifest& m, std::int64_t pair_id, Side side);
codec::ImagePair<float> load_pair(const Manifest& m, const std::filesystem::path& root, std::int64_t pair_id);

}  // namespace fcnr::data
