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

#include "fcnr/data/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include "fcnr/error.hpp"
#include "fcnr/util/bytes.hpp"
#include "fcnr/util/log.hpp"

namespace fcnr::data {

namespace fs = std::filesystem;

namespace {

std::uint8_t to_byte(float v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find('\t', start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s, const char* what) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        contract_fail(std::string("bad number for ") + what + ": '" + s + "'");
    }
    if (used != s.size()) contract_fail(std::string("bad number for ") + what + ": '" + s + "'");
    return v;
}

long long parse_int(const std::string& s, const char* what) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &used);
    } catch (const std::exception&) {
        contract_fail(std::string("bad integer for ") + what + ": '" + s + "'");
    }
    if (used != s.size()) contract_fail(std::string("bad integer for ") + what + ": '" + s + "'");
    return v;
}

long long angle_key(double a) { return std::llround(a / kAngleTieTol); }

int stride_of(double fraction, const char* what) {
    if (!(fraction > 0 && fraction <= 1)) contract_fail(std::string(what) + " must be in (0, 1]");
    const double k = 1.0 / fraction;
    const double r = std::round(k);
    if (std::abs(k - r) > 1e-6) contract_fail(std::string(what) + " must be 1/k for an integer k");
    return static_cast<int>(r);
}

}  // namespace

void write_ppm(const fs::path& path, const nn::Tensor<float>& img) {
    if (img.c != 3) contract_fail("write_ppm: expected 3 channels");
    std::string out = "P6\n" + std::to_string(img.w) + " " + std::to_string(img.h) + "\n255\n";
    out.reserve(out.size() + img.size());
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
            for (int c = 0; c < 3; ++c) out.push_back(static_cast<char>(to_byte(img.at(c, y, x))));
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(out.data()), out.size()));
}

nn::Tensor<float> read_ppm(const fs::path& path) {
    const auto bytes = read_file(path);
    std::size_t pos = 0;
    auto token = [&]() {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos])) {
                ++pos;
            } else {
                break;
            }
        }
        std::string t;
        while (pos < bytes.size() && !std::isspace(bytes[pos])) t.push_back(static_cast<char>(bytes[pos++]));
        return t;
    };
    if (token() != "P6") throw Error("read_ppm: " + path.string() + " is not a binary PPM");
    const long long w = parse_int(token(), "ppm width");
    const long long h = parse_int(token(), "ppm height");
    if (parse_int(token(), "ppm maxval") != 255) throw Error("read_ppm: only 8-bit PPM is supported");
    ++pos;  // single whitespace before the raster
    if (w <= 0 || h <= 0 || bytes.size() - std::min(pos, bytes.size()) < static_cast<std::size_t>(w * h * 3))
        throw Error("read_ppm: truncated raster in " + path.string());
    nn::Tensor<float> img(3, static_cast<int>(h), static_cast<int>(w));
    for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x)
            for (int c = 0; c < 3; ++c) img.at(c, y, x) = bytes[pos++] / 255.0f;
    return img;
}

nn::Tensor<float> quantize_8bit(const nn::Tensor<float>& img) {
    nn::Tensor<float> out = img;
    for (auto& v : out.data) v = to_byte(v) / 255.0f;
    return out;
}

std::string_view split_name(Split s) { return s == Split::train ? "train" : "heldout"; }

Split parse_split(std::string_view s) {
    if (s == "train") return Split::train;
    if (s == "heldout") return Split::heldout;
    contract_fail("unknown split '" + std::string(s) + "'");
}

std::string emit_manifest(const Manifest& m) {
    std::ostringstream os;
    os << "# timesteps=" << m.timesteps << " pairs_per_t=" << m.pairs_per_t << "\n";
    os << "path\tt\ttheta\tphi\tsplit\tpair_id\tside\n";
    for (const auto& r : m.records)
        os << r.path << '\t' << r.t << '\t' << fmt_double(r.theta) << '\t' << fmt_double(r.phi_view) << '\t'
           << split_name(r.split) << '\t' << r.pair_id << '\t' << (r.side == Side::l ? "l" : "r") << '\n';
    return os.str();
}

Manifest parse_manifest(std::string_view text) {
    Manifest m;
    bool have_header = false;
    std::istringstream is{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string kv;
            while (hs >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
                if (key == "timesteps") m.timesteps = static_cast<int>(parse_int(val, "timesteps"));
                if (key == "pairs_per_t") m.pairs_per_t = static_cast<int>(parse_int(val, "pairs_per_t"));
            }
            continue;
        }
        if (!have_header) {
            if (line != "path\tt\ttheta\tphi\tsplit\tpair_id\tside")
                contract_fail("manifest line " + std::to_string(lineno) + ": unexpected column header");
            have_header = true;
            continue;
        }
        const auto f = split_tabs(line);
        if (f.size() != 7) contract_fail("manifest line " + std::to_string(lineno) + ": expected 7 columns");
        ManifestRecord r;
        r.path = f[0];
        r.t = static_cast<int>(parse_int(f[1], "t"));
        r.theta = parse_double(f[2], "theta");
        r.phi_view = parse_double(f[3], "phi");
        r.split = parse_split(f[4]);
        r.pair_id = parse_int(f[5], "pair_id");
        if (f[6] != "l" && f[6] != "r") contract_fail("manifest line " + std::to_string(lineno) + ": bad side");
        r.side = f[6] == "l" ? Side::l : Side::r;
        m.records.push_back(std::move(r));
    }
    if (m.timesteps < 1) contract_fail("manifest: timesteps must be >= 1");
    return m;
}

void save_manifest(const fs::path& path, const Manifest& m) {
    const std::string s = emit_manifest(m);
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

Manifest load_manifest(const fs::path& path) {
    const auto bytes = read_file(path);
    return parse_manifest(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

PairingResult sort_and_pair(std::vector<ManifestRecord> records, int timesteps) {
    if (timesteps < 1) contract_fail("sort_and_pair: timesteps must be >= 1");
    std::vector<std::vector<ManifestRecord>> by_t(timesteps);
    for (auto& r : records) {
        if (r.t < 0 || r.t >= timesteps) contract_fail("sort_and_pair: t out of range");
        by_t[r.t].push_back(std::move(r));
    }
    const std::size_t views = by_t[0].size();
    for (const auto& g : by_t)
        if (g.size() != views) contract_fail("sort_and_pair: every timestep needs the same views");
    if (views < 2) contract_fail("sort_and_pair: need at least 2 views");

    PairingResult out;
    out.manifest.timesteps = timesteps;
    out.manifest.pairs_per_t = static_cast<int>(views / 2);
    for (int t = 0; t < timesteps; ++t) {
        auto& g = by_t[t];
        std::stable_sort(g.begin(), g.end(), [](const ManifestRecord& a, const ManifestRecord& b) {
            const long long ta = angle_key(a.theta), tb = angle_key(b.theta);
            if (ta != tb) return ta < tb;
            return angle_key(a.phi_view) < angle_key(b.phi_view);
        });
        if (g.size() % 2 == 1) {
            log_line("sort_and_pair: dropping unpaired view " + g.back().path + " at t=" + std::to_string(t));
            out.dropped.push_back(g.back());
            g.pop_back();
        }
        for (std::size_t j = 0; j < g.size() / 2; ++j) {
            const std::int64_t id = static_cast<std::int64_t>(t) * out.manifest.pairs_per_t + static_cast<std::int64_t>(j);
            for (int s = 0; s < 2; ++s) {
                ManifestRecord r = g[2 * j + s];
                r.pair_id = id;
                r.side = s == 0 ? Side::l : Side::r;
                r.split = Split::heldout;
                out.manifest.records.push_back(std::move(r));
            }
        }
    }
    return out;
}

Manifest select_training_subset(Manifest m, double view_fraction, double time_fraction) {
    const int vs = stride_of(view_fraction, "view_fraction");
    const int ts = stride_of(time_fraction, "time_fraction");
    if (m.pairs_per_t < 1 || m.timesteps < 1) contract_fail("select_training_subset: empty manifest");
    if (vs > m.pairs_per_t || ts > m.timesteps)
        contract_fail("select_training_subset: fractions leave no training pair");
    for (auto& r : m.records) {
        const std::int64_t j = r.pair_id % m.pairs_per_t;
        r.split = (j % vs == 0 && r.t % ts == 0) ? Split::train : Split::heldout;
    }
    return m;
}

CorpusConfig parse_corpus_config(std::string_view text) {
    CorpusConfig c;
    std::istringstream is{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string l = trim(line);
        if (l.empty()) continue;
        const auto eq = l.find('=');
        if (eq == std::string::npos) contract_fail("corpus config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(l.substr(0, eq)), val = trim(l.substr(eq + 1));
        if (key == "subdiv") c.subdiv_level = static_cast<int>(parse_int(val, "subdiv"));
        else if (key == "timesteps") c.timesteps = static_cast<int>(parse_int(val, "timesteps"));
        else if (key == "height") c.height = static_cast<int>(parse_int(val, "height"));
        else if (key == "width") c.width = static_cast<int>(parse_int(val, "width"));
        else if (key == "mode") c.mode = parse_render_mode(val);
        else if (key == "seed") c.field.seed = static_cast<std::uint64_t>(parse_int(val, "seed"));
        else if (key == "lobes") c.field.lobes = static_cast<int>(parse_int(val, "lobes"));
        else if (key == "spin") c.field.spin = parse_double(val, "spin");
        else if (key == "render_steps") c.render_steps = static_cast<int>(parse_int(val, "render_steps"));
        else if (key == "view_fraction") c.view_fraction = parse_double(val, "view_fraction");
        else if (key == "time_fraction") c.time_fraction = parse_double(val, "time_fraction");
        else contract_fail("corpus config: unknown key '" + key + "'");
    }
    if (c.timesteps < 1 || c.height < 1 || c.width < 1) contract_fail("corpus config: sizes must be positive");
    return c;
}

std::string emit_corpus_config(const CorpusConfig& c) {
    std::ostringstream os;
    os << "subdiv = " << c.subdiv_level << "\ntimesteps = " << c.timesteps << "\nheight = " << c.height
       << "\nwidth = " << c.width << "\nmode = " << render_mode_name(c.mode) << "\nseed = " << c.field.seed
       << "\nlobes = " << c.field.lobes << "\nspin = " << fmt_double(c.field.spin)
       << "\nrender_steps = " << c.render_steps << "\nview_fraction = " << fmt_double(c.view_fraction)
       << "\ntime_fraction = " << fmt_double(c.time_fraction) << "\n";
    return os.str();
}

Manifest generate_corpus(const CorpusConfig& cfg, const fs::path& dir, int threads,
                         std::vector<ManifestRecord>* dropped) {
    const auto views = icosphere_views(cfg.subdiv_level);
    fs::create_directories(dir);

    std::vector<ManifestRecord> records;
    for (int t = 0; t < cfg.timesteps; ++t)
        for (std::size_t v = 0; v < views.size(); ++v) {
            ManifestRecord r;
            r.path = "t" + std::to_string(t) + "_v" + std::to_string(v) + ".ppm";
            r.t = t;
            r.theta = views[v].theta;
            r.phi_view = views[v].phi_view;
            records.push_back(r);
        }

    RenderSettings rs;
    rs.mode = cfg.mode;
    rs.height = cfg.height;
    rs.width = cfg.width;
    rs.steps = cfg.render_steps;

    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t i = next++; i < records.size(); i = next++) {
            const int t = records[i].t;
            const std::size_t v = i % views.size();
            write_ppm(dir / records[i].path, render(field_at(cfg.field, t, cfg.timesteps), views[v], rs));
        }
    };
    std::vector<std::thread> pool;
    for (int i = 1; i < threads; ++i) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();

    auto paired = sort_and_pair(std::move(records), cfg.timesteps);
    if (dropped) *dropped = paired.dropped;
    Manifest m = select_training_subset(std::move(paired.manifest), cfg.view_fraction, cfg.time_fraction);
    save_manifest(dir / "manifest.tsv", m);
    const std::string text = emit_corpus_config(cfg);
    write_file(dir / "corpus.cfg", std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
    return m;
}

nn::VisParams vis_params(const ManifestRecord& r, int timesteps) {
    nn::VisParams v;
    v.t = timesteps > 1 ? static_cast<double>(r.t) / (timesteps - 1) : 0.0;
    v.theta = r.theta / std::numbers::pi;
    v.phi_view = r.phi_view / (2 * std::numbers::pi);
    return v;
}

std::vector<std::int64_t> pair_ids(const Manifest& m, std::string_view split_filter) {
    const bool all = split_filter == "all";
    const Split want = all ? Split::train : parse_split(split_filter);
    std::vector<std::int64_t> ids;
    for (const auto& r : m.records)
        if (r.side == Side::l && (all || r.split == want)) ids.push_back(r.pair_id);
    return ids;
}

const ManifestRecord& record_of(const Manifest& m, std::int64_t pair_id, Side side) {
    for (const auto& r : m.records)
        if (r.pair_id == pair_id && r.side == side) return r;
    contract_fail("manifest has no pair " + std::to_string(pair_id));
}

codec::ImagePair<float> load_pair(const Manifest& m, const fs::path& root, std::int64_t pair_id) {
    const auto& l = record_of(m, pair_id, Side::l);
    const auto& r = record_of(m, pair_id, Side::r);
    codec::ImagePair<float> p;
    p.x_l = read_ppm(root / l.path);
    p.x_r = read_ppm(root / r.path);
    p.vp_l = vis_params(l, m.timesteps);
    p.vp_r = vis_params(r, m.timesteps);
    p.pair_id = pair_id;
    return p;
}

}  // namespace fcnr::data
