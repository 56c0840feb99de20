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

#include "fcnr/eval/report.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

#include "fcnr/codec/pipeline.hpp"
#include "fcnr/eval/metrics.hpp"
#include "json.hpp"

namespace fcnr::eval {

namespace {

using ojson = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

void finish(SplitSummary& s, double psnr_sum) {
    s.mean_psnr = s.images ? psnr_sum / static_cast<double>(s.images) : 0.0;
    s.bpp = s.pixels ? static_cast<double>(s.payload_bits) / static_cast<double>(s.pixels) : 0.0;
}

ojson summary_json(const SplitSummary& s) {
    return ojson{{"images", s.images},     {"mean_psnr", s.mean_psnr}, {"bpp", s.bpp},
                 {"payload_bits", s.payload_bits}, {"pixels", s.pixels}, {"encode_s", s.encode_s},
                 {"decode_s", s.decode_s}};
}

SplitSummary summary_from(const ojson& j) {
    SplitSummary s;
    s.images = j.at("images").get<std::int64_t>();
    s.mean_psnr = j.at("mean_psnr").get<double>();
    s.bpp = j.at("bpp").get<double>();
    s.payload_bits = j.at("payload_bits").get<std::int64_t>();
    s.pixels = j.at("pixels").get<std::int64_t>();
    s.encode_s = j.at("encode_s").get<double>();
    s.decode_s = j.at("decode_s").get<double>();
    return s;
}

}  // namespace

EvalReport evaluate_corpus(const data::Manifest& manifest, const std::filesystem::path& root,
                           const nn::FcnrModel<float>& model, entropy::SymbolCoder& coder,
                           std::string_view split_filter, bool untrained) {
    EvalReport rep;
    rep.split_filter = std::string(split_filter);
    rep.coder = coder.name();
    rep.fingerprint = model.fingerprint();
    rep.untrained = untrained;

    std::map<std::string, double> psnr_sums;
    double psnr_total = 0;
    for (const std::int64_t id : data::pair_ids(manifest, split_filter)) {
        const auto& rec_l = data::record_of(manifest, id, data::Side::l);
        const auto& rec_r = data::record_of(manifest, id, data::Side::r);
        const std::string split(data::split_name(rec_l.split));
        try {
            const auto pair = data::load_pair(manifest, root, id);
            const auto t0 = Clock::now();
            const auto bytes = codec::serialize(codec::compress(model, pair, coder));
            const auto t1 = Clock::now();
            const auto bs = codec::parse(bytes);
            const auto [xl, xr] = codec::decompress(bs, model, coder);
            const auto t2 = Clock::now();

            const double enc = std::chrono::duration<double>(t1 - t0).count();
            const double dec = std::chrono::duration<double>(t2 - t1).count();
            const ImageScore sl{id, "l", split, rec_l.path, psnr(pair.x_l, xl)};
            const ImageScore sr{id, "r", split, rec_r.path, psnr(pair.x_r, xr)};
            for (SplitSummary* s : {&rep.overall, &rep.splits[split]}) {
                s->images += 2;
                s->payload_bits += 8 * static_cast<std::int64_t>(bs.payload_bytes());
                s->pixels += 2LL * bs.header.height * bs.header.width;
                s->encode_s += enc;
                s->decode_s += dec;
            }
            psnr_sums[split] += sl.psnr + sr.psnr;
            psnr_total += sl.psnr + sr.psnr;
            rep.images.push_back(sl);
            rep.images.push_back(sr);
        } catch (const Error& e) {
            rep.errors.push_back("pair " + std::to_string(id) + ": " + e.what());
        }
    }
    finish(rep.overall, psnr_total);
    for (auto& [name, s] : rep.splits) finish(s, psnr_sums[name]);
    return rep;
}

std::string emit_report_json(const EvalReport& r) {
    ojson j;
    j["split_filter"] = r.split_filter;
    j["coder"] = r.coder;
    j["fingerprint"] = r.fingerprint;
    j["untrained"] = r.untrained;
    j["overall"] = summary_json(r.overall);
    ojson splits = ojson::object();
    for (const auto& [name, s] : r.splits) splits[name] = summary_json(s);
    j["splits"] = splits;
    ojson images = ojson::array();
    for (const auto& im : r.images)
        images.push_back({{"pair_id", im.pair_id}, {"side", im.side}, {"split", im.split}, {"path", im.path},
                          {"psnr", im.psnr}});
    j["images"] = images;
    j["errors"] = r.errors;
    return j.dump(2);
}

EvalReport parse_report_json(std::string_view text) {
    ojson j;
    try {
        j = ojson::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("report: ") + e.what());
    }
    EvalReport r;
    r.split_filter = j.at("split_filter").get<std::string>();
    r.coder = j.at("coder").get<std::string>();
    r.fingerprint = j.at("fingerprint").get<std::uint64_t>();
    r.untrained = j.at("untrained").get<bool>();
    r.overall = summary_from(j.at("overall"));
    for (const auto& [name, s] : j.at("splits").items()) r.splits[name] = summary_from(s);
    for (const auto& im : j.at("images"))
        r.images.push_back({im.at("pair_id").get<std::int64_t>(), im.at("side").get<std::string>(),
                            im.at("split").get<std::string>(), im.at("path").get<std::string>(),
                            im.at("psnr").get<double>()});
    r.errors = j.at("errors").get<std::vector<std::string>>();
    return r;
}

std::string format_report_text(const EvalReport& r) {
    std::ostringstream os;
    char buf[256];
    std::snprintf(buf, sizeof buf, "weights %016llx%s, coder %s, split %s\n",
                  static_cast<unsigned long long>(r.fingerprint), r.untrained ? " (untrained)" : "", r.coder.c_str(),
                  r.split_filter.c_str());
    os << buf;
    os << "split      images   PSNR(dB)      BPP   encode(s)  decode(s)\n";
    auto row = [&](const std::string& name, const SplitSummary& s) {
        std::snprintf(buf, sizeof buf, "%-9s %7lld %10.3f %8.4f %11.3f %10.3f\n", name.c_str(),
                      static_cast<long long>(s.images), s.mean_psnr, s.bpp, s.encode_s, s.decode_s);
        os << buf;
    };
    for (const auto& [name, s] : r.splits) row(name, s);
    row("all", r.overall);
    for (const auto& e : r.errors) os << "error: " << e << "\n";
    return os.str();
}

std::string emit_image_table(const EvalReport& r) {
    std::ostringstream os;
    os << "pair_id\tside\tsplit\tpath\tpsnr\n";
    char buf[40];
    for (const auto& im : r.images) {
        std::snprintf(buf, sizeof buf, "%.17g", im.psnr);
        os << im.pair_id << '\t' << im.side << '\t' << im.split << '\t' << im.path << '\t' << buf << '\n';
    }
    return os.str();
}

}  // namespace fcnr::eval
