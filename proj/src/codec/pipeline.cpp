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

#include "fcnr/codec/pipeline.hpp"

#include <algorithm>
#include <sstream>

#include "fcnr/entropy/laplace.hpp"
#include "fcnr/util/random.hpp"

namespace fcnr::codec {

using nn::EntropyParams;
using nn::Tensor;

namespace {

int mirror(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

int round_up(int v, int multiple) { return (v + multiple - 1) / multiple * multiple; }

PlaneBounds bounds_of(const std::vector<std::int32_t>& symbols) {
    if (symbols.empty()) return {};
    const auto [lo, hi] = std::minmax_element(symbols.begin(), symbols.end());
    return {*lo, *hi};
}

template <class T>
std::vector<entropy::CdfTable> tables_for(const Tensor<T>& b, PlaneBounds bounds) {
    std::vector<entropy::CdfTable> tables;
    tables.reserve(b.size());
    for (T v : b.data) tables.push_back(entropy::build_cdf(static_cast<double>(v), bounds.vmin, bounds.vmax));
    return tables;
}

template <class T>
std::vector<std::uint8_t> encode_plane(entropy::SymbolCoder& coder, const std::vector<std::int32_t>& symbols,
                                       const Tensor<T>& b, PlaneBounds bounds) {
    entropy::CoderJob job;
    job.direction = entropy::CoderDirection::encode;
    job.vmin = bounds.vmin;
    job.vmax = bounds.vmax;
    job.count = symbols.size();
    job.tables = tables_for(b, bounds);
    job.symbols = symbols;
    return coder.encode(job);
}

template <class T>
Tensor<T> decode_plane(entropy::SymbolCoder& coder, const std::vector<std::uint8_t>& stream,
                       const EntropyParams<T>& p, PlaneBounds bounds) {
    entropy::CoderJob job;
    job.direction = entropy::CoderDirection::decode;
    job.vmin = bounds.vmin;
    job.vmax = bounds.vmax;
    job.count = p.mu.size();
    job.tables = tables_for(p.b, bounds);
    job.stream = stream;
    const auto symbols = coder.decode(job);
    if (symbols.size() != p.mu.size()) throw CorruptStreamError("decoder returned the wrong number of symbols");
    return entropy::dequantize<T>(symbols, p.mu);
}

void check_vis(const nn::VisParams& v) {
    for (double u : {v.t, v.theta, v.phi_view})
        if (!(u >= 0.0 && u <= 1.0)) contract_fail("visualization parameters must lie in [0, 1]");
}

// Everything the encoder derives from one pair: symbols per plane plus the
// coding parameters and the decoder-identical quantized latents.
template <class T>
struct Analysis {
    std::array<std::vector<std::int32_t>, 4> symbols;
    std::array<Tensor<T>, 4> scales;
    Tensor<T> y_hat_l, y_hat_r;
    int height = 0, width = 0, pad_h = 0, pad_w = 0;
};

template <class T>
Analysis<T> analyze(const nn::FcnrModel<T>& model, const ImagePair<T>& pair) {
    require_same_shape(pair.x_l, pair.x_r, "image pair");
    if (pair.x_l.c != 3) contract_fail("image pair must have 3 channels, got " + pair.x_l.shape_str());
    check_vis(pair.vp_l);
    check_vis(pair.vp_r);
    Analysis<T> a;
    a.height = pair.x_l.h;
    a.width = pair.x_l.w;
    a.pad_h = round_up(a.height, 64) - a.height;
    a.pad_w = round_up(a.width, 64) - a.width;
    if (a.pad_h > 0xFFFF || a.pad_w > 0xFFFF) contract_fail("image too large");

    const auto [y_l, y_r] = model.encode(reflect_pad(pair.x_l), reflect_pad(pair.x_r));
    const auto [z_l, z_r] = model.hyper_encode(y_l, y_r);

    const EntropyParams<T> psi_zl = nn::broadcast(model.vis_entropy_params(pair.vp_l, nn::Side::left), z_l.h, z_l.w);
    a.symbols[kZl] = entropy::quantize_symbols(z_l, psi_zl.mu);
    const Tensor<T> zh_l = entropy::dequantize<T>(a.symbols[kZl], psi_zl.mu);

    const EntropyParams<T> psi_zr = model.scm_cont_z(zh_l, model.vis_entropy_params(pair.vp_r, nn::Side::right));
    a.symbols[kZr] = entropy::quantize_symbols(z_r, psi_zr.mu);
    const Tensor<T> zh_r = entropy::dequantize<T>(a.symbols[kZr], psi_zr.mu);

    const auto [phi_yl, phi_yr] = model.hyper_decode(zh_l, zh_r);
    a.symbols[kYl] = entropy::quantize_symbols(y_l, phi_yl.mu);
    a.y_hat_l = entropy::dequantize<T>(a.symbols[kYl], phi_yl.mu);

    const EntropyParams<T> psi_yr = model.scm_cont_y(a.y_hat_l, phi_yr);
    a.symbols[kYr] = entropy::quantize_symbols(y_r, psi_yr.mu);
    a.y_hat_r = entropy::dequantize<T>(a.symbols[kYr], psi_yr.mu);

    a.scales = {psi_zl.b, psi_zr.b, phi_yl.b, psi_yr.b};
    return a;
}

}  // namespace

template <class T>
Tensor<T> reflect_pad(const Tensor<T>& x, int multiple) {
    const int h = round_up(x.h, multiple), w = round_up(x.w, multiple);
    if (h == x.h && w == x.w) return x;
    Tensor<T> out(x.c, h, w);
    for (int c = 0; c < x.c; ++c)
        for (int yy = 0; yy < h; ++yy) {
            const int sy = mirror(yy, x.h);
            for (int xx = 0; xx < w; ++xx) out.at(c, yy, xx) = x.at(c, sy, mirror(xx, x.w));
        }
    return out;
}

template <class T>
Tensor<T> crop(const Tensor<T>& x, int height, int width) {
    if (height == x.h && width == x.w) return x;
    if (height > x.h || width > x.w) contract_fail("crop larger than source");
    Tensor<T> out(x.c, height, width);
    for (int c = 0; c < x.c; ++c)
        for (int yy = 0; yy < height; ++yy)
            std::copy(&x.at(c, yy, 0), &x.at(c, yy, 0) + width, &out.at(c, yy, 0));
    return out;
}

template <class T>
Bitstream compress(const nn::FcnrModel<T>& model, const ImagePair<T>& pair, entropy::SymbolCoder& coder) {
    const Analysis<T> a = analyze(model, pair);
    Bitstream bs;
    Header& h = bs.header;
    h.height = static_cast<std::uint32_t>(a.height);
    h.width = static_cast<std::uint32_t>(a.width);
    h.pad_h = static_cast<std::uint16_t>(a.pad_h);
    h.pad_w = static_cast<std::uint16_t>(a.pad_w);
    h.vp_l = pair.vp_l;
    h.vp_r = pair.vp_r;
    h.fingerprint = model.fingerprint();
    for (int p = 0; p < 4; ++p) {
        h.bounds[p] = bounds_of(a.symbols[p]);
        bs.substreams[p] = encode_plane(coder, a.symbols[p], a.scales[p], h.bounds[p]);
    }
    return bs;
}

template <class T>
DecodedLatents<T> decode_latents(const Bitstream& bs, const nn::FcnrModel<T>& model, entropy::SymbolCoder& coder,
                                 int planes) {
    const Header& h = bs.header;
    if (h.fingerprint != model.fingerprint()) {
        std::ostringstream msg;
        msg << "bitstream was produced by model " << std::hex << h.fingerprint << ", weights are "
            << model.fingerprint();
        throw WrongModelError(msg.str());
    }
    const nn::LatentShapes shapes =
        nn::latent_shapes(model.config(), static_cast<int>(h.height + h.pad_h), static_cast<int>(h.width + h.pad_w));
    DecodedLatents<T> out;

    const EntropyParams<T> psi_zl =
        nn::broadcast(model.vis_entropy_params(h.vp_l, nn::Side::left), shapes.z_h, shapes.z_w);
    out.z_hat_l = decode_plane(coder, bs.substreams[kZl], psi_zl, h.bounds[kZl]);
    if (planes < 2) return out;

    const EntropyParams<T> psi_zr = model.scm_cont_z(out.z_hat_l, model.vis_entropy_params(h.vp_r, nn::Side::right));
    out.z_hat_r = decode_plane(coder, bs.substreams[kZr], psi_zr, h.bounds[kZr]);
    if (planes < 3) return out;

    const auto [phi_yl, phi_yr] = model.hyper_decode(out.z_hat_l, out.z_hat_r);
    out.y_hat_l = decode_plane(coder, bs.substreams[kYl], phi_yl, h.bounds[kYl]);
    if (planes < 4) return out;

    const EntropyParams<T> psi_yr = model.scm_cont_y(out.y_hat_l, phi_yr);
    out.y_hat_r = decode_plane(coder, bs.substreams[kYr], psi_yr, h.bounds[kYr]);
    return out;
}

template <class T>
std::pair<Tensor<T>, Tensor<T>> decompress(const Bitstream& bs, const nn::FcnrModel<T>& model,
                                           entropy::SymbolCoder& coder) {
    const DecodedLatents<T> lat = decode_latents(bs, model, coder);
    auto [a, b] = model.decode(lat.y_hat_l, lat.y_hat_r, true);
    const int h = static_cast<int>(bs.header.height), w = static_cast<int>(bs.header.width);
    return {crop(a, h, w), crop(b, h, w)};
}

template <class T>
SimResult<T> simulate(const nn::FcnrModel<T>& model, const ImagePair<T>& pair, SimMode mode, std::uint64_t seed) {
    SimResult<T> out;
    const int h = pair.x_l.h, w = pair.x_l.w;
    if (mode == SimMode::ste) {
        const Analysis<T> a = analyze(model, pair);
        for (int p = 0; p < 4; ++p) {
            out.plane_bits[p] = entropy::rate_bits<T>(a.symbols[p], a.scales[p].data);
            out.rate_bits += out.plane_bits[p];
        }
        auto [xl, xr] = model.decode(a.y_hat_l, a.y_hat_r, true);
        out.x_hat_l = crop(xl, h, w);
        out.x_hat_r = crop(xr, h, w);
        return out;
    }

    check_vis(pair.vp_l);
    check_vis(pair.vp_r);
    const auto [y_l, y_r] = model.encode(reflect_pad(pair.x_l), reflect_pad(pair.x_r));
    const auto [z_l, z_r] = model.hyper_encode(y_l, y_r);
    const Tensor<T> zt_l = entropy::quantize_noise(z_l, mix_seed(seed, 0));
    const Tensor<T> zt_r = entropy::quantize_noise(z_r, mix_seed(seed, 1));
    const Tensor<T> yt_l = entropy::quantize_noise(y_l, mix_seed(seed, 2));
    const Tensor<T> yt_r = entropy::quantize_noise(y_r, mix_seed(seed, 3));
    const EntropyParams<T> psi_zl = nn::broadcast(model.vis_entropy_params(pair.vp_l, nn::Side::left), z_l.h, z_l.w);
    const EntropyParams<T> psi_zr = model.scm_cont_z(zt_l, model.vis_entropy_params(pair.vp_r, nn::Side::right));
    const auto [phi_yl, phi_yr] = model.hyper_decode(zt_l, zt_r);
    const EntropyParams<T> psi_yr = model.scm_cont_y(yt_l, phi_yr);
    const std::array<std::pair<const Tensor<T>*, const EntropyParams<T>*>, 4> planes{
        {{&zt_l, &psi_zl}, {&zt_r, &psi_zr}, {&yt_l, &phi_yl}, {&yt_r, &psi_yr}}};
    for (int p = 0; p < 4; ++p) {
        const auto& [v, prm] = planes[p];
        out.plane_bits[p] = entropy::rate_bits_relaxed<T>(v->data, prm->mu.data, prm->b.data, {}, {}, {});
        out.rate_bits += out.plane_bits[p];
    }
    auto [xl, xr] = model.decode(yt_l, yt_r, true);
    out.x_hat_l = crop(xl, h, w);
    out.x_hat_r = crop(xr, h, w);
    return out;
}

double bits_per_pixel(const Bitstream& bs) {
    const double pixels = 2.0 * bs.header.height * bs.header.width;
    if (pixels <= 0) contract_fail("bits_per_pixel: empty image");
    return static_cast<double>(bs.payload_bytes()) * 8.0 / pixels;
}

#define FCNR_INSTANTIATE_PIPELINE(T)                                                                              \
    template Tensor<T> reflect_pad<T>(const Tensor<T>&, int);                                                    \
    template Tensor<T> crop<T>(const Tensor<T>&, int, int);                                                      \
    template Bitstream compress<T>(const nn::FcnrModel<T>&, const ImagePair<T>&, entropy::SymbolCoder&);         \
    template DecodedLatents<T> decode_latents<T>(const Bitstream&, const nn::FcnrModel<T>&, entropy::SymbolCoder&, \
                                                 int);                                                           \
    template std::pair<Tensor<T>, Tensor<T>> decompress<T>(const Bitstream&, const nn::FcnrModel<T>&,            \
                                                           entropy::SymbolCoder&);                               \
    template SimResult<T> simulate<T>(const nn::FcnrModel<T>&, const ImagePair<T>&, SimMode, std::uint64_t);

FCNR_INSTANTIATE_PIPELINE(float)
FCNR_INSTANTIATE_PIPELINE(double)

}  // namespace fcnr::codec
