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

#include "fcnr/codec/container.hpp"

#include <zlib.h>

#include "fcnr/util/bytes.hpp"

namespace fcnr::codec {

std::size_t Bitstream::payload_bytes() const {
    std::size_t n = 0;
    for (const auto& s : substreams) n += s.size();
    return n;
}

std::uint32_t crc32_of(std::span<const std::uint8_t> data, std::uint32_t crc) {
    uLong c = crc;
    // zlib takes uInt lengths; feed in chunks.
    std::size_t off = 0;
    while (off < data.size()) {
        const auto n = static_cast<uInt>(std::min<std::size_t>(data.size() - off, 1u << 30));
        c = ::crc32(c, data.data() + off, n);
        off += n;
    }
    return static_cast<std::uint32_t>(c);
}

namespace {

void write_vp(ByteWriter& w, const nn::VisParams& v) {
    w.f64(v.t);
    w.f64(v.theta);
    w.f64(v.phi_view);
}

nn::VisParams read_vp(ByteReader& r) {
    nn::VisParams v;
    v.t = r.f64();
    v.theta = r.f64();
    v.phi_view = r.f64();
    return v;
}

Header read_header(ByteReader& r) {
    if (r.tag() != "FCNR") throw CorruptStreamError("not an FCNR bitstream (bad magic)");
    if (const auto v = r.u16(); v != kFormatVersion)
        throw CorruptStreamError("unsupported FCNR version " + std::to_string(v));
    Header h;
    h.height = r.u32();
    h.width = r.u32();
    h.pad_h = r.u16();
    h.pad_w = r.u16();
    h.vp_l = read_vp(r);
    h.vp_r = read_vp(r);
    h.fingerprint = r.u64();
    for (auto& b : h.bounds) {
        b.vmin = r.i32();
        b.vmax = r.i32();
        if (b.vmin > b.vmax) throw CorruptStreamError("plane bounds inverted");
    }
    return h;
}

}  // namespace

std::vector<std::uint8_t> serialize(const Bitstream& bs) {
    const Header& h = bs.header;
    ByteWriter w;
    w.tag("FCNR");
    w.u16(kFormatVersion);
    w.u32(h.height);
    w.u32(h.width);
    w.u16(h.pad_h);
    w.u16(h.pad_w);
    write_vp(w, h.vp_l);
    write_vp(w, h.vp_r);
    w.u64(h.fingerprint);
    for (const auto& b : h.bounds) {
        w.i32(b.vmin);
        w.i32(b.vmax);
    }
    std::uint32_t crc = 0;
    for (const auto& s : bs.substreams) {
        w.u32(static_cast<std::uint32_t>(s.size()));
        w.bytes(s);
        crc = crc32_of(s, crc);
    }
    w.u32(crc);
    return w.take();
}

Header parse_header(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    try {
        return read_header(r);
    } catch (const TruncatedInput& e) {
        throw CorruptStreamError(std::string("FCNR header truncated: ") + e.what());
    }
}

Bitstream parse(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    Bitstream bs;
    try {
        bs.header = read_header(r);
        std::uint32_t crc = 0;
        for (auto& s : bs.substreams) {
            const auto b = r.bytes(r.u32());
            s.assign(b.begin(), b.end());
            crc = crc32_of(s, crc);
        }
        if (r.u32() != crc) throw CorruptStreamError("FCNR payload checksum mismatch");
        if (!r.done()) throw CorruptStreamError("trailing bytes after FCNR checksum");
    } catch (const TruncatedInput& e) {
        throw CorruptStreamError(std::string("FCNR stream truncated: ") + e.what());
    }
    return bs;
}

}  // namespace fcnr::codec
