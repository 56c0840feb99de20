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

#include "fcnr/entropy/range_coder.hpp"

#include <algorithm>
#include <string>

#include "fcnr/error.hpp"

namespace fcnr::entropy {

namespace {

constexpr std::uint64_t kTop = std::uint64_t{1} << 56;
constexpr std::uint64_t kBottom = std::uint64_t{1} << 48;
constexpr std::uint64_t kMask56 = kTop - 1;

const CdfTable& table_for(std::span<const CdfTable> tables, std::size_t i) {
    return tables.size() == 1 ? tables[0] : tables[i];
}

void check_tables(std::span<const CdfTable> tables, std::size_t count, std::int32_t vmin, std::int32_t vmax) {
    if (vmin > vmax) contract_fail("range coder: vmin > vmax");
    if (tables.size() != 1 && tables.size() != count)
        contract_fail("range coder: need 1 or " + std::to_string(count) + " tables, got " +
                      std::to_string(tables.size()));
    const std::size_t want = static_cast<std::size_t>(static_cast<std::int64_t>(vmax) - vmin + 2);
    for (std::size_t i = 0; i < tables.size(); ++i)
        if (tables[i].size() != want)
            contract_fail("range coder: table " + std::to_string(i) + " has " + std::to_string(tables[i].size()) +
                          " entries, bounds need " + std::to_string(want));
}

}  // namespace

void RangeEncoder::encode(std::uint32_t cum, std::uint32_t freq) {
    const std::uint64_t r = range_ >> kCdfPrecision;
    low_ += r * cum;
    range_ = r * freq;
    while (range_ < kBottom) {
        range_ <<= 8;
        shift_low();
    }
}

void RangeEncoder::shift_low() {
    if (low_ < (std::uint64_t{0xFF} << 48) || low_ >= kTop) {
        const auto carry = static_cast<std::uint8_t>(low_ >> 56);
        if (have_cache_) out_.push_back(static_cast<std::uint8_t>(cache_ + carry));
        for (; pending_ > 0; --pending_) out_.push_back(static_cast<std::uint8_t>(0xFF + carry));
        cache_ = static_cast<std::uint8_t>(low_ >> 48);
        have_cache_ = true;
    } else {
        ++pending_;
    }
    low_ = (low_ << 8) & kMask56;
}

std::vector<std::uint8_t> RangeEncoder::finish() {
    // Pick the value in [low, low + range) with the most trailing zero bytes.
    std::uint64_t v = low_;
    for (int bytes = 7; bytes > 0; --bytes) {
        const std::uint64_t mask = (bytes == 7 ? kTop : std::uint64_t{1} << (8 * bytes)) - 1;
        const std::uint64_t cand = (low_ + mask) & ~mask;
        if (cand - low_ < range_) {
            v = cand;
            break;
        }
    }
    low_ = v;
    for (int i = 0; i < 8; ++i) shift_low();
    while (!out_.empty() && out_.back() == 0) out_.pop_back();
    std::vector<std::uint8_t> result;
    result.swap(out_);
    return result;
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> stream) : stream_(stream) {
    for (int i = 0; i < 7; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint32_t RangeDecoder::decode_symbol(std::span<const std::uint32_t> cdf) {
    const std::uint64_t r = range_ >> kCdfPrecision;
    const std::uint64_t v = code_ / r;
    if (v >= kCdfTotal) throw CorruptStreamError("range decoder: code value outside the coding interval");
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), static_cast<std::uint32_t>(v));
    const auto s = static_cast<std::uint32_t>(it - cdf.begin() - 1);
    code_ -= r * cdf[s];
    range_ = r * (cdf[s + 1] - cdf[s]);
    while (range_ < kBottom) {
        range_ <<= 8;
        code_ = (code_ << 8) | next_byte();
    }
    return s;
}

std::vector<std::uint8_t> ac_encode(std::span<const std::int32_t> symbols, std::span<const CdfTable> tables,
                                    std::int32_t vmin, std::int32_t vmax) {
    if (symbols.empty()) return {};
    check_tables(tables, symbols.size(), vmin, vmax);
    RangeEncoder enc;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
        const std::int32_t v = symbols[i];
        if (v < vmin || v > vmax)
            contract_fail("ac_encode: symbol " + std::to_string(v) + " at " + std::to_string(i) + " outside [" +
                          std::to_string(vmin) + ", " + std::to_string(vmax) + "]");
        enc.encode_symbol(static_cast<std::uint32_t>(v - vmin), table_for(tables, i));
    }
    return enc.finish();
}

std::vector<std::int32_t> ac_decode(std::span<const std::uint8_t> stream, std::span<const CdfTable> tables,
                                    std::int32_t vmin, std::int32_t vmax, std::size_t count) {
    if (count == 0) return {};
    check_tables(tables, count, vmin, vmax);
    RangeDecoder dec(stream);
    std::vector<std::int32_t> out(count);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = static_cast<std::int32_t>(dec.decode_symbol(table_for(tables, i))) + vmin;
    return out;
}

}  // namespace fcnr::entropy
