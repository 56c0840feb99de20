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
#include <span>
#include <vector>

#include "fcnr/entropy/cdf.hpp"

namespace fcnr::entropy {

// Byte-oriented range coder over 2^16-total frequency tables.
// 56-bit window, carry propagated through a cached byte plus a run of
// pending 0xFF bytes. The first (always zero) byte of the window is not
// emitted, and the final flush writes the shortest value inside the last
// interval; trailing zero bytes are dropped because the decoder reads zeros
// past the end.
class RangeEncoder {
public:
    void encode(std::uint32_t cum, std::uint32_t freq);
    // Encodes alphabet index s with table cdf.
    void encode_symbol(std::uint32_t s, std::span<const std::uint32_t> cdf) {
        encode(cdf[s], cdf[s + 1] - cdf[s]);
    }
    std::vector<std::uint8_t> finish();

private:
    void shift_low();

    std::uint64_t low_ = 0;
    std::uint64_t range_ = (std::uint64_t{1} << 56) - 1;
    std::uint8_t cache_ = 0;
    bool have_cache_ = false;
    std::uint64_t pending_ = 0;
    std::vector<std::uint8_t> out_;
};

class RangeDecoder {
public:
    explicit RangeDecoder(std::span<const std::uint8_t> stream);

    // Returns the alphabet index; throws CorruptStreamError on an impossible state.
    std::uint32_t decode_symbol(std::span<const std::uint32_t> cdf);
    // Bytes consumed including implicit zero padding.
    std::size_t position() const { return pos_; }

private:
    std::uint8_t next_byte() { return pos_ < stream_.size() ? stream_[pos_++] : (++pos_, std::uint8_t{0}); }

    std::span<const std::uint8_t> stream_;
    std::size_t pos_ = 0;
    std::uint64_t code_ = 0;
    std::uint64_t range_ = (std::uint64_t{1} << 56) - 1;
};

// Tables are either a single shared table or one per symbol; symbols are
// values in [vmin, vmax] and map to alphabet index value - vmin.
std::vector<std::uint8_t> ac_encode(std::span<const std::int32_t> symbols, std::span<const CdfTable> tables,
                                    std::int32_t vmin, std::int32_t vmax);
std::vector<std::int32_t> ac_decode(std::span<const std::uint8_t> stream, std::span<const CdfTable> tables,
                                    std::int32_t vmin, std::int32_t vmax, std::size_t count);

}  // namespace fcnr::entropy
