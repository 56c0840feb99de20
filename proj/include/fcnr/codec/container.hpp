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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "fcnr/nn/pe.hpp"

namespace fcnr::codec {

inline constexpr std::uint16_t kFormatVersion = 1;

struct PlaneBounds {
    std::int32_t vmin = 0;
    std::int32_t vmax = 0;
    bool operator==(const PlaneBounds&) const = default;
};

// Substream order is fixed: z_l, z_r, y_l, y_r.
enum Plane { kZl = 0, kZr = 1, kYl = 2, kYr = 3 };

struct Header {
    std::uint32_t height = 0;  // original, before padding
    std::uint32_t width = 0;
    std::uint16_t pad_h = 0;
    std::uint16_t pad_w = 0;
    nn::VisParams vp_l, vp_r;
    std::uint64_t fingerprint = 0;
    std::array<PlaneBounds, 4> bounds{};

    bool operator==(const Header&) const = default;
};

struct Bitstream {
    Header header;
    std::array<std::vector<std::uint8_t>, 4> substreams;

    std::size_t payload_bytes() const;
    bool operator==(const Bitstream&) const = default;
};

// "FCNR" u16 version, header fields in declaration order, four u32
// length-prefixed substreams, CRC-32 of the concatenated substream bytes.
std::vector<std::uint8_t> serialize(const Bitstream& bs);
// Throws CorruptStreamError on bad magic, truncation or checksum mismatch.
Bitstream parse(std::span<const std::uint8_t> bytes);

// Header alone; needs no checksum and no weights.
Header parse_header(std::span<const std::uint8_t> bytes);

std::uint32_t crc32_of(std::span<const std::uint8_t> data, std::uint32_t crc = 0);

}  // namespace fcnr::codec
