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
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fcnr/entropy/cdf.hpp"
#include "fcnr/error.hpp"

namespace fcnr::entropy {

enum class CoderDirection : std::uint8_t { encode = 0, decode = 1 };

// One substream's worth of coding work. The serialized form is the boundary
// to external coders (see docs/FORMAT.md).
struct CoderJob {
    CoderDirection direction = CoderDirection::encode;
    std::int32_t vmin = 0;
    std::int32_t vmax = 0;
    std::uint64_t count = 0;
    std::vector<CdfTable> tables;       // 1 shared or `count` per-symbol
    std::vector<std::int32_t> symbols;  // encode input
    std::vector<std::uint8_t> stream;   // decode input

    bool operator==(const CoderJob&) const = default;
};

class JobFormatError : public ContractError {
public:
    JobFormatError(const std::string& what, std::size_t offset)
        : ContractError(what + " at byte " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

std::vector<std::uint8_t> serialize_job(const CoderJob& job);
// Validates structure and every table; throws JobFormatError with the byte offset.
CoderJob parse_job(std::span<const std::uint8_t> bytes);

// Reply framing: "FCJR", u8 status, u64 payload length, payload. Payload is
// the stream (encode), count i32 symbols (decode) or an error message.
enum class JobStatus : std::uint8_t { ok = 0, error = 1 };
struct JobResult {
    JobStatus status = JobStatus::ok;
    std::vector<std::uint8_t> payload;
};
std::vector<std::uint8_t> serialize_result(const JobResult& r);
JobResult parse_result(std::span<const std::uint8_t> bytes);

// Runs a job with the in-process reference coder. Errors are reported in
// the result rather than thrown.
JobResult run_job(const CoderJob& job);

class SymbolCoder {
public:
    virtual ~SymbolCoder() = default;
    virtual std::string name() const = 0;
    virtual std::vector<std::uint8_t> encode(const CoderJob& job) = 0;
    virtual std::vector<std::int32_t> decode(const CoderJob& job) = 0;
};

class ReferenceCoder final : public SymbolCoder {
public:
    std::string name() const override { return "reference"; }
    std::vector<std::uint8_t> encode(const CoderJob& job) override;
    std::vector<std::int32_t> decode(const CoderJob& job) override;
};

// Pipes each serialized job through an external executable (stdin -> stdout).
class SubprocessCoder final : public SymbolCoder {
public:
    explicit SubprocessCoder(std::vector<std::string> argv);
    std::string name() const override { return "fast"; }
    std::vector<std::uint8_t> encode(const CoderJob& job) override;
    std::vector<std::int32_t> decode(const CoderJob& job) override;

private:
    JobResult call(const CoderJob& job);
    std::vector<std::string> argv_;
};

// "reference" or "fast"; the fast coder is the executable named by the
// FCNR_FAST_CODER environment variable (split on whitespace into argv).
std::unique_ptr<SymbolCoder> make_coder(const std::string& kind);

}  // namespace fcnr::entropy
