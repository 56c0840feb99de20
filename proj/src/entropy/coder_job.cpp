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

#include "fcnr/entropy/coder_job.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <sstream>

#include "fcnr/entropy/range_coder.hpp"
#include "fcnr/util/bytes.hpp"

namespace fcnr::entropy {

namespace {

constexpr std::uint16_t kJobVersion = 1;

void fail_at(const std::string& what, std::size_t offset) { throw JobFormatError(what, offset); }

}  // namespace

std::vector<std::uint8_t> serialize_job(const CoderJob& job) {
    ByteWriter w;
    w.tag("FCJB");
    w.u16(kJobVersion);
    w.u8(static_cast<std::uint8_t>(job.direction));
    w.u8(0);
    w.u64(job.count);
    w.i32(job.vmin);
    w.i32(job.vmax);
    w.u32(static_cast<std::uint32_t>(job.tables.size()));
    for (const auto& t : job.tables) {
        w.u32(static_cast<std::uint32_t>(t.size()));
        w.raw(std::span<const std::uint32_t>(t));
    }
    if (job.direction == CoderDirection::encode) {
        w.raw(std::span<const std::int32_t>(job.symbols));
    } else {
        w.u64(job.stream.size());
        w.bytes(job.stream);
    }
    return w.take();
}

CoderJob parse_job(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    CoderJob job;
    try {
        if (r.tag() != "FCJB") fail_at("bad job magic", 0);
        const std::size_t ver_at = r.offset();
        if (r.u16() != kJobVersion) fail_at("unsupported job version", ver_at);
        const std::size_t dir_at = r.offset();
        const std::uint8_t dir = r.u8();
        if (dir > 1) fail_at("bad direction " + std::to_string(dir), dir_at);
        job.direction = static_cast<CoderDirection>(dir);
        r.u8();
        job.count = r.u64();
        const std::size_t bounds_at = r.offset();
        job.vmin = r.i32();
        job.vmax = r.i32();
        if (job.vmin > job.vmax) fail_at("vmin > vmax", bounds_at);
        const std::uint64_t alphabet = static_cast<std::uint64_t>(static_cast<std::int64_t>(job.vmax) - job.vmin + 1);
        if (alphabet > kCdfTotal) fail_at("alphabet larger than 2^16", bounds_at);

        const std::size_t ntab_at = r.offset();
        const std::uint32_t ntables = r.u32();
        if (job.count > 0 && ntables != 1 && ntables != job.count)
            fail_at("table count must be 1 or the symbol count", ntab_at);
        if (static_cast<std::uint64_t>(ntables) * 4 > r.remaining()) fail_at("table count exceeds input", ntab_at);
        job.tables.resize(ntables);
        for (std::uint32_t t = 0; t < ntables; ++t) {
            const std::size_t at = r.offset();
            const std::uint32_t len = r.u32();
            if (len != alphabet + 1)
                fail_at("table " + std::to_string(t) + " length " + std::to_string(len) + " does not match bounds",
                        at);
            job.tables[t].resize(len);
            const std::size_t body_at = r.offset();
            r.raw(std::span<std::uint32_t>(job.tables[t]));
            try {
                validate_cdf(job.tables[t]);
            } catch (const ContractError& e) {
                fail_at("table " + std::to_string(t) + ": " + e.what(), body_at);
            }
        }
        if (job.direction == CoderDirection::encode) {
            const std::size_t sym_at = r.offset();
            if (job.count > r.remaining() / 4) fail_at("symbol buffer shorter than count", sym_at);
            job.symbols.resize(job.count);
            r.raw(std::span<std::int32_t>(job.symbols));
            for (std::size_t i = 0; i < job.symbols.size(); ++i)
                if (job.symbols[i] < job.vmin || job.symbols[i] > job.vmax)
                    fail_at("symbol " + std::to_string(i) + " outside bounds", sym_at + 4 * i);
        } else {
            const std::size_t len_at = r.offset();
            const std::uint64_t len = r.u64();
            if (len > r.remaining()) fail_at("stream length exceeds input", len_at);
            auto s = r.bytes(len);
            job.stream.assign(s.begin(), s.end());
        }
        if (!r.done()) fail_at("trailing bytes after job", r.offset());
    } catch (const TruncatedInput& e) {
        fail_at("truncated job", e.offset());
    }
    return job;
}

std::vector<std::uint8_t> serialize_result(const JobResult& res) {
    ByteWriter w;
    w.tag("FCJR");
    w.u8(static_cast<std::uint8_t>(res.status));
    w.u64(res.payload.size());
    w.bytes(res.payload);
    return w.take();
}

JobResult parse_result(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    JobResult res;
    try {
        if (r.tag() != "FCJR") fail_at("bad result magic", 0);
        const std::size_t st_at = r.offset();
        const std::uint8_t st = r.u8();
        if (st > 1) fail_at("bad result status", st_at);
        res.status = static_cast<JobStatus>(st);
        const std::size_t len_at = r.offset();
        const std::uint64_t len = r.u64();
        if (len != r.remaining()) fail_at("result payload length mismatch", len_at);
        auto p = r.bytes(len);
        res.payload.assign(p.begin(), p.end());
    } catch (const TruncatedInput& e) {
        fail_at("truncated result", e.offset());
    }
    return res;
}

JobResult run_job(const CoderJob& job) {
    JobResult res;
    try {
        if (job.direction == CoderDirection::encode) {
            if (job.symbols.size() != job.count) contract_fail("symbol buffer does not match count");
            res.payload = ac_encode(job.symbols, job.tables, job.vmin, job.vmax);
        } else {
            auto syms = ac_decode(job.stream, job.tables, job.vmin, job.vmax, job.count);
            ByteWriter w;
            w.raw(std::span<const std::int32_t>(syms));
            res.payload = w.take();
        }
    } catch (const std::exception& e) {
        res.status = JobStatus::error;
        const std::string msg = e.what();
        res.payload.assign(msg.begin(), msg.end());
    }
    return res;
}

std::vector<std::uint8_t> ReferenceCoder::encode(const CoderJob& job) {
    return ac_encode(job.symbols, job.tables, job.vmin, job.vmax);
}

std::vector<std::int32_t> ReferenceCoder::decode(const CoderJob& job) {
    return ac_decode(job.stream, job.tables, job.vmin, job.vmax, job.count);
}

// ---------------------------------------------------------------------------

SubprocessCoder::SubprocessCoder(std::vector<std::string> argv) : argv_(std::move(argv)) {
    if (argv_.empty()) contract_fail("SubprocessCoder: empty command");
}

namespace {

struct Fd {
    int fd = -1;
    ~Fd() { reset(); }
    void reset() {
        if (fd >= 0) ::close(fd);
        fd = -1;
    }
};

std::vector<std::uint8_t> pipe_through(const std::vector<std::string>& argv, std::span<const std::uint8_t> input,
                                       int& exit_status) {
    int in_pipe[2], out_pipe[2];
    if (::pipe(in_pipe) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));
    if (::pipe(out_pipe) != 0) {
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        throw Error(std::string("pipe: ") + std::strerror(errno));
    }
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    const pid_t pid = ::fork();
    if (pid < 0) throw Error(std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        ::dup2(in_pipe[0], STDIN_FILENO);
        ::dup2(out_pipe[1], STDOUT_FILENO);
        ::close(in_pipe[0]);
        ::close(in_pipe[1]);
        ::close(out_pipe[0]);
        ::close(out_pipe[1]);
        ::execvp(args[0], args.data());
        ::_exit(127);
    }
    ::close(in_pipe[0]);
    ::close(out_pipe[1]);
    Fd to_child{in_pipe[1]}, from_child{out_pipe[0]};

    // A child that dies early must not kill us with SIGPIPE.
    struct sigaction ignore {}, old {};
    ignore.sa_handler = SIG_IGN;
    ::sigaction(SIGPIPE, &ignore, &old);

    std::vector<std::uint8_t> output;
    std::size_t written = 0;
    std::uint8_t buf[1 << 16];
    if (input.empty()) to_child.reset();
    while (from_child.fd >= 0) {
        pollfd fds[2];
        int n = 0;
        fds[n++] = {from_child.fd, POLLIN, 0};
        if (to_child.fd >= 0) fds[n++] = {to_child.fd, POLLOUT, 0};
        if (::poll(fds, n, -1) < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (n == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
            const ssize_t k = ::write(to_child.fd, input.data() + written, input.size() - written);
            if (k < 0 && errno != EINTR && errno != EAGAIN) to_child.reset();
            if (k > 0) written += static_cast<std::size_t>(k);
            if (written == input.size()) to_child.reset();
        }
        if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
            const ssize_t k = ::read(from_child.fd, buf, sizeof buf);
            if (k > 0)
                output.insert(output.end(), buf, buf + k);
            else if (k == 0 || (errno != EINTR && errno != EAGAIN))
                from_child.reset();
        }
    }
    to_child.reset();
    ::sigaction(SIGPIPE, &old, nullptr);
    int status = 0;
    ::waitpid(pid, &status, 0);
    exit_status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return output;
}

}  // namespace

JobResult SubprocessCoder::call(const CoderJob& job) {
    int exit_status = 0;
    const auto out = pipe_through(argv_, serialize_job(job), exit_status);
    if (exit_status != 0 && out.empty())
        throw Error("external coder '" + argv_[0] + "' exited with status " + std::to_string(exit_status));
    JobResult res = parse_result(out);
    if (res.status != JobStatus::ok)
        throw Error("external coder failed: " + std::string(res.payload.begin(), res.payload.end()));
    return res;
}

std::vector<std::uint8_t> SubprocessCoder::encode(const CoderJob& job) { return call(job).payload; }

std::vector<std::int32_t> SubprocessCoder::decode(const CoderJob& job) {
    const JobResult res = call(job);
    if (res.payload.size() != job.count * 4)
        throw CorruptStreamError("external coder returned " + std::to_string(res.payload.size()) +
                                 " bytes for " + std::to_string(job.count) + " symbols");
    std::vector<std::int32_t> out(job.count);
    std::memcpy(out.data(), res.payload.data(), res.payload.size());
    return out;
}

std::unique_ptr<SymbolCoder> make_coder(const std::string& kind) {
    if (kind == "reference") return std::make_unique<ReferenceCoder>();
    if (kind == "fast") {
        const char* path = std::getenv("FCNR_FAST_CODER");
        if (!path || !*path)
            throw Error("--coder fast needs FCNR_FAST_CODER to name the external coder executable");
        std::vector<std::string> argv;
        std::istringstream words(path);
        for (std::string w; words >> w;) argv.push_back(w);
        return std::make_unique<SubprocessCoder>(std::move(argv));
    }
    contract_fail("unknown coder '" + kind + "' (expected reference or fast)");
}

}  // namespace fcnr::entropy
