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

#include "fcnr/entropy/cdf.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "fcnr/entropy/laplace.hpp"
#include "fcnr/error.hpp"

namespace fcnr::entropy {

namespace {

// Normalizes the weights to 2^16 counts, hands out the remaining counts by
// largest remainder, then raises every zero count to one at the expense of
// the largest counts.
CdfTable apportion(std::span<const double> p) {
    const std::size_t n = p.size();
    if (n == 0) contract_fail("build_cdf: empty alphabet");
    if (n > kCdfTotal) contract_fail("build_cdf: alphabet of " + std::to_string(n) + " symbols exceeds 2^16");
    double total = 0;
    for (double v : p) {
        if (!(v >= 0) || !std::isfinite(v)) contract_fail("build_cdf: weights must be finite and nonnegative");
        total += v;
    }
    if (!(total > 0) || !std::isfinite(total)) contract_fail("build_cdf: weights must have a positive finite sum");
    const double scale = kCdfTotal / total;

    std::vector<std::uint32_t> count(n);
    std::vector<double> rem(n);
    std::uint64_t assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ideal = std::min(p[i] * scale, double(kCdfTotal));
        const double fl = std::floor(ideal);
        count[i] = static_cast<std::uint32_t>(fl);
        rem[i] = ideal - fl;
        assigned += count[i];
    }
    // Rounding can leave the sum a few counts high when normalizing.
    while (assigned > kCdfTotal) {
        const auto big = static_cast<std::size_t>(std::max_element(count.begin(), count.end()) - count.begin());
        const std::uint64_t take = std::min<std::uint64_t>(assigned - kCdfTotal, count[big] - 1);
        count[big] -= static_cast<std::uint32_t>(take);
        assigned -= take;
    }
    if (assigned < kCdfTotal) {
        const std::uint64_t left = kCdfTotal - assigned;
        const auto even = static_cast<std::uint32_t>(left / n);
        for (auto& c : count) c += even;
        const std::size_t extra = static_cast<std::size_t>(left % n);
        if (extra > 0) {
            std::vector<std::uint32_t> order(n);
            for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
            auto before = [&](std::uint32_t a, std::uint32_t b) {
                return rem[a] > rem[b] || (rem[a] == rem[b] && a < b);
            };
            std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(extra - 1), order.end(),
                             before);
            for (std::size_t i = 0; i < extra; ++i) ++count[order[i]];
        }
    }

    std::size_t zeros = 0;
    for (auto& c : count)
        if (c == 0) {
            c = 1;
            ++zeros;
        }
    if (zeros > 0) {
        // One count at a time from the current largest entry, lowest index on ties.
        std::priority_queue<std::pair<std::uint32_t, std::int64_t>> heap;
        for (std::size_t i = 0; i < n; ++i)
            if (count[i] > 1) heap.emplace(count[i], -static_cast<std::int64_t>(i));
        for (; zeros > 0; --zeros) {
            const std::int64_t neg_i = heap.top().second;
            heap.pop();
            const auto i = static_cast<std::size_t>(-neg_i);
            --count[i];
            if (count[i] > 1) heap.emplace(count[i], neg_i);
        }
    }

    CdfTable cdf(n + 1);
    cdf[0] = 0;
    for (std::size_t i = 0; i < n; ++i) cdf[i + 1] = cdf[i] + count[i];
    return cdf;
}

}  // namespace

CdfTable build_cdf(double b, std::int32_t vmin, std::int32_t vmax) {
    if (vmin > vmax) contract_fail("build_cdf: vmin > vmax");
    if (!(b >= kScaleFloor) || !std::isfinite(b)) contract_fail("build_cdf: scale must be finite and >= 1e-6");
    const std::size_t n = static_cast<std::size_t>(static_cast<std::int64_t>(vmax) - vmin + 1);

    // Bin masses of Laplace(0, b): p0 = 1 - e^{-1/(2b)}, p(+-1) = e^{-1/(2b)} (1 - q) / 2,
    // p(+-k) = p(+-(k-1)) q with q = e^{-1/b}; each floored at 2^-16.
    const double q = std::exp(-1.0 / b);
    const double half = std::exp(-0.5 / b);
    const double p0 = -std::expm1(-0.5 / b);
    const double p1 = 0.5 * half * (-std::expm1(-1.0 / b));
    std::vector<double> p(n);
    const std::int64_t kmax = std::max<std::int64_t>(-static_cast<std::int64_t>(vmin), vmax);
    double pk = p1;
    for (std::int64_t k = 0; k <= kmax; ++k) {
        const double mass = std::max(k == 0 ? p0 : pk, kProbFloor);
        if (k > 0) pk *= q;
        if (k <= vmax && k >= vmin) p[static_cast<std::size_t>(k - vmin)] = mass;
        if (k > 0 && -k >= vmin && -k <= vmax) p[static_cast<std::size_t>(-k - vmin)] = mass;
    }
    return apportion(p);
}

CdfTable build_cdf_from_weights(std::span<const double> weights) { return apportion(weights); }

void validate_cdf(std::span<const std::uint32_t> cdf) {
    if (cdf.size() < 2) contract_fail("cdf table needs at least 2 entries, got " + std::to_string(cdf.size()));
    if (cdf.front() != 0) contract_fail("cdf table must start at 0");
    if (cdf.back() != kCdfTotal) contract_fail("cdf table must end at 65536, got " + std::to_string(cdf.back()));
    for (std::size_t i = 1; i < cdf.size(); ++i)
        if (cdf[i] <= cdf[i - 1]) contract_fail("cdf table not strictly increasing at entry " + std::to_string(i));
}

}  // namespace fcnr::entropy
