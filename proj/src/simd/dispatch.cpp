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

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_internal.hpp"

namespace fcnr::simd {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    __builtin_cpu_init();
    return detail::avx2_compiled() && __builtin_cpu_supports("avx2") &&
           __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

SimdLevel initial_level() {
    const SimdLevel detected = detected_simd_level();
    if (const char* env = std::getenv("FCNR_SIMD")) {
        const std::string want(env);
        if (want == "scalar") return SimdLevel::scalar;
        if (want == "avx2" && detected == SimdLevel::avx2) return SimdLevel::avx2;
    }
    return detected;
}

std::atomic<SimdLevel>& level_slot() {
    static std::atomic<SimdLevel> level{initial_level()};
    return level;
}

}  // namespace

SimdLevel detected_simd_level() {
    static const SimdLevel level = cpu_has_avx2() ? SimdLevel::avx2 : SimdLevel::scalar;
    return level;
}

SimdLevel active_simd_level() { return level_slot().load(std::memory_order_relaxed); }

void set_simd_level(SimdLevel level) {
    if (level == SimdLevel::avx2 && detected_simd_level() != SimdLevel::avx2)
        throw std::runtime_error("AVX2 kernels requested but not supported by this CPU");
    level_slot().store(level, std::memory_order_relaxed);
}

std::string_view simd_level_name(SimdLevel level) {
    return level == SimdLevel::avx2 ? "avx2" : "scalar";
}

template <class T>
const KernelTable<T>& kernels_for(SimdLevel level) {
    static const KernelTable<T> scalar = detail::scalar_table<T>();
    static const KernelTable<T> avx2 = detail::avx2_table<T>();
    return level == SimdLevel::avx2 ? avx2 : scalar;
}

template const KernelTable<float>& kernels_for<float>(SimdLevel);
template const KernelTable<double>& kernels_for<double>(SimdLevel);

}  // namespace fcnr::simd
