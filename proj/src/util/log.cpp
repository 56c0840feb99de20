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

#include "fcnr/util/log.hpp"

#include <cstdlib>
#include <iostream>
#include <mutex>

namespace fcnr {

void log_line(std::string_view msg) {
    static const bool quiet = std::getenv("FCNR_QUIET") != nullptr;
    if (quiet) return;
    static std::mutex mu;
    std::lock_guard lock(mu);
    std::cerr << msg << '\n';
}

}  // namespace fcnr
