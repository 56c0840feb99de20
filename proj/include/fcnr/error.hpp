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

#include <stdexcept>
#include <string>

namespace fcnr {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (shape mismatch, bad config).
class ContractError : public Error {
public:
    using Error::Error;
};

// Image dimensions must be multiples of 64 for the raw transforms.
class PaddingRequiredError : public ContractError {
public:
    using ContractError::ContractError;
};

class CorruptStreamError : public Error {
public:
    using Error::Error;
};

class WrongModelError : public Error {
public:
    using Error::Error;
};

class TrainingDivergedError : public Error {
public:
    using Error::Error;
};

[[noreturn]] inline void contract_fail(const std::string& what) { throw ContractError(what); }

}  // namespace fcnr
