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
#include <string>
#include <vector>

#include "fcnr/nn/model.hpp"

namespace fcnr::nn {

enum class DType : std::uint8_t { f32 = 0, f64 = 1 };

struct TensorRecord {
    std::string name;
    std::vector<int> shape;
    DType dtype = DType::f32;
    std::vector<std::uint8_t> bytes;  // little-endian elements

    std::size_t count() const { return bytes.size() / (dtype == DType::f32 ? 4 : 8); }
    template <class T>
    std::vector<T> values() const;
    template <class T>
    static TensorRecord from(const std::string& name, const std::vector<int>& shape, const std::vector<T>& v);
};

// "FCKP", u16 version, u32 meta length, meta JSON, u32 tensor count, then per
// tensor: u16 name length, name, u8 rank, rank x u32 dims, u8 dtype, u64
// element count, raw elements.
struct Checkpoint {
    std::string meta_json;  // must contain "model": {config}
    std::vector<TensorRecord> tensors;

    const TensorRecord* find(const std::string& name) const;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ck);
Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

// Model parameters under their module paths plus meta {"model": config}.
template <class T>
Checkpoint checkpoint_of(FcnrModel<T>& model);
// Builds a model from the stored config and copies every parameter (f32 and
// f64 records convert to T). Missing or misshapen parameters throw.
template <class T>
std::unique_ptr<FcnrModel<T>> model_from_checkpoint(const Checkpoint& ck);
template <class T>
std::unique_ptr<FcnrModel<T>> load_model(const std::string& path);

}  // namespace fcnr::nn
