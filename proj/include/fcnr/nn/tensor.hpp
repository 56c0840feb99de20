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

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fcnr/error.hpp"

namespace fcnr::nn {

// Dense [channels, height, width] array, row-major within each plane.
template <class T>
struct Tensor {
    int c = 0;
    int h = 0;
    int w = 0;
    std::vector<T> data;

    Tensor() = default;
    Tensor(int channels, int height, int width, T fill = T(0))
        : c(channels), h(height), w(width),
          data(static_cast<std::size_t>(channels) * height * width, fill) {}

    std::size_t size() const { return data.size(); }
    std::size_t plane_size() const { return static_cast<std::size_t>(h) * w; }
    bool empty() const { return data.empty(); }

    T* plane(int ch) { return data.data() + ch * plane_size(); }
    const T* plane(int ch) const { return data.data() + ch * plane_size(); }

    T& at(int ch, int y, int x) { return data[(ch * plane_size()) + static_cast<std::size_t>(y) * w + x]; }
    const T& at(int ch, int y, int x) const {
        return data[(ch * plane_size()) + static_cast<std::size_t>(y) * w + x];
    }

    bool same_shape(const Tensor& o) const { return c == o.c && h == o.h && w == o.w; }
    std::string shape_str() const {
        return "[" + std::to_string(c) + "," + std::to_string(h) + "," + std::to_string(w) + "]";
    }
};

template <class T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
    if (!a.same_shape(b))
        contract_fail(std::string(what) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

template <class To, class From>
Tensor<To> tensor_cast(const Tensor<From>& src) {
    Tensor<To> out(src.c, src.h, src.w);
    for (std::size_t i = 0; i < src.size(); ++i) out.data[i] = static_cast<To>(src.data[i]);
    return out;
}

template <class T>
void add_inplace(Tensor<T>& dst, const Tensor<T>& src) {
    require_same_shape(dst, src, "add_inplace");
    for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += src.data[i];
}

// Channel concatenation and its inverse.
template <class T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.h != b.h || a.w != b.w) contract_fail("concat_channels: spatial mismatch");
    Tensor<T> out(a.c + b.c, a.h, a.w);
    std::copy(a.data.begin(), a.data.end(), out.data.begin());
    std::copy(b.data.begin(), b.data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(a.size()));
    return out;
}

template <class T>
Tensor<T> slice_channels(const Tensor<T>& src, int first, int count) {
    Tensor<T> out(count, src.h, src.w);
    std::copy(src.plane(first), src.plane(first) + out.size(), out.data.begin());
    return out;
}

}  // namespace fcnr::nn
