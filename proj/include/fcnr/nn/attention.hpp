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

#include <utility>
#include <vector>

#include "fcnr/nn/layers.hpp"

namespace fcnr::nn {

// Bidirectional cross-attention between the two views. Spatial positions are
// tokens; queries come from one view, keys and values from the other. Both
// directions share the projection weights:
//   f_l' = f_l + Attn(f_l, f_r),  f_r' = f_r + Attn(f_r, f_l).
template <class T>
class Jctm {
public:
    struct DirCache {
        typename Conv2d<T>::Cache q_cache, k_cache, v_cache, o_cache;
        Tensor<T> q, k, v;
        std::vector<T> attn;  // [heads, N, N]
    };
    struct Cache {
        DirCache l, r;
    };

    Jctm() = default;
    Jctm(const std::string& name, int channels, int heads);

    std::pair<Tensor<T>, Tensor<T>> forward(const Tensor<T>& f_l, const Tensor<T>& f_r, Cache* cache) const;
    // Returns (dL/df_l, dL/df_r) and accumulates parameter gradients.
    std::pair<Tensor<T>, Tensor<T>> backward(const Cache& cache, const Tensor<T>& d_l, const Tensor<T>& d_r);

    void init(Rng& rng);
    void append_params(ParamList<T>& out);

    int heads() const { return heads_; }

private:
    Tensor<T> attend(const Tensor<T>& query_src, const Tensor<T>& kv_src, DirCache* cache) const;
    // Adds the gradient w.r.t. query_src into d_query and w.r.t. kv_src into d_kv.
    void attend_backward(const DirCache& cache, const Tensor<T>& d_out, Tensor<T>& d_query, Tensor<T>& d_kv);

    int channels_ = 0, heads_ = 1;
    Conv2d<T> wq_, wk_, wv_, wo_;
};

}  // namespace fcnr::nn
