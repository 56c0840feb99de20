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
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "fcnr/nn/checkpoint.hpp"
#include "fcnr/train/graph.hpp"

namespace fcnr::train {

struct TrainConfig {
    double lambda_rd = 0.01;
    double lr = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int batch_size = 1;
    int epochs = 30;
    std::int64_t max_steps = 0;  // 0: run every epoch
    std::uint64_t seed = 1;
    nn::ModelConfig model{};
    int checkpoint_every = 0;  // steps; 0 disables periodic checkpoints
    double smoothing = 0.98;   // EMA factor for the running averages

    bool operator==(const TrainConfig&) const = default;
};

// key = value lines, '#' comments. lambda is required. Model keys:
// channels, latent, hyper, heads, mlp_hidden, pe_base, pe_levels, ablation.
TrainConfig parse_train_config(std::string_view text);
std::string emit_train_config(const TrainConfig& c);
std::string train_config_to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const std::string& json);

// Per-element mean squared error of each view, summed over the two views.
template <class T>
double distortion_loss(const nn::Tensor<T>& x_l, const nn::Tensor<T>& x_r, const nn::Tensor<T>& xh_l,
                       const nn::Tensor<T>& xh_r);

// Throws TrainingDivergedError naming the first non-finite term.
void check_finite(const LossTerms& terms, double lambda, std::int64_t step);

struct StepRecord {
    std::int64_t step = 0;  // 1-based count of optimizer updates so far
    LossTerms terms;
    double total = 0;
    double bpp = 0;  // rate in bits over the pair's pixels
    double wall_s = 0;
};

template <class T>
struct TrainState {
    std::int64_t step = 0;
    std::vector<std::vector<T>> adam_m, adam_v;
    std::array<double, 3> running{};  // EMA of L_R, L_D, L_total
    bool running_init = false;
};

template <class T>
class Trainer {
public:
    Trainer(const TrainConfig& cfg, std::vector<PairSample<T>> data);
    // Resumes model, optimizer moments and step counter from a checkpoint
    // written by save(). Data and config must match the original run.
    Trainer(const TrainConfig& cfg, std::vector<PairSample<T>> data, const nn::Checkpoint& resume_from);

    // One optimizer update over the next batch in the shuffled order.
    StepRecord step();
    // Runs until max_steps or the epoch budget; callback sees every step.
    void run(const std::function<void(const StepRecord&)>& on_step = {});
    bool done() const;

    nn::Checkpoint checkpoint();
    void save(const std::string& path);

    nn::FcnrModel<T>& model() { return *model_; }
    const TrainState<T>& state() const { return state_; }
    const TrainConfig& config() const { return cfg_; }
    std::int64_t steps_per_epoch() const;
    std::int64_t total_steps() const;

private:
    std::size_t sample_index(std::int64_t k) const;
    void adam_update();
    void init_moments();

    TrainConfig cfg_;
    std::vector<PairSample<T>> data_;
    std::unique_ptr<nn::FcnrModel<T>> model_;
    TrainState<T> state_;
    TrainGraph<T> graph_;
    double wall_base_ = 0;
};

// Plain-text log: one tab-separated row per step.
std::string log_header();
std::string log_row(const StepRecord& r);

}  // namespace fcnr::train
