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

#include "fcnr/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fcnr/error.hpp"
#include "fcnr/simd/kernels.hpp"
#include "fcnr/util/random.hpp"
#include "json.hpp"

namespace fcnr::train {

namespace {

using ojson = nlohmann::ordered_json;

constexpr std::uint64_t kNoiseStream = 0x6e6f697365ULL;

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double num(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double d = 0;
    try {
        d = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty()) contract_fail("train config: bad value for " + key + ": '" + v + "'");
    return d;
}

long long integer(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long d = 0;
    try {
        d = std::stoll(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty()) contract_fail("train config: bad integer for " + key + ": '" + v + "'");
    return d;
}

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void validate(const TrainConfig& c) {
    if (!(c.lambda_rd >= 0) || !std::isfinite(c.lambda_rd)) contract_fail("train config: lambda must be >= 0");
    if (!(c.lr > 0)) contract_fail("train config: lr must be > 0");
    if (!(c.adam_beta1 >= 0 && c.adam_beta1 < 1) || !(c.adam_beta2 >= 0 && c.adam_beta2 < 1))
        contract_fail("train config: Adam betas must be in [0, 1)");
    if (c.batch_size < 1) contract_fail("train config: batch_size must be >= 1");
    if (c.epochs < 0 || c.max_steps < 0) contract_fail("train config: negative step budget");
    if (!(c.smoothing >= 0 && c.smoothing < 1)) contract_fail("train config: smoothing must be in [0, 1)");
    c.model.validate();
}

}  // namespace

TrainConfig parse_train_config(std::string_view text) {
    TrainConfig c;
    bool have_lambda = false;
    std::istringstream is{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string l = trim(line);
        if (l.empty()) continue;
        const auto eq = l.find('=');
        if (eq == std::string::npos)
            contract_fail("train config line " + std::to_string(lineno) + ": expected key = value");
        const std::string k = trim(l.substr(0, eq)), v = trim(l.substr(eq + 1));
        if (k == "lambda") c.lambda_rd = num(k, v), have_lambda = true;
        else if (k == "lr") c.lr = num(k, v);
        else if (k == "beta1") c.adam_beta1 = num(k, v);
        else if (k == "beta2") c.adam_beta2 = num(k, v);
        else if (k == "eps") c.adam_eps = num(k, v);
        else if (k == "batch_size") c.batch_size = static_cast<int>(integer(k, v));
        else if (k == "epochs") c.epochs = static_cast<int>(integer(k, v));
        else if (k == "max_steps") c.max_steps = integer(k, v);
        else if (k == "seed") c.seed = static_cast<std::uint64_t>(integer(k, v));
        else if (k == "checkpoint_every") c.checkpoint_every = static_cast<int>(integer(k, v));
        else if (k == "smoothing") c.smoothing = num(k, v);
        else if (k == "channels") c.model.channels = static_cast<int>(integer(k, v));
        else if (k == "latent") c.model.latent = static_cast<int>(integer(k, v));
        else if (k == "hyper") c.model.hyper = static_cast<int>(integer(k, v));
        else if (k == "heads") c.model.heads = static_cast<int>(integer(k, v));
        else if (k == "mlp_hidden") c.model.mlp_hidden = static_cast<int>(integer(k, v));
        else if (k == "pe_base") c.model.pe.base_b = num(k, v);
        else if (k == "pe_levels") c.model.pe.levels_L = static_cast<int>(integer(k, v));
        else if (k == "ablation") c.model.ablation = nn::parse_ablation(v);
        else contract_fail("train config: unknown key '" + k + "'");
    }
    if (!have_lambda) contract_fail("train config: 'lambda' is required");
    validate(c);
    return c;
}

std::string emit_train_config(const TrainConfig& c) {
    std::ostringstream os;
    os << "lambda = " << g17(c.lambda_rd) << "\nlr = " << g17(c.lr) << "\nbeta1 = " << g17(c.adam_beta1)
       << "\nbeta2 = " << g17(c.adam_beta2) << "\neps = " << g17(c.adam_eps) << "\nbatch_size = " << c.batch_size
       << "\nepochs = " << c.epochs << "\nmax_steps = " << c.max_steps << "\nseed = " << c.seed
       << "\ncheckpoint_every = " << c.checkpoint_every << "\nsmoothing = " << g17(c.smoothing)
       << "\nchannels = " << c.model.channels << "\nlatent = " << c.model.latent << "\nhyper = " << c.model.hyper
       << "\nheads = " << c.model.heads << "\nmlp_hidden = " << c.model.mlp_hidden
       << "\npe_base = " << g17(c.model.pe.base_b) << "\npe_levels = " << c.model.pe.levels_L
       << "\nablation = " << nn::ablation_name(c.model.ablation) << "\n";
    return os.str();
}

std::string train_config_to_json(const TrainConfig& c) {
    ojson j;
    j["lambda"] = c.lambda_rd;
    j["lr"] = c.lr;
    j["beta1"] = c.adam_beta1;
    j["beta2"] = c.adam_beta2;
    j["eps"] = c.adam_eps;
    j["batch_size"] = c.batch_size;
    j["epochs"] = c.epochs;
    j["max_steps"] = c.max_steps;
    j["seed"] = c.seed;
    j["checkpoint_every"] = c.checkpoint_every;
    j["smoothing"] = c.smoothing;
    j["model"] = ojson::parse(nn::config_to_json(c.model));
    return j.dump();
}

TrainConfig train_config_from_json(const std::string& json) {
    const auto j = ojson::parse(json);
    TrainConfig c;
    c.lambda_rd = j.at("lambda").get<double>();
    c.lr = j.at("lr").get<double>();
    c.adam_beta1 = j.at("beta1").get<double>();
    c.adam_beta2 = j.at("beta2").get<double>();
    c.adam_eps = j.at("eps").get<double>();
    c.batch_size = j.at("batch_size").get<int>();
    c.epochs = j.at("epochs").get<int>();
    c.max_steps = j.at("max_steps").get<std::int64_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.checkpoint_every = j.at("checkpoint_every").get<int>();
    c.smoothing = j.at("smoothing").get<double>();
    c.model = nn::config_from_json(j.at("model").dump());
    return c;
}

template <class T>
double distortion_loss(const nn::Tensor<T>& x_l, const nn::Tensor<T>& x_r, const nn::Tensor<T>& xh_l,
                       const nn::Tensor<T>& xh_r) {
    nn::require_same_shape(x_l, xh_l, "distortion_loss");
    nn::require_same_shape(x_r, xh_r, "distortion_loss");
    auto mse = [](const nn::Tensor<T>& a, const nn::Tensor<T>& b) {
        double s = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
            s += d * d;
        }
        return a.size() ? s / static_cast<double>(a.size()) : 0.0;
    };
    return mse(x_l, xh_l) + mse(x_r, xh_r);
}

void check_finite(const LossTerms& terms, double lambda, std::int64_t step) {
    const std::pair<const char*, double> named[] = {
        {"rate z_l", terms.r_zl},      {"rate z_r", terms.r_zr},       {"rate y_l", terms.r_yl},
        {"rate y_r", terms.r_yr},      {"distortion", terms.distortion}, {"total", terms.total(lambda)},
    };
    for (const auto& [name, v] : named)
        if (!std::isfinite(v))
            throw TrainingDivergedError("training diverged at step " + std::to_string(step) + ": " + name + " = " +
                                        g17(v));
}

template <class T>
Trainer<T>::Trainer(const TrainConfig& cfg, std::vector<PairSample<T>> data) : cfg_(cfg), data_(std::move(data)) {
    validate(cfg_);
    if (data_.empty()) contract_fail("Trainer: empty training set");
    model_ = std::make_unique<nn::FcnrModel<T>>(cfg_.model, cfg_.seed);
    init_moments();
}

template <class T>
Trainer<T>::Trainer(const TrainConfig& cfg, std::vector<PairSample<T>> data, const nn::Checkpoint& ck)
    : cfg_(cfg), data_(std::move(data)) {
    validate(cfg_);
    if (data_.empty()) contract_fail("Trainer: empty training set");
    const auto meta = ojson::parse(ck.meta_json);
    if (!meta.contains("train")) throw Error("checkpoint has no training state");
    const auto& tr = meta["train"];
    if (train_config_from_json(tr.at("config").dump()).model != cfg_.model)
        contract_fail("resume: model config differs from the checkpoint");
    model_ = nn::model_from_checkpoint<T>(ck);
    init_moments();
    state_.step = tr.at("step").get<std::int64_t>();
    state_.running_init = tr.at("running_init").get<bool>();
    wall_base_ = tr.at("wall_s").get<double>();
    const auto* run = ck.find("train.running");
    if (!run || run->count() != 3) throw Error("checkpoint is missing train.running");
    const auto r = run->values<double>();
    std::copy(r.begin(), r.end(), state_.running.begin());
    const auto params = model_->params();
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto* m = ck.find("adam.m/" + params[i]->name);
        const auto* v = ck.find("adam.v/" + params[i]->name);
        if (!m || !v || m->count() != params[i]->size() || v->count() != params[i]->size())
            throw Error("checkpoint is missing optimizer state for " + params[i]->name);
        state_.adam_m[i] = m->template values<T>();
        state_.adam_v[i] = v->template values<T>();
    }
}

template <class T>
void Trainer<T>::init_moments() {
    const auto params = model_->params();
    state_.adam_m.assign(params.size(), {});
    state_.adam_v.assign(params.size(), {});
    for (std::size_t i = 0; i < params.size(); ++i) {
        state_.adam_m[i].assign(params[i]->size(), T(0));
        state_.adam_v[i].assign(params[i]->size(), T(0));
    }
}

template <class T>
std::int64_t Trainer<T>::steps_per_epoch() const {
    const auto n = static_cast<std::int64_t>(data_.size());
    return (n + cfg_.batch_size - 1) / cfg_.batch_size;
}

template <class T>
std::int64_t Trainer<T>::total_steps() const {
    const std::int64_t by_epochs = static_cast<std::int64_t>(cfg_.epochs) * steps_per_epoch();
    return cfg_.max_steps > 0 ? std::min(cfg_.max_steps, by_epochs) : by_epochs;
}

template <class T>
bool Trainer<T>::done() const {
    return state_.step >= total_steps();
}

template <class T>
std::size_t Trainer<T>::sample_index(std::int64_t k) const {
    const auto n = data_.size();
    const auto epoch = static_cast<std::uint64_t>(k) / n;
    const auto pos = static_cast<std::size_t>(static_cast<std::uint64_t>(k) % n);
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    Rng rng(mix_seed(cfg_.seed, epoch));
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    return perm[pos];
}

template <class T>
void Trainer<T>::adam_update() {
    const auto params = model_->params();
    const auto t = static_cast<double>(state_.step + 1);
    const T c1 = static_cast<T>(1.0 - std::pow(cfg_.adam_beta1, t));
    const T c2 = static_cast<T>(1.0 - std::pow(cfg_.adam_beta2, t));
    const auto& k = simd::kernels<T>();
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto* p = params[i];
        if (cfg_.batch_size > 1)
            for (auto& g : p->grad) g /= static_cast<T>(cfg_.batch_size);
        for (const T g : p->grad)
            if (!std::isfinite(static_cast<double>(g)))
                throw TrainingDivergedError("training diverged at step " + std::to_string(state_.step + 1) +
                                            ": non-finite gradient in " + p->name);
        k.adam(p->size(), p->value.data(), p->grad.data(), state_.adam_m[i].data(), state_.adam_v[i].data(),
               static_cast<T>(cfg_.lr), static_cast<T>(cfg_.adam_beta1), static_cast<T>(cfg_.adam_beta2),
               static_cast<T>(cfg_.adam_eps), c1, c2);
    }
}

template <class T>
StepRecord Trainer<T>::step() {
    const auto t0 = std::chrono::steady_clock::now();
    model_->zero_grad();
    StepRecord rec;
    double pixels = 0;
    for (int b = 0; b < cfg_.batch_size; ++b) {
        const std::int64_t k = state_.step * cfg_.batch_size + b;
        const auto& sample = data_[sample_index(k)];
        const LossTerms terms = graph_.forward(*model_, sample, mix_seed(cfg_.seed ^ kNoiseStream, static_cast<std::uint64_t>(k)));
        check_finite(terms, cfg_.lambda_rd, state_.step + 1);
        graph_.backward(*model_, cfg_.lambda_rd);
        rec.terms.r_zl += terms.r_zl / cfg_.batch_size;
        rec.terms.r_zr += terms.r_zr / cfg_.batch_size;
        rec.terms.r_yl += terms.r_yl / cfg_.batch_size;
        rec.terms.r_yr += terms.r_yr / cfg_.batch_size;
        rec.terms.distortion += terms.distortion / cfg_.batch_size;
        pixels += 2.0 * sample.x_l.h * sample.x_l.w / cfg_.batch_size;
    }
    adam_update();
    ++state_.step;

    rec.step = state_.step;
    rec.total = rec.terms.total(cfg_.lambda_rd);
    rec.bpp = rec.terms.rate() / pixels;
    const std::array<double, 3> now{rec.terms.rate(), rec.terms.distortion, rec.total};
    const double a = cfg_.smoothing;
    for (int i = 0; i < 3; ++i)
        state_.running[i] = state_.running_init ? a * state_.running[i] + (1 - a) * now[i] : now[i];
    state_.running_init = true;
    wall_base_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rec.wall_s = wall_base_;
    return rec;
}

template <class T>
void Trainer<T>::run(const std::function<void(const StepRecord&)>& on_step) {
    while (!done()) {
        const StepRecord r = step();
        if (on_step) on_step(r);
    }
}

template <class T>
nn::Checkpoint Trainer<T>::checkpoint() {
    nn::Checkpoint ck = nn::checkpoint_of(*model_);
    auto meta = ojson::parse(ck.meta_json);
    ojson tr;
    tr["config"] = ojson::parse(train_config_to_json(cfg_));
    tr["step"] = state_.step;
    tr["running_init"] = state_.running_init;
    tr["wall_s"] = wall_base_;
    meta["train"] = tr;
    ck.meta_json = meta.dump();
    ck.tensors.push_back(nn::TensorRecord::from<double>(
        "train.running", {3}, std::vector<double>(state_.running.begin(), state_.running.end())));
    const auto params = model_->params();
    for (std::size_t i = 0; i < params.size(); ++i) {
        ck.tensors.push_back(nn::TensorRecord::from("adam.m/" + params[i]->name, params[i]->shape, state_.adam_m[i]));
        ck.tensors.push_back(nn::TensorRecord::from("adam.v/" + params[i]->name, params[i]->shape, state_.adam_v[i]));
    }
    return ck;
}

template <class T>
void Trainer<T>::save(const std::string& path) {
    nn::save_checkpoint(path, checkpoint());
}

std::string log_header() { return "step\tL_R_bits\tL_R_bpp\tL_D\tL_total\twall_s"; }

std::string log_row(const StepRecord& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%lld\t%.6f\t%.6f\t%.8g\t%.6f\t%.3f", static_cast<long long>(r.step),
                  r.terms.rate(), r.bpp, r.terms.distortion, r.total, r.wall_s);
    return buf;
}

template double distortion_loss<float>(const nn::Tensor<float>&, const nn::Tensor<float>&, const nn::Tensor<float>&,
                                       const nn::Tensor<float>&);
template double distortion_loss<double>(const nn::Tensor<double>&, const nn::Tensor<double>&,
                                        const nn::Tensor<double>&, const nn::Tensor<double>&);
template class Trainer<float>;
template class Trainer<double>;

}  // namespace fcnr::train
