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

#include "fcnr/nn/checkpoint.hpp"

#include <cstring>

#include "fcnr/util/bytes.hpp"
#include "json.hpp"

namespace fcnr::nn {

namespace {

constexpr std::uint16_t kCheckpointVersion = 1;

template <class T>
constexpr DType dtype_of() {
    return sizeof(T) == 4 ? DType::f32 : DType::f64;
}

}  // namespace

template <class T>
std::vector<T> TensorRecord::values() const {
    std::vector<T> out(count());
    if (dtype == dtype_of<T>()) {
        std::memcpy(out.data(), bytes.data(), bytes.size());
    } else if (dtype == DType::f32) {
        std::vector<float> tmp(count());
        std::memcpy(tmp.data(), bytes.data(), bytes.size());
        std::copy(tmp.begin(), tmp.end(), out.begin());
    } else {
        std::vector<double> tmp(count());
        std::memcpy(tmp.data(), bytes.data(), bytes.size());
        for (std::size_t i = 0; i < tmp.size(); ++i) out[i] = static_cast<T>(tmp[i]);
    }
    return out;
}

template <class T>
TensorRecord TensorRecord::from(const std::string& name, const std::vector<int>& shape, const std::vector<T>& v) {
    TensorRecord r{name, shape, dtype_of<T>(), std::vector<std::uint8_t>(v.size() * sizeof(T))};
    std::memcpy(r.bytes.data(), v.data(), r.bytes.size());
    return r;
}

const TensorRecord* Checkpoint::find(const std::string& name) const {
    for (const auto& t : tensors)
        if (t.name == name) return &t;
    return nullptr;
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ck) {
    ByteWriter w;
    w.tag("FCKP");
    w.u16(kCheckpointVersion);
    w.u32(static_cast<std::uint32_t>(ck.meta_json.size()));
    w.bytes({reinterpret_cast<const std::uint8_t*>(ck.meta_json.data()), ck.meta_json.size()});
    w.u32(static_cast<std::uint32_t>(ck.tensors.size()));
    for (const auto& t : ck.tensors) {
        w.u16(static_cast<std::uint16_t>(t.name.size()));
        w.bytes({reinterpret_cast<const std::uint8_t*>(t.name.data()), t.name.size()});
        w.u8(static_cast<std::uint8_t>(t.shape.size()));
        for (int d : t.shape) w.u32(static_cast<std::uint32_t>(d));
        w.u8(static_cast<std::uint8_t>(t.dtype));
        w.u64(t.count());
        w.bytes(t.bytes);
    }
    return w.take();
}

Checkpoint parse_checkpoint(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    Checkpoint ck;
    try {
        if (r.tag() != "FCKP") throw Error("not a checkpoint (bad magic)");
        if (const auto v = r.u16(); v != kCheckpointVersion)
            throw Error("unsupported checkpoint version " + std::to_string(v));
        const auto meta = r.bytes(r.u32());
        ck.meta_json.assign(reinterpret_cast<const char*>(meta.data()), meta.size());
        const std::uint32_t n = r.u32();
        for (std::uint32_t i = 0; i < n; ++i) {
            TensorRecord t;
            const auto name = r.bytes(r.u16());
            t.name.assign(reinterpret_cast<const char*>(name.data()), name.size());
            const std::uint8_t rank = r.u8();
            for (std::uint8_t k = 0; k < rank; ++k) t.shape.push_back(static_cast<int>(r.u32()));
            const std::uint8_t dt = r.u8();
            if (dt > 1) throw Error("checkpoint tensor " + t.name + ": bad dtype");
            t.dtype = static_cast<DType>(dt);
            const std::uint64_t count = r.u64();
            const std::size_t width = t.dtype == DType::f32 ? 4 : 8;
            if (count > r.remaining() / width) throw TruncatedInput(r.offset(), count * width);
            const auto body = r.bytes(count * width);
            t.bytes.assign(body.begin(), body.end());
            ck.tensors.push_back(std::move(t));
        }
    } catch (const TruncatedInput& e) {
        throw Error(std::string("checkpoint truncated: ") + e.what());
    }
    return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) { write_file(path, serialize_checkpoint(ck)); }

Checkpoint load_checkpoint(const std::string& path) { return parse_checkpoint(read_file(path)); }

template <class T>
Checkpoint checkpoint_of(FcnrModel<T>& model) {
    Checkpoint ck;
    nlohmann::ordered_json meta;
    meta["format_version"] = kCheckpointVersion;
    meta["model"] = nlohmann::ordered_json::parse(config_to_json(model.config()));
    ck.meta_json = meta.dump();
    for (auto* p : model.params()) ck.tensors.push_back(TensorRecord::from(p->name, p->shape, p->value));
    return ck;
}

template <class T>
std::unique_ptr<FcnrModel<T>> model_from_checkpoint(const Checkpoint& ck) {
    const auto meta = nlohmann::json::parse(ck.meta_json);
    if (!meta.contains("model")) throw Error("checkpoint metadata has no model config");
    auto model = std::make_unique<FcnrModel<T>>(config_from_json(meta["model"].dump()), 0);
    for (auto* p : model->params()) {
        const TensorRecord* rec = ck.find(p->name);
        if (!rec) throw Error("checkpoint is missing parameter " + p->name);
        if (rec->shape != p->shape || rec->count() != p->size())
            throw Error("checkpoint parameter " + p->name + " has the wrong shape");
        p->value = rec->values<T>();
    }
    return model;
}

template <class T>
std::unique_ptr<FcnrModel<T>> load_model(const std::string& path) {
    return model_from_checkpoint<T>(load_checkpoint(path));
}

#define FCNR_INSTANTIATE_CKPT(T)                                                                             \
    template std::vector<T> TensorRecord::values<T>() const;                                                 \
    template TensorRecord TensorRecord::from<T>(const std::string&, const std::vector<int>&, const std::vector<T>&); \
    template Checkpoint checkpoint_of<T>(FcnrModel<T>&);                                                     \
    template std::unique_ptr<FcnrModel<T>> model_from_checkpoint<T>(const Checkpoint&);                      \
    template std::unique_ptr<FcnrModel<T>> load_model<T>(const std::string&);

FCNR_INSTANTIATE_CKPT(float)
FCNR_INSTANTIATE_CKPT(double)

}  // namespace fcnr::nn
