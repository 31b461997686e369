// Copyright 2026 The Roofgen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "roofgen/model/layers.hpp"

#include <cmath>
#include <functional>
#include <unordered_map>

#include "roofgen/error.hpp"
#include "roofgen/tensor/ops.hpp"

namespace roofgen::model {

namespace ops = tensor;

namespace {

// Each parameter draws from its own stream keyed by a hash of its name, so
// adding a parameter does not reshuffle the others.
std::uint64_t name_stream(const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Tensor ParamStore::add(const std::string& name, Tensor t) {
  for (const auto& [n, _] : params_) {
    if (n == name) throw SpecError("duplicate parameter name " + name);
  }
  params_.emplace_back(name, t);
  return t;
}

Tensor ParamStore::normal(const std::string& name, const tensor::Shape& shape) {
  Tensor t = Tensor::zeros(shape, true);
  Rng rng(seed_, name_stream(name));
  for (double& v : t.mutable_data()) v = scale_ * rng.normal();
  return add(name, t);
}

Tensor ParamStore::he_normal(const std::string& name, const tensor::Shape& shape, std::size_t fan_in) {
  Tensor t = Tensor::zeros(shape, true);
  Rng rng(seed_, name_stream(name));
  const double sd = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (double& v : t.mutable_data()) v = sd * rng.normal();
  return add(name, t);
}

Tensor ParamStore::constant(const std::string& name, const tensor::Shape& shape, double value) {
  return add(name, Tensor::full(shape, value, true));
}

std::vector<Tensor> ParamStore::list() const {
  std::vector<Tensor> out;
  out.reserve(params_.size());
  for (const auto& [_, t] : params_) out.push_back(t);
  return out;
}

void ParamStore::load(const tensor::NamedTensors& source) {
  std::unordered_map<std::string, const Tensor*> by_name;
  for (const auto& [n, t] : source) by_name[n] = &t;
  for (auto& [name, t] : params_) {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw ShapeError("checkpoint lacks parameter " + name);
    if (it->second->shape() != t.shape()) {
      throw ShapeError("parameter " + name + " has shape " + tensor::to_string(it->second->shape()) +
                       ", expected " + tensor::to_string(t.shape()));
    }
    const auto src = it->second->data();
    std::copy(src.begin(), src.end(), t.mutable_data().begin());
  }
}

Tensor ForwardContext::dropout(const Tensor& x, double rate) const {
  if (!training || rate <= 0.0) return x;
  if (rng == nullptr) throw SpecError("training forward pass needs an rng");
  return ops::dropout(x, rate, true, *rng);
}

Linear::Linear(ParamStore& store, const std::string& name, std::size_t in, std::size_t out)
    : weight(store.normal(name + ".weight", {in, out})), bias(store.constant(name + ".bias", {out}, 0.0)) {}

Tensor Linear::operator()(const Tensor& x) const { return ops::add_bias(ops::matmul(x, weight), bias); }

LayerNorm::LayerNorm(ParamStore& store, const std::string& name, std::size_t dim)
    : gamma(store.constant(name + ".gamma", {dim}, 1.0)), beta(store.constant(name + ".beta", {dim}, 0.0)) {}

Tensor LayerNorm::operator()(const Tensor& x) const { return ops::layer_norm(x, gamma, beta, 1); }

MultiHeadAttention::MultiHeadAttention(ParamStore& store, const std::string& name, std::size_t dim,
                                       std::size_t heads_)
    : query(store, name + ".query", dim, dim),
      key(store, name + ".key", dim, dim),
      value(store, name + ".value", dim, dim),
      output(store, name + ".output", dim, dim),
      heads(heads_) {}

Tensor MultiHeadAttention::operator()(const Tensor& x, const Tensor& memory, bool causal) const {
  return output(ops::attention(query(x), key(memory), value(memory), heads, causal));
}

TransformerBlock::TransformerBlock(ParamStore& store, const std::string& name, std::size_t dim,
                                   const StackConfig& cfg, bool cross)
    : norm_self(store, name + ".norm_self", dim),
      self_attention(store, name + ".self_attention", dim, cfg.heads),
      ff_in(),
      ff_out(),
      has_cross(cross) {
  if (cross) {
    norm_cross = LayerNorm(store, name + ".norm_cross", dim);
    cross_attention = MultiHeadAttention(store, name + ".cross_attention", dim, cfg.heads);
  }
  norm_ff = LayerNorm(store, name + ".norm_ff", dim);
  ff_in = Linear(store, name + ".ff_in", dim, cfg.feedforward);
  ff_out = Linear(store, name + ".ff_out", cfg.feedforward, dim);
}

Tensor TransformerBlock::operator()(const Tensor& x, const Tensor* memory, bool causal, double rate,
                                    const ForwardContext& ctx) const {
  const Tensor h = norm_self(x);
  Tensor y = ops::add(x, ctx.dropout(self_attention(h, h, causal), rate));
  if (has_cross) {
    if (memory == nullptr) throw SpecError("cross-attention block needs a memory sequence");
    y = ops::add(y, ctx.dropout(cross_attention(norm_cross(y), *memory, false), rate));
  }
  const Tensor f = ff_out(ctx.dropout(ops::gelu(ff_in(norm_ff(y))), rate));
  return ops::add(y, ctx.dropout(f, rate));
}

TransformerStack::TransformerStack(ParamStore& store, const std::string& name, std::size_t dim,
                                   const StackConfig& cfg, bool cross) {
  for (std::size_t i = 0; i < cfg.layers; ++i) {
    blocks.emplace_back(store, name + ".block" + std::to_string(i), dim, cfg, cross);
  }
  final_norm = LayerNorm(store, name + ".final_norm", dim);
}

Tensor TransformerStack::operator()(Tensor x, const Tensor* memory, bool causal, double rate,
                                    const ForwardContext& ctx) const {
  for (const TransformerBlock& b : blocks) x = b(x, memory, causal, rate, ctx);
  return final_norm(x);
}

}  // namespace roofgen::model
