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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "roofgen/model/config.hpp"
#include "roofgen/rng.hpp"
#include "roofgen/tensor/checkpoint.hpp"
#include "roofgen/tensor/tensor.hpp"

namespace roofgen::model {

using tensor::Tensor;

/// Ordered, named parameter list. Registration order fixes both the
/// checkpoint layout and the optimizer state layout.
class ParamStore {
 public:
  ParamStore(std::uint64_t seed, double scale) : seed_(seed), scale_(scale) {}

  /// N(0, scale^2) entries.
  Tensor normal(const std::string& name, const tensor::Shape& shape);
  /// N(0, 2 / fan_in) entries, for convolutions feeding a nonlinearity.
  Tensor he_normal(const std::string& name, const tensor::Shape& shape, std::size_t fan_in);
  Tensor constant(const std::string& name, const tensor::Shape& shape, double value);

  const tensor::NamedTensors& named() const { return params_; }
  std::vector<Tensor> list() const;
  /// Copies values from `source` by name; shapes must agree and every
  /// registered name must be present. Throws ShapeError otherwise.
  void load(const tensor::NamedTensors& source);

 private:
  Tensor add(const std::string& name, Tensor t);

  std::uint64_t seed_;
  double scale_;
  tensor::NamedTensors params_;
};

/// Per-call forward settings. Dropout draws come from `rng` in a fixed
/// order, so a given (seed, stream) reproduces the same masks.
struct ForwardContext {
  bool training = false;
  Rng* rng = nullptr;

  Tensor dropout(const Tensor& x, double rate) const;
};

struct Linear {
  Tensor weight;  // (in, out)
  Tensor bias;    // (out)

  Linear() = default;
  Linear(ParamStore& store, const std::string& name, std::size_t in, std::size_t out);
  Tensor operator()(const Tensor& x) const;
};

struct LayerNorm {
  Tensor gamma;
  Tensor beta;

  LayerNorm() = default;
  LayerNorm(ParamStore& store, const std::string& name, std::size_t dim);
  Tensor operator()(const Tensor& x) const;
};

struct MultiHeadAttention {
  Linear query, key, value, output;
  std::size_t heads = 1;

  MultiHeadAttention() = default;
  MultiHeadAttention(ParamStore& store, const std::string& name, std::size_t dim, std::size_t heads);
  Tensor operator()(const Tensor& x, const Tensor& memory, bool causal) const;
};

/// Pre-norm transformer block: self-attention, optional cross-attention
/// into a memory sequence, then a GELU feed-forward, each residual.
struct TransformerBlock {
  LayerNorm norm_self, norm_cross, norm_ff;
  MultiHeadAttention self_attention, cross_attention;
  Linear ff_in, ff_out;
  bool has_cross = false;

  TransformerBlock() = default;
  TransformerBlock(ParamStore& store, const std::string& name, std::size_t dim, const StackConfig& cfg,
                   bool cross);
  Tensor operator()(const Tensor& x, const Tensor* memory, bool causal, double rate,
                    const ForwardContext& ctx) const;
};

struct TransformerStack {
  std::vector<TransformerBlock> blocks;
  LayerNorm final_norm;

  TransformerStack() = default;
  TransformerStack(ParamStore& store, const std::string& name, std::size_t dim, const StackConfig& cfg,
                   bool cross);
  Tensor operator()(Tensor x, const Tensor* memory, bool causal, double rate,
                    const ForwardContext& ctx) const;
};

}  // namespace roofgen::model
