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

#include <cstddef>
#include <vector>

#include "roofgen/rng.hpp"
#include "roofgen/tensor/tensor.hpp"

namespace roofgen::tensor {

// Differentiable operations. Shape mismatches throw ShapeError naming both
// shapes. Unless noted, tensors are row-major and "rows" means all leading
// dimensions flattened against the last one.

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
/// x plus a bias vector broadcast over rows; bias length = last dim of x.
Tensor add_bias(const Tensor& x, const Tensor& bias);

/// (n x k) . (k x m)
Tensor matmul(const Tensor& a, const Tensor& b);
/// (n x k) . (m x k)^T
Tensor matmul_nt(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor reshape(const Tensor& a, const Shape& shape);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

Tensor relu(const Tensor& a);
/// tanh approximation.
Tensor gelu(const Tensor& a);

Tensor softmax(const Tensor& a, std::size_t axis);
/// Normalizes along `axis`; gamma and beta have length dim(axis).
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, std::size_t axis,
                  double eps = 1e-5);

/// Rows of a 2-D table selected by index; differentiable in the table.
Tensor embedding(const Tensor& table, const std::vector<int>& indices);

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis);
Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end);

/// Inverted dropout: survivors scaled by 1/(1-rate) in training, identity
/// otherwise. rate must lie in [0, 1).
Tensor dropout(const Tensor& a, double rate, bool training, Rng& rng);

/// Mean negative log-likelihood of `targets` under row-wise softmax of the
/// (n x k) logits, skipping positions equal to ignore_index. Returns 0 when
/// every position is ignored.
Tensor cross_entropy(const Tensor& logits, const std::vector<int>& targets, int ignore_index = -1);

/// Multi-head scaled dot-product attention. q is (Lq x D); k and v are
/// (Lk x D); D is split evenly into `heads`. With causal set, query i sees
/// keys j <= i.
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t heads, bool causal);

/// 2-D convolution. x is (C, H, W), w is (O, C, K, K), b is (O).
Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride, std::size_t pad);

}  // namespace roofgen::tensor
