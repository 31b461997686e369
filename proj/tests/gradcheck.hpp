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

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "roofgen/rng.hpp"
#include "roofgen/tensor/ops.hpp"
#include "roofgen/tensor/tensor.hpp"

namespace roofgen::testing {

using tensor::Tensor;

inline Tensor random_tensor(const tensor::Shape& shape, Rng& rng, double scale = 1.0) {
  std::vector<double> v(tensor::numel(shape));
  for (double& x : v) x = scale * rng.normal();
  return Tensor::from(shape, std::move(v), true);
}

struct GradCheckResult {
  double worst = 0.0;  // largest |analytic - numeric| / max(|analytic|, |numeric|, floor)
  std::size_t checked = 0;
  bool ok(double tol = 1e-4) const { return worst <= tol; }
};

/// Central differences with step h against backward(), for every entry of
/// every input. `loss` must rebuild the graph from the inputs on each call.
inline GradCheckResult gradcheck(const std::function<Tensor()>& loss, std::vector<Tensor> inputs,
                                 double h = 1e-5, double floor = 1e-6, std::size_t max_entries = 0) {
  for (Tensor& t : inputs) t.zero_grad();
  tensor::backward(loss());
  std::vector<std::vector<double>> analytic;
  for (const Tensor& t : inputs) analytic.emplace_back(t.grad().begin(), t.grad().end());

  GradCheckResult r;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto data = inputs[k].mutable_data();
    const std::size_t n = max_entries ? std::min(max_entries, data.size()) : data.size();
    const std::size_t stride = max_entries && data.size() > n ? data.size() / n : 1;
    for (std::size_t c = 0, i = 0; c < n && i < data.size(); ++c, i += stride) {
      const double saved = data[i];
      data[i] = saved + h;
      double plus, minus;
      {
        tensor::NoGradGuard g;
        plus = loss().item();
        data[i] = saved - h;
        minus = loss().item();
      }
      data[i] = saved;
      const double numeric = (plus - minus) / (2 * h);
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), floor / 1e-4});
      r.worst = std::max(r.worst, std::abs(a - numeric) / denom);
      ++r.checked;
    }
  }
  return r;
}

/// Weighted sum of all entries with fixed random weights, so every output
/// entry gets a distinct upstream gradient.
inline Tensor probe(const Tensor& y, std::uint64_t seed = 99) {
  Rng rng(seed, y.numel());
  std::vector<double> w(y.numel());
  for (double& x : w) x = rng.normal();
  return tensor::sum(tensor::mul(y, Tensor::from(y.shape(), std::move(w))));
}

}  // namespace roofgen::testing
