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

#include "roofgen/tensor/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>

#include <Eigen/Core>

#include "roofgen/error.hpp"

namespace roofgen::tensor {

namespace {

using MatR = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const MatR>;
using MMap = Eigen::Map<MatR>;
using Strided = Eigen::OuterStride<>;
using CStrided = Eigen::Map<const MatR, 0, Strided>;
using MStrided = Eigen::Map<MatR, 0, Strided>;

Buffer* grad_of(detail::Node& self, std::size_t i) {
  detail::Node& in = *self.inputs[i];
  return in.requires_grad ? &in.ensure_grad() : nullptr;
}

const Buffer& value_of(const detail::Node& self, std::size_t i) {
  return self.inputs[i]->value;
}

[[noreturn]] void mismatch(const char* op, const Tensor& a, const Tensor& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + to_string(a.shape()) + " and " +
                   to_string(b.shape()));
}

void require_rank(const char* op, const Tensor& a, std::size_t rank) {
  if (a.rank() != rank) {
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got shape " +
                     to_string(a.shape()));
  }
}

// Splits a shape around `axis` into (outer, n, inner) extents.
struct AxisSplit {
  std::size_t outer = 1, n = 1, inner = 1;
};

AxisSplit split_axis(const Shape& shape, std::size_t axis, const char* op) {
  if (axis >= shape.size()) {
    throw ShapeError(std::string(op) + ": axis " + std::to_string(axis) + " out of range for shape " +
                     to_string(shape));
  }
  AxisSplit s;
  for (std::size_t i = 0; i < axis; ++i) s.outer *= shape[i];
  s.n = shape[axis];
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s.inner *= shape[i];
  return s;
}

std::size_t last_dim(const Tensor& t) { return t.rank() == 0 ? 1 : t.shape().back(); }

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) mismatch("add", a, b);
  Buffer out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] + b.data()[i];
  return Tensor::make(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (auto* g = grad_of(self, k)) {
        for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
      }
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) mismatch("sub", a, b);
  Buffer out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] - b.data()[i];
  return Tensor::make(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
    if (auto* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
    if (auto* g = grad_of(self, 1)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] -= self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) mismatch("mul", a, b);
  Buffer out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.data()[i] * b.data()[i];
  return Tensor::make(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
    const auto& av = value_of(self, 0);
    const auto& bv = value_of(self, 1);
    if (auto* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * bv[i];
    }
    if (auto* g = grad_of(self, 1)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * av[i];
    }
  });
}

Tensor scale(const Tensor& a, double s) {
  Buffer out(a.data().begin(), a.data().end());
  for (double& v : out) v *= s;
  return Tensor::make(a.shape(), std::move(out), {a}, [s](detail::Node& self) {
    if (auto* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += s * self.grad[i];
    }
  });
}

Tensor add_bias(const Tensor& x, const Tensor& bias) {
  const std::size_t m = last_dim(x);
  if (bias.numel() != m || x.rank() == 0) mismatch("add_bias", x, bias);
  const std::size_t rows = x.numel() / m;
  Buffer out(x.data().begin(), x.data().end());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < m; ++j) out[r * m + j] += bias.data()[j];
  }
  return Tensor::make(x.shape(), std::move(out), {x, bias}, [rows, m](detail::Node& self) {
    if (auto* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
    if (auto* g = grad_of(self, 1)) {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < m; ++j) (*g)[j] += self.grad[r * m + j];
      }
    }
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank("matmul", a, 2);
  require_rank("matmul", b, 2);
  const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(1);
  if (b.dim(0) != k) mismatch("matmul", a, b);
  Buffer out(n * m);
  MMap(out.data(), n, m).noalias() = CMap(a.data().data(), n, k) * CMap(b.data().data(), k, m);
  return Tensor::make({n, m}, std::move(out), {a, b}, [n, k, m](detail::Node& self) {
    CMap dc(self.grad.data(), n, m);
    if (auto* g = grad_of(self, 0)) {
      MMap(g->data(), n, k).noalias() += dc * CMap(value_of(self, 1).data(), k, m).transpose();
    }
    if (auto* g = grad_of(self, 1)) {
      MMap(g->data(), k, m).noalias() += CMap(value_of(self, 0).data(), n, k).transpose() * dc;
    }
  });
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_rank("matmul_nt", a, 2);
  require_rank("matmul_nt", b, 2);
  const std::size_t n = a.dim(0), k = a.dim(1), m = b.dim(0);
  if (b.dim(1) != k) mismatch("matmul_nt", a, b);
  Buffer out(n * m);
  MMap(out.data(), n, m).noalias() = CMap(a.data().data(), n, k) * CMap(b.data().data(), m, k).transpose();
  return Tensor::make({n, m}, std::move(out), {a, b}, [n, k, m](detail::Node& self) {
    CMap dc(self.grad.data(), n, m);
    if (auto* g = grad_of(self, 0)) {
      MMap(g->data(), n, k).noalias() += dc * CMap(value_of(self, 1).data(), m, k);
    }
    if (auto* g = grad_of(self, 1)) {
      MMap(g->data(), m, k).noalias() += dc.transpose() * CMap(value_of(self, 0).data(), n, k);
    }
  });
}

Tensor transpose(const Tensor& a) {
  require_rank("transpose", a, 2);
  const std::size_t n = a.dim(0), m = a.dim(1);
  Buffer out(n * m);
  MMap(out.data(), m, n) = CMap(a.data().data(), n, m).transpose();
  return Tensor::make({m, n}, std::move(out), {a}, [n, m](detail::Node& self) {
    if (auto* g = grad_of(self, 0)) {
      MMap(g->data(), n, m) += CMap(self.grad.data(), m, n).transpose();
    }
  });
}

Tensor reshape(const Tensor& a, const Shape& shape) {
  if (numel(shape) != a.numel()) {
    throw ShapeError("reshape: cannot view " + to_string(a.shape()) + " as " + to_string(shape));
  }
  Buffer out(a.data().begin(), a.data().end());
  return Tensor::make(shape, std::move(out), {a}, [](detail::Node& self) {
    if (auto* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i];
    }
  });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.data()) s += v;
  return Tensor::make({}, {s}, {a}, [](detail::Node& self) {
    if (auto* g = grad_of(self, 0)) {
      for (double& v : *g) v += self.grad[0];
    }
  });
}

Tensor mean(const Tensor& a) {
  if (a.numel() == 0) throw ShapeError("mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.numel()));
}

Tensor relu(const Tensor& a) {
  Buffer out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::max(0.0, a.data()[i]);
  return Tensor::make(a.shape(), std::move(out), {a}, [](detail::Node& self) {
    if (auto* g = grad_of(self, 0)) {
      const auto& x = value_of(self, 0);
      for (std::size_t i = 0; i < g->size(); ++i) {
        if (x[i] > 0.0) (*g)[i] += self.grad[i];
      }
    }
  });
}

Tensor gelu(const Tensor& a) {
  constexpr double c = 0.7978845608028654;  // sqrt(2 / pi)
  constexpr double k = 0.044715;
  Buffer out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = a.data()[i];
    out[i] = 0.5 * x * (1.0 + std::tanh(c * (x + k * x * x * x)));
  }
  return Tensor::make(a.shape(), std::move(out), {a}, [](detail::Node& self) {
    if (auto* g = grad_of(self, 0)) {
      const auto& xs = value_of(self, 0);
      for (std::size_t i = 0; i < g->size(); ++i) {
        const double x = xs[i];
        const double t = std::tanh(c * (x + k * x * x * x));
        const double d = 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * c * (1.0 + 3.0 * k * x * x);
        (*g)[i] += d * self.grad[i];
      }
    }
  });
}

Tensor softmax(const Tensor& a, std::size_t axis) {
  const AxisSplit s = split_axis(a.shape(), axis, "softmax");
  Buffer out(a.numel());
  const auto x = a.data();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      const std::size_t base = o * s.n * s.inner + i;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < s.n; ++j) mx = std::max(mx, x[base + j * s.inner]);
      double z = 0.0;
      for (std::size_t j = 0; j < s.n; ++j) {
        const double e = std::exp(x[base + j * s.inner] - mx);
        out[base + j * s.inner] = e;
        z += e;
      }
      for (std::size_t j = 0; j < s.n; ++j) out[base + j * s.inner] /= z;
    }
  }
  return Tensor::make(a.shape(), std::move(out), {a}, [s](detail::Node& self) {
    auto* g = grad_of(self, 0);
    if (!g) return;
    const auto& y = self.value;
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t i = 0; i < s.inner; ++i) {
        const std::size_t base = o * s.n * s.inner + i;
        double dot = 0.0;
        for (std::size_t j = 0; j < s.n; ++j) dot += self.grad[base + j * s.inner] * y[base + j * s.inner];
        for (std::size_t j = 0; j < s.n; ++j) {
          const std::size_t idx = base + j * s.inner;
          (*g)[idx] += y[idx] * (self.grad[idx] - dot);
        }
      }
    }
  });
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, std::size_t axis, double eps) {
  const AxisSplit s = split_axis(x.shape(), axis, "layer_norm");
  if (gamma.numel() != s.n) mismatch("layer_norm", x, gamma);
  if (beta.numel() != s.n) mismatch("layer_norm", x, beta);
  auto xhat = std::make_shared<Buffer>(x.numel());
  auto inv_std = std::make_shared<Buffer>(s.outer * s.inner);
  Buffer out(x.numel());
  const auto xv = x.data();
  const auto gv = gamma.data();
  const auto bv = beta.data();
  for (std::size_t o = 0; o < s.outer; ++o) {
    for (std::size_t i = 0; i < s.inner; ++i) {
      const std::size_t base = o * s.n * s.inner + i;
      double mu = 0.0;
      for (std::size_t j = 0; j < s.n; ++j) mu += xv[base + j * s.inner];
      mu /= static_cast<double>(s.n);
      double var = 0.0;
      for (std::size_t j = 0; j < s.n; ++j) {
        const double d = xv[base + j * s.inner] - mu;
        var += d * d;
      }
      var /= static_cast<double>(s.n);
      const double is = 1.0 / std::sqrt(var + eps);
      (*inv_std)[o * s.inner + i] = is;
      for (std::size_t j = 0; j < s.n; ++j) {
        const std::size_t idx = base + j * s.inner;
        const double h = (xv[idx] - mu) * is;
        (*xhat)[idx] = h;
        out[idx] = gv[j] * h + bv[j];
      }
    }
  }
  return Tensor::make(x.shape(), std::move(out), {x, gamma, beta}, [s, xhat, inv_std](detail::Node& self) {
    const auto& gv = value_of(self, 1);
    auto* gx = grad_of(self, 0);
    auto* gg = grad_of(self, 1);
    auto* gb = grad_of(self, 2);
    const double n = static_cast<double>(s.n);
    for (std::size_t o = 0; o < s.outer; ++o) {
      for (std::size_t i = 0; i < s.inner; ++i) {
        const std::size_t base = o * s.n * s.inner + i;
        double sum_d = 0.0, sum_dh = 0.0;
        for (std::size_t j = 0; j < s.n; ++j) {
          const std::size_t idx = base + j * s.inner;
          const double dy = self.grad[idx];
          if (gg) (*gg)[j] += dy * (*xhat)[idx];
          if (gb) (*gb)[j] += dy;
          const double dh = dy * gv[j];
          sum_d += dh;
          sum_dh += dh * (*xhat)[idx];
        }
        if (!gx) continue;
        const double is = (*inv_std)[o * s.inner + i];
        for (std::size_t j = 0; j < s.n; ++j) {
          const std::size_t idx = base + j * s.inner;
          const double dh = self.grad[idx] * gv[j];
          (*gx)[idx] += is / n * (n * dh - sum_d - (*xhat)[idx] * sum_dh);
        }
      }
    }
  });
}

Tensor embedding(const Tensor& table, const std::vector<int>& indices) {
  require_rank("embedding", table, 2);
  const std::size_t rows = table.dim(0), width = table.dim(1);
  Buffer out(indices.size() * width);
  for (std::size_t t = 0; t < indices.size(); ++t) {
    const int idx = indices[t];
    if (idx < 0 || static_cast<std::size_t>(idx) >= rows) {
      throw ShapeError("embedding: index " + std::to_string(idx) + " outside table of shape " +
                       to_string(table.shape()));
    }
    std::copy_n(table.data().begin() + static_cast<std::ptrdiff_t>(idx * width), width,
                out.begin() + static_cast<std::ptrdiff_t>(t * width));
  }
  return Tensor::make({indices.size(), width}, std::move(out), {table}, [indices, width](detail::Node& self) {
    if (auto* g = grad_of(self, 0)) {
      for (std::size_t t = 0; t < indices.size(); ++t) {
        const std::size_t row = static_cast<std::size_t>(indices[t]);
        for (std::size_t j = 0; j < width; ++j) (*g)[row * width + j] += self.grad[t * width + j];
      }
    }
  });
}

Tensor concat(const std::vector<Tensor>& parts, std::size_t axis) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  Shape shape = parts[0].shape();
  if (axis >= shape.size()) throw ShapeError("concat: axis out of range for " + to_string(shape));
  std::size_t total = 0;
  for (const Tensor& p : parts) {
    if (p.rank() != shape.size()) mismatch("concat", parts[0], p);
    for (std::size_t d = 0; d < shape.size(); ++d) {
      if (d != axis && p.dim(d) != shape[d]) mismatch("concat", parts[0], p);
    }
    total += p.dim(axis);
  }
  shape[axis] = total;
  const AxisSplit s = split_axis(shape, axis, "concat");
  std::vector<std::size_t> widths;
  for (const Tensor& p : parts) widths.push_back(p.dim(axis) * s.inner);
  const std::size_t row = total * s.inner;
  Buffer out(numel(shape));
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto src = parts[k].data();
    for (std::size_t o = 0; o < s.outer; ++o) {
      std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(o * widths[k]), widths[k],
                  out.begin() + static_cast<std::ptrdiff_t>(o * row + offset));
    }
    offset += widths[k];
  }
  return Tensor::make(shape, std::move(out), parts, [s, widths, row](detail::Node& self) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < widths.size(); ++k) {
      if (auto* g = grad_of(self, k)) {
        for (std::size_t o = 0; o < s.outer; ++o) {
          for (std::size_t j = 0; j < widths[k]; ++j) (*g)[o * widths[k] + j] += self.grad[o * row + off + j];
        }
      }
      off += widths[k];
    }
  });
}

Tensor slice(const Tensor& a, std::size_t axis, std::size_t begin, std::size_t end) {
  const AxisSplit s = split_axis(a.shape(), axis, "slice");
  if (begin > end || end > s.n) {
    throw ShapeError("slice [" + std::to_string(begin) + ", " + std::to_string(end) + ") outside shape " +
                     to_string(a.shape()));
  }
  Shape shape = a.shape();
  shape[axis] = end - begin;
  const std::size_t width = (end - begin) * s.inner;
  const std::size_t row = s.n * s.inner;
  const std::size_t start = begin * s.inner;
  Buffer out(s.outer * width);
  for (std::size_t o = 0; o < s.outer; ++o) {
    std::copy_n(a.data().begin() + static_cast<std::ptrdiff_t>(o * row + start), width,
                out.begin() + static_cast<std::ptrdiff_t>(o * width));
  }
  return Tensor::make(shape, std::move(out), {a}, [s, width, row, start](detail::Node& self) {
    if (auto* g = grad_of(self, 0)) {
      for (std::size_t o = 0; o < s.outer; ++o) {
        for (std::size_t j = 0; j < width; ++j) (*g)[o * row + start + j] += self.grad[o * width + j];
      }
    }
  });
}

Tensor dropout(const Tensor& a, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw SpecError("dropout rate must lie in [0, 1)");
  if (!training || rate == 0.0) return a;
  const double keep = 1.0 / (1.0 - rate);
  auto mask = std::make_shared<Buffer>(a.numel());
  Buffer out(a.numel());
  for (std::size_t i = 0; i < out.size(); ++i) {
    (*mask)[i] = rng.uniform() < rate ? 0.0 : keep;
    out[i] = a.data()[i] * (*mask)[i];
  }
  return Tensor::make(a.shape(), std::move(out), {a}, [mask](detail::Node& self) {
    if (auto* g = grad_of(self, 0)) {
      for (std::size_t i = 0; i < g->size(); ++i) (*g)[i] += self.grad[i] * (*mask)[i];
    }
  });
}

Tensor cross_entropy(const Tensor& logits, const std::vector<int>& targets, int ignore_index) {
  require_rank("cross_entropy", logits, 2);
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  if (targets.size() != n) {
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets for logits of shape " +
                     to_string(logits.shape()));
  }
  auto probs = std::make_shared<Buffer>(n * k);
  const auto x = logits.data();
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = x.data() + r * k;
    const double mx = *std::max_element(row, row + k);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) z += std::exp(row[j] - mx);
    const double log_z = mx + std::log(z);
    for (std::size_t j = 0; j < k; ++j) (*probs)[r * k + j] = std::exp(row[j] - log_z);
    if (targets[r] == ignore_index) continue;
    if (targets[r] < 0 || static_cast<std::size_t>(targets[r]) >= k) {
      throw ShapeError("cross_entropy: target " + std::to_string(targets[r]) + " outside " + std::to_string(k) +
                       " classes");
    }
    total += log_z - row[targets[r]];
    ++count;
  }
  const double loss = count ? total / static_cast<double>(count) : 0.0;
  return Tensor::make({}, {loss}, {logits}, [probs, targets, ignore_index, n, k, count](detail::Node& self) {
    auto* g = grad_of(self, 0);
    if (!g || count == 0) return;
    const double w = self.grad[0] / static_cast<double>(count);
    for (std::size_t r = 0; r < n; ++r) {
      if (targets[r] == ignore_index) continue;
      for (std::size_t j = 0; j < k; ++j) (*g)[r * k + j] += w * (*probs)[r * k + j];
      (*g)[r * k + static_cast<std::size_t>(targets[r])] -= w;
    }
  });
}

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, std::size_t heads, bool causal) {
  require_rank("attention", q, 2);
  require_rank("attention", k, 2);
  require_rank("attention", v, 2);
  const std::size_t lq = q.dim(0), lk = k.dim(0), d = q.dim(1);
  if (k.dim(1) != d) mismatch("attention", q, k);
  if (v.shape() != k.shape()) mismatch("attention", k, v);
  if (heads == 0 || d % heads != 0) throw ShapeError("attention: " + std::to_string(heads) + " heads do not divide width " + std::to_string(d));
  const std::size_t dh = d / heads;
  const double sc = 1.0 / std::sqrt(static_cast<double>(dh));

  // Attention weights per head, kept for the backward pass.
  auto weights = std::make_shared<Buffer>(heads * lq * lk);
  Buffer out(lq * d);
  for (std::size_t h = 0; h < heads; ++h) {
    CStrided qh(q.data().data() + h * dh, lq, dh, Strided(d));
    CStrided kh(k.data().data() + h * dh, lk, dh, Strided(d));
    CStrided vh(v.data().data() + h * dh, lk, dh, Strided(d));
    MMap p(weights->data() + h * lq * lk, lq, lk);
    p.noalias() = (qh * kh.transpose()) * sc;
    for (std::size_t i = 0; i < lq; ++i) {
      const std::size_t visible = causal ? std::min(lk, i + 1) : lk;
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < visible; ++j) mx = std::max(mx, p(i, j));
      double z = 0.0;
      for (std::size_t j = 0; j < visible; ++j) {
        p(i, j) = std::exp(p(i, j) - mx);
        z += p(i, j);
      }
      for (std::size_t j = 0; j < visible; ++j) p(i, j) /= z;
      for (std::size_t j = visible; j < lk; ++j) p(i, j) = 0.0;
    }
    MStrided oh(out.data() + h * dh, lq, dh, Strided(d));
    oh.noalias() = p * vh;
  }

  return Tensor::make({lq, d}, std::move(out), {q, k, v}, [=](detail::Node& self) {
    auto* gq = grad_of(self, 0);
    auto* gk = grad_of(self, 1);
    auto* gv = grad_of(self, 2);
    const auto& qv = value_of(self, 0);
    const auto& kv = value_of(self, 1);
    const auto& vv = value_of(self, 2);
    MatR dp(lq, lk);
    for (std::size_t h = 0; h < heads; ++h) {
      CMap p(weights->data() + h * lq * lk, lq, lk);
      CStrided doh(self.grad.data() + h * dh, lq, dh, Strided(d));
      CStrided qh(qv.data() + h * dh, lq, dh, Strided(d));
      CStrided kh(kv.data() + h * dh, lk, dh, Strided(d));
      CStrided vh(vv.data() + h * dh, lk, dh, Strided(d));
      if (gv) MStrided(gv->data() + h * dh, lk, dh, Strided(d)).noalias() += p.transpose() * doh;
      if (!gq && !gk) continue;
      dp.noalias() = doh * vh.transpose();
      // Softmax backward, folded with the 1/sqrt(dh) scale.
      for (std::size_t i = 0; i < lq; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < lk; ++j) dot += dp(i, j) * p(i, j);
        for (std::size_t j = 0; j < lk; ++j) dp(i, j) = p(i, j) * (dp(i, j) - dot) * sc;
      }
      if (gq) MStrided(gq->data() + h * dh, lq, dh, Strided(d)).noalias() += dp * kh;
      if (gk) MStrided(gk->data() + h * dh, lk, dh, Strided(d)).noalias() += dp.transpose() * qh;
    }
  });
}

Tensor conv2d(const Tensor& x, const Tensor& w, const Tensor& b, std::size_t stride, std::size_t pad) {
  require_rank("conv2d", x, 3);
  require_rank("conv2d", w, 4);
  const std::size_t c = x.dim(0), hin = x.dim(1), win = x.dim(2);
  const std::size_t o = w.dim(0), ksz = w.dim(2);
  if (w.dim(1) != c || w.dim(3) != ksz) mismatch("conv2d", x, w);
  if (b.numel() != o) mismatch("conv2d", w, b);
  if (stride == 0 || hin + 2 * pad < ksz || win + 2 * pad < ksz) {
    throw ShapeError("conv2d: kernel " + to_string(w.shape()) + " does not fit input " + to_string(x.shape()));
  }
  const std::size_t hout = (hin + 2 * pad - ksz) / stride + 1;
  const std::size_t wout = (win + 2 * pad - ksz) / stride + 1;
  const std::size_t patch = c * ksz * ksz;
  const std::size_t cells = hout * wout;

  // im2col: one column per output cell.
  auto cols = std::make_shared<Buffer>(patch * cells, 0.0);
  const auto xv = x.data();
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t ky = 0; ky < ksz; ++ky) {
      for (std::size_t kx = 0; kx < ksz; ++kx) {
        const std::size_t prow = (ch * ksz + ky) * ksz + kx;
        for (std::size_t oy = 0; oy < hout; ++oy) {
          const long iy = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
          if (iy < 0 || iy >= static_cast<long>(hin)) continue;
          for (std::size_t ox = 0; ox < wout; ++ox) {
            const long ix = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
            if (ix < 0 || ix >= static_cast<long>(win)) continue;
            (*cols)[prow * cells + oy * wout + ox] = xv[(ch * hin + iy) * win + ix];
          }
        }
      }
    }
  }
  Buffer out(o * cells);
  MMap om(out.data(), o, cells);
  om.noalias() = CMap(w.data().data(), o, patch) * CMap(cols->data(), patch, cells);
  for (std::size_t r = 0; r < o; ++r) om.row(r).array() += b.data()[r];

  return Tensor::make({o, hout, wout}, std::move(out), {x, w, b}, [=](detail::Node& self) {
    CMap dout(self.grad.data(), o, cells);
    if (auto* gw = grad_of(self, 1)) {
      MMap(gw->data(), o, patch).noalias() += dout * CMap(cols->data(), patch, cells).transpose();
    }
    if (auto* gb = grad_of(self, 2)) {
      for (std::size_t r = 0; r < o; ++r) (*gb)[r] += dout.row(r).sum();
    }
    if (auto* gx = grad_of(self, 0)) {
      MatR dcols = CMap(value_of(self, 1).data(), o, patch).transpose() * dout;
      for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t ky = 0; ky < ksz; ++ky) {
          for (std::size_t kx = 0; kx < ksz; ++kx) {
            const std::size_t prow = (ch * ksz + ky) * ksz + kx;
            for (std::size_t oy = 0; oy < hout; ++oy) {
              const long iy = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
              if (iy < 0 || iy >= static_cast<long>(hin)) continue;
              for (std::size_t ox = 0; ox < wout; ++ox) {
                const long ix = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
                if (ix < 0 || ix >= static_cast<long>(win)) continue;
                (*gx)[(ch * hin + iy) * win + ix] += dcols(prow, oy * wout + ox);
              }
            }
          }
        }
      }
    }
  });
}

}  // namespace roofgen::tensor
