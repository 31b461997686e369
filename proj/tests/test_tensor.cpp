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

#include <doctest.h>

#include <cmath>
#include <cstring>

#include "gradcheck.hpp"
#include "gradcheck_suite.hpp"
#include "roofgen/error.hpp"
#include "roofgen/tensor/adam.hpp"
#include "roofgen/tensor/checkpoint.hpp"

using namespace roofgen;
using namespace roofgen::tensor;
using roofgen::testing::gradcheck;
using roofgen::testing::probe;
using roofgen::testing::random_tensor;

TEST_CASE("forward values") {
  SUBCASE("softmax of equal logits") {
    const Tensor s = softmax(Tensor::from({1, 3}, {0, 0, 0}), 1);
    for (double v : s.data()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("cross entropy of uniform logits") {
    const Tensor l = Tensor::zeros({3, 7});
    CHECK(cross_entropy(l, {0, 3, 6}).item() == doctest::Approx(std::log(7.0)).epsilon(1e-14));
    CHECK(cross_entropy(l, {-1, -1, -1}, -1).item() == 0.0);
  }
  SUBCASE("matmul shape") {
    CHECK(matmul(Tensor::zeros({2, 3}), Tensor::zeros({3, 4})).shape() == Shape{2, 4});
    CHECK_THROWS_AS(matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 4})), ShapeError);
    CHECK_THROWS_AS(add(Tensor::zeros({2, 3}), Tensor::zeros({3, 2})), ShapeError);
  }
  SUBCASE("softmax rows sum to one") {
    Rng rng(1);
    const Tensor s = softmax(random_tensor({6, 8}, rng, 5.0), 1);
    for (std::size_t r = 0; r < 6; ++r) {
      double t = 0.0;
      for (std::size_t c = 0; c < 8; ++c) {
        CHECK(s.data()[r * 8 + c] >= 0.0);
        t += s.data()[r * 8 + c];
      }
      CHECK(std::abs(t - 1.0) < 1e-12);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(Tensor::from({2, 2}, {1, 2, 3}), ShapeError);
    CHECK_THROWS_AS(backward(Tensor::zeros({2}, true)), ShapeError);
    CHECK_THROWS_AS(embedding(Tensor::zeros({3, 2}), {3}), ShapeError);
  }
}

TEST_CASE("analytic gradients") {
  Tensor p = Tensor::from({3}, {1.0, -2.0, 0.5}, true);
  backward(sum(p));
  for (double g : p.grad()) CHECK(g == 1.0);
  p.zero_grad();
  backward(sum(mul(p, p)));
  CHECK(p.grad()[0] == 2.0);
  CHECK(p.grad()[1] == -4.0);
  CHECK(p.grad()[2] == 1.0);
}

TEST_CASE("finite-difference gradient checks for every op") {
  const auto results = roofgen::testing::check_all_ops();
  CHECK(results.size() >= 25);
  for (const auto& [name, r] : results) {
    INFO(name);
    CHECK(r.checked > 0);
    CHECK(r.worst <= 1e-4);
  }
}

TEST_CASE("attention masking") {
  Rng rng(3);
  const Tensor q = random_tensor({4, 4}, rng);
  const Tensor k = random_tensor({4, 4}, rng);
  Tensor v = random_tensor({4, 4}, rng);
  const Tensor before = attention(q, k, v, 2, true);
  v.mutable_data()[3 * 4 + 1] += 10.0;  // last key's value
  const Tensor after = attention(q, k, v, 2, true);
  for (std::size_t i = 0; i < 12; ++i) CHECK(before.data()[i] == after.data()[i]);
  CHECK(before.data()[13] != after.data()[13]);
}

TEST_CASE("dropout") {
  Rng rng(8);
  const Tensor ones = Tensor::full({100000}, 1.0);
  SUBCASE("eval mode is the identity") {
    const Tensor y = dropout(ones, 0.5, false, rng);
    CHECK(y.node() == ones.node());
  }
  SUBCASE("train mode preserves the mean") {
    const double rate = 0.3;
    const Tensor y = dropout(ones, rate, true, rng);
    double s = 0.0;
    for (double v : y.data()) s += v;
    const double n = 100000.0;
    // Each output is 1/(1-rate) with probability 1-rate: sd = sqrt(rate/(1-rate)).
    const double sd_mean = std::sqrt(rate / (1 - rate) / n);
    CHECK(std::abs(s / n - 1.0) < 3 * sd_mean);
  }
  CHECK_THROWS_AS(dropout(ones, 1.0, true, rng), SpecError);
}

TEST_CASE("adam") {
  SUBCASE("zero gradient leaves parameters") {
    std::vector<Tensor> ps{Tensor::from({2}, {1.0, 2.0}, true)};
    ps[0].zero_grad();
    AdamState st{{}, {}, {}, 0};
    adam_step(ps, st);
    CHECK(ps[0].data()[0] == 1.0);
    CHECK(ps[0].data()[1] == 2.0);
  }
  SUBCASE("hand recurrence") {
    const AdamConfig cfg{0.01, 0.9, 0.99, 1e-8};
    std::vector<Tensor> ps{Tensor::scalar(0.5, true)};
    AdamState st{cfg, {}, {}, 0};
    double m = 0, v = 0, p = 0.5;
    for (int t = 1; t <= 5; ++t) {
      const double g = 0.3;
      ps[0].grad_storage()[0] = g;
      adam_step(ps, st);
      m = 0.9 * m + 0.1 * g;
      v = 0.99 * v + 0.01 * g * g;
      const double mh = m / (1 - std::pow(0.9, t));
      const double vh = v / (1 - std::pow(0.99, t));
      p -= 0.01 * mh / (std::sqrt(vh) + 1e-8);
      CHECK(std::abs(ps[0].item() - p) < 1e-12);
      if (t == 1) CHECK(std::abs(ps[0].item() - (0.5 - 0.01)) < 1e-9);
    }
  }
  SUBCASE("missing gradient") {
    std::vector<Tensor> ps{Tensor::scalar(1.0, true)};
    AdamState st{{}, {}, {}, 0};
    CHECK_THROWS_AS(adam_step(ps, st), MissingGrad);
  }
  SUBCASE("deterministic") {
    auto run = [] {
      Rng rng(77);
      std::vector<Tensor> ps{random_tensor({3, 3}, rng)};
      AdamState st{{0.1, 0.9, 0.99, 1e-8}, {}, {}, 0};
      for (int i = 0; i < 10; ++i) {
        ps[0].zero_grad();
        backward(sum(mul(ps[0], ps[0])));
        adam_step(ps, st);
      }
      return std::vector<double>(ps[0].data().begin(), ps[0].data().end());
    };
    const auto a = run();
    const auto b = run();
    CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
  }
}

TEST_CASE("checkpoint round trip is bit exact") {
  Rng rng(12);
  NamedTensors ts{{"a", random_tensor({2, 3}, rng)}, {"b", Tensor::from({1}, {-0.0})}, {"c", random_tensor({4}, rng)}};
  ts[2].second.mutable_data()[0] = 1e-310;  // subnormal
  const nlohmann::json meta{{"seed", 3}, {"init", "normal"}};
  const std::string bytes = serialize_checkpoint(meta, ts);
  const Checkpoint ck = parse_checkpoint(bytes);
  CHECK(ck.meta == meta);
  REQUIRE(ck.tensors.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(ck.tensors[i].first == ts[i].first);
    CHECK(ck.tensors[i].second.shape() == ts[i].second.shape());
    const auto x = ck.tensors[i].second.data();
    const auto y = ts[i].second.data();
    CHECK(std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0);
  }
  CHECK(serialize_checkpoint(ck.meta, ck.tensors) == bytes);
  CHECK_THROWS_AS(parse_checkpoint(bytes.substr(0, bytes.size() - 3)), ParseError);
  CHECK_THROWS_AS(parse_checkpoint(bytes + "x"), ParseError);
  CHECK_THROWS_AS(parse_checkpoint("{}"), ParseError);
}
