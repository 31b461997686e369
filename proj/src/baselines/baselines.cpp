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

#include "roofgen/baselines/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "roofgen/error.hpp"
#include "roofgen/rng.hpp"

namespace roofgen::baselines {

namespace {

constexpr int kRawGrid = 8;

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void require_nonempty(std::span<const model::Example> test, std::span<const model::Example> train) {
  if (train.empty()) throw EmptyInput("training split is empty");
  if (test.empty()) throw EmptyInput("test split is empty");
}

}  // namespace

std::string_view to_string(BaselineKind kind) {
  return kind == BaselineKind::random ? "random" : "feature_knn";
}

BaselineKind parse_baseline_kind(std::string_view name) {
  if (name == "random") return BaselineKind::random;
  if (name == "knn" || name == "feature_knn") return BaselineKind::feature_knn;
  throw SpecError("unknown baseline '" + std::string(name) + "' (expected random or knn)");
}

std::vector<Retrieval> random_baseline(std::span<const model::Example> test, std::span<const model::Example> train,
                                       std::uint64_t seed) {
  require_nonempty(test, train);
  Rng rng(seed, 0x7a2d);
  std::vector<Retrieval> out;
  out.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) out.push_back({i, static_cast<std::size_t>(rng.below(train.size()))});
  return out;
}

std::vector<double> encoder_features(const model::MeshModel& encoder, const geom::ImageGrid& image) {
  tensor::NoGradGuard no_grad;
  const model::ImageEmbedding emb = encoder.encode_image(image);
  const std::size_t cells = emb.cells();
  const std::size_t h = emb.features.dim(1);
  const auto data = emb.features.data();
  std::vector<double> f(h, 0.0);
  for (std::size_t c = 0; c < cells; ++c) {
    for (std::size_t j = 0; j < h; ++j) f[j] += data[c * h + j];
  }
  for (double& v : f) v /= static_cast<double>(cells);
  return f;
}

std::vector<double> raw_pixel_features(const geom::ImageGrid& image) {
  if (image.width < kRawGrid || image.height < kRawGrid) {
    throw ShapeError("raw pixel features need at least 8x8 pixels, got " + std::to_string(image.width) + "x" +
                     std::to_string(image.height));
  }
  std::vector<double> f(kRawGrid * kRawGrid, 0.0);
  for (int br = 0; br < kRawGrid; ++br) {
    const int r0 = br * image.height / kRawGrid;
    const int r1 = (br + 1) * image.height / kRawGrid;
    for (int bc = 0; bc < kRawGrid; ++bc) {
      const int c0 = bc * image.width / kRawGrid;
      const int c1 = (bc + 1) * image.width / kRawGrid;
      double s = 0.0;
      for (int r = r0; r < r1; ++r) {
        for (int c = c0; c < c1; ++c) s += image.at(r, c);
      }
      f[static_cast<std::size_t>(br * kRawGrid + bc)] = s / static_cast<double>((r1 - r0) * (c1 - c0));
    }
  }
  return f;
}

std::vector<Retrieval> feature_knn_baseline(std::span<const model::Example> test,
                                            std::span<const model::Example> train,
                                            const model::MeshModel* encoder, std::size_t k) {
  require_nonempty(test, train);
  if (k == 0) throw SpecError("k must be at least 1");
  auto features = [&](const geom::ImageGrid& img) {
    return encoder ? encoder_features(*encoder, img) : raw_pixel_features(img);
  };
  std::vector<std::vector<double>> bank;
  bank.reserve(train.size());
  for (const auto& ex : train) bank.push_back(features(ex.image));
  const std::size_t kk = std::min(k, train.size());

  std::vector<Retrieval> out;
  out.reserve(test.size());
  std::vector<std::size_t> idx(train.size());
  std::vector<double> dist(train.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    const std::vector<double> q = features(test[i].image);
    if (q.size() != bank.front().size()) throw ShapeError("feature dimensions differ between test and train");
    for (std::size_t j = 0; j < train.size(); ++j) dist[j] = squared_distance(q, bank[j]);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(kk), idx.end(),
                      [&](std::size_t a, std::size_t b) { return dist[a] < dist[b] || (dist[a] == dist[b] && a < b); });
    std::size_t pick = idx[0];
    if (kk > 1) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < kk; ++a) {
        double s = 0.0;
        for (std::size_t b = 0; b < kk; ++b) s += std::sqrt(squared_distance(bank[idx[a]], bank[idx[b]]));
        if (s < best || (s == best && idx[a] < pick)) {
          best = s;
          pick = idx[a];
        }
      }
    }
    out.push_back({i, pick});
  }
  return out;
}

std::vector<metrics::MeshPair> to_pairs(const std::vector<Retrieval>& picks, std::span<const model::Example> test,
                                        std::span<const model::Example> train) {
  std::vector<metrics::MeshPair> out;
  out.reserve(picks.size());
  for (const Retrieval& r : picks) out.emplace_back(train[r.train_position].truth, test[r.test_position].truth);
  return out;
}

}  // namespace roofgen::baselines
