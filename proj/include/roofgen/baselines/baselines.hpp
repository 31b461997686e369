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
#include <span>
#include <string_view>
#include <vector>

#include "roofgen/geom/mesh.hpp"
#include "roofgen/metrics/metrics.hpp"
#include "roofgen/model/model.hpp"
#include "roofgen/model/train.hpp"

namespace roofgen::baselines {

enum class BaselineKind { random, feature_knn };
std::string_view to_string(BaselineKind kind);
/// Accepts "random", "knn" and "feature_knn". Throws SpecError otherwise.
BaselineKind parse_baseline_kind(std::string_view name);

/// A prediction for one test example, borrowed from a training example.
struct Retrieval {
  std::size_t test_position = 0;   // position within the test list
  std::size_t train_position = 0;  // position within the train list
};

/// Uniformly random training example per test example. Deterministic in
/// `seed`. Throws EmptyInput if either list is empty.
std::vector<Retrieval> random_baseline(std::span<const model::Example> test, std::span<const model::Example> train,
                                       std::uint64_t seed);

/// Mean-pooled image embedding of a trained encoder.
std::vector<double> encoder_features(const model::MeshModel& encoder, const geom::ImageGrid& image);
/// The image averaged down to an 8x8 grid (64 values), row-major.
/// Throws ShapeError for images smaller than 8x8.
std::vector<double> raw_pixel_features(const geom::ImageGrid& image);

/// Euclidean nearest neighbours in feature space. With k = 1 the nearest
/// training example is returned (ties: lowest position); with k > 1 the
/// medoid of the k nearest in feature space. `encoder` null selects the raw
/// pixel features. Throws EmptyInput, SpecError for k = 0, and ShapeError
/// when the encoder and images disagree on resolution.
std::vector<Retrieval> feature_knn_baseline(std::span<const model::Example> test,
                                            std::span<const model::Example> train,
                                            const model::MeshModel* encoder, std::size_t k = 1);

/// (predicted, truth) pairs in the canonical frame for evaluate_batch.
std::vector<metrics::MeshPair> to_pairs(const std::vector<Retrieval>& picks, std::span<const model::Example> test,
                                        std::span<const model::Example> train);

}  // namespace roofgen::baselines
