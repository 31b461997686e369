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
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roofgen/geom/mesh.hpp"
#include "roofgen/model/config.hpp"
#include "roofgen/model/model.hpp"
#include "roofgen/synthroof/synthroof.hpp"
#include "roofgen/tokenizer/tokenizer.hpp"

namespace roofgen::model {

/// One manifest entry loaded and tokenized.
struct Example {
  std::size_t index = 0;
  geom::ImageGrid image;
  geom::QuantizedMesh quantized;
  geom::Mesh truth;  // canonical frame, [0, 1]^3
  std::vector<int> vertex_tokens;
  std::vector<int> face_tokens;
};

/// Loads every entry of `split` in manifest order. Throws EmptyInput for an
/// empty split and LimitExceeded for meshes over the sequence limits.
std::vector<Example> load_examples(const synthroof::DatasetManifest& manifest, synthroof::Split split,
                                   const tokenizer::SequenceLimits& limits = {});

/// The examples of `split` followed by copies under square symmetries
/// 1 .. symmetries - 1, grouped by symmetry. Each copy is re-rendered from
/// the transformed mesh and keeps its source index. Throws SpecError unless
/// symmetries is 1, 4 or 8.
std::vector<Example> load_augmented_examples(const synthroof::DatasetManifest& manifest, synthroof::Split split,
                                             std::size_t symmetries, const tokenizer::SequenceLimits& limits = {});

struct ExampleLoss {
  Tensor vertex;  // mean per-token NLL of the vertex sequence
  Tensor face;    // mean per-token NLL of the face sequence
};

/// Teacher-forced losses of one example, conditioned on `image`.
ExampleLoss example_loss(const MeshModel& model, const Example& ex, const geom::ImageGrid& image,
                         const ForwardContext& ctx);

/// Token-weighted mean NLL (nats per token) over a set of examples.
struct NllStats {
  double vertex = 0.0;
  double face = 0.0;
  std::size_t vertex_tokens = 0;
  std::size_t face_tokens = 0;
  double total() const { return vertex + face; }
};

/// Eval-mode NLL. With `image_source` set, example i is conditioned on the
/// image of example image_source[i].
NllStats evaluate_nll(const MeshModel& model, std::span<const Example> examples,
                      const std::vector<std::size_t>* image_source = nullptr);

/// Random cyclic permutation (no fixed points) of 0..n-1.
std::vector<std::size_t> derangement(std::size_t n, std::uint64_t seed);

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_nll_vertex = 0.0;
  double train_nll_face = 0.0;
  double val_nll_vertex = 0.0;
  double val_nll_face = 0.0;
  double wallclock_s = 0.0;
};

std::string training_log_header();
std::string training_log_row(const EpochRecord& r);

struct TrainResult {
  MeshModel model;  // best-validation parameters
  std::vector<EpochRecord> log;
  std::size_t best_epoch = 0;  // joint mode; in separate mode the vertex model's
  std::size_t best_face_epoch = 0;
  std::size_t steps = 0;
};

/// Teacher-forced training with Adam, mini-batch gradient accumulation and
/// validation-based early stopping (patience 0 disables it). Deterministic
/// for fixed inputs and configs. Throws EmptyInput for empty splits.
TrainResult train_model(std::span<const Example> train, std::span<const Example> val, const ModelConfig& model,
                        const TrainConfig& schedule,
                        const std::function<void(const EpochRecord&)>& on_epoch = {});

}  // namespace roofgen::model
