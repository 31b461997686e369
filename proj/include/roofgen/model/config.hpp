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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "roofgen/tensor/adam.hpp"

namespace roofgen::model {

struct StackConfig {
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t feedforward = 256;
};

struct ModelConfig {
  std::size_t hidden_dim = 128;
  StackConfig vertex_decoder{3, 4, 256};
  StackConfig face_encoder{2, 4, 256};
  StackConfig face_decoder{2, 4, 256};
  double dropout_image_encoder = 0.1;
  double dropout_vertex_and_face_encoder = 0.1;
  double dropout_face_decoder = 0.1;
  int image_resolution = 32;
  /// Output channels of each stride-2 residual block of the image encoder.
  std::vector<std::size_t> encoder_channels{16, 32, 64};
  std::size_t max_vertex_tokens = 100;
  std::size_t max_face_tokens = 1600;
  /// Learned index embeddings on the face-encoder input. Disabling them makes
  /// the face model equivariant to vertex permutations.
  bool face_encoder_positions = true;
  double init_scale = 0.02;

  /// Throws SpecError on non-positive sizes or heads not dividing hidden_dim.
  void validate() const;
  std::size_t max_vertices() const { return (max_vertex_tokens + 2) / 3; }
  /// Side of the final image feature map.
  int feature_side() const;
};

struct TrainConfig {
  tensor::AdamConfig adam{1e-3, 0.9, 0.99, 1e-8};
  std::size_t max_epochs = 25;
  std::size_t patience = 5;
  std::size_t batch_size = 8;
  std::uint64_t seed = 0;
  /// Joint training sums both losses; otherwise each model gets its own
  /// optimizer and loss.
  bool joint = true;
  /// Stop after this many optimizer steps (0 = no limit).
  std::size_t max_steps = 0;
  /// Square symmetries the training split is augmented with: 1 (none), 4
  /// (quarter turns) or 8 (quarter turns and mirrors).
  std::size_t symmetries = 1;
};

/// Named presets: "tiny" (tests), "toy" (desk-scale experiments) and
/// "paper" (full-size architecture and optimizer settings).
struct Preset {
  ModelConfig model;
  TrainConfig train;
};
Preset preset(const std::string& name);
std::vector<std::string> preset_names();

nlohmann::json to_json(const ModelConfig& c);
ModelConfig model_config_from_json(const nlohmann::json& j);
/// Overrides the fields present in `j`; validates the result.
ModelConfig merge_model_config(ModelConfig base, const nlohmann::json& j);
nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);
TrainConfig merge_train_config(TrainConfig base, const nlohmann::json& j);

}  // namespace roofgen::model
