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
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "roofgen/geom/mesh.hpp"
#include "roofgen/model/config.hpp"
#include "roofgen/model/layers.hpp"
#include "roofgen/tensor/checkpoint.hpp"

namespace roofgen::model {

/// Image features: one hidden_dim row per cell of the encoder's final
/// feature map, row-major over (row, col).
struct ImageEmbedding {
  Tensor features;  // (cells, hidden_dim)
  std::size_t cells() const { return features.dim(0); }
};

/// Vertex-model input token that starts every shifted sequence.
inline constexpr int kVertexStart = 257;

/// Image-conditioned vertex model plus the vertex-conditioned pointer
/// face model. Logit row t always scores token t given tokens before t
/// (teacher forcing); token t itself is never read, so callers sampling
/// position t may pass any placeholder there.
class MeshModel {
 public:
  MeshModel(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  std::uint64_t seed() const { return seed_; }

  /// Throws ShapeError unless the grid is image_resolution square.
  ImageEmbedding encode_image(const geom::ImageGrid& grid, const ForwardContext& ctx = {}) const;

  /// (L, 257) logits. Throws LimitExceeded for L > max_vertex_tokens and
  /// GrammarError for out-of-vocabulary tokens.
  Tensor vertex_logits(const std::vector<int>& tokens, const ImageEmbedding& image,
                       const ForwardContext& ctx = {}) const;

  /// Contextual vertex embeddings (V, hidden_dim) from the face encoder.
  Tensor encode_vertices(const std::vector<geom::LatticePoint>& vertices, const ForwardContext& ctx = {}) const;
  /// (L, V + 2) logits indexed like face tokens: STOP, NEWFACE, pointers.
  Tensor face_logits_from_context(const std::vector<int>& tokens, const Tensor& vertex_context,
                                  const ForwardContext& ctx = {}) const;
  /// Throws GrammarError for a pointer outside the vertex list and
  /// SpecError for fewer than 3 vertices.
  Tensor face_logits(const std::vector<int>& tokens, const std::vector<geom::LatticePoint>& vertices,
                     const ForwardContext& ctx = {}) const;

  const tensor::NamedTensors& named_parameters() const { return store_.named(); }
  std::vector<Tensor> parameters() const { return store_.list(); }
  std::vector<Tensor> vertex_parameters() const;
  std::vector<Tensor> face_parameters() const;

  /// Header metadata: model config, seed and initialization scheme.
  nlohmann::json metadata() const;
  void save(const std::filesystem::path& path, const nlohmann::json& extra = {}) const;
  static MeshModel from_checkpoint(const tensor::Checkpoint& ck);
  static MeshModel load(const std::filesystem::path& path);

 private:
  struct EncoderBlock {
    Tensor conv_a_w, conv_a_b, conv_b_w, conv_b_b, skip_w, skip_b;
  };

  ModelConfig config_;
  std::uint64_t seed_;
  ParamStore store_;

  std::vector<EncoderBlock> encoder_blocks_;
  Tensor cell_embedding_;
  Linear image_projection_;

  Tensor vertex_token_;
  Tensor vertex_position_;
  Tensor vertex_axis_;
  TransformerStack vertex_decoder_;
  Linear vertex_head_;
  std::size_t vertex_param_count_ = 0;

  Tensor coord_x_, coord_y_, coord_z_;
  Tensor vertex_index_;
  TransformerStack face_encoder_;
  Tensor face_special_in_;
  Tensor face_special_out_;
  Tensor face_position_;
  Tensor face_slot_;
  TransformerStack face_decoder_;
  Linear pointer_projection_;
};

}  // namespace roofgen::model
