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

#include "roofgen/model/model.hpp"

#include <algorithm>

#include "roofgen/error.hpp"
#include "roofgen/tensor/ops.hpp"
#include "roofgen/tokenizer/tokenizer.hpp"

namespace roofgen::model {

namespace ops = tensor;
using nlohmann::json;

namespace {

constexpr int kFaceStartRow = 2;  // STOP, NEWFACE, START rows of the input table
constexpr std::size_t kLattice = geom::kLatticeMax + 1;

}  // namespace

MeshModel::MeshModel(const ModelConfig& config, std::uint64_t seed)
    : config_(config), seed_(seed), store_(seed, config.init_scale) {
  config_.validate();
  const std::size_t h = config_.hidden_dim;

  std::size_t in = 1;
  for (std::size_t i = 0; i < config_.encoder_channels.size(); ++i) {
    const std::size_t out = config_.encoder_channels[i];
    const std::string n = "image.block" + std::to_string(i);
    EncoderBlock b;
    b.conv_a_w = store_.he_normal(n + ".conv_a.weight", {out, in, 3, 3}, in * 9);
    b.conv_a_b = store_.constant(n + ".conv_a.bias", {out}, 0.0);
    b.conv_b_w = store_.he_normal(n + ".conv_b.weight", {out, out, 3, 3}, out * 9);
    b.conv_b_b = store_.constant(n + ".conv_b.bias", {out}, 0.0);
    b.skip_w = store_.he_normal(n + ".skip.weight", {out, in, 1, 1}, in);
    b.skip_b = store_.constant(n + ".skip.bias", {out}, 0.0);
    encoder_blocks_.push_back(b);
    in = out;
  }
  const auto side = static_cast<std::size_t>(config_.feature_side());
  cell_embedding_ = store_.normal("image.cell_embedding", {side * side, in});
  image_projection_ = Linear(store_, "image.projection", in, h);

  vertex_token_ = store_.normal("vertex.token_embedding", {static_cast<std::size_t>(kVertexStart) + 1, h});
  vertex_position_ = store_.normal("vertex.position_embedding", {config_.max_vertex_tokens, h});
  vertex_axis_ = store_.normal("vertex.axis_embedding", {3, h});
  vertex_decoder_ = TransformerStack(store_, "vertex.decoder", h, config_.vertex_decoder, true);
  vertex_head_ = Linear(store_, "vertex.head", h, tokenizer::kVertexVocab);
  vertex_param_count_ = store_.named().size();

  coord_x_ = store_.normal("face.coord_x", {kLattice, h});
  coord_y_ = store_.normal("face.coord_y", {kLattice, h});
  coord_z_ = store_.normal("face.coord_z", {kLattice, h});
  if (config_.face_encoder_positions) {
    vertex_index_ = store_.normal("face.vertex_index_embedding", {config_.max_vertices(), h});
  }
  face_encoder_ = TransformerStack(store_, "face.encoder", h, config_.face_encoder, false);
  face_special_in_ = store_.normal("face.special_input", {3, h});
  face_special_out_ = store_.normal("face.special_output", {2, h});
  face_position_ = store_.normal("face.position_embedding", {config_.max_face_tokens, h});
  face_slot_ = store_.normal("face.slot_embedding", {4, h});
  face_decoder_ = TransformerStack(store_, "face.decoder", h, config_.face_decoder, true);
  pointer_projection_ = Linear(store_, "face.pointer_projection", h, h);
}

ImageEmbedding MeshModel::encode_image(const geom::ImageGrid& grid, const ForwardContext& ctx) const {
  const int r = config_.image_resolution;
  if (grid.width != r || grid.height != r) {
    throw ShapeError("image is " + std::to_string(grid.width) + "x" + std::to_string(grid.height) +
                     ", model expects " + std::to_string(r) + "x" + std::to_string(r));
  }
  std::vector<double> centered(grid.pixels.size());
  std::transform(grid.pixels.begin(), grid.pixels.end(), centered.begin(),
                 [](double p) { return 2.0 * p - 1.0; });
  const auto ur = static_cast<std::size_t>(r);
  Tensor x = Tensor::from({1, ur, ur}, std::move(centered));
  for (const EncoderBlock& b : encoder_blocks_) {
    const Tensor a = ops::gelu(ops::conv2d(x, b.conv_a_w, b.conv_a_b, 2, 1));
    const Tensor main = ops::conv2d(a, b.conv_b_w, b.conv_b_b, 1, 1);
    const Tensor skip = ops::conv2d(x, b.skip_w, b.skip_b, 2, 0);
    x = ops::gelu(ops::add(main, skip));
  }
  const std::size_t c = x.dim(0);
  const std::size_t cells = x.dim(1) * x.dim(2);
  Tensor rows = ops::transpose(ops::reshape(x, {c, cells}));
  rows = ops::add(rows, cell_embedding_);
  rows = ctx.dropout(rows, config_.dropout_image_encoder);
  return {image_projection_(rows)};
}

Tensor MeshModel::vertex_logits(const std::vector<int>& tokens, const ImageEmbedding& image,
                                const ForwardContext& ctx) const {
  const std::size_t n = tokens.size();
  if (n == 0) throw SpecError("vertex_logits needs at least one position");
  if (n > config_.max_vertex_tokens) {
    throw LimitExceeded("vertex sequence too long", n, config_.max_vertex_tokens);
  }
  std::vector<int> input(n), positions(n), axes(n);
  input[0] = kVertexStart;
  for (std::size_t t = 0; t < n; ++t) {
    const int tok = tokens[t];
    if (tok < 0 || tok >= tokenizer::kVertexVocab) throw GrammarError("vertex token out of range", t);
    if (t + 1 < n) input[t + 1] = tok;
    positions[t] = static_cast<int>(t);
    axes[t] = static_cast<int>(t % 3);
  }
  Tensor x = ops::add(ops::add(ops::embedding(vertex_token_, input), ops::embedding(vertex_position_, positions)),
                      ops::embedding(vertex_axis_, axes));
  const double rate = config_.dropout_vertex_and_face_encoder;
  x = ctx.dropout(x, rate);
  const Tensor h = vertex_decoder_(x, &image.features, true, rate, ctx);
  return vertex_head_(h);
}

Tensor MeshModel::encode_vertices(const std::vector<geom::LatticePoint>& vertices, const ForwardContext& ctx) const {
  const std::size_t v = vertices.size();
  if (v == 0) throw SpecError("encode_vertices needs at least one vertex");
  if (v > config_.max_vertices()) throw LimitExceeded("too many vertices", v, config_.max_vertices());
  std::vector<int> xs(v), ys(v), zs(v), idx(v);
  for (std::size_t i = 0; i < v; ++i) {
    const geom::LatticePoint& p = vertices[i];
    if (p.x < 0 || p.y < 0 || p.z < 0 || p.x > geom::kLatticeMax || p.y > geom::kLatticeMax || p.z > geom::kLatticeMax) {
      throw SpecError("vertex outside the lattice");
    }
    xs[i] = p.x;
    ys[i] = p.y;
    zs[i] = p.z;
    idx[i] = static_cast<int>(i);
  }
  Tensor x = ops::add(ops::add(ops::embedding(coord_x_, xs), ops::embedding(coord_y_, ys)),
                      ops::embedding(coord_z_, zs));
  if (config_.face_encoder_positions) x = ops::add(x, ops::embedding(vertex_index_, idx));
  const double rate = config_.dropout_vertex_and_face_encoder;
  x = ctx.dropout(x, rate);
  return face_encoder_(x, nullptr, false, rate, ctx);
}

Tensor MeshModel::face_logits_from_context(const std::vector<int>& tokens, const Tensor& vertex_context,
                                           const ForwardContext& ctx) const {
  const std::size_t n = tokens.size();
  const auto v = static_cast<int>(vertex_context.dim(0));
  if (n == 0) throw SpecError("face_logits needs at least one position");
  if (n > config_.max_face_tokens) throw LimitExceeded("face sequence too long", n, config_.max_face_tokens);

  // Input rows: 0 STOP, 1 NEWFACE, 2 START, 3.. vertices (pointer k -> k + 1).
  std::vector<int> rows(n), positions(n), slots(n);
  rows[0] = kFaceStartRow;
  int in_face = 0;
  for (std::size_t t = 0; t < n; ++t) {
    positions[t] = static_cast<int>(t);
    slots[t] = std::min(in_face, 3);
    const int tok = tokens[t];
    const bool special = tok == tokenizer::kFaceStop || tok == tokenizer::kNewFace;
    if (!special && (tok < tokenizer::kPointerOffset || tok >= v + tokenizer::kPointerOffset)) {
      throw GrammarError("pointer " + std::to_string(tok) + " outside a list of " + std::to_string(v) + " vertices",
                         t);
    }
    if (t + 1 == n) break;
    rows[t + 1] = special ? tok : tok + 1;
    in_face = special ? 0 : in_face + 1;
  }
  const Tensor table = ops::concat({face_special_in_, vertex_context}, 0);
  Tensor x = ops::add(ops::add(ops::embedding(table, rows), ops::embedding(face_position_, positions)),
                      ops::embedding(face_slot_, slots));
  const double rate = config_.dropout_face_decoder;
  x = ctx.dropout(x, rate);
  const Tensor h = face_decoder_(x, &vertex_context, true, rate, ctx);
  const Tensor targets = ops::concat({face_special_out_, vertex_context}, 0);
  return ops::matmul_nt(pointer_projection_(h), targets);
}

Tensor MeshModel::face_logits(const std::vector<int>& tokens, const std::vector<geom::LatticePoint>& vertices,
                              const ForwardContext& ctx) const {
  if (vertices.size() < 3) throw SpecError("face model needs at least 3 vertices");
  return face_logits_from_context(tokens, encode_vertices(vertices, ctx), ctx);
}

std::vector<Tensor> MeshModel::vertex_parameters() const {
  const auto all = store_.list();
  return {all.begin(), all.begin() + static_cast<std::ptrdiff_t>(vertex_param_count_)};
}

std::vector<Tensor> MeshModel::face_parameters() const {
  const auto all = store_.list();
  return {all.begin() + static_cast<std::ptrdiff_t>(vertex_param_count_), all.end()};
}

json MeshModel::metadata() const {
  return {{"model", to_json(config_)},
          {"seed", seed_},
          {"init",
           {{"scheme", "normal"},
            {"scale", config_.init_scale},
            {"convolutions", "he-normal"},
            {"layer_norm", "gamma 1, beta 0"},
            {"biases", 0.0}}}};
}

void MeshModel::save(const std::filesystem::path& path, const json& extra) const {
  json meta = metadata();
  if (!extra.is_null()) meta["training"] = extra;
  tensor::save_checkpoint(path, meta, store_.named());
}

MeshModel MeshModel::from_checkpoint(const tensor::Checkpoint& ck) {
  if (!ck.meta.contains("model")) throw ParseError("checkpoint has no model configuration", 0);
  MeshModel m(model_config_from_json(ck.meta["model"]), ck.meta.value("seed", std::uint64_t{0}));
  m.store_.load(ck.tensors);
  return m;
}

MeshModel MeshModel::load(const std::filesystem::path& path) {
  return from_checkpoint(tensor::load_checkpoint(path));
}

}  // namespace roofgen::model
