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

#include "roofgen/model/config.hpp"

#include "roofgen/error.hpp"

namespace roofgen::model {

using nlohmann::json;

namespace {

void check_stack(const StackConfig& s, std::size_t hidden, const char* name) {
  if (s.layers == 0 || s.heads == 0 || s.feedforward == 0) {
    throw SpecError(std::string(name) + ": layers, heads and feedforward must be positive");
  }
  if (hidden % s.heads != 0) {
    throw SpecError(std::string(name) + ": heads (" + std::to_string(s.heads) +
                    ") must divide hidden_dim (" + std::to_string(hidden) + ")");
  }
}

void check_rate(double r, const char* name) {
  if (!(r >= 0.0 && r < 1.0)) throw SpecError(std::string(name) + " must lie in [0, 1)");
}

json stack_json(const StackConfig& s) {
  return {{"layers", s.layers}, {"heads", s.heads}, {"feedforward_dim", s.feedforward}};
}

StackConfig stack_from(const json& j, const StackConfig& fallback) {
  StackConfig s = fallback;
  s.layers = j.value("layers", s.layers);
  s.heads = j.value("heads", s.heads);
  s.feedforward = j.value("feedforward_dim", s.feedforward);
  return s;
}

}  // namespace

void ModelConfig::validate() const {
  if (hidden_dim == 0) throw SpecError("hidden_dim must be positive");
  check_stack(vertex_decoder, hidden_dim, "vertex_decoder");
  check_stack(face_encoder, hidden_dim, "face_encoder");
  check_stack(face_decoder, hidden_dim, "face_decoder");
  check_rate(dropout_image_encoder, "dropout.image_encoder");
  check_rate(dropout_vertex_and_face_encoder, "dropout.vertex_decoder_and_face_encoder");
  check_rate(dropout_face_decoder, "dropout.face_decoder");
  if (image_resolution <= 0) throw SpecError("image_resolution must be positive");
  if (encoder_channels.empty()) throw SpecError("encoder_channels must not be empty");
  for (std::size_t c : encoder_channels) {
    if (c == 0) throw SpecError("encoder channel counts must be positive");
  }
  if (max_vertex_tokens < 10 || max_face_tokens < 5) throw SpecError("token limits are too small");
  if (!(init_scale > 0.0)) throw SpecError("init_scale must be positive");
  (void)feature_side();
}

int ModelConfig::feature_side() const {
  int side = image_resolution;
  for (std::size_t i = 0; i < encoder_channels.size(); ++i) side = (side + 1) / 2;
  return side;
}

Preset preset(const std::string& name) {
  Preset p;
  if (name == "toy") {
    p.model.dropout_image_encoder = 0.2;
    p.model.dropout_vertex_and_face_encoder = 0.2;
    p.model.dropout_face_decoder = 0.2;
    p.train.max_epochs = 12;
    p.train.patience = 3;
    p.train.symmetries = 8;
    return p;
  }
  if (name == "tiny") {
    p.model.hidden_dim = 16;
    p.model.vertex_decoder = {1, 2, 32};
    p.model.face_encoder = {1, 2, 32};
    p.model.face_decoder = {1, 2, 32};
    p.model.encoder_channels = {4, 8};
    p.model.image_resolution = 16;
    p.model.dropout_image_encoder = 0.0;
    p.model.dropout_vertex_and_face_encoder = 0.0;
    p.model.dropout_face_decoder = 0.0;
    p.train.max_epochs = 3;
    p.train.batch_size = 4;
    return p;
  }
  if (name == "paper") {
    p.model.hidden_dim = 512;
    p.model.vertex_decoder = {5, 4, 1024};
    p.model.face_encoder = {3, 4, 512};
    p.model.face_decoder = {4, 4, 512};
    p.model.dropout_image_encoder = 0.4;
    p.model.dropout_vertex_and_face_encoder = 0.3;
    p.model.dropout_face_decoder = 0.2;
    p.model.encoder_channels = {64, 128, 256};
    p.train.adam = {2e-5, 0.9, 0.99, 1e-8};
    return p;
  }
  throw SpecError("unknown preset '" + name + "' (expected tiny, toy or paper)");
}

std::vector<std::string> preset_names() { return {"tiny", "toy", "paper"}; }

json to_json(const ModelConfig& c) {
  return {{"hidden_dim", c.hidden_dim},
          {"vertex_decoder", stack_json(c.vertex_decoder)},
          {"face_encoder", stack_json(c.face_encoder)},
          {"face_decoder", stack_json(c.face_decoder)},
          {"dropout",
           {{"image_encoder", c.dropout_image_encoder},
            {"vertex_decoder_and_face_encoder", c.dropout_vertex_and_face_encoder},
            {"face_decoder", c.dropout_face_decoder}}},
          {"image_resolution", c.image_resolution},
          {"encoder_channels", c.encoder_channels},
          {"max_vertex_tokens", c.max_vertex_tokens},
          {"max_face_tokens", c.max_face_tokens},
          {"face_encoder_positions", c.face_encoder_positions},
          {"init_scale", c.init_scale}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  return merge_model_config(c, j);
}

ModelConfig merge_model_config(ModelConfig c, const json& j) {
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  if (j.contains("vertex_decoder")) c.vertex_decoder = stack_from(j["vertex_decoder"], c.vertex_decoder);
  if (j.contains("face_encoder")) c.face_encoder = stack_from(j["face_encoder"], c.face_encoder);
  if (j.contains("face_decoder")) c.face_decoder = stack_from(j["face_decoder"], c.face_decoder);
  if (j.contains("dropout")) {
    const json& d = j["dropout"];
    c.dropout_image_encoder = d.value("image_encoder", c.dropout_image_encoder);
    c.dropout_vertex_and_face_encoder =
        d.value("vertex_decoder_and_face_encoder", c.dropout_vertex_and_face_encoder);
    c.dropout_face_decoder = d.value("face_decoder", c.dropout_face_decoder);
  }
  c.image_resolution = j.value("image_resolution", c.image_resolution);
  c.encoder_channels = j.value("encoder_channels", c.encoder_channels);
  c.max_vertex_tokens = j.value("max_vertex_tokens", c.max_vertex_tokens);
  c.max_face_tokens = j.value("max_face_tokens", c.max_face_tokens);
  c.face_encoder_positions = j.value("face_encoder_positions", c.face_encoder_positions);
  c.init_scale = j.value("init_scale", c.init_scale);
  c.validate();
  return c;
}

json to_json(const TrainConfig& c) {
  return {{"learning_rate", c.adam.learning_rate},
          {"betas", {c.adam.beta1, c.adam.beta2}},
          {"epsilon", c.adam.epsilon},
          {"max_epochs", c.max_epochs},
          {"patience", c.patience},
          {"batch_size", c.batch_size},
          {"seed", c.seed},
          {"joint", c.joint},
          {"max_steps", c.max_steps},
          {"symmetries", c.symmetries}};
}

TrainConfig train_config_from_json(const json& j) { return merge_train_config(TrainConfig{}, j); }

TrainConfig merge_train_config(TrainConfig c, const json& j) {
  c.adam.learning_rate = j.value("learning_rate", c.adam.learning_rate);
  if (j.contains("betas")) {
    const auto b = j["betas"].get<std::vector<double>>();
    if (b.size() != 2) throw SpecError("betas must have two entries");
    c.adam.beta1 = b[0];
    c.adam.beta2 = b[1];
  }
  c.adam.epsilon = j.value("epsilon", c.adam.epsilon);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.seed = j.value("seed", c.seed);
  c.joint = j.value("joint", c.joint);
  c.max_steps = j.value("max_steps", c.max_steps);
  c.symmetries = j.value("symmetries", c.symmetries);
  if (c.max_epochs == 0 || c.batch_size == 0) throw SpecError("max_epochs and batch_size must be positive");
  if (!(c.adam.learning_rate > 0.0)) throw SpecError("learning_rate must be positive");
  if (c.symmetries != 1 && c.symmetries != 4 && c.symmetries != 8) throw SpecError("symmetries must be 1, 4 or 8");
  return c;
}

}  // namespace roofgen::model
