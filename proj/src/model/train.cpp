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

#include "roofgen/model/train.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <limits>
#include <numeric>

#include "roofgen/error.hpp"
#include "roofgen/geom/io.hpp"
#include "roofgen/rng.hpp"
#include "roofgen/tensor/adam.hpp"
#include "roofgen/tensor/ops.hpp"

namespace roofgen::model {

namespace ops = tensor;

namespace {

constexpr std::uint64_t kShuffleStream = 0x5eed5u;
constexpr std::uint64_t kDropoutStream = 0xd409u;

using Snapshot = std::vector<std::vector<double>>;

Snapshot snapshot(const std::vector<Tensor>& params) {
  Snapshot s;
  s.reserve(params.size());
  for (const Tensor& t : params) s.emplace_back(t.data().begin(), t.data().end());
  return s;
}

void restore(std::vector<Tensor>& params, const Snapshot& s) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::copy(s[i].begin(), s[i].end(), params[i].mutable_data().begin());
  }
}

void append_number(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 6);
  out.append(buf, ptr);
}

}  // namespace

std::vector<Example> load_examples(const synthroof::DatasetManifest& manifest, synthroof::Split split,
                                   const tokenizer::SequenceLimits& limits) {
  return load_augmented_examples(manifest, split, 1, limits);
}

std::vector<Example> load_augmented_examples(const synthroof::DatasetManifest& manifest, synthroof::Split split,
                                             std::size_t symmetries, const tokenizer::SequenceLimits& limits) {
  if (symmetries != 1 && symmetries != 4 && symmetries != 8) throw SpecError("symmetries must be 1, 4 or 8");
  const auto entries = manifest.split(split);
  if (entries.empty()) {
    throw EmptyInput(std::string("split '") + std::string(synthroof::to_string(split)) + "' is empty");
  }
  std::vector<geom::Mesh> worlds;
  worlds.reserve(entries.size());
  for (const auto& e : entries) worlds.push_back(geom::read_obj(manifest.mesh_path(e)));
  std::vector<Example> out;
  out.reserve(entries.size() * symmetries);
  for (std::size_t k = 0; k < symmetries; ++k) {
    for (std::size_t i = 0; i < entries.size(); ++i) {
      Example ex;
      ex.index = entries[i].index;
      geom::Mesh world = worlds[i];
      if (k == 0) {
        ex.image = geom::read_pgm(manifest.image_path(entries[i]));
      } else {
        world = synthroof::apply_square_symmetry(world, static_cast<int>(k));
        // Through the 8-bit file encoding, like the stored images.
        ex.image = geom::parse_pgm(geom::format_pgm(synthroof::render_topdown(world, manifest.render)));
      }
      ex.quantized = geom::quantize(geom::normalize_to_unit_cube(world));
      ex.truth = geom::dequantize(ex.quantized);
      ex.vertex_tokens = tokenizer::encode_vertices(ex.quantized, limits).tokens;
      ex.face_tokens = tokenizer::encode_faces(ex.quantized, limits).tokens;
      out.push_back(std::move(ex));
    }
  }
  return out;
}

ExampleLoss example_loss(const MeshModel& model, const Example& ex, const geom::ImageGrid& image,
                         const ForwardContext& ctx) {
  const ImageEmbedding emb = model.encode_image(image, ctx);
  ExampleLoss loss;
  loss.vertex = ops::cross_entropy(model.vertex_logits(ex.vertex_tokens, emb, ctx), ex.vertex_tokens);
  loss.face = ops::cross_entropy(model.face_logits(ex.face_tokens, ex.quantized.vertices, ctx), ex.face_tokens);
  return loss;
}

NllStats evaluate_nll(const MeshModel& model, std::span<const Example> examples,
                      const std::vector<std::size_t>* image_source) {
  if (examples.empty()) throw EmptyInput("no examples to evaluate");
  if (image_source != nullptr && image_source->size() != examples.size()) {
    throw ShapeError("image permutation length does not match the example count");
  }
  tensor::NoGradGuard no_grad;
  const ForwardContext ctx{};
  NllStats s;
  double vsum = 0.0;
  double fsum = 0.0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const Example& ex = examples[i];
    const geom::ImageGrid& img = image_source ? examples[(*image_source)[i]].image : ex.image;
    const ExampleLoss l = example_loss(model, ex, img, ctx);
    vsum += l.vertex.item() * static_cast<double>(ex.vertex_tokens.size());
    fsum += l.face.item() * static_cast<double>(ex.face_tokens.size());
    s.vertex_tokens += ex.vertex_tokens.size();
    s.face_tokens += ex.face_tokens.size();
  }
  s.vertex = vsum / static_cast<double>(s.vertex_tokens);
  s.face = fsum / static_cast<double>(s.face_tokens);
  return s;
}

std::vector<std::size_t> derangement(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  if (n < 2) return p;
  // Sattolo's algorithm yields a single n-cycle.
  Rng rng(seed, 0xde7a);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(p[i], p[rng.below(i)]);
  return p;
}

std::string training_log_header() {
  return "epoch,train_nll_vertex,train_nll_face,val_nll_vertex,val_nll_face,wallclock_s\n";
}

std::string training_log_row(const EpochRecord& r) {
  std::string out = std::to_string(r.epoch);
  for (double v : {r.train_nll_vertex, r.train_nll_face, r.val_nll_vertex, r.val_nll_face, r.wallclock_s}) {
    out += ',';
    append_number(out, v);
  }
  return out + '\n';
}

TrainResult train_model(std::span<const Example> train, std::span<const Example> val, const ModelConfig& config,
                        const TrainConfig& schedule, const std::function<void(const EpochRecord&)>& on_epoch) {
  if (train.empty()) throw EmptyInput("training split is empty");
  if (val.empty()) throw EmptyInput("validation split is empty");
  if (schedule.batch_size == 0 || schedule.max_epochs == 0) {
    throw SpecError("batch_size and max_epochs must be positive");
  }

  TrainResult result{MeshModel(config, schedule.seed), {}, 0, 0, 0};
  MeshModel& model = result.model;
  std::vector<Tensor> vparams = model.vertex_parameters();
  std::vector<Tensor> fparams = model.face_parameters();
  std::vector<Tensor> all = model.parameters();
  tensor::AdamState vstate{schedule.adam, {}, {}, 0};
  tensor::AdamState fstate{schedule.adam, {}, {}, 0};
  tensor::AdamState jstate{schedule.adam, {}, {}, 0};

  Snapshot best_v = snapshot(vparams);
  Snapshot best_f = snapshot(fparams);
  double best_v_nll = std::numeric_limits<double>::infinity();
  double best_f_nll = best_v_nll;
  double best_joint = best_v_nll;
  std::size_t since_v = 0;
  std::size_t since_f = 0;

  const auto start = std::chrono::steady_clock::now();
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  bool step_limit_hit = false;

  for (std::size_t epoch = 1; epoch <= schedule.max_epochs && !step_limit_hit; ++epoch) {
    Rng shuffle(schedule.seed ^ kShuffleStream, epoch);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle.below(i)]);

    double vsum = 0.0;
    double fsum = 0.0;
    std::size_t vcount = 0;
    std::size_t fcount = 0;
    for (std::size_t b = 0; b < order.size() && !step_limit_hit; b += schedule.batch_size) {
      const std::size_t end = std::min(order.size(), b + schedule.batch_size);
      const double inv = 1.0 / static_cast<double>(end - b);
      for (Tensor& p : all) p.zero_grad();
      for (std::size_t k = b; k < end; ++k) {
        const Example& ex = train[order[k]];
        Rng drop(schedule.seed ^ kDropoutStream, (static_cast<std::uint64_t>(epoch) << 32) | k);
        const ForwardContext ctx{true, &drop};
        const ExampleLoss l = example_loss(model, ex, ex.image, ctx);
        vsum += l.vertex.item() * static_cast<double>(ex.vertex_tokens.size());
        fsum += l.face.item() * static_cast<double>(ex.face_tokens.size());
        vcount += ex.vertex_tokens.size();
        fcount += ex.face_tokens.size();
        tensor::backward(ops::scale(ops::add(l.vertex, l.face), inv));
      }
      if (schedule.joint) {
        tensor::adam_step(all, jstate);
      } else {
        tensor::adam_step(vparams, vstate);
        tensor::adam_step(fparams, fstate);
      }
      ++result.steps;
      if (schedule.max_steps != 0 && result.steps >= schedule.max_steps) step_limit_hit = true;
    }

    const NllStats v = evaluate_nll(model, val);
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_nll_vertex = vsum / static_cast<double>(std::max<std::size_t>(vcount, 1));
    rec.train_nll_face = fsum / static_cast<double>(std::max<std::size_t>(fcount, 1));
    rec.val_nll_vertex = v.vertex;
    rec.val_nll_face = v.face;
    rec.wallclock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.push_back(rec);
    if (on_epoch) on_epoch(rec);

    bool stop = false;
    if (schedule.joint) {
      if (v.total() < best_joint) {
        best_joint = v.total();
        best_v = snapshot(vparams);
        best_f = snapshot(fparams);
        result.best_epoch = result.best_face_epoch = epoch;
        since_v = 0;
      } else {
        ++since_v;
      }
      stop = schedule.patience != 0 && since_v >= schedule.patience;
    } else {
      if (v.vertex < best_v_nll) {
        best_v_nll = v.vertex;
        best_v = snapshot(vparams);
        result.best_epoch = epoch;
        since_v = 0;
      } else {
        ++since_v;
      }
      if (v.face < best_f_nll) {
        best_f_nll = v.face;
        best_f = snapshot(fparams);
        result.best_face_epoch = epoch;
        since_f = 0;
      } else {
        ++since_f;
      }
      stop = schedule.patience != 0 && since_v >= schedule.patience && since_f >= schedule.patience;
    }
    if (stop) break;
  }

  restore(vparams, best_v);
  restore(fparams, best_f);
  for (Tensor& p : all) p.zero_grad();
  return result;
}

}  // namespace roofgen::model
