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
#include <filesystem>

#include "gradcheck_suite.hpp"
#include "roofgen/error.hpp"
#include "roofgen/geom/io.hpp"
#include "roofgen/model/sampler.hpp"
#include "roofgen/model/train.hpp"

using namespace roofgen;
using namespace roofgen::model;
using tensor::Tensor;
namespace fs = std::filesystem;

namespace {

ModelConfig tiny() { return preset("tiny").model; }

Example make_example(std::size_t i, int resolution) {
  const auto spec = synthroof::sample_roof_spec(31, i, synthroof::all_roof_kinds());
  const geom::Mesh mesh = synthroof::build_roof(spec);
  Example ex;
  ex.index = i;
  ex.quantized = geom::quantize(geom::normalize_to_unit_cube(mesh));
  ex.vertex_tokens = tokenizer::encode_vertices(ex.quantized).tokens;
  ex.face_tokens = tokenizer::encode_faces(ex.quantized).tokens;
  synthroof::RenderConfig rc;
  rc.resolution = resolution;
  ex.image = synthroof::render_topdown(mesh, rc);
  return ex;
}

double row_max_diff(const Tensor& a, const Tensor& b, std::size_t row) {
  const std::size_t w = a.dim(1);
  double d = 0.0;
  for (std::size_t c = 0; c < w; ++c) d = std::max(d, std::abs(a.data()[row * w + c] - b.data()[row * w + c]));
  return d;
}

void check_rows_are_distributions(const Tensor& logits) {
  const Tensor p = tensor::softmax(logits, 1);
  const std::size_t w = p.dim(1);
  for (std::size_t r = 0; r < p.dim(0); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < w; ++c) s += p.data()[r * w + c];
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
}

synthroof::DatasetManifest small_dataset(const fs::path& dir, std::size_t n, int resolution) {
  fs::remove_all(dir);
  synthroof::GenerateOptions g;
  g.n = n;
  g.seed = 5;
  g.render.resolution = resolution;
  return synthroof::generate_dataset(g, dir);
}

}  // namespace

TEST_CASE("configuration") {
  CHECK_NOTHROW(preset("toy").model.validate());
  CHECK_NOTHROW(preset("paper").model.validate());
  CHECK_THROWS_AS(preset("huge"), SpecError);
  ModelConfig c;
  c.vertex_decoder.heads = 3;
  CHECK_THROWS_AS(c.validate(), SpecError);
  const Preset p = preset("paper");
  CHECK(p.train.adam.learning_rate == 2e-5);
  CHECK(p.model.dropout_image_encoder == 0.4);
  CHECK(p.model.dropout_vertex_and_face_encoder == 0.3);
  CHECK(p.model.dropout_face_decoder == 0.2);
  CHECK(p.model.vertex_decoder.layers == 5);
  CHECK(to_json(model_config_from_json(to_json(p.model))) == to_json(p.model));
  CHECK(train_config_from_json(to_json(p.train)).symmetries == p.train.symmetries);
  CHECK(merge_train_config(p.train, {{"symmetries", 8}}).symmetries == 8);
  CHECK_THROWS_AS(merge_train_config(p.train, {{"symmetries", 2}}), SpecError);
}

TEST_CASE("image encoder") {
  ModelConfig c = tiny();
  c.hidden_dim = 64;
  c.image_resolution = 16;
  c.encoder_channels = {4, 8, 8};
  const MeshModel m(c, 1);
  const auto a = m.encode_image(make_example(0, 16).image);
  CHECK(a.cells() == 4);
  CHECK(a.features.dim(1) == 64);
  const auto b = m.encode_image(make_example(1, 16).image);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.features.numel(); ++i) diff += std::abs(a.features.data()[i] - b.features.data()[i]);
  CHECK(diff > 0.0);
  for (double v : a.features.data()) CHECK(std::isfinite(v));
  CHECK_THROWS_AS(m.encode_image(geom::ImageGrid(32, 32)), ShapeError);
}

TEST_CASE("vertex decoder") {
  const MeshModel m(tiny(), 2);
  const Example ex = make_example(3, 16);
  const auto img = m.encode_image(ex.image);
  const Tensor logits = m.vertex_logits(ex.vertex_tokens, img);
  CHECK(logits.shape() == tensor::Shape{ex.vertex_tokens.size(), 257});
  check_rows_are_distributions(logits);

  SUBCASE("causal") {
    const std::size_t L = ex.vertex_tokens.size();
    for (std::size_t j = 0; j + 1 < L; ++j) {
      auto changed = ex.vertex_tokens;
      changed[j] = (changed[j] + 17) % 256;
      const Tensor other = m.vertex_logits(changed, img);
      for (std::size_t r = 0; r <= j; ++r) CHECK(row_max_diff(logits, other, r) == 0.0);
      CHECK(row_max_diff(logits, other, j + 1) > 0.0);
    }
  }
  SUBCASE("limits") {
    CHECK_THROWS_AS(m.vertex_logits(std::vector<int>(101, 0), img), LimitExceeded);
    CHECK_THROWS_AS(m.vertex_logits({0, 300}, img), GrammarError);
  }
}

TEST_CASE("face model") {
  const MeshModel m(tiny(), 3);
  const std::vector<geom::LatticePoint> five{{0, 0, 0}, {10, 0, 0}, {10, 10, 0}, {0, 10, 0}, {5, 5, 20}};
  const Tensor logits = m.face_logits({2, 3, 4, 1}, five);
  CHECK(logits.shape() == tensor::Shape{4, 7});
  check_rows_are_distributions(logits);

  SUBCASE("causal") {
    const Example ex = make_example(4, 16);
    const auto& v = ex.quantized.vertices;
    const Tensor base = m.face_logits(ex.face_tokens, v);
    for (std::size_t j = 0; j + 1 < ex.face_tokens.size(); ++j) {
      auto changed = ex.face_tokens;
      changed[j] = changed[j] == 2 ? 3 : 2;
      const Tensor other = m.face_logits(changed, v);
      for (std::size_t r = 0; r <= j; ++r) CHECK(row_max_diff(base, other, r) == 0.0);
      CHECK(row_max_diff(base, other, j + 1) > 0.0);
    }
  }
  SUBCASE("pointer equivariance without encoder positions") {
    ModelConfig c = tiny();
    c.face_encoder_positions = false;
    const MeshModel eq(c, 4);
    auto swapped = five;
    std::swap(swapped[1], swapped[3]);
    const Tensor a = eq.face_logits({2}, five);
    const Tensor b = eq.face_logits({2}, swapped);
    const std::vector<std::size_t> perm{0, 3, 2, 1, 4};
    for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(a.data()[2 + k] - b.data()[2 + perm[k]]) < 1e-12);
    CHECK(std::abs(a.data()[0] - b.data()[0]) < 1e-12);
    CHECK(std::abs(a.data()[1] - b.data()[1]) < 1e-12);
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(m.face_logits({2, 3, 9}, five), GrammarError);
    CHECK_THROWS_AS(m.face_logits({2}, {five.begin(), five.begin() + 2}), SpecError);
  }
}

TEST_CASE("full model gradient check") {
  const auto r = roofgen::testing::check_full_model(16);
  CHECK(r.checked > 100);
  CHECK(r.worst <= 1e-4);
}

TEST_CASE("nucleus sampling") {
  const std::vector<double> probs{0.5, 0.3, 0.15, 0.05};
  const auto d = nucleus_distribution(probs, 0.95);
  CHECK(d[3] == 0.0);
  CHECK(std::abs(d[0] - 0.5 / 0.95) < 1e-12);
  CHECK(std::abs(d[1] - 0.3 / 0.95) < 1e-12);
  CHECK(std::abs(d[2] - 0.15 / 0.95) < 1e-12);
  const auto full = nucleus_distribution(probs, 1.0);
  for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(full[i] - probs[i]) < 1e-12);
  CHECK(nucleus_distribution(probs, 0.4) == std::vector<double>{1.0, 0.0, 0.0, 0.0});

  SamplerConfig sc;
  sc.nucleus_p = 0.0;
  CHECK_THROWS_AS(sc.validate(), SpecError);
  sc.nucleus_p = 1.0;
  CHECK_NOTHROW(sc.validate());
}

TEST_CASE("masked samples obey the grammar") {
  const MeshModel m(tiny(), 11);
  SamplerConfig sc;
  sc.max_vertex_tokens = 30;
  sc.max_face_tokens = 60;
  for (std::size_t i = 0; i < 6; ++i) {
    Rng rng(12, i);
    const auto s = sample_mesh(m, make_example(i, 16).image, sc, rng);
    CHECK(s.vertex_tokens.size() <= 30);
    CHECK_NOTHROW(tokenizer::validate_vertex_sequence({s.vertex_tokens}));
    if (s.degenerate) {
      CHECK(s.mesh.faces.empty());
      continue;
    }
    CHECK(s.face_tokens.size() <= 60);
    CHECK_NOTHROW(tokenizer::validate_face_sequence({s.face_tokens}, s.mesh.vertices.size()));
    for (const auto& v : s.mesh.vertices) {
      CHECK((v.x >= 0.0 && v.x <= 1.0 && v.y >= 0.0 && v.y <= 1.0 && v.z >= 0.0 && v.z <= 1.0));
    }
  }
}

TEST_CASE("training") {
  const fs::path dir = fs::temp_directory_path() / "roofgen_model_train";
  const auto man = small_dataset(dir, 72, 16);
  const auto train = load_examples(man, synthroof::Split::train);
  const auto val = load_examples(man, synthroof::Split::val);
  CHECK(train.size() == 50);
  Preset p = preset("tiny");
  p.train.max_epochs = 2;
  p.train.patience = 0;

  SUBCASE("train NLL decreases") {
    const auto r = train_model(train, val, p.model, p.train);
    REQUIRE(r.log.size() == 2);
    CHECK(r.log[1].train_nll_vertex + r.log[1].train_nll_face < r.log[0].train_nll_vertex + r.log[0].train_nll_face);
  }
  SUBCASE("deterministic checkpoints and round trip") {
    p.train.max_steps = 5;
    const auto a = train_model(train, val, p.model, p.train);
    const auto b = train_model(train, val, p.model, p.train);
    CHECK(a.steps == 5);
    a.model.save(dir / "a.ckpt");
    b.model.save(dir / "b.ckpt");
    CHECK(geom::read_file(dir / "a.ckpt") == geom::read_file(dir / "b.ckpt"));

    const MeshModel back = MeshModel::load(dir / "a.ckpt");
    const auto img = back.encode_image(train[0].image);
    const Tensor x = back.vertex_logits(train[0].vertex_tokens, img);
    const Tensor y = a.model.vertex_logits(train[0].vertex_tokens, a.model.encode_image(train[0].image));
    CHECK(std::equal(x.data().begin(), x.data().end(), y.data().begin()));
    CHECK(back.metadata() == a.model.metadata());
  }
  SUBCASE("separate mode") {
    p.train.joint = false;
    p.train.max_epochs = 1;
    const auto r = train_model(train, val, p.model, p.train);
    CHECK(r.log.size() == 1);
  }
  SUBCASE("symmetry augmentation") {
    const auto aug = load_augmented_examples(man, synthroof::Split::train, 4);
    REQUIRE(aug.size() == 4 * train.size());
    const std::size_t n = train.size();
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(aug[i].vertex_tokens == train[i].vertex_tokens);
      CHECK(aug[i].image.pixels == train[i].image.pixels);
      for (std::size_t k = 1; k < 4; ++k) {
        const Example& c = aug[k * n + i];
        CHECK(c.index == train[i].index);
        CHECK(c.quantized.vertices.size() == train[i].quantized.vertices.size());
        CHECK(c.quantized.faces.size() == train[i].quantized.faces.size());
        CHECK(c.image.width == train[i].image.width);
        for (double v : c.image.pixels) CHECK(v * 255.0 == std::round(v * 255.0));
      }
    }
    // A turn changes the image of at least some roofs.
    std::size_t changed = 0;
    for (std::size_t i = 0; i < n; ++i) changed += aug[n + i].image.pixels != train[i].image.pixels;
    CHECK(changed > 0);
    CHECK(load_augmented_examples(man, synthroof::Split::train, 8).size() == 8 * n);
    CHECK_THROWS_AS(load_augmented_examples(man, synthroof::Split::train, 3), SpecError);

    p.train.symmetries = 4;
    p.train.max_steps = 3;
    CHECK(train_model(aug, val, p.model, p.train).steps == 3);
  }
  SUBCASE("empty split") {
    auto no_val = man;
    std::erase_if(no_val.entries, [](const auto& e) { return e.split == synthroof::Split::val; });
    CHECK_THROWS_AS(load_examples(no_val, synthroof::Split::val), EmptyInput);
  }
  fs::remove_all(dir);
}

TEST_CASE("shuffled conditioning uses a derangement") {
  const auto d = derangement(20, 3);
  CHECK(d.size() == 20);
  std::vector<bool> seen(20, false);
  for (std::size_t i = 0; i < 20; ++i) {
    CHECK(d[i] != i);
    seen[d[i]] = true;
  }
  for (bool s : seen) CHECK(s);
  CHECK(derangement(20, 3) == d);
}
