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
#include <map>
#include <numbers>
#include <set>

#include "roofgen/error.hpp"
#include "roofgen/geom/io.hpp"
#include "roofgen/metrics/metrics.hpp"
#include "roofgen/synthroof/synthroof.hpp"
#include "roofgen/tokenizer/tokenizer.hpp"

using namespace roofgen;
using namespace roofgen::synthroof;
namespace fs = std::filesystem;

namespace {

RoofSpec spec_of(RoofKind kind, double w, double l, double eave, double ridge) {
  RoofSpec s;
  s.kind = kind;
  s.footprint_w = w;
  s.footprint_l = l;
  s.eave_h = eave;
  s.ridge_h = ridge;
  return s;
}

std::string slurp_tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = geom::read_file(e.path());
  }
  std::string all;
  for (const auto& [k, v] : files) all += k + "\n" + v;
  return all;
}

}  // namespace

TEST_CASE("roof construction") {
  SUBCASE("flat") {
    const geom::Mesh m = build_roof(spec_of(RoofKind::flat, 10, 6, 3, 3));
    CHECK(m.vertices.size() == 4);
    CHECK(m.faces.size() == 2);
    for (const auto& v : m.vertices) CHECK(v.z == 3.0);
  }
  SUBCASE("gable") {
    const geom::Mesh m = build_roof(spec_of(RoofKind::gable, 10, 6, 0, 3));
    CHECK(m.vertices.size() == 6);
    CHECK(m.faces.size() == 4);
    int ridge = 0;
    for (const auto& v : m.vertices) {
      if (v.z == 3.0) {
        ++ridge;
        CHECK(v.y == doctest::Approx(0.0));  // long axis (x) midline
      } else {
        CHECK(v.z == 0.0);
      }
    }
    CHECK(ridge == 2);
  }
  SUBCASE("pyramid") {
    const geom::Mesh m = build_roof(spec_of(RoofKind::pyramid, 8, 8, 0, 4));
    CHECK(m.vertices.size() == 5);
    CHECK(m.faces.size() == 4);
    int apex = 0;
    for (const auto& v : m.vertices) {
      if (v.z == 4.0) {
        ++apex;
        CHECK(v.x == doctest::Approx(0.0));
        CHECK(v.y == doctest::Approx(0.0));
      }
    }
    CHECK(apex == 1);
  }
  SUBCASE("invalid specs") {
    CHECK_THROWS_AS(build_roof(spec_of(RoofKind::gable, -1, 6, 0, 3)), SpecError);
    CHECK_THROWS_AS(build_roof(spec_of(RoofKind::gable, 10, 6, 4, 3)), SpecError);
    CHECK_THROWS_AS(build_roof(spec_of(RoofKind::flat, 10, 6, 0, 0), true), SpecError);
  }
}

TEST_CASE("square symmetries") {
  RoofSpec s = spec_of(RoofKind::shed, 10, 6, 2, 3);
  s.rotation = 0.3;
  s.offset = {1.5, -0.5};
  const geom::Mesh m = build_roof(s, true);
  auto signed_z = [](const geom::Mesh& mesh, const geom::Face& f) {
    const auto& a = mesh.vertices[f[0]];
    const auto& b = mesh.vertices[f[1]];
    const auto& c = mesh.vertices[f[2]];
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  };

  SUBCASE("hand cases") {
    geom::Mesh p;
    p.vertices = {{1, 2, 3}};
    CHECK(apply_square_symmetry(p, 0).vertices[0] == geom::Vec3{1, 2, 3});
    CHECK(apply_square_symmetry(p, 1).vertices[0] == geom::Vec3{-2, 1, 3});
    CHECK(apply_square_symmetry(p, 2).vertices[0] == geom::Vec3{-1, -2, 3});
    CHECK(apply_square_symmetry(p, 4).vertices[0] == geom::Vec3{-1, 2, 3});
    CHECK(apply_square_symmetry(p, 5).vertices[0] == geom::Vec3{2, 1, 3});
  }
  SUBCASE("group structure") {
    geom::Mesh r = m;
    for (int i = 0; i < 4; ++i) r = apply_square_symmetry(r, 1);
    CHECK(r == m);
    CHECK(apply_square_symmetry(apply_square_symmetry(m, 4), 4) == m);
    CHECK(apply_square_symmetry(apply_square_symmetry(m, 1), 3) == m);
  }
  SUBCASE("orientation and heights are kept") {
    for (int k = 0; k < 8; ++k) {
      const geom::Mesh t = apply_square_symmetry(m, k);
      REQUIRE(t.faces.size() == m.faces.size());
      for (std::size_t i = 0; i < m.faces.size(); ++i) {
        const double before = signed_z(m, m.faces[i]);
        const double after = signed_z(t, t.faces[i]);
        CHECK(after == doctest::Approx(before).epsilon(1e-12));
      }
      for (std::size_t i = 0; i < m.vertices.size(); ++i) {
        CHECK(t.vertices[i].z == m.vertices[i].z);
        CHECK(std::hypot(t.vertices[i].x, t.vertices[i].y) == std::hypot(m.vertices[i].x, m.vertices[i].y));
      }
    }
  }
  CHECK_THROWS_AS(apply_square_symmetry(m, 8), SpecError);
  CHECK_THROWS_AS(apply_square_symmetry(m, -1), SpecError);
}

TEST_CASE("watertight shells are closed") {
  for (std::size_t i = 0; i < 100; ++i) {
    const auto s = sample_roof_spec(5, i, all_roof_kinds());
    const geom::Mesh m = build_roof(s, true);
    std::map<std::pair<int, int>, int> edges;
    for (const auto& f : m.faces) {
      for (int k = 0; k < 3; ++k) {
        const int a = f[k], b = f[(k + 1) % 3];
        ++edges[{std::min(a, b), std::max(a, b)}];
      }
    }
    for (const auto& [e, count] : edges) CHECK(count == 2);
  }
}

TEST_CASE("synthetic meshes fit the sequence limits") {
  for (std::size_t i = 0; i < 200; ++i) {
    const auto s = sample_roof_spec(8, i, all_roof_kinds());
    for (bool watertight : {false, true}) {
      const geom::Mesh m = build_roof(s, watertight);
      CHECK(m.vertices.size() <= 10);
      CHECK(m.faces.size() <= 16);
      CHECK_NOTHROW(m.validate());
      const auto q = geom::quantize(geom::normalize_to_unit_cube(m));
      CHECK_NOTHROW(tokenizer::encode_vertices(q));
      CHECK_NOTHROW(tokenizer::encode_faces(q));
    }
  }
}

TEST_CASE("rendering") {
  RenderConfig cfg;
  SUBCASE("flat roof is one shade equal to the sun's z") {
    const auto r = render_topdown_detailed(build_roof(spec_of(RoofKind::flat, 10, 6, 3, 3)), cfg);
    int covered = 0;
    for (std::size_t i = 0; i < r.image.pixels.size(); ++i) {
      if (r.covered[i]) {
        ++covered;
        CHECK(r.image.pixels[i] == doctest::Approx(cfg.sun_direction.z).epsilon(1e-12));
      } else {
        CHECK(r.image.pixels[i] == 0.0);
      }
    }
    CHECK(covered > 0);
  }
  SUBCASE("gable lit from the east shows two shades") {
    cfg.sun_direction = {0.0, 0.6, 0.8};  // ridge along x, planes face +y and -y
    const auto r = render_topdown_detailed(build_roof(spec_of(RoofKind::gable, 10, 6, 0, 3)), cfg);
    std::set<long> shades;
    for (std::size_t i = 0; i < r.image.pixels.size(); ++i) {
      if (r.covered[i]) shades.insert(std::lround(r.image.pixels[i] * 1e9));
    }
    CHECK(shades.size() == 2);
  }
  SUBCASE("coarse render matches a block-averaged fine render") {
    const geom::Mesh m = build_roof(spec_of(RoofKind::hip, 12, 7, 2, 5));
    cfg.resolution = 64;
    const auto fine = render_topdown(m, cfg);
    cfg.resolution = 4;
    const auto coarse = render_topdown(m, cfg);
    double err = 0.0;
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        double s = 0.0;
        for (int i = 0; i < 16; ++i) {
          for (int j = 0; j < 16; ++j) s += fine.at(r * 16 + i, c * 16 + j);
        }
        err += std::abs(s / 256.0 - coarse.at(r, c));
      }
    }
    CHECK(err / 16.0 < 0.15);
  }
  SUBCASE("silhouette equals the footprint raster") {
    for (std::size_t i = 0; i < 40; ++i) {
      const geom::Mesh m = build_roof(sample_roof_spec(2, i, all_roof_kinds()));
      const auto r = render_topdown_detailed(m, cfg);
      CHECK(r.covered == metrics::rasterize_footprint(m, r.frame));
      for (double p : r.image.pixels) CHECK((p >= 0.0 && p <= 1.0));
    }
  }
}

TEST_CASE("dataset generation") {
  const fs::path a = fs::temp_directory_path() / "roofgen_synth_a";
  const fs::path b = fs::temp_directory_path() / "roofgen_synth_b";
  fs::remove_all(a);
  fs::remove_all(b);
  GenerateOptions g;
  g.n = 100;
  g.seed = 7;
  const auto man = generate_dataset(g, a);
  generate_dataset(g, b);
  CHECK(slurp_tree(a) == slurp_tree(b));
  CHECK(man.split(Split::train).size() == 70);
  CHECK(man.split(Split::val).size() == 15);
  CHECK(man.split(Split::test).size() == 15);

  const auto loaded = load_manifest(a / "manifest.json");
  CHECK(loaded.entries.size() == 100);
  CHECK(loaded.image_resolution == 32);
  CHECK(manifest_to_json(loaded) == manifest_to_json(man));

  const auto re = rerender_dataset(loaded, 8, b / "r8");
  CHECK(geom::read_pgm(re.image_path(re.entries[0])).width == 8);
  CHECK(re.split(Split::test).size() == 15);

  g.n = 5;
  CHECK_THROWS_AS(generate_dataset(g, b / "small"), SpecError);
  CHECK_THROWS_AS(load_manifest(b / "missing.json"), IoError);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("splits are 70/15/15 for 1000 examples") {
  const auto s = assign_splits(1000, 7);
  std::map<Split, int> counts;
  for (Split x : s) ++counts[x];
  CHECK(counts[Split::train] == 700);
  CHECK(counts[Split::val] == 150);
  CHECK(counts[Split::test] == 150);
}
