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

#include <algorithm>
#include <cmath>
#include <numbers>

#include "roofgen/error.hpp"
#include "roofgen/metrics/metrics.hpp"
#include "roofgen/rng.hpp"
#include "roofgen/synthroof/synthroof.hpp"

using namespace roofgen;
using namespace roofgen::metrics;
using geom::FaceNormalSet;
using geom::Mesh;
using geom::Vec3;

namespace {

constexpr double kDeg = 180.0 / std::numbers::pi;

// Reference: every pairwise angle materialized, then row and column minima.
double naive_angular(const FaceNormalSet& a, const FaceNormalSet& b) {
  const std::size_t n = a.normals.size(), m = b.normals.size();
  std::vector<std::vector<double>> ang(n, std::vector<double>(m));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double d = std::clamp(dot(a.normals[i], b.normals[j]), -1.0, 1.0);
      ang[i][j] = std::acos(d) * kDeg;
    }
  }
  double sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < n; ++i) sa += *std::min_element(ang[i].begin(), ang[i].end());
  for (std::size_t j = 0; j < m; ++j) {
    double best = 1e300;
    for (std::size_t i = 0; i < n; ++i) best = std::min(best, ang[i][j]);
    sb += best;
  }
  return sa / (2.0 * n) + sb / (2.0 * m);
}

Vec3 random_up(Rng& rng) {
  Vec3 v{rng.normal(), rng.normal(), std::abs(rng.normal())};
  return v * (1.0 / norm(v));
}

FaceNormalSet random_set(Rng& rng) {
  FaceNormalSet s;
  const auto n = 1 + rng.below(12);
  for (std::uint64_t i = 0; i < n; ++i) s.normals.push_back(random_up(rng));
  return s;
}

Mesh square(double x0, double y0, double side = 1.0, double z = 0.0) {
  Mesh m;
  m.vertices = {{x0, y0, z}, {x0 + side, y0, z}, {x0 + side, y0 + side, z}, {x0, y0 + side, z}};
  m.faces = {{0, 1, 2}, {0, 2, 3}};
  return m;
}

Mesh scaled(Mesh m, double s) {
  for (Vec3& v : m.vertices) v = v * s;
  return m;
}

}  // namespace

TEST_CASE("angular dissimilarity hand cases") {
  const double t = 30.0 / kDeg;
  FaceNormalSet up{{{0, 0, 1}}, 0};
  FaceNormalSet tilted{{{std::sin(t), 0, std::cos(t)}}, 0};
  CHECK(angular_dissimilarity(up, up) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(angular_dissimilarity(up, tilted) - 30.0) < 1e-9);
  FaceNormalSet pair{{{0, 0, 1}, {1, 0, 0}}, 0};
  CHECK(std::abs(angular_dissimilarity(pair, up) - 22.5) < 1e-9);
  CHECK_THROWS_AS(angular_dissimilarity(FaceNormalSet{}, up), EmptyInput);
}

TEST_CASE("angular dissimilarity matches the naive reference") {
  Rng rng(42);
  for (int i = 0; i < 1000; ++i) {
    const auto a = random_set(rng);
    const auto b = random_set(rng);
    const double got = angular_dissimilarity(a, b);
    CHECK(std::abs(got - naive_angular(a, b)) < 1e-9);
    CHECK(got == angular_dissimilarity(b, a));
    CHECK(angular_dissimilarity(a, a) == 0.0);
    auto shuffled = a;
    std::reverse(shuffled.normals.begin(), shuffled.normals.end());
    CHECK(std::abs(angular_dissimilarity(shuffled, b) - got) < 1e-12);
  }
}

TEST_CASE("PoLiS") {
  const auto a = footprint(square(0, 0));
  const auto b = footprint(square(0.1, 0));
  CHECK(polis_distance(a, a) == 0.0);
  CHECK(std::abs(polis_distance(a, b) - 0.05) < 1e-9);
  CHECK(polis_distance(a, b) == polis_distance(b, a));
  for (double s : {0.5, 2.0, 10.0}) {
    const double scaled_d = polis_distance(footprint(scaled(square(0, 0), s)), footprint(scaled(square(0.1, 0), s)));
    CHECK(std::abs(scaled_d - s * 0.05) < 1e-9);
  }
  CHECK(a.vertex_count() == 4);
  CHECK_THROWS_AS(footprint(Mesh{}), InvalidPolygon);
}

TEST_CASE("footprint of a gable roof is its rectangle") {
  synthroof::RoofSpec s;
  s.kind = synthroof::RoofKind::gable;
  s.eave_h = 2;
  s.ridge_h = 5;
  const auto fp = footprint(synthroof::build_roof(s));
  REQUIRE(fp.loops.size() == 1);
  CHECK(fp.vertex_count() == 4);
}

TEST_CASE("IoU") {
  const Mesh a = square(0, 0);
  CHECK(footprint_iou(a, a) == 1.0);
  const double iou = footprint_iou(a, square(0.1, 0), 256);
  CHECK(std::abs(iou - 0.9 / 1.1) < 0.02);
  CHECK(footprint_iou(a, square(0.1, 0)) == footprint_iou(square(0.1, 0), a));
  CHECK(footprint_iou(a, square(5, 5)) == 0.0);
}

TEST_CASE("IoU converges with resolution on synthetic roofs") {
  for (std::size_t i = 0; i < 20; ++i) {
    const Mesh m1 = synthroof::build_roof(synthroof::sample_roof_spec(1, i, synthroof::all_roof_kinds()));
    const Mesh m2 = synthroof::build_roof(synthroof::sample_roof_spec(1, i + 100, synthroof::all_roof_kinds()));
    const Mesh a = geom::canonical_mesh(m1), b = geom::canonical_mesh(m2);
    CHECK(std::abs(footprint_iou(a, b, 256) - footprint_iou(a, b, 512)) < 0.02);
  }
}

TEST_CASE("batch evaluation") {
  const Mesh a = square(0, 0, 1, 0.5);
  SUBCASE("identical pairs") {
    const auto r = evaluate_batch({{a, a}, {a, a}, {a, a}});
    CHECK(r.polis.mean == 0.0);
    CHECK(r.angular.mean == 0.0);
    CHECK(r.iou.mean == 1.0);
    CHECK(r.polis.sdm == 0.0);
    CHECK(r.iou.sdm == 0.0);
  }
  SUBCASE("single pair has zero SDM") {
    const auto r = evaluate_batch({{square(0.1, 0), a}});
    CHECK(r.polis.sdm == 0.0);
    CHECK(r.polis.count == 1);
  }
  SUBCASE("empty prediction is excluded") {
    const auto r = evaluate_batch({{Mesh{}, a}, {a, a}});
    CHECK(r.polis.excluded == 1);
    CHECK(r.angular.excluded == 1);
    CHECK(r.iou.excluded == 1);
    CHECK(r.polis.count == 1);
    CHECK(r.iou.mean == 1.0);
  }
  SUBCASE("standard deviation of the mean") {
    const auto g = aggregate({1.0, 2.0, 3.0, std::nullopt});
    CHECK(g.mean == doctest::Approx(2.0));
    CHECK(g.sdm == doctest::Approx(1.0 / std::sqrt(3.0)));
    CHECK(g.excluded == 1);
  }
  SUBCASE("reports") {
    const auto r = evaluate_batch({{a, a}});
    const std::string csv = report_csv_header() + report_csv_rows("model", r, {"ex0"});
    CHECK(csv.find("polis_sdm") != std::string::npos);
    CHECK(csv.find("model,ex0,") != std::string::npos);
    CHECK(csv.find("model,aggregate,") != std::string::npos);
    CHECK(report_json("model", r).find("\"sdm\"") != std::string::npos);
  }
  CHECK_THROWS_AS(evaluate_batch({}), EmptyInput);
}
