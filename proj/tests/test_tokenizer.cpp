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

#include "roofgen/error.hpp"
#include "roofgen/rng.hpp"
#include "roofgen/synthroof/synthroof.hpp"
#include "roofgen/tokenizer/tokenizer.hpp"

using namespace roofgen;
using namespace roofgen::tokenizer;
using geom::LatticePoint;
using geom::QuantizedMesh;

namespace {

QuantizedMesh lattice_mesh(std::vector<LatticePoint> v, std::vector<geom::Face> f = {}) {
  QuantizedMesh q;
  q.vertices = std::move(v);
  q.faces = std::move(f);
  return q;
}

std::vector<int> prefix_of(const std::vector<int>& seq, std::size_t n) { return {seq.begin(), seq.begin() + n}; }

}  // namespace

TEST_CASE("vertex encoding") {
  SUBCASE("empty mesh") { CHECK(encode_vertices(QuantizedMesh{}).tokens == std::vector<int>{256}); }
  SUBCASE("hand traced") {
    // (x,y,z) = (0,0,0), (10,0,0), (5,8,12) after canonical sorting.
    const QuantizedMesh q = lattice_mesh({{0, 0, 0}, {10, 0, 0}, {5, 8, 12}});
    const std::vector<int> expected{0, 0, 0, 0, 0, 10, 12, 8, 5, 256};
    CHECK(encode_vertices(q).tokens == expected);
    const auto back = decode_vertices({expected});
    CHECK(back == q.vertices);
  }
  SUBCASE("limit") {
    std::vector<LatticePoint> v;
    for (int i = 0; i < 34; ++i) v.push_back({i, 0, 0});
    CHECK_THROWS_AS(encode_vertices(lattice_mesh(v)), LimitExceeded);
    v.pop_back();
    CHECK(encode_vertices(lattice_mesh(v)).tokens.size() == 100);
  }
  SUBCASE("decode errors") {
    CHECK(decode_vertices({{256}}).empty());
    CHECK_THROWS_AS(decode_vertices({{0, 256}}), GrammarError);
    CHECK_THROWS_AS(decode_vertices({{0, 0, 5, 0, 0, 4, 256}}), GrammarError);
    CHECK_THROWS_AS(decode_vertices({{0, 0, 0}}), GrammarError);
  }
}

TEST_CASE("face encoding") {
  const std::vector<LatticePoint> four{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {1, 1, 0}};
  SUBCASE("single face") {
    CHECK(encode_faces(lattice_mesh({four.begin(), four.begin() + 3}, {{0, 1, 2}})).tokens ==
          std::vector<int>{2, 3, 4, 0});
  }
  SUBCASE("separator") {
    CHECK(encode_faces(lattice_mesh(four, {{0, 1, 2}, {1, 2, 3}})).tokens == std::vector<int>{2, 3, 4, 1, 3, 4, 5, 0});
  }
  SUBCASE("rotation to lowest first") {
    CHECK(encode_faces(lattice_mesh({four.begin(), four.begin() + 3}, {{2, 0, 1}})).tokens ==
          std::vector<int>{2, 3, 4, 0});
  }
  SUBCASE("decode") {
    CHECK(decode_faces({{2, 3, 4, 0}}, 3) == std::vector<geom::Face>{{0, 1, 2}});
    CHECK_THROWS_AS(decode_faces({{2, 3, 0}}, 3), GrammarError);
    CHECK_THROWS_AS(decode_faces({{2, 3, 9, 0}}, 3), GrammarError);
    CHECK_THROWS_AS(decode_faces({{2, 3, 4, 1, 0}}, 3), GrammarError);
    CHECK_THROWS_AS(decode_faces({{2, 3, 4}}, 3), GrammarError);
  }
  SUBCASE("n-gon fan") {
    CHECK(decode_faces({{2, 3, 4, 5, 0}}, 4) == std::vector<geom::Face>{{0, 1, 2}, {0, 2, 3}});
  }
}

TEST_CASE("grammar mask hand cases") {
  MaskContext ctx;
  SUBCASE("mid-triple forbids STOP") {
    const auto m = valid_next_tokens({0, 0}, SequenceKind::vertex, ctx);
    CHECK_FALSE(m[kVertexStop]);
  }
  SUBCASE("monotone z") {
    const auto m = valid_next_tokens({5, 0, 0}, SequenceKind::vertex, ctx);
    for (int t = 0; t < 5; ++t) CHECK_FALSE(m[t]);
    CHECK(m[5]);
    CHECK(m[kVertexStop]);
  }
  SUBCASE("face arity") {
    ctx.vertex_count = 4;
    const auto m = valid_next_tokens({2, 3}, SequenceKind::face, ctx);
    CHECK_FALSE(m[kFaceStop]);
    CHECK_FALSE(m[kNewFace]);
    CHECK(m[4]);
    CHECK(m[5]);
  }
  SUBCASE("finished sequence") {
    const auto m = valid_next_tokens({256}, SequenceKind::vertex, ctx);
    for (bool b : m) CHECK_FALSE(b);
  }
}

TEST_CASE("round trip and mask on synthetic roofs") {
  const auto& kinds = synthroof::all_roof_kinds();
  for (std::size_t i = 0; i < 300; ++i) {
    const auto spec = synthroof::sample_roof_spec(21, i, kinds);
    const QuantizedMesh q = geom::quantize(geom::normalize_to_unit_cube(synthroof::build_roof(spec, i % 2 == 1)));
    const auto vs = encode_vertices(q);
    const auto fs = encode_faces(q);
    validate_vertex_sequence(vs);
    validate_face_sequence(fs, q.vertices.size());
    CHECK(decode_vertices(vs) == q.vertices);
    CHECK(decode_faces(fs, q.vertices.size()) == q.faces);

    MaskContext ctx;
    ctx.vertex_count = q.vertices.size();
    for (std::size_t n = 0; n < vs.tokens.size(); ++n) {
      const auto m = valid_next_tokens(prefix_of(vs.tokens, n), SequenceKind::vertex, ctx);
      REQUIRE(m[vs.tokens[n]]);
    }
    for (std::size_t n = 0; n < fs.tokens.size(); ++n) {
      const auto m = valid_next_tokens(prefix_of(fs.tokens, n), SequenceKind::face, ctx);
      REQUIRE(m[fs.tokens[n]]);
    }
  }
}

TEST_CASE("random walks through the mask stay valid") {
  Rng rng(4);
  MaskContext ctx;
  for (int t = 0; t < 200; ++t) {
    std::vector<int> seq;
    while (seq.empty() || seq.back() != kVertexStop) {
      const auto m = valid_next_tokens(seq, SequenceKind::vertex, ctx);
      std::vector<int> allowed;
      for (int k = 0; k < kVertexVocab; ++k) {
        if (m[k]) allowed.push_back(k);
      }
      REQUIRE_FALSE(allowed.empty());
      // Favor STOP rarely so sequences get long.
      int pick = allowed[rng.below(allowed.size())];
      if (m[kVertexStop] && rng.uniform() < 0.05) pick = kVertexStop;
      seq.push_back(pick);
    }
    CHECK(seq.size() <= 100);
    CHECK_NOTHROW(validate_vertex_sequence({seq}));

    ctx.vertex_count = 3 + rng.below(10);
    std::vector<int> faces;
    while (faces.empty() || faces.back() != kFaceStop) {
      const auto m = valid_next_tokens(faces, SequenceKind::face, ctx);
      std::vector<int> allowed;
      for (int k = 0; k < face_vocab(ctx.vertex_count); ++k) {
        if (m[k]) allowed.push_back(k);
      }
      REQUIRE_FALSE(allowed.empty());
      faces.push_back(allowed[rng.below(allowed.size())]);
    }
    CHECK_NOTHROW(validate_face_sequence({faces}, ctx.vertex_count));
  }
}
