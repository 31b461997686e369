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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roofgen/geom/mesh.hpp"
#include "roofgen/model/model.hpp"
#include "roofgen/rng.hpp"

namespace roofgen::model {

struct SamplerConfig {
  double nucleus_p = 0.95;
  std::size_t max_vertex_tokens = 100;
  std::size_t max_face_tokens = 1600;
  bool grammar_mask = true;
  std::uint64_t seed = 0;

  /// Throws SpecError unless 0 < nucleus_p <= 1 and both limits are positive.
  void validate() const;
};

/// Renormalized top-p distribution: the smallest set of tokens, taken in
/// descending probability order (ties by lower index), whose mass reaches p.
/// Tokens outside the set get probability 0. `probs` must sum to 1.
std::vector<double> nucleus_distribution(std::span<const double> probs, double p);

/// One draw from nucleus_distribution(probs, p).
int nucleus_sample(std::span<const double> probs, double p, Rng& rng);

struct SampleResult {
  geom::Mesh mesh;  // lattice coordinates / 255
  std::vector<int> vertex_tokens;
  std::vector<int> face_tokens;
  /// Set when fewer than 3 vertices came out; the mesh then has no faces.
  std::optional<std::string> degenerate;
};

/// Samples vertices to STOP or the length limit, then faces conditioned on
/// them. With grammar_mask, disallowed tokens are removed before the
/// nucleus cut so every sequence is valid. Without it, malformed output is
/// repaired leniently: incomplete triples and bad pointers are dropped.
SampleResult sample_mesh(const MeshModel& model, const geom::ImageGrid& image, const SamplerConfig& config,
                         Rng& rng);

}  // namespace roofgen::model
