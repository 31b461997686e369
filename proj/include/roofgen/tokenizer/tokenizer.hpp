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
#include <vector>

#include "roofgen/geom/mesh.hpp"

namespace roofgen::tokenizer {

// Vertex vocabulary: lattice values 0..255 and STOP.
inline constexpr int kVertexStop = 256;
inline constexpr int kVertexVocab = 257;

// Face vocabulary: STOP, NEWFACE, then one pointer per vertex.
inline constexpr int kFaceStop = 0;
inline constexpr int kNewFace = 1;
inline constexpr int kPointerOffset = 2;

inline int face_vocab(std::size_t vertex_count) {
  return static_cast<int>(vertex_count) + kPointerOffset;
}

struct SequenceLimits {
  std::size_t max_vertex_tokens = 100;
  std::size_t max_faces = 400;

  /// Throws SpecError unless both limits are positive.
  void validate() const;
  std::size_t max_vertices() const { return (max_vertex_tokens - 1) / 3; }
};

/// Flattened (z, y, x) triples followed by STOP.
struct VertexSequence {
  std::vector<int> tokens;
  friend bool operator==(const VertexSequence&, const VertexSequence&) = default;
};

/// Pointer tokens (vertex index + 2) with NEWFACE between faces and STOP at
/// the end.
struct FaceSequence {
  std::vector<int> tokens;
  friend bool operator==(const FaceSequence&, const FaceSequence&) = default;
};

VertexSequence encode_vertices(const geom::QuantizedMesh& qm, const SequenceLimits& limits = {});
std::vector<geom::LatticePoint> decode_vertices(const VertexSequence& seq);

FaceSequence encode_faces(const geom::QuantizedMesh& qm, const SequenceLimits& limits = {});
/// Faces with more than three pointers are fan triangulated.
std::vector<geom::Face> decode_faces(const FaceSequence& seq, std::size_t vertex_count);

/// Full-sequence grammar checks; throw GrammarError naming the position.
void validate_vertex_sequence(const VertexSequence& seq);
void validate_face_sequence(const FaceSequence& seq, std::size_t vertex_count);

enum class SequenceKind { vertex, face };

struct MaskContext {
  std::size_t vertex_count = 0;  // face sequences only
  SequenceLimits limits;
};

/// Tokens that keep `prefix` on a path to a valid, canonically ordered
/// sequence. The mask has kVertexVocab entries for vertex sequences and
/// face_vocab(vertex_count) entries for face sequences. A prefix that already
/// ends in STOP yields an all-false mask. Throws GrammarError when the
/// prefix itself is not a valid prefix.
std::vector<bool> valid_next_tokens(const std::vector<int>& prefix, SequenceKind kind,
                                    const MaskContext& context);

}  // namespace roofgen::tokenizer
