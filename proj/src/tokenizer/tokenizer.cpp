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

#include "roofgen/tokenizer/tokenizer.hpp"

#include <algorithm>
#include <string>

#include "roofgen/error.hpp"

namespace roofgen::tokenizer {

using geom::Face;
using geom::LatticePoint;

void SequenceLimits::validate() const {
  if (max_vertex_tokens == 0 || max_faces == 0) {
    throw SpecError("sequence limits must be positive");
  }
}

VertexSequence encode_vertices(const geom::QuantizedMesh& qm, const SequenceLimits& limits) {
  const std::size_t length = 3 * qm.vertices.size() + 1;
  if (length > limits.max_vertex_tokens) {
    throw LimitExceeded("vertex sequence too long", length, limits.max_vertex_tokens);
  }
  std::vector<LatticePoint> sorted = qm.vertices;
  std::sort(sorted.begin(), sorted.end());
  VertexSequence seq;
  seq.tokens.reserve(length);
  for (const LatticePoint& p : sorted) {
    seq.tokens.insert(seq.tokens.end(), {p.z, p.y, p.x});
  }
  seq.tokens.push_back(kVertexStop);
  return seq;
}

void validate_vertex_sequence(const VertexSequence& seq) {
  const auto& t = seq.tokens;
  if (t.empty()) throw GrammarError("missing STOP", 0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < 0 || t[i] > kVertexStop) {
      throw GrammarError("token " + std::to_string(t[i]) + " outside vertex vocabulary", i);
    }
    const bool last = i + 1 == t.size();
    if (t[i] == kVertexStop && !last) throw GrammarError("STOP before end of sequence", i);
    if (last && t[i] != kVertexStop) throw GrammarError("missing STOP", i);
  }
  if (t.size() % 3 != 1) throw GrammarError("truncated coordinate triple", t.size() - 1);
  for (std::size_t i = 3; i + 3 < t.size(); i += 3) {
    const LatticePoint prev{t[i - 1], t[i - 2], t[i - 3]};
    const LatticePoint cur{t[i + 2], t[i + 1], t[i]};
    if (!(prev < cur)) throw GrammarError("vertices not strictly ascending in (z, y, x)", i);
  }
}

std::vector<LatticePoint> decode_vertices(const VertexSequence& seq) {
  validate_vertex_sequence(seq);
  std::vector<LatticePoint> out;
  out.reserve(seq.tokens.size() / 3);
  for (std::size_t i = 0; i + 3 < seq.tokens.size(); i += 3) {
    out.push_back({seq.tokens[i + 2], seq.tokens[i + 1], seq.tokens[i]});
  }
  return out;
}

FaceSequence encode_faces(const geom::QuantizedMesh& qm, const SequenceLimits& limits) {
  if (qm.faces.size() > limits.max_faces) {
    throw LimitExceeded("too many faces", qm.faces.size(), limits.max_faces);
  }
  std::vector<Face> faces;
  faces.reserve(qm.faces.size());
  for (const Face& f : qm.faces) faces.push_back(geom::rotate_lowest_first(f));
  std::sort(faces.begin(), faces.end());

  FaceSequence seq;
  seq.tokens.reserve(faces.size() * 4 + 1);
  for (std::size_t i = 0; i < faces.size(); ++i) {
    if (i > 0) seq.tokens.push_back(kNewFace);
    for (int idx : faces[i]) seq.tokens.push_back(idx + kPointerOffset);
  }
  seq.tokens.push_back(kFaceStop);
  return seq;
}

namespace {

// Walks a face-token prefix, checking the base grammar. Returns the pointers
// of the open face and the first pointer of the previous face.
struct FaceCursor {
  std::vector<int> open_face;
  int previous_first = -1;
  std::size_t closed_faces = 0;
  bool stopped = false;
};

FaceCursor walk_faces(const std::vector<int>& t, std::size_t vertex_count) {
  const int vocab = face_vocab(vertex_count);
  FaceCursor cur;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (cur.stopped) throw GrammarError("token after STOP", i);
    const int tok = t[i];
    if (tok < 0 || tok >= vocab) {
      throw GrammarError("pointer " + std::to_string(tok - kPointerOffset) + " out of range for " +
                             std::to_string(vertex_count) + " vertices",
                         i);
    }
    if (tok == kFaceStop || tok == kNewFace) {
      if (!cur.open_face.empty() && cur.open_face.size() < 3) {
        throw GrammarError("face with " + std::to_string(cur.open_face.size()) + " pointers", i);
      }
      if (tok == kNewFace && cur.open_face.empty()) throw GrammarError("NEWFACE without a face", i);
      if (tok == kFaceStop && cur.open_face.empty() && cur.closed_faces > 0) {
        throw GrammarError("STOP directly after NEWFACE", i);
      }
      if (!cur.open_face.empty()) {
        cur.previous_first = cur.open_face.front();
        ++cur.closed_faces;
        cur.open_face.clear();
      }
      cur.stopped = tok == kFaceStop;
    } else {
      cur.open_face.push_back(tok - kPointerOffset);
    }
  }
  return cur;
}

}  // namespace

void validate_face_sequence(const FaceSequence& seq, std::size_t vertex_count) {
  const FaceCursor cur = walk_faces(seq.tokens, vertex_count);
  if (!cur.stopped) throw GrammarError("missing STOP", seq.tokens.size());
}

std::vector<Face> decode_faces(const FaceSequence& seq, std::size_t vertex_count) {
  validate_face_sequence(seq, vertex_count);
  std::vector<Face> faces;
  std::vector<int> poly;
  for (int tok : seq.tokens) {
    if (tok >= kPointerOffset) {
      poly.push_back(tok - kPointerOffset);
      continue;
    }
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) faces.push_back({poly[0], poly[i], poly[i + 1]});
    poly.clear();
  }
  return faces;
}

namespace {

std::vector<bool> vertex_mask(const std::vector<int>& prefix, const SequenceLimits& limits) {
  std::vector<bool> mask(kVertexVocab, false);
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (prefix[i] == kVertexStop) {
      if (i + 1 != prefix.size() || i % 3 != 0) throw GrammarError("misplaced STOP", i);
      return mask;
    }
    if (prefix[i] < 0 || prefix[i] > kVertexStop) {
      throw GrammarError("token " + std::to_string(prefix[i]) + " outside vertex vocabulary", i);
    }
  }
  const std::size_t n = prefix.size();
  const std::size_t complete = n / 3;
  for (std::size_t v = 1; v < complete; ++v) {
    const std::size_t i = 3 * v;
    const LatticePoint prev{prefix[i - 1], prefix[i - 2], prefix[i - 3]};
    const LatticePoint cur{prefix[i + 2], prefix[i + 1], prefix[i]};
    if (!(prev < cur)) throw GrammarError("vertices not strictly ascending in (z, y, x)", i);
  }

  const bool prev_exists = complete >= 1;
  const std::size_t prev_at = prev_exists ? 3 * (complete - 1) : 0;
  const int pz = prev_exists ? prefix[prev_at] : -1;
  const int py = prev_exists ? prefix[prev_at + 1] : -1;
  const int px = prev_exists ? prefix[prev_at + 2] : -1;
  constexpr int top = geom::kLatticeMax;

  if (prev_exists && n % 3 >= 1) {
    const int z = prefix[3 * complete];
    const bool bad_z = z < pz || (z == pz && py == top && px == top);
    const bool bad_y = n % 3 == 2 && z == pz &&
                       (prefix[n - 1] < py || (prefix[n - 1] == py && px == top));
    if (bad_z || bad_y) throw GrammarError("open vertex cannot follow the previous one", n - 1);
  }

  switch (n % 3) {
    case 0: {
      mask[kVertexStop] = true;
      if (3 * (complete + 1) + 1 > limits.max_vertex_tokens) break;
      for (int z = 0; z <= top; ++z) {
        if (!prev_exists || z > pz || (z == pz && !(py == top && px == top))) mask[z] = true;
      }
      break;
    }
    case 1: {
      const int z = prefix[n - 1];
      for (int y = 0; y <= top; ++y) {
        if (!prev_exists || z > pz || y > py || (y == py && px < top)) mask[y] = true;
      }
      break;
    }
    case 2: {
      const int z = prefix[n - 2];
      const int y = prefix[n - 1];
      for (int x = 0; x <= top; ++x) {
        if (!prev_exists || z > pz || (z == pz && y > py) || x > px) mask[x] = true;
      }
      break;
    }
  }
  return mask;
}

std::vector<bool> face_mask(const std::vector<int>& prefix, const MaskContext& ctx) {
  const int vcount = static_cast<int>(ctx.vertex_count);
  std::vector<bool> mask(face_vocab(ctx.vertex_count), false);
  const FaceCursor cur = walk_faces(prefix, ctx.vertex_count);
  if (cur.stopped) return mask;

  auto pointer = [&](int v) { mask[v + kPointerOffset] = true; };
  const std::size_t open = cur.open_face.size();
  if (open == 0) {
    const bool can_start = cur.closed_faces < ctx.limits.max_faces;
    if (can_start) {
      for (int v = std::max(0, cur.previous_first); v + 2 < vcount; ++v) pointer(v);
    }
    if (cur.closed_faces == 0) mask[kFaceStop] = true;
  } else if (open < 3) {
    const int first = cur.open_face.front();
    for (int v = first + 1; v < vcount; ++v) {
      if (open == 2 && v == cur.open_face[1]) continue;
      pointer(v);
    }
  } else {
    mask[kFaceStop] = true;
    if (cur.closed_faces + 1 < ctx.limits.max_faces) mask[kNewFace] = true;
  }
  // Never leave the sampler without an option.
  if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) mask[kFaceStop] = true;
  return mask;
}

}  // namespace

std::vector<bool> valid_next_tokens(const std::vector<int>& prefix, SequenceKind kind,
                                    const MaskContext& context) {
  return kind == SequenceKind::vertex ? vertex_mask(prefix, context.limits)
                                      : face_mask(prefix, context);
}

}  // namespace roofgen::tokenizer
