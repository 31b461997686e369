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

#include "roofgen/model/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "roofgen/error.hpp"
#include "roofgen/tokenizer/tokenizer.hpp"

namespace roofgen::model {

namespace tk = tokenizer;

namespace {

// Softmax of the last logits row restricted to `allowed` (all if empty).
std::vector<double> last_row_probs(const Tensor& logits, const std::vector<bool>& allowed) {
  const std::size_t rows = logits.dim(0);
  const std::size_t k = logits.dim(1);
  const auto row = logits.data().subspan((rows - 1) * k, k);
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    if (allowed.empty() || allowed[i]) hi = std::max(hi, row[i]);
  }
  std::vector<double> p(k, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (allowed.empty() || allowed[i]) {
      p[i] = std::exp(row[i] - hi);
      total += p[i];
    }
  }
  for (double& v : p) v /= total;
  return p;
}

std::vector<int> with_placeholder(const std::vector<int>& prefix) {
  std::vector<int> in = prefix;
  in.push_back(0);
  return in;
}

}  // namespace

void SamplerConfig::validate() const {
  if (!(nucleus_p > 0.0 && nucleus_p <= 1.0)) throw SpecError("nucleus_p must lie in (0, 1]");
  if (max_vertex_tokens == 0 || max_face_tokens == 0) throw SpecError("token limits must be positive");
}

std::vector<double> nucleus_distribution(std::span<const double> probs, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw SpecError("nucleus_p must lie in (0, 1]");
  if (probs.empty()) throw EmptyInput("empty distribution");
  std::vector<std::size_t> idx(probs.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
  std::vector<double> out(probs.size(), 0.0);
  double mass = 0.0;
  // The small slack keeps sums such as 0.5 + 0.3 + 0.15 from falling a
  // rounding error short of 0.95.
  constexpr double kSlack = 1e-12;
  for (std::size_t i : idx) {
    if (probs[i] <= 0.0) break;
    out[i] = probs[i];
    mass += probs[i];
    if (mass + kSlack >= p) break;
  }
  for (double& v : out) v /= mass;
  return out;
}

int nucleus_sample(std::span<const double> probs, double p, Rng& rng) {
  const std::vector<double> dist = nucleus_distribution(probs, p);
  const double u = rng.uniform();
  double acc = 0.0;
  int last = -1;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] <= 0.0) continue;
    acc += dist[i];
    last = static_cast<int>(i);
    if (u < acc) return last;
  }
  return last;
}

SampleResult sample_mesh(const MeshModel& model, const geom::ImageGrid& image, const SamplerConfig& config,
                         Rng& rng) {
  config.validate();
  tensor::NoGradGuard no_grad;
  const ForwardContext ctx{};
  SampleResult out;

  const std::size_t max_v = std::min(config.max_vertex_tokens, model.config().max_vertex_tokens);
  const std::size_t max_f = std::min(config.max_face_tokens, model.config().max_face_tokens);
  tk::MaskContext mask_ctx;
  mask_ctx.limits.max_vertex_tokens = max_v;
  mask_ctx.limits.max_faces = std::max<std::size_t>(1, max_f / 4);

  const ImageEmbedding emb = model.encode_image(image, ctx);
  std::vector<int>& vt = out.vertex_tokens;
  while (vt.size() < max_v) {
    std::vector<bool> allowed;
    if (config.grammar_mask) allowed = tk::valid_next_tokens(vt, tk::SequenceKind::vertex, mask_ctx);
    const auto probs = last_row_probs(model.vertex_logits(with_placeholder(vt), emb, ctx), allowed);
    const int tok = nucleus_sample(probs, config.nucleus_p, rng);
    vt.push_back(tok);
    if (tok == tk::kVertexStop) break;
  }

  std::vector<geom::LatticePoint> vertices;
  for (std::size_t i = 0; i + 2 < vt.size(); i += 3) {
    if (vt[i] == tk::kVertexStop || vt[i + 1] == tk::kVertexStop || vt[i + 2] == tk::kVertexStop) break;
    vertices.push_back({vt[i + 2], vt[i + 1], vt[i]});
  }
  vertices.resize(std::min(vertices.size(), model.config().max_vertices()));
  for (const auto& p : vertices) {
    out.mesh.vertices.push_back({p.x / 255.0, p.y / 255.0, p.z / 255.0});
  }
  if (vertices.size() < 3) {
    out.degenerate = "vertex model produced " + std::to_string(vertices.size()) + " vertices";
    return out;
  }

  mask_ctx.vertex_count = vertices.size();
  const Tensor context = model.encode_vertices(vertices, ctx);
  std::vector<int>& ft = out.face_tokens;
  while (ft.size() < max_f) {
    std::vector<bool> allowed;
    if (config.grammar_mask) allowed = tk::valid_next_tokens(ft, tk::SequenceKind::face, mask_ctx);
    const auto probs = last_row_probs(model.face_logits_from_context(with_placeholder(ft), context, ctx), allowed);
    const int tok = nucleus_sample(probs, config.nucleus_p, rng);
    ft.push_back(tok);
    if (tok == tk::kFaceStop) break;
  }

  if (config.grammar_mask) {
    if (ft.back() != tk::kFaceStop) ft.push_back(tk::kFaceStop);
    out.mesh.faces = tk::decode_faces({ft}, vertices.size());
    return out;
  }
  // Lenient repair: keep runs of at least three distinct pointers.
  std::vector<int> face;
  auto flush = [&] {
    for (std::size_t i = 1; i + 1 < face.size(); ++i) out.mesh.faces.push_back({face[0], face[i], face[i + 1]});
    face.clear();
  };
  for (int tok : ft) {
    if (tok == tk::kFaceStop || tok == tk::kNewFace) {
      flush();
      if (tok == tk::kFaceStop) break;
      continue;
    }
    const int v = tok - tk::kPointerOffset;
    if (std::find(face.begin(), face.end(), v) == face.end()) face.push_back(v);
  }
  flush();
  return out;
}

}  // namespace roofgen::model
