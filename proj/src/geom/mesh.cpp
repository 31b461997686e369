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

#include "roofgen/geom/mesh.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <string>

#include "roofgen/error.hpp"

namespace roofgen::geom {

void Mesh::validate() const {
  const int n = static_cast<int>(vertices.size());
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const Face& f = faces[i];
    for (int idx : f) {
      if (idx < 0 || idx >= n) {
        throw SpecError("face " + std::to_string(i) + " index " + std::to_string(idx) +
                        " out of range for " + std::to_string(n) + " vertices");
      }
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
      throw SpecError("face " + std::to_string(i) + " repeats a vertex index");
    }
  }
}

bool QuantizedMesh::is_canonical() const {
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    if (!(vertices[i - 1] < vertices[i])) return false;
  }
  for (const LatticePoint& p : vertices) {
    for (int c : {p.x, p.y, p.z}) {
      if (c < 0 || c > kLatticeMax) return false;
    }
  }
  const int n = static_cast<int>(vertices.size());
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const Face& f = faces[i];
    for (int idx : f) {
      if (idx < 0 || idx >= n) return false;
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) return false;
    if (f[0] > f[1] || f[0] > f[2]) return false;
    if (i > 0 && faces[i] < faces[i - 1]) return false;
  }
  return true;
}

Mesh normalize_to_unit_cube(const Mesh& mesh) {
  if (mesh.vertices.empty()) throw EmptyMesh("cannot normalize an empty mesh");
  constexpr double inf = std::numeric_limits<double>::infinity();
  Vec3 lo{inf, inf, inf};
  Vec3 hi{-inf, -inf, -inf};
  for (const Vec3& v : mesh.vertices) {
    lo = {std::min(lo.x, v.x), std::min(lo.y, v.y), std::min(lo.z, v.z)};
    hi = {std::max(hi.x, v.x), std::max(hi.y, v.y), std::max(hi.z, v.z)};
  }
  const Vec3 center = (lo + hi) * 0.5;
  const double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
  const double scale = extent > 0.0 ? 1.0 / extent : 0.0;

  Mesh out = mesh;
  for (Vec3& v : out.vertices) {
    v = Vec3{0.5, 0.5, 0.5} + (v - center) * scale;
  }
  return out;
}

Face rotate_lowest_first(Face f) {
  while (f[0] > f[1] || f[0] > f[2]) {
    f = {f[1], f[2], f[0]};
  }
  return f;
}

QuantizedMesh quantize(const Mesh& mesh) {
  auto snap = [](double c) {
    const long q = std::lround(c * kLatticeMax);
    return static_cast<int>(std::clamp<long>(q, 0, kLatticeMax));
  };

  QuantizedMesh out;
  // First occurrence of each lattice point wins.
  std::map<LatticePoint, int> first_index;
  std::vector<LatticePoint> unique;
  std::vector<int> remap(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3& v = mesh.vertices[i];
    const LatticePoint p{snap(v.x), snap(v.y), snap(v.z)};
    auto [it, inserted] = first_index.emplace(p, static_cast<int>(unique.size()));
    if (inserted) {
      unique.push_back(p);
    } else {
      ++out.merged_vertices;
    }
    remap[i] = it->second;
  }

  // Sorted position of each unique point; the map iterates in (z, y, x) order.
  std::vector<int> sorted_pos(unique.size());
  out.vertices.reserve(unique.size());
  for (const auto& [p, idx] : first_index) {
    sorted_pos[idx] = static_cast<int>(out.vertices.size());
    out.vertices.push_back(p);
  }

  out.faces.reserve(mesh.faces.size());
  for (const Face& f : mesh.faces) {
    Face g{sorted_pos[remap[f[0]]], sorted_pos[remap[f[1]]], sorted_pos[remap[f[2]]]};
    if (g[0] == g[1] || g[1] == g[2] || g[0] == g[2]) {
      ++out.dropped_faces;
      continue;
    }
    out.faces.push_back(rotate_lowest_first(g));
  }
  std::sort(out.faces.begin(), out.faces.end());
  return out;
}

Mesh dequantize(const QuantizedMesh& qm) {
  Mesh out;
  out.vertices.reserve(qm.vertices.size());
  for (const LatticePoint& p : qm.vertices) {
    out.vertices.push_back({p.x / 255.0, p.y / 255.0, p.z / 255.0});
  }
  out.faces = qm.faces;
  return out;
}

Mesh canonical_mesh(const Mesh& world) {
  return dequantize(quantize(normalize_to_unit_cube(world)));
}

Vec3 orient_upward(Vec3 v) {
  bool flip = false;
  if (v.z != 0.0) {
    flip = v.z < 0.0;
  } else if (v.y != 0.0) {
    flip = v.y < 0.0;
  } else {
    flip = v.x < 0.0;
  }
  return flip ? v * -1.0 : v;
}

namespace {

template <typename PointAt>
FaceNormalSet normals_of(const std::vector<Face>& faces, PointAt point_at) {
  FaceNormalSet out;
  out.normals.reserve(faces.size());
  for (const Face& f : faces) {
    const Vec3 a = point_at(f[0]);
    const Vec3 e1 = point_at(f[1]) - a;
    const Vec3 e2 = point_at(f[2]) - a;
    const Vec3 n = cross(e1, e2);
    const double len = norm(n);
    // Zero area, up to rounding on collinear float input.
    if (!(len > 1e-12 * norm(e1) * norm(e2))) {
      ++out.skipped;
      continue;
    }
    out.normals.push_back(orient_upward(n * (1.0 / len)));
  }
  return out;
}

}  // namespace

FaceNormalSet face_normals(const Mesh& mesh) {
  return normals_of(mesh.faces, [&](int i) { return mesh.vertices[i]; });
}

FaceNormalSet face_normals(const QuantizedMesh& qm) {
  return normals_of(qm.faces, [&](int i) {
    const LatticePoint& p = qm.vertices[i];
    return Vec3{double(p.x), double(p.y), double(p.z)};
  });
}

}  // namespace roofgen::geom
