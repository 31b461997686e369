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

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

namespace roofgen::geom {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(Vec3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

using Face = std::array<int, 3>;

/// Triangle mesh in model units. Faces hold 0-based vertex indices.
struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Face> faces;

  bool empty() const { return vertices.empty(); }
  /// Throws SpecError if a face index is out of range or repeated.
  void validate() const;
  friend bool operator==(const Mesh&, const Mesh&) = default;
};

/// A point of the 8-bit lattice; each component is in [0, 255].
struct LatticePoint {
  int x = 0;
  int y = 0;
  int z = 0;

  /// Canonical vertex order: lexicographic on (z, y, x).
  friend auto operator<=>(const LatticePoint& a, const LatticePoint& b) {
    if (auto c = a.z <=> b.z; c != 0) return c;
    if (auto c = a.y <=> b.y; c != 0) return c;
    return a.x <=> b.x;
  }
  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

inline constexpr int kLatticeMax = 255;

/// Mesh snapped to the lattice with canonical vertex and face ordering.
/// merged_vertices and dropped_faces record what quantization discarded;
/// they do not take part in equality.
struct QuantizedMesh {
  std::vector<LatticePoint> vertices;
  std::vector<Face> faces;
  std::size_t merged_vertices = 0;
  std::size_t dropped_faces = 0;

  friend bool operator==(const QuantizedMesh& a, const QuantizedMesh& b) {
    return a.vertices == b.vertices && a.faces == b.faces;
  }
  /// True if the vertex/face ordering invariants hold.
  bool is_canonical() const;
};

/// Row-major grayscale image, intensities in [0, 1].
struct ImageGrid {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  ImageGrid() = default;
  ImageGrid(int w, int h, double fill = 0.0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int row, int col) { return pixels[static_cast<std::size_t>(row) * width + col]; }
  double at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * width + col]; }
  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;
};

/// Unit normals of the non-degenerate faces, oriented upward.
struct FaceNormalSet {
  std::vector<Vec3> normals;
  std::size_t skipped = 0;
};

/// Translates and uniformly scales the mesh so its bounding box fits the
/// unit cube, centered on every axis. Throws EmptyMesh.
Mesh normalize_to_unit_cube(const Mesh& mesh);

/// Snaps a normalized mesh to the lattice (round half away from zero),
/// merges duplicates (first occurrence wins), drops collapsed faces and
/// canonicalizes vertex and face order.
QuantizedMesh quantize(const Mesh& mesh);

/// Maps lattice value q to q / 255.
Mesh dequantize(const QuantizedMesh& qm);

/// normalize -> quantize -> dequantize: the frame all metrics work in.
Mesh canonical_mesh(const Mesh& world);

/// Rotates a face so its lowest index comes first, preserving winding.
Face rotate_lowest_first(Face f);

/// Flips v so that z > 0, or z == 0 and y > 0, or z == y == 0 and x >= 0.
Vec3 orient_upward(Vec3 v);

FaceNormalSet face_normals(const Mesh& mesh);
FaceNormalSet face_normals(const QuantizedMesh& qm);

}  // namespace roofgen::geom
