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
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "roofgen/geom/mesh.hpp"
#include "roofgen/geom/raster.hpp"

namespace roofgen::synthroof {

enum class RoofKind { flat, shed, gable, hip, pyramid };

std::string_view to_string(RoofKind kind);
/// Throws SpecError for unknown names.
RoofKind parse_roof_kind(std::string_view name);
const std::vector<RoofKind>& all_roof_kinds();

/// Parametric roof. Footprint is a w x l rectangle centered at the origin,
/// rotated about z and then translated by offset.
struct RoofSpec {
  RoofKind kind = RoofKind::flat;
  double footprint_w = 10.0;
  double footprint_l = 6.0;
  double eave_h = 3.0;
  double ridge_h = 3.0;
  double rotation = 0.0;
  geom::Vec2 offset;
  double hip_inset = 0.25;

  void validate() const;
};

/// Roof surface only, or a closed shell with walls and floor when
/// watertight is set (requires eave_h > 0).
geom::Mesh build_roof(const RoofSpec& spec, bool watertight = false);

/// Symmetry k of the square acting on xy: k % 4 quarter turns
/// counter-clockwise about z, then for k >= 4 the mirror x -> -x with face
/// winding reversed so normals stay on their side. Throws SpecError unless
/// 0 <= k < 8.
geom::Mesh apply_square_symmetry(const geom::Mesh& mesh, int k);

struct RenderConfig {
  int resolution = 32;
  geom::Vec3 sun_direction = default_sun();
  double margin = 0.15;

  static geom::Vec3 default_sun();
  void validate() const;
};

/// Square frame over the mesh's xy bounding box grown by margin per side.
geom::RasterFrame render_frame(const geom::Mesh& mesh, const RenderConfig& cfg);

struct Rendering {
  geom::ImageGrid image;
  std::vector<bool> covered;
  geom::RasterFrame frame;
};

/// Orthographic top-down Lambertian render with a z-buffer. Throws EmptyMesh.
Rendering render_topdown_detailed(const geom::Mesh& mesh, const RenderConfig& cfg);
geom::ImageGrid render_topdown(const geom::Mesh& mesh, const RenderConfig& cfg);

enum class Split { train, val, test };
std::string_view to_string(Split split);
Split parse_split(std::string_view name);

struct ManifestEntry {
  std::size_t index = 0;
  std::string image;  // relative to the manifest directory
  std::string mesh;
  RoofKind kind = RoofKind::flat;
  Split split = Split::train;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::uint64_t seed = 0;
  int image_resolution = 0;
  RenderConfig render;
  bool watertight = false;
  std::vector<RoofKind> kinds;
  std::filesystem::path root;  // directory holding manifest.json; not serialized

  std::vector<ManifestEntry> split(Split s) const;
  std::filesystem::path image_path(const ManifestEntry& e) const { return root / e.image; }
  std::filesystem::path mesh_path(const ManifestEntry& e) const { return root / e.mesh; }
};

std::string manifest_to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(std::string_view text, const std::filesystem::path& root);
/// Throws IoError when the file is missing.
DatasetManifest load_manifest(const std::filesystem::path& path);

struct GenerateOptions {
  std::size_t n = 100;
  std::uint64_t seed = 0;
  RenderConfig render;
  std::vector<RoofKind> kinds = all_roof_kinds();
  bool watertight = false;
};

/// Draws the spec of example `index`; depends only on (seed, index).
RoofSpec sample_roof_spec(std::uint64_t seed, std::size_t index, const std::vector<RoofKind>& kinds);

/// Split tag for every index: hash-ordered, 70/15/15.
std::vector<Split> assign_splits(std::size_t n, std::uint64_t seed);

/// Writes out_dir/{train,val,test}/ex{idx}.obj|.pgm and out_dir/manifest.json.
DatasetManifest generate_dataset(const GenerateOptions& options, const std::filesystem::path& out_dir);

/// Same meshes and splits, images re-rendered at another resolution.
DatasetManifest rerender_dataset(const DatasetManifest& source, int resolution,
                                 const std::filesystem::path& out_dir);

}  // namespace roofgen::synthroof
