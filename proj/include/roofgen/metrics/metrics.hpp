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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "roofgen/geom/mesh.hpp"
#include "roofgen/geom/raster.hpp"

namespace roofgen::metrics {

/// Symmetric mean of minimum angles between two normal sets, in degrees:
/// sum_a min_b angle(a, b) / (2|A|) + sum_b min_a angle(b, a) / (2|B|).
/// Throws EmptyInput when either set is empty.
double angular_dissimilarity(const geom::FaceNormalSet& a, const geom::FaceNormalSet& b);

/// Outline loops of a footprint; the closing vertex is not repeated.
struct FootprintPolygon {
  std::vector<std::vector<geom::Vec2>> loops;

  std::size_t vertex_count() const;
  /// Throws InvalidPolygon for an empty polygon, a loop with fewer than
  /// three vertices, or a zero-area loop.
  void validate() const;
};

/// Outer boundary of the union of the mesh's xy-projected triangles, with
/// collinear vertices removed. Throws InvalidPolygon when nothing projects
/// to positive area.
FootprintPolygon footprint(const geom::Mesh& mesh);

/// PoLiS: mean distance from each polygon's vertices to the other's
/// boundary, averaged over both directions.
double polis_distance(const FootprintPolygon& a, const FootprintPolygon& b);

/// Variant on raw 3D vertex sets: symmetric mean nearest-vertex distance.
double polis_3d_vertices(const geom::Mesh& a, const geom::Mesh& b);

/// IoU of the rasterized xy projections on a resolution x resolution grid
/// spanning the union bounding box. 0 when the union is empty.
double footprint_iou(const geom::Mesh& a, const geom::Mesh& b, int resolution = 256);

/// Per-pixel coverage of a mesh's projected triangles over `frame`.
std::vector<bool> rasterize_footprint(const geom::Mesh& mesh, const geom::RasterFrame& frame);

struct PairMetrics {
  std::optional<double> polis;
  std::optional<double> angular;
  std::optional<double> iou;
};

struct Aggregate {
  double mean = 0.0;
  double sdm = 0.0;  // standard deviation of the mean
  std::size_t count = 0;
  std::size_t excluded = 0;
};

struct MetricsReport {
  std::vector<PairMetrics> per_example;
  Aggregate polis;
  Aggregate angular;
  Aggregate iou;
};

struct EvalOptions {
  int iou_resolution = 256;
  bool polis_3d_vertices = false;
};

using MeshPair = std::pair<geom::Mesh, geom::Mesh>;  // (prediction, ground truth)

PairMetrics evaluate_pair(const geom::Mesh& predicted, const geom::Mesh& truth, const EvalOptions& options = {});

/// Throws EmptyInput on an empty list.
MetricsReport evaluate_batch(const std::vector<MeshPair>& pairs, const EvalOptions& options = {});

/// Mean and standard deviation of the mean over the defined values.
Aggregate aggregate(const std::vector<std::optional<double>>& values);

std::string report_csv_header();
/// One row per example plus an aggregate row, all tagged with `method`.
std::string report_csv_rows(const std::string& method, const MetricsReport& report,
                            const std::vector<std::string>& example_ids = {});
std::string report_json(const std::string& method, const MetricsReport& report,
                        const std::vector<std::string>& example_ids = {});

}  // namespace roofgen::metrics
