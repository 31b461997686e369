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

#include <algorithm>
#include <cmath>

namespace roofgen::geom {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Axis-aligned pixel grid in the xy plane. Row 0 is the top (largest y).
struct RasterFrame {
  double x0 = 0.0;
  double y_top = 0.0;
  double cell_w = 1.0;
  double cell_h = 1.0;
  int cols = 0;
  int rows = 0;

  Vec2 center(int row, int col) const {
    return {x0 + (col + 0.5) * cell_w, y_top - (row + 0.5) * cell_h};
  }
};

/// Calls fn(row, col, w0, w1, w2) for every pixel whose center lies inside
/// (or on the edge of) triangle abc; w are barycentric weights of a, b, c.
/// Zero-area triangles cover nothing. Shared by the renderer and the IoU
/// metric so that silhouettes agree pixel for pixel.
template <typename Fn>
void rasterize_triangle(Vec2 a, Vec2 b, Vec2 c, const RasterFrame& frame, Fn&& fn) {
  const double area = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  if (area == 0.0 || frame.cols <= 0 || frame.rows <= 0) return;
  constexpr double eps = 1e-12;

  const double min_x = std::min({a.x, b.x, c.x});
  const double max_x = std::max({a.x, b.x, c.x});
  const double min_y = std::min({a.y, b.y, c.y});
  const double max_y = std::max({a.y, b.y, c.y});
  const int c0 = std::max(0, static_cast<int>(std::floor((min_x - frame.x0) / frame.cell_w - 0.5)));
  const int c1 = std::min(frame.cols - 1, static_cast<int>(std::ceil((max_x - frame.x0) / frame.cell_w - 0.5)));
  const int r0 = std::max(0, static_cast<int>(std::floor((frame.y_top - max_y) / frame.cell_h - 0.5)));
  const int r1 = std::min(frame.rows - 1, static_cast<int>(std::ceil((frame.y_top - min_y) / frame.cell_h - 0.5)));

  for (int r = r0; r <= r1; ++r) {
    for (int col = c0; col <= c1; ++col) {
      const Vec2 p = frame.center(r, col);
      const double w0 = ((b.x - p.x) * (c.y - p.y) - (b.y - p.y) * (c.x - p.x)) / area;
      const double w1 = ((c.x - p.x) * (a.y - p.y) - (c.y - p.y) * (a.x - p.x)) / area;
      const double w2 = 1.0 - w0 - w1;
      if (w0 >= -eps && w1 >= -eps && w2 >= -eps) fn(r, col, w0, w1, w2);
    }
  }
}

}  // namespace roofgen::geom
