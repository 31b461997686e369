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

#include "roofgen/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>
#include <nlohmann/json.hpp>

#include "roofgen/error.hpp"

namespace roofgen::metrics {

using geom::Mesh;
using geom::Vec2;
using geom::Vec3;

namespace bg = boost::geometry;
using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint, /*clockwise=*/false, /*closed=*/true>;
using BgMultiPolygon = bg::model::multi_polygon<BgPolygon>;

double angular_dissimilarity(const geom::FaceNormalSet& a, const geom::FaceNormalSet& b) {
  if (a.normals.empty() || b.normals.empty()) {
    throw EmptyInput("angular dissimilarity needs non-empty normal sets");
  }
  // atan2 of (|u x v|, u . v) is exact for parallel unit vectors, where
  // arccos of a dot product rounded below 1 is not.
  auto directed_sum = [](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
    double total = 0.0;
    for (const Vec3& u : from) {
      double best = std::numbers::pi;
      for (const Vec3& v : to) best = std::min(best, std::atan2(geom::norm(geom::cross(u, v)), geom::dot(u, v)));
      total += best;
    }
    return total;
  };
  constexpr double to_deg = 180.0 / std::numbers::pi;
  const double sum_a = directed_sum(a.normals, b.normals) * to_deg;
  const double sum_b = directed_sum(b.normals, a.normals) * to_deg;
  return sum_a / (2.0 * a.normals.size()) + sum_b / (2.0 * b.normals.size());
}

std::size_t FootprintPolygon::vertex_count() const {
  std::size_t n = 0;
  for (const auto& loop : loops) n += loop.size();
  return n;
}

namespace {

double signed_area(const std::vector<Vec2>& loop) {
  double a = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec2& p = loop[i];
    const Vec2& q = loop[(i + 1) % loop.size()];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

// Drops repeated points and vertices whose neighbours make a straight line.
std::vector<Vec2> simplify_loop(std::vector<Vec2> loop) {
  bool changed = true;
  while (changed && loop.size() >= 3) {
    changed = false;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const Vec2& prev = loop[(i + loop.size() - 1) % loop.size()];
      const Vec2& cur = loop[i];
      const Vec2& next = loop[(i + 1) % loop.size()];
      const double ex = cur.x - prev.x, ey = cur.y - prev.y;
      const double fx = next.x - cur.x, fy = next.y - cur.y;
      const double cross = ex * fy - ey * fx;
      const double scale = std::hypot(ex, ey) * std::hypot(fx, fy);
      const bool same_point = ex == 0.0 && ey == 0.0;
      const bool straight = std::abs(cross) <= 1e-9 * scale && ex * fx + ey * fy >= 0.0;
      if (same_point || straight) {
        loop.erase(loop.begin() + static_cast<std::ptrdiff_t>(i));
        changed = true;
        break;
      }
    }
  }
  return loop;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

double distance_to_boundary(Vec2 p, const FootprintPolygon& poly) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& loop : poly.loops) {
    for (std::size_t i = 0; i < loop.size(); ++i) {
      best = std::min(best, point_segment_distance(p, loop[i], loop[(i + 1) % loop.size()]));
    }
  }
  return best;
}

}  // namespace

void FootprintPolygon::validate() const {
  if (loops.empty()) throw InvalidPolygon("polygon has no loops");
  for (const auto& loop : loops) {
    if (loop.size() < 3) throw InvalidPolygon("polygon loop with fewer than 3 vertices");
    if (!(std::abs(signed_area(loop)) > 0.0)) throw InvalidPolygon("zero-area polygon loop");
  }
}

FootprintPolygon footprint(const Mesh& mesh) {
  BgMultiPolygon acc;
  try {
    for (const geom::Face& f : mesh.faces) {
      Vec2 p[3];
      for (int k = 0; k < 3; ++k) p[k] = {mesh.vertices[f[k]].x, mesh.vertices[f[k]].y};
      const double area = (p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[1].y - p[0].y) * (p[2].x - p[0].x);
      // Near-vertical faces add nothing but numerical slivers.
      const double scale = std::max({std::hypot(p[1].x - p[0].x, p[1].y - p[0].y),
                                     std::hypot(p[2].x - p[0].x, p[2].y - p[0].y), 1e-300});
      if (!(std::abs(area) > 1e-12 * scale * scale)) continue;
      if (area < 0) std::swap(p[1], p[2]);
      BgPolygon tri;
      for (const Vec2& q : {p[0], p[1], p[2], p[0]}) tri.outer().push_back(BgPoint(q.x, q.y));
      BgMultiPolygon merged;
      bg::union_(acc, tri, merged);
      acc = std::move(merged);
    }
  } catch (const bg::exception& ex) {
    throw InvalidPolygon(std::string("footprint union failed: ") + ex.what());
  }

  FootprintPolygon out;
  for (const BgPolygon& poly : acc) {
    std::vector<Vec2> loop;
    const auto& ring = poly.outer();
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) loop.push_back({ring[i].x(), ring[i].y()});
    loop = simplify_loop(std::move(loop));
    if (loop.size() >= 3 && std::abs(signed_area(loop)) > 0.0) out.loops.push_back(std::move(loop));
  }
  if (out.loops.empty()) throw InvalidPolygon("mesh has no footprint area");
  return out;
}

double polis_distance(const FootprintPolygon& a, const FootprintPolygon& b) {
  a.validate();
  b.validate();
  auto directed = [](const FootprintPolygon& from, const FootprintPolygon& to) {
    double total = 0.0;
    for (const auto& loop : from.loops) {
      for (const Vec2& p : loop) total += distance_to_boundary(p, to);
    }
    return total / (2.0 * from.vertex_count());
  };
  return directed(a, b) + directed(b, a);
}

double polis_3d_vertices(const Mesh& a, const Mesh& b) {
  if (a.vertices.empty() || b.vertices.empty()) throw EmptyInput("3D PoLiS needs vertices");
  auto directed = [](const Mesh& from, const Mesh& to) {
    double total = 0.0;
    for (const Vec3& p : from.vertices) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& q : to.vertices) best = std::min(best, geom::norm(p - q));
      total += best;
    }
    return total / (2.0 * from.vertices.size());
  };
  return directed(a, b) + directed(b, a);
}

std::vector<bool> rasterize_footprint(const Mesh& mesh, const geom::RasterFrame& frame) {
  std::vector<bool> covered(static_cast<std::size_t>(frame.rows) * frame.cols, false);
  for (const geom::Face& f : mesh.faces) {
    const Vec3& a = mesh.vertices[f[0]];
    const Vec3& b = mesh.vertices[f[1]];
    const Vec3& c = mesh.vertices[f[2]];
    geom::rasterize_triangle({a.x, a.y}, {b.x, b.y}, {c.x, c.y}, frame,
                             [&](int r, int col, double, double, double) {
                               covered[static_cast<std::size_t>(r) * frame.cols + col] = true;
                             });
  }
  return covered;
}

double footprint_iou(const Mesh& a, const Mesh& b, int resolution) {
  if (resolution < 1) throw SpecError("IoU resolution must be positive");
  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
  double hi_x = -lo_x, hi_y = -lo_x;
  for (const Mesh* m : {&a, &b}) {
    for (const geom::Face& f : m->faces) {
      for (int idx : f) {
        const Vec3& v = m->vertices[idx];
        lo_x = std::min(lo_x, v.x);
        hi_x = std::max(hi_x, v.x);
        lo_y = std::min(lo_y, v.y);
        hi_y = std::max(hi_y, v.y);
      }
    }
  }
  if (!(hi_x > lo_x) || !(hi_y > lo_y)) return 0.0;
  geom::RasterFrame frame;
  frame.x0 = lo_x;
  frame.y_top = hi_y;
  frame.cell_w = (hi_x - lo_x) / resolution;
  frame.cell_h = (hi_y - lo_y) / resolution;
  frame.cols = frame.rows = resolution;
  const auto ca = rasterize_footprint(a, frame);
  const auto cb = rasterize_footprint(b, frame);
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    inter += ca[i] && cb[i];
    uni += ca[i] || cb[i];
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

PairMetrics evaluate_pair(const Mesh& predicted, const Mesh& truth, const EvalOptions& options) {
  PairMetrics m;
  if (predicted.vertices.empty() || truth.vertices.empty()) return m;
  m.iou = footprint_iou(predicted, truth, options.iou_resolution);
  try {
    if (options.polis_3d_vertices) {
      m.polis = polis_3d_vertices(predicted, truth);
    } else {
      m.polis = polis_distance(footprint(predicted), footprint(truth));
    }
  } catch (const InvalidPolygon&) {
  }
  const auto na = geom::face_normals(predicted);
  const auto nb = geom::face_normals(truth);
  if (!na.normals.empty() && !nb.normals.empty()) m.angular = angular_dissimilarity(na, nb);
  return m;
}

Aggregate aggregate(const std::vector<std::optional<double>>& values) {
  Aggregate agg;
  double sum = 0.0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++agg.count;
    } else {
      ++agg.excluded;
    }
  }
  if (agg.count == 0) return agg;
  agg.mean = sum / agg.count;
  if (agg.count > 1) {
    double ss = 0.0;
    for (const auto& v : values) {
      if (v) ss += (*v - agg.mean) * (*v - agg.mean);
    }
    const double sd = std::sqrt(ss / (agg.count - 1));
    agg.sdm = sd / std::sqrt(static_cast<double>(agg.count));
  }
  return agg;
}

MetricsReport evaluate_batch(const std::vector<MeshPair>& pairs, const EvalOptions& options) {
  if (pairs.empty()) throw EmptyInput("no prediction/truth pairs to evaluate");
  MetricsReport report;
  report.per_example.reserve(pairs.size());
  std::vector<std::optional<double>> polis, angular, iou;
  for (const auto& [pred, truth] : pairs) {
    PairMetrics m = evaluate_pair(pred, truth, options);
    polis.push_back(m.polis);
    angular.push_back(m.angular);
    iou.push_back(m.iou);
    report.per_example.push_back(m);
  }
  report.polis = aggregate(polis);
  report.angular = aggregate(angular);
  report.iou = aggregate(iou);
  return report;
}

namespace {

std::string cell(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream ss;
  ss.precision(10);
  ss << *v;
  return ss.str();
}

std::string example_id(const std::vector<std::string>& ids, std::size_t i) {
  return i < ids.size() ? ids[i] : std::to_string(i);
}

nlohmann::json aggregate_json(const Aggregate& a) {
  return {{"mean", a.mean}, {"sdm", a.sdm}, {"count", a.count}, {"excluded", a.excluded}};
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string report_csv_header() {
  return "method,example,polis,angular_deg,iou,polis_sdm,angular_deg_sdm,iou_sdm,"
         "excluded_polis,excluded_angular,excluded_iou\n";
}

std::string report_csv_rows(const std::string& method, const MetricsReport& report,
                            const std::vector<std::string>& example_ids) {
  std::string out;
  for (std::size_t i = 0; i < report.per_example.size(); ++i) {
    const PairMetrics& m = report.per_example[i];
    out += method + "," + example_id(example_ids, i) + "," + cell(m.polis) + "," + cell(m.angular) + "," +
           cell(m.iou) + ",,,,,,\n";
  }
  out += method + ",aggregate," + cell(report.polis.mean) + "," + cell(report.angular.mean) + "," +
         cell(report.iou.mean) + "," + cell(report.polis.sdm) + "," + cell(report.angular.sdm) + "," +
         cell(report.iou.sdm) + "," + std::to_string(report.polis.excluded) + "," +
         std::to_string(report.angular.excluded) + "," + std::to_string(report.iou.excluded) + "\n";
  return out;
}

std::string report_json(const std::string& method, const MetricsReport& report,
                        const std::vector<std::string>& example_ids) {
  nlohmann::json per = nlohmann::json::array();
  for (std::size_t i = 0; i < report.per_example.size(); ++i) {
    const PairMetrics& m = report.per_example[i];
    per.push_back({{"example", example_id(example_ids, i)},
                   {"polis", optional_json(m.polis)},
                   {"angular_deg", optional_json(m.angular)},
                   {"iou", optional_json(m.iou)}});
  }
  nlohmann::json j{{"method", method},
                   {"aggregate",
                    {{"polis", aggregate_json(report.polis)},
                     {"angular_deg", aggregate_json(report.angular)},
                     {"iou", aggregate_json(report.iou)}}},
                   {"per_example", per}};
  return j.dump(2) + "\n";
}

}  // namespace roofgen::metrics
