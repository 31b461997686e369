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

#include "roofgen/synthroof/synthroof.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <nlohmann/json.hpp>

#include "roofgen/error.hpp"
#include "roofgen/geom/io.hpp"
#include "roofgen/rng.hpp"
#include "roofgen/tokenizer/tokenizer.hpp"

namespace roofgen::synthroof {

using geom::Face;
using geom::Mesh;
using geom::Vec2;
using geom::Vec3;
using nlohmann::json;

Mesh apply_square_symmetry(const Mesh& mesh, int k) {
  if (k < 0 || k >= 8) throw SpecError("square symmetry index must lie in [0, 8)");
  Mesh out = mesh;
  for (Vec3& v : out.vertices) {
    for (int r = 0; r < k % 4; ++r) v = {-v.y, v.x, v.z};
    if (k >= 4) v.x = -v.x;
  }
  if (k >= 4) {
    for (Face& f : out.faces) std::reverse(f.begin(), f.end());
  }
  return out;
}

std::string_view to_string(RoofKind kind) {
  switch (kind) {
    case RoofKind::flat: return "flat";
    case RoofKind::shed: return "shed";
    case RoofKind::gable: return "gable";
    case RoofKind::hip: return "hip";
    case RoofKind::pyramid: return "pyramid";
  }
  return "flat";
}

RoofKind parse_roof_kind(std::string_view name) {
  for (RoofKind k : all_roof_kinds()) {
    if (to_string(k) == name) return k;
  }
  throw SpecError("unknown roof kind '" + std::string(name) + "'");
}

const std::vector<RoofKind>& all_roof_kinds() {
  static const std::vector<RoofKind> kinds{RoofKind::flat, RoofKind::shed, RoofKind::gable,
                                           RoofKind::hip, RoofKind::pyramid};
  return kinds;
}

void RoofSpec::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(footprint_w) || !finite(footprint_l) || footprint_w <= 0 || footprint_l <= 0) {
    throw SpecError("footprint dimensions must be positive");
  }
  if (!finite(eave_h) || !finite(ridge_h) || eave_h < 0 || ridge_h < eave_h) {
    throw SpecError("heights must satisfy ridge_h >= eave_h >= 0");
  }
  if (!finite(rotation) || !finite(offset.x) || !finite(offset.y)) {
    throw SpecError("rotation and offset must be finite");
  }
  if (kind == RoofKind::hip && !(hip_inset >= 0 && hip_inset < 0.5)) {
    throw SpecError("hip_inset must lie in [0, 0.5)");
  }
}

Mesh build_roof(const RoofSpec& spec, bool watertight) {
  spec.validate();
  if (watertight && spec.eave_h <= 0) throw SpecError("watertight roofs need eave_h > 0");

  // Build with the long side on x, then rotate into place.
  const double L = std::max(spec.footprint_w, spec.footprint_l);
  const double S = std::min(spec.footprint_w, spec.footprint_l);
  const double turn = spec.footprint_l > spec.footprint_w ? std::numbers::pi / 2 : 0.0;
  const double e = spec.eave_h;
  const double r = spec.ridge_h;

  Mesh m;
  // Corners counter-clockwise from (-L/2, -S/2).
  const std::array<Vec2, 4> corner{{{-L / 2, -S / 2}, {L / 2, -S / 2}, {L / 2, S / 2}, {-L / 2, S / 2}}};
  // Roof boundary polyline along each side, as vertex indices.
  std::array<std::vector<int>, 4> side{{{0, 1}, {1, 2}, {2, 3}, {3, 0}}};

  switch (spec.kind) {
    case RoofKind::flat:
      for (const Vec2& c : corner) m.vertices.push_back({c.x, c.y, e});
      m.faces = {{0, 1, 2}, {0, 2, 3}};
      break;
    case RoofKind::shed:
      // Low side at -y, high side at +y.
      for (int i = 0; i < 4; ++i) m.vertices.push_back({corner[i].x, corner[i].y, i < 2 ? e : r});
      m.faces = {{0, 1, 2}, {0, 2, 3}};
      break;
    case RoofKind::gable:
      for (const Vec2& c : corner) m.vertices.push_back({c.x, c.y, e});
      m.vertices.push_back({-L / 2, 0, r});
      m.vertices.push_back({L / 2, 0, r});
      m.faces = {{0, 1, 5}, {0, 5, 4}, {2, 3, 4}, {2, 4, 5}};
      side[1] = {1, 5, 2};
      side[3] = {3, 4, 0};
      break;
    case RoofKind::hip: {
      const double half = L / 2 - spec.hip_inset * L;
      for (const Vec2& c : corner) m.vertices.push_back({c.x, c.y, e});
      m.vertices.push_back({-half, 0, r});
      m.vertices.push_back({half, 0, r});
      m.faces = {{0, 1, 5}, {0, 5, 4}, {1, 2, 5}, {2, 3, 4}, {2, 4, 5}, {3, 0, 4}};
      break;
    }
    case RoofKind::pyramid:
      for (const Vec2& c : corner) m.vertices.push_back({c.x, c.y, e});
      m.vertices.push_back({0, 0, r});
      m.faces = {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
      break;
  }

  if (watertight) {
    const int g0 = static_cast<int>(m.vertices.size());
    for (const Vec2& c : corner) m.vertices.push_back({c.x, c.y, 0.0});
    for (int s = 0; s < 4; ++s) {
      const std::vector<int>& p = side[s];
      const int ga = g0 + s;
      const int gb = g0 + (s + 1) % 4;
      m.faces.push_back({ga, gb, p.back()});
      for (std::size_t k = p.size() - 1; k > 0; --k) m.faces.push_back({ga, p[k], p[k - 1]});
    }
    m.faces.push_back({g0, g0 + 2, g0 + 1});
    m.faces.push_back({g0, g0 + 3, g0 + 2});
  }

  const double angle = spec.rotation + turn;
  const double cs = std::cos(angle);
  const double sn = std::sin(angle);
  for (Vec3& v : m.vertices) {
    const double x = v.x * cs - v.y * sn;
    const double y = v.x * sn + v.y * cs;
    v = {x + spec.offset.x, y + spec.offset.y, v.z};
  }
  return m;
}

Vec3 RenderConfig::default_sun() {
  const Vec3 d{0.4, 0.25, 0.88};
  return d * (1.0 / geom::norm(d));
}

void RenderConfig::validate() const {
  if (resolution < 4) throw SpecError("render resolution must be at least 4");
  if (std::abs(geom::norm(sun_direction) - 1.0) > 1e-9 || sun_direction.z <= 0) {
    throw SpecError("sun direction must be a unit vector with positive z");
  }
  if (!(margin >= 0.0) || !std::isfinite(margin)) throw SpecError("margin must be non-negative");
}

geom::RasterFrame render_frame(const Mesh& mesh, const RenderConfig& cfg) {
  if (mesh.vertices.empty()) throw EmptyMesh("cannot render an empty mesh");
  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
  double hi_x = -lo_x, hi_y = -lo_x;
  for (const Vec3& v : mesh.vertices) {
    lo_x = std::min(lo_x, v.x);
    hi_x = std::max(hi_x, v.x);
    lo_y = std::min(lo_y, v.y);
    hi_y = std::max(hi_y, v.y);
  }
  double side = std::max(hi_x - lo_x, hi_y - lo_y) * (1.0 + 2.0 * cfg.margin);
  if (!(side > 0.0)) side = 1.0;
  const double cx = 0.5 * (lo_x + hi_x);
  const double cy = 0.5 * (lo_y + hi_y);
  geom::RasterFrame f;
  f.x0 = cx - side / 2;
  f.y_top = cy + side / 2;
  f.cell_w = f.cell_h = side / cfg.resolution;
  f.cols = f.rows = cfg.resolution;
  return f;
}

Rendering render_topdown_detailed(const Mesh& mesh, const RenderConfig& cfg) {
  cfg.validate();
  Rendering out;
  out.frame = render_frame(mesh, cfg);
  const int res = cfg.resolution;
  out.image = geom::ImageGrid(res, res, 0.0);
  out.covered.assign(static_cast<std::size_t>(res) * res, false);
  std::vector<double> depth(out.covered.size(), -std::numeric_limits<double>::infinity());

  for (const Face& f : mesh.faces) {
    const Vec3 a = mesh.vertices[f[0]];
    const Vec3 b = mesh.vertices[f[1]];
    const Vec3 c = mesh.vertices[f[2]];
    const Vec3 n = geom::cross(b - a, c - a);
    const double len = geom::norm(n);
    if (!(len > 0.0)) continue;
    const Vec3 unit = geom::orient_upward(n * (1.0 / len));
    const double shade = std::clamp(geom::dot(unit, cfg.sun_direction), 0.0, 1.0);
    geom::rasterize_triangle({a.x, a.y}, {b.x, b.y}, {c.x, c.y}, out.frame,
                             [&](int row, int col, double w0, double w1, double w2) {
                               const std::size_t i = static_cast<std::size_t>(row) * res + col;
                               const double z = w0 * a.z + w1 * b.z + w2 * c.z;
                               if (z > depth[i]) {
                                 depth[i] = z;
                                 out.covered[i] = true;
                                 out.image.pixels[i] = shade;
                               }
                             });
  }
  return out;
}

geom::ImageGrid render_topdown(const Mesh& mesh, const RenderConfig& cfg) {
  return render_topdown_detailed(mesh, cfg).image;
}

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  throw SpecError("unknown split '" + std::string(name) + "'");
}

std::vector<ManifestEntry> DatasetManifest::split(Split s) const {
  std::vector<ManifestEntry> out;
  for (const ManifestEntry& e : entries) {
    if (e.split == s) out.push_back(e);
  }
  return out;
}

std::string manifest_to_json(const DatasetManifest& m) {
  json j;
  j["seed"] = m.seed;
  j["image_resolution"] = m.image_resolution;
  j["margin"] = m.render.margin;
  j["sun_direction"] = {m.render.sun_direction.x, m.render.sun_direction.y, m.render.sun_direction.z};
  j["watertight"] = m.watertight;
  json kinds = json::array();
  for (RoofKind k : m.kinds) kinds.push_back(std::string(to_string(k)));
  j["kinds"] = kinds;
  json entries = json::array();
  for (const ManifestEntry& e : m.entries) {
    entries.push_back({{"index", e.index},
                       {"image", e.image},
                       {"mesh", e.mesh},
                       {"kind", std::string(to_string(e.kind))},
                       {"split", std::string(to_string(e.split))}});
  }
  j["entries"] = entries;
  return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(std::string_view text, const std::filesystem::path& root) {
  DatasetManifest m;
  try {
    const json j = json::parse(text);
    m.seed = j.at("seed").get<std::uint64_t>();
    m.image_resolution = j.at("image_resolution").get<int>();
    m.render.resolution = m.image_resolution;
    m.render.margin = j.value("margin", 0.15);
    if (j.contains("sun_direction")) {
      const auto s = j.at("sun_direction").get<std::vector<double>>();
      if (s.size() != 3) throw SpecError("sun_direction needs 3 components");
      m.render.sun_direction = {s[0], s[1], s[2]};
    }
    m.watertight = j.value("watertight", false);
    for (const auto& k : j.value("kinds", json::array())) m.kinds.push_back(parse_roof_kind(k.get<std::string>()));
    for (const auto& e : j.at("entries")) {
      ManifestEntry entry;
      entry.index = e.at("index").get<std::size_t>();
      entry.image = e.at("image").get<std::string>();
      entry.mesh = e.at("mesh").get<std::string>();
      entry.kind = parse_roof_kind(e.value("kind", std::string("flat")));
      entry.split = parse_split(e.at("split").get<std::string>());
      m.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& ex) {
    throw ParseError(std::string("manifest: ") + ex.what(), 0);
  }
  m.root = root;
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("manifest not found: " + path.string());
  return manifest_from_json(geom::read_file(path), path.parent_path());
}

RoofSpec sample_roof_spec(std::uint64_t seed, std::size_t index, const std::vector<RoofKind>& kinds) {
  if (kinds.empty()) throw SpecError("no roof kinds enabled");
  Rng rng(seed, index);
  RoofSpec s;
  s.kind = kinds[rng.below(kinds.size())];
  s.footprint_w = rng.uniform(4.0, 16.0);
  s.footprint_l = rng.uniform(4.0, 16.0);
  s.eave_h = rng.uniform(2.0, 8.0);
  const double rise = rng.uniform(1.0, 6.0);
  s.ridge_h = s.kind == RoofKind::flat ? s.eave_h : s.eave_h + rise;
  s.rotation = rng.uniform(0.0, std::numbers::pi);
  s.offset = {rng.uniform(-20.0, 20.0), rng.uniform(-20.0, 20.0)};
  s.hip_inset = rng.uniform(0.15, 0.4);
  return s;
}

std::vector<Split> assign_splits(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto key = [seed](std::size_t i) { return mix64(seed ^ mix64(i + 0x5eed)); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto ka = key(a), kb = key(b);
    return ka != kb ? ka < kb : a < b;
  });
  const auto n_train = static_cast<std::size_t>(std::llround(0.70 * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::llround(0.15 * static_cast<double>(n)));
  std::vector<Split> out(n, Split::test);
  for (std::size_t rank = 0; rank < n; ++rank) {
    out[order[rank]] = rank < n_train ? Split::train : rank < n_train + n_val ? Split::val : Split::test;
  }
  return out;
}

namespace {

void ensure_dirs(const std::filesystem::path& out_dir) {
  std::error_code ec;
  for (const char* sub : {"train", "val", "test"}) {
    std::filesystem::create_directories(out_dir / sub, ec);
    if (ec) throw IoError("cannot create " + (out_dir / sub).string() + ": " + ec.message());
  }
}

std::string example_stem(const ManifestEntry& e) {
  return std::string(to_string(e.split)) + "/ex" + std::to_string(e.index);
}

}  // namespace

DatasetManifest generate_dataset(const GenerateOptions& options, const std::filesystem::path& out_dir) {
  if (options.n < 10) throw SpecError("dataset needs at least 10 examples");
  options.render.validate();
  ensure_dirs(out_dir);

  DatasetManifest manifest;
  manifest.seed = options.seed;
  manifest.image_resolution = options.render.resolution;
  manifest.render = options.render;
  manifest.watertight = options.watertight;
  manifest.kinds = options.kinds;
  manifest.root = out_dir;

  const std::vector<Split> splits = assign_splits(options.n, options.seed);
  const tokenizer::SequenceLimits limits;
  for (std::size_t i = 0; i < options.n; ++i) {
    const RoofSpec spec = sample_roof_spec(options.seed, i, options.kinds);
    // Images are rendered from the stored 6-digit geometry so that files alone
    // reproduce them.
    const Mesh mesh = geom::parse_obj(geom::format_obj(build_roof(spec, options.watertight)));
    // Guard the training contract at generation time.
    const geom::QuantizedMesh qm = geom::quantize(geom::normalize_to_unit_cube(mesh));
    tokenizer::encode_vertices(qm, limits);
    tokenizer::encode_faces(qm, limits);

    ManifestEntry e;
    e.index = i;
    e.kind = spec.kind;
    e.split = splits[i];
    const std::string stem = example_stem(e);
    e.mesh = stem + ".obj";
    e.image = stem + ".pgm";
    geom::write_obj(mesh, out_dir / e.mesh);
    geom::write_pgm(render_topdown(mesh, options.render), out_dir / e.image);
    manifest.entries.push_back(std::move(e));
  }
  geom::write_file(out_dir / "manifest.json", manifest_to_json(manifest));
  return manifest;
}

DatasetManifest rerender_dataset(const DatasetManifest& source, int resolution,
                                 const std::filesystem::path& out_dir) {
  DatasetManifest out = source;
  out.image_resolution = resolution;
  out.render.resolution = resolution;
  out.render.validate();
  out.root = out_dir;
  ensure_dirs(out_dir);
  for (const ManifestEntry& e : out.entries) {
    const Mesh mesh = geom::read_obj(source.mesh_path(e));
    geom::write_obj(mesh, out_dir / e.mesh);
    geom::write_pgm(render_topdown(mesh, out.render), out_dir / e.image);
  }
  geom::write_file(out_dir / "manifest.json", manifest_to_json(out));
  return out;
}

}  // namespace roofgen::synthroof
