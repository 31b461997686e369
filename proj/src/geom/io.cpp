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

#include "roofgen/geom/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "roofgen/error.hpp"

namespace roofgen::geom {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view tok, std::size_t line) {
  double value = 0.0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError("non-numeric coordinate '" + std::string(tok) + "'", line);
  }
  return value;
}

int parse_index(std::string_view tok, std::size_t line) {
  // Accept `i/t/n` forms by taking the position index.
  tok = tok.substr(0, tok.find('/'));
  int value = 0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, value);
  if (ec != std::errc() || ptr != end || tok.empty()) {
    throw ParseError("bad face index '" + std::string(tok) + "'", line);
  }
  if (value < 1) throw ParseError("face indices are 1-based and positive", line);
  return value - 1;
}

void append_fixed6(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 6);
  out.append(buf, ptr);
}

}  // namespace

Mesh parse_obj(std::string_view text) {
  Mesh mesh;
  std::vector<std::size_t> face_lines;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto toks = split_ws(line);
    if (toks.empty()) {
      if (eol == text.size()) break;
      continue;
    }
    const std::string_view kw = toks[0];
    if (kw == "v") {
      if (toks.size() != 4 && toks.size() != 5) {
        throw ParseError("vertex needs 3 coordinates", line_no);
      }
      mesh.vertices.push_back({parse_double(toks[1], line_no), parse_double(toks[2], line_no),
                               parse_double(toks[3], line_no)});
    } else if (kw == "f") {
      if (toks.size() < 4) throw ParseError("face needs at least 3 indices", line_no);
      std::vector<int> idx;
      for (std::size_t i = 1; i < toks.size(); ++i) idx.push_back(parse_index(toks[i], line_no));
      for (std::size_t i = 1; i + 1 < idx.size(); ++i) {
        mesh.faces.push_back({idx[0], idx[i], idx[i + 1]});
        face_lines.push_back(line_no);
      }
    } else if (kw == "vn" || kw == "vt" || kw == "o" || kw == "g" || kw == "s" ||
               kw == "usemtl" || kw == "mtllib") {
      continue;
    } else {
      throw ParseError("unsupported statement '" + std::string(kw) + "'", line_no);
    }
    if (eol == text.size()) break;
  }
  const int n = static_cast<int>(mesh.vertices.size());
  for (std::size_t i = 0; i < mesh.faces.size(); ++i) {
    const Face& f = mesh.faces[i];
    for (int idx : f) {
      if (idx >= n) throw ParseError("face index " + std::to_string(idx + 1) + " out of range", face_lines[i]);
    }
    if (f[0] == f[1] || f[1] == f[2] || f[0] == f[2]) {
      throw ParseError("face repeats a vertex", face_lines[i]);
    }
  }
  return mesh;
}

std::string format_obj(const Mesh& mesh) {
  std::string out;
  out.reserve(mesh.vertices.size() * 40 + mesh.faces.size() * 16);
  for (const Vec3& v : mesh.vertices) {
    out += "v ";
    append_fixed6(out, v.x);
    out += ' ';
    append_fixed6(out, v.y);
    out += ' ';
    append_fixed6(out, v.z);
    out += '\n';
  }
  for (const Face& f : mesh.faces) {
    out += "f " + std::to_string(f[0] + 1) + ' ' + std::to_string(f[1] + 1) + ' ' +
           std::to_string(f[2] + 1) + '\n';
  }
  return out;
}

Mesh read_obj(const std::filesystem::path& path) { return parse_obj(read_file(path)); }

void write_obj(const Mesh& mesh, const std::filesystem::path& path) {
  write_file(path, format_obj(mesh));
}

ImageGrid parse_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  };
  auto next_token = [&]() -> std::string_view {
    skip_space_and_comments();
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (pos == start) throw ParseError("truncated PGM header", 0);
    return bytes.substr(start, pos - start);
  };
  auto next_int = [&](const char* what) {
    const std::string_view tok = next_token();
    int v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 0) {
      throw ParseError(std::string("bad PGM ") + what + " '" + std::string(tok) + "'", 0);
    }
    return v;
  };

  if (bytes.size() < 2) throw ParseError("missing PGM magic number", 0);
  const std::string_view magic = bytes.substr(0, 2);
  if (magic != "P2" && magic != "P5") {
    throw ParseError("wrong PGM magic number '" + std::string(magic) + "'", 0);
  }
  pos = 2;
  const int width = next_int("width");
  const int height = next_int("height");
  const int maxval = next_int("maxval");
  if (maxval != 255) throw ParseError("only maxval 255 is supported", 0);
  if (width <= 0 || height <= 0) throw ParseError("PGM dimensions must be positive", 0);

  ImageGrid grid(width, height);
  const std::size_t count = grid.pixels.size();
  if (magic == "P5") {
    // Exactly one whitespace byte separates the header from the raster.
    if (pos >= bytes.size()) throw ParseError("truncated PGM payload", 0);
    ++pos;
    if (bytes.size() - pos < count) throw ParseError("truncated PGM payload", 0);
    for (std::size_t i = 0; i < count; ++i) {
      grid.pixels[i] = static_cast<unsigned char>(bytes[pos + i]) / 255.0;
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      skip_space_and_comments();
      if (pos >= bytes.size()) throw ParseError("truncated PGM payload", 0);
      const int v = next_int("sample");
      if (v > maxval) throw ParseError("PGM sample exceeds maxval", 0);
      grid.pixels[i] = v / 255.0;
    }
  }
  return grid;
}

std::string format_pgm(const ImageGrid& grid) {
  std::string out = "P5\n" + std::to_string(grid.width) + " " + std::to_string(grid.height) + "\n255\n";
  out.reserve(out.size() + grid.pixels.size());
  for (double p : grid.pixels) {
    const long q = std::lround(std::clamp(p, 0.0, 1.0) * 255.0);
    out.push_back(static_cast<char>(static_cast<unsigned char>(q)));
  }
  return out;
}

ImageGrid read_pgm(const std::filesystem::path& path) { return parse_pgm(read_file(path)); }

void write_pgm(const ImageGrid& grid, const std::filesystem::path& path) {
  write_file(path, format_pgm(grid));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace roofgen::geom
