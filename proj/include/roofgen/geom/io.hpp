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

#include <filesystem>
#include <string>
#include <string_view>

#include "roofgen/geom/mesh.hpp"

namespace roofgen::geom {

// OBJ subset: `v x y z` and `f i j k ...` (1-based). Polygons are fan
// triangulated. Normals, texture coordinates and grouping statements are
// skipped; anything else is a ParseError carrying the line number.
Mesh parse_obj(std::string_view text);
std::string format_obj(const Mesh& mesh);
Mesh read_obj(const std::filesystem::path& path);
void write_obj(const Mesh& mesh, const std::filesystem::path& path);

// PGM, P2 or P5 with maxval 255. Written as P5.
ImageGrid parse_pgm(std::string_view bytes);
std::string format_pgm(const ImageGrid& grid);
ImageGrid read_pgm(const std::filesystem::path& path);
void write_pgm(const ImageGrid& grid, const std::filesystem::path& path);

/// Whole-file helpers; throw IoError.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace roofgen::geom
