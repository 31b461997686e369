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

#include "roofgen/tensor/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>

#include "roofgen/error.hpp"
#include "roofgen/geom/io.hpp"

namespace roofgen::tensor {

using nlohmann::json;

namespace {

void put_le(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

double get_le(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string serialize_checkpoint(const json& meta, const NamedTensors& tensors) {
  json header{{"format", "roofgen-checkpoint"}, {"version", 1}, {"meta", meta}};
  json list = json::array();
  std::size_t total = 0;
  for (const auto& [name, t] : tensors) {
    list.push_back({{"name", name}, {"shape", t.shape()}});
    total += t.numel();
  }
  header["tensors"] = list;
  std::string out = header.dump() + "\n";
  out.reserve(out.size() + 8 * total);
  for (const auto& [name, t] : tensors) {
    for (double v : t.data()) put_le(out, v);
  }
  return out;
}

Checkpoint parse_checkpoint(std::string_view bytes) {
  const std::size_t eol = bytes.find('\n');
  if (eol == std::string_view::npos) throw ParseError("checkpoint header is not terminated", 0);
  json header;
  try {
    header = json::parse(bytes.substr(0, eol));
  } catch (const json::exception& ex) {
    throw ParseError(std::string("checkpoint header: ") + ex.what(), 0);
  }
  if (header.value("format", "") != "roofgen-checkpoint") throw ParseError("not a roofgen checkpoint", 0);

  Checkpoint ck;
  ck.meta = header.value("meta", json::object());
  std::size_t pos = eol + 1;
  for (const auto& entry : header.at("tensors")) {
    const Shape shape = entry.at("shape").get<Shape>();
    const std::size_t n = numel(shape);
    if (bytes.size() - pos < 8 * n) throw ParseError("checkpoint payload is truncated", 0);
    std::vector<double> data(n);
    for (std::size_t i = 0; i < n; ++i) data[i] = get_le(bytes.data() + pos + 8 * i);
    pos += 8 * n;
    ck.tensors.emplace_back(entry.at("name").get<std::string>(), Tensor::from(shape, std::move(data)));
  }
  if (pos != bytes.size()) throw ParseError("trailing bytes after checkpoint payload", 0);
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const json& meta, const NamedTensors& tensors) {
  geom::write_file(path, serialize_checkpoint(meta, tensors));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(geom::read_file(path));
}

}  // namespace roofgen::tensor
