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
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "roofgen/tensor/tensor.hpp"

namespace roofgen::tensor {

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

struct Checkpoint {
  nlohmann::json meta;  // hyperparameters, config, seed
  NamedTensors tensors;
};

// Layout: one line of compact JSON
//   {"format":"roofgen-checkpoint","version":1,"meta":{...},
//    "tensors":[{"name":...,"shape":[...]}, ...]}
// terminated by '\n', then every tensor's values in header order as raw
// little-endian IEEE-754 doubles.
std::string serialize_checkpoint(const nlohmann::json& meta, const NamedTensors& tensors);
/// Throws ParseError on a malformed header or short payload.
Checkpoint parse_checkpoint(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const nlohmann::json& meta, const NamedTensors& tensors);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace roofgen::tensor
