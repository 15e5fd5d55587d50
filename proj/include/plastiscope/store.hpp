// Copyright 2026 The Plastiscope Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// On-disk store: one neuron file and one connectivity file per frame,
// a static geometry file and catalog.json at the root.
//
//   <root>/catalog.json
//   <root>/static.parquet
//   <root>/<scenario>/frame_<t:06>.parquet
//   <root>/<scenario>/conn_<t:06>.parquet

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plastiscope/model.hpp"

namespace plastiscope::store {

namespace fs = std::filesystem;

struct FrameLocator {
  FrameKey key;
  fs::path neuron_file;
  fs::path connectivity_file;
};

FrameLocator locate(const fs::path& root, const FrameKey& key);

// Encoded file contents, independent of any path. Deterministic.
std::vector<std::uint8_t> encode_neuron_file(const TimestepFrame& frame);
std::vector<std::uint8_t> encode_connectivity_file(const TimestepFrame& frame);

// Validates the frame, then writes both files atomically (temp + rename).
// Overwriting a file whose schema differs throws Error(conflict).
FrameLocator write_frame(const TimestepFrame& frame, const fs::path& root);

// Bytes on disk of both files.
std::uintmax_t stored_size(const FrameLocator& locator);

TimestepFrame decode_frame(const FrameKey& key,
                           std::span<const std::uint8_t> neuron_file,
                           std::span<const std::uint8_t> connectivity_file);

// Error(not_found) when either file is missing, Error(schema) on type drift.
TimestepFrame read_frame(const FrameLocator& locator);
TimestepFrame read_frame(const fs::path& root, const FrameKey& key);

fs::path static_path(const fs::path& root);
void write_static(const StaticTable& statics, const fs::path& root);
StaticTable read_static(const fs::path& root);

fs::path catalog_path(const fs::path& root);
nlohmann::json catalog_to_json(const ScenarioCatalog& catalog);
ScenarioCatalog catalog_from_json(const nlohmann::json& j);  // Error(format)
void write_catalog(const ScenarioCatalog& catalog, const fs::path& root);
ScenarioCatalog read_catalog(const fs::path& root);

// Writes bytes to path via a sibling temporary file and rename.
void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file(const fs::path& path);  // Error(not_found/io)

}  // namespace plastiscope::store
