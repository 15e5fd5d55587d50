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

// Raw (unframed) snappy block format, as used for Parquet page bodies.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace plastiscope::parquet::snappy {

std::vector<std::uint8_t> compress(std::span<const std::uint8_t> input);

// Throws Error(format) on a corrupt or truncated block.
std::vector<std::uint8_t> uncompress(std::span<const std::uint8_t> input);

}  // namespace plastiscope::parquet::snappy
