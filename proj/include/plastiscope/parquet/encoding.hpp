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

// Value encodings used inside Parquet data pages.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace plastiscope::parquet {

using Bytes = std::vector<std::uint8_t>;

void put_uleb128(Bytes& out, std::uint64_t v);
std::uint64_t get_uleb128(std::span<const std::uint8_t> in, std::size_t& pos);

// Smallest width that can hold max_value (0 for max_value == 0).
int bit_width(std::uint64_t max_value) noexcept;

// LSB-first bit packing; the value count is padded up to a multiple of 8.
void bit_pack(std::span<const std::uint32_t> values, int width, Bytes& out);
void bit_unpack(std::span<const std::uint8_t> in, int width, std::size_t count,
                std::uint32_t* out);

// RLE / bit-packing hybrid, without the length prefix.
void rle_hybrid_encode(std::span<const std::uint32_t> values, int width,
                       Bytes& out);
std::vector<std::uint32_t> rle_hybrid_decode(std::span<const std::uint8_t> in,
                                             int width, std::size_t count);

// DELTA_BINARY_PACKED over 32-bit integers (wrapping arithmetic).
void delta_binary_pack(std::span<const std::int32_t> values, Bytes& out);
std::vector<std::int32_t> delta_binary_unpack(std::span<const std::uint8_t> in,
                                              std::size_t count);

// BYTE_STREAM_SPLIT over 4-byte values.
void byte_stream_split(std::span<const std::uint8_t> values, std::size_t width,
                       Bytes& out);
void byte_stream_join(std::span<const std::uint8_t> in, std::size_t width,
                      std::size_t count, std::uint8_t* out);

}  // namespace plastiscope::parquet
