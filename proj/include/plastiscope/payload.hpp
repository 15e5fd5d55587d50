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

// Binary bodies served to browser clients. Layouts are described byte by
// byte in docs/payload-format.md; all integers are little-endian.
//
//   PLSF  one frame or one diff: header, column descriptors, 4-byte aligned
//         column arrays, then sparse (src, dst, value) connectivity triplets
//   PLSP  static geometry: header, then one fixed-size record per neuron

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "plastiscope/model.hpp"

namespace plastiscope::payload {

inline constexpr std::array<std::uint8_t, 4> kFrameMagic = {'P', 'L', 'S', 'F'};
inline constexpr std::array<std::uint8_t, 4> kPositionsMagic = {'P', 'L', 'S', 'P'};
inline constexpr std::uint8_t kVersion = 1;

inline constexpr std::size_t kHeaderSize = 32;
inline constexpr std::size_t kDescriptorSize = 8;
inline constexpr std::size_t kTripletSize = 8;
inline constexpr std::size_t kPositionsHeaderSize = 16;
inline constexpr std::size_t kPositionRecordSize = 24;

enum class Kind : std::uint8_t { frame = 0, diff = 1 };

// bitmask packs one flag per neuron, LSB first, ceil(N / 8) bytes.
enum class DType : std::uint8_t { u8 = 0, u16 = 1, u32 = 2, i8 = 3, i16 = 4, i32 = 5, f32 = 6, bitmask = 7 };

inline constexpr std::uint8_t kFlagConnectivityMissing = 1;

struct Header {
  Kind kind = Kind::frame;
  std::uint8_t flags = 0;
  std::uint8_t column_count = 0;
  std::uint32_t neuron_count = 0;
  std::uint16_t area_count = 0;
  FrameKey base;
  FrameKey other;  // equals base for a frame
  std::uint32_t triplet_count = 0;
};

struct ColumnDescriptor {
  NeuronProperty property = NeuronProperty::calcium;
  DType dtype = DType::f32;
  std::uint32_t offset = 0;  // from the start of the payload
};

// Error(validation) if the frame has more than 65535 areas.
std::vector<std::uint8_t> encode_frame(const TimestepFrame& frame);
// connectivity_missing marks a diff where either side had no network file.
std::vector<std::uint8_t> encode_diff(const DiffFrame& diff, bool connectivity_missing = false);

// Error(format) for anything that is not a well-formed payload of the kind.
Header read_header(std::span<const std::uint8_t> bytes);
std::vector<ColumnDescriptor> read_descriptors(std::span<const std::uint8_t> bytes);
TimestepFrame decode_frame(std::span<const std::uint8_t> bytes);
DiffFrame decode_diff(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_positions(const StaticTable& statics);
std::vector<NeuronStatic> decode_positions(std::span<const std::uint8_t> bytes);

}  // namespace plastiscope::payload
