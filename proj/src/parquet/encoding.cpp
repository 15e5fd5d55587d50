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

#include "plastiscope/parquet/encoding.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <limits>
#include <string>

#include "plastiscope/error.hpp"

namespace plastiscope::parquet {

namespace {

constexpr std::size_t kDeltaBlockSize = 128;
constexpr std::size_t kDeltaMiniblocks = 4;
constexpr std::size_t kDeltaMiniblockSize = kDeltaBlockSize / kDeltaMiniblocks;

[[noreturn]] void corrupt(const std::string& what) {
  fail(ErrorCode::format, "corrupt page data: " + what);
}

std::uint64_t zigzag_encode(std::int64_t v) {
  return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
}

std::int64_t zigzag_decode(std::uint64_t v) {
  return static_cast<std::int64_t>(v >> 1) ^ -static_cast<std::int64_t>(v & 1);
}

}  // namespace

void put_uleb128(Bytes& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(v | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint64_t get_uleb128(std::span<const std::uint8_t> in, std::size_t& pos) {
  std::uint64_t v = 0;
  for (int shift = 0; shift < 64; shift += 7) {
    if (pos >= in.size()) corrupt("truncated varint");
    std::uint8_t b = in[pos++];
    v |= std::uint64_t(b & 0x7F) << shift;
    if ((b & 0x80) == 0) return v;
  }
  corrupt("varint too long");
}

int bit_width(std::uint64_t max_value) noexcept {
  return max_value == 0 ? 0 : 64 - std::countl_zero(max_value);
}

void bit_pack(std::span<const std::uint32_t> values, int width, Bytes& out) {
  if (width == 0 || values.empty()) return;
  const std::size_t padded = (values.size() + 7) / 8 * 8;
  std::uint64_t buffer = 0;
  int bits = 0;
  for (std::size_t i = 0; i < padded; ++i) {
    std::uint64_t v = i < values.size() ? values[i] : 0;
    buffer |= v << bits;
    bits += width;
    while (bits >= 8) {
      out.push_back(static_cast<std::uint8_t>(buffer));
      buffer >>= 8;
      bits -= 8;
    }
  }
}

void bit_unpack(std::span<const std::uint8_t> in, int width, std::size_t count,
                std::uint32_t* out) {
  if (width == 0) {
    std::fill(out, out + count, 0u);
    return;
  }
  if (width > 32) corrupt("bit width above 32");
  if ((count * std::size_t(width) + 7) / 8 > in.size()) {
    corrupt("bit-packed run truncated");
  }
  const std::uint64_t mask =
      width == 64 ? ~0ull : ((std::uint64_t(1) << width) - 1);
  std::uint64_t buffer = 0;
  int bits = 0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < count; ++i) {
    while (bits < width) {
      buffer |= std::uint64_t(in[pos++]) << bits;
      bits += 8;
    }
    out[i] = static_cast<std::uint32_t>(buffer & mask);
    buffer >>= width;
    bits -= width;
  }
}

void rle_hybrid_encode(std::span<const std::uint32_t> values, int width,
                       Bytes& out) {
  const std::size_t n = values.size();
  const std::size_t value_bytes = (std::size_t(width) + 7) / 8;
  std::size_t literal_start = 0;
  auto flush_literals = [&](std::size_t end) {
    if (end == literal_start) return;
    std::size_t groups = (end - literal_start + 7) / 8;
    put_uleb128(out, groups << 1 | 1);
    bit_pack(values.subspan(literal_start, end - literal_start), width, out);
  };
  std::size_t i = 0;
  while (i < n) {
    std::size_t run = 1;
    while (i + run < n && values[i + run] == values[i]) ++run;
    if (run >= 8) {
      // Literal runs must hold whole groups of 8, so borrow from the repeat.
      std::size_t pad = (8 - (i - literal_start) % 8) % 8;
      if (run - pad >= 8) {
        flush_literals(i + pad);
        put_uleb128(out, (run - pad) << 1);
        for (std::size_t b = 0; b < value_bytes; ++b) {
          out.push_back(static_cast<std::uint8_t>(values[i] >> (8 * b)));
        }
        i += run;
        literal_start = i;
        continue;
      }
    }
    i += run;
  }
  flush_literals(n);
}

std::vector<std::uint32_t> rle_hybrid_decode(std::span<const std::uint8_t> in,
                                             int width, std::size_t count) {
  if (width < 0 || width > 32) corrupt("bit width above 32");
  std::vector<std::uint32_t> out(count);
  const std::size_t value_bytes = (std::size_t(width) + 7) / 8;
  std::size_t pos = 0;
  std::size_t done = 0;
  while (done < count) {
    std::uint64_t header = get_uleb128(in, pos);
    if (header & 1) {
      std::size_t values = std::size_t(header >> 1) * 8;
      std::size_t bytes = std::size_t(header >> 1) * std::size_t(width);
      std::size_t take = std::min(values, count - done);
      std::size_t available = std::min(bytes, in.size() - pos);
      bit_unpack(in.subspan(pos, available), width, take, out.data() + done);
      pos += available;
      done += take;
    } else {
      std::size_t len = std::size_t(header >> 1);
      if (len == 0) corrupt("empty RLE run");
      if (pos + value_bytes > in.size()) corrupt("truncated RLE value");
      std::uint32_t v = 0;
      for (std::size_t b = 0; b < value_bytes; ++b) {
        v |= std::uint32_t(in[pos++]) << (8 * b);
      }
      std::size_t take = std::min(len, count - done);
      std::fill(out.begin() + done, out.begin() + done + take, v);
      done += take;
    }
  }
  return out;
}

void delta_binary_pack(std::span<const std::int32_t> values, Bytes& out) {
  put_uleb128(out, kDeltaBlockSize);
  put_uleb128(out, kDeltaMiniblocks);
  put_uleb128(out, values.size());
  put_uleb128(out, zigzag_encode(values.empty() ? 0 : values[0]));
  std::vector<std::int32_t> deltas;
  deltas.reserve(values.empty() ? 0 : values.size() - 1);
  for (std::size_t i = 1; i < values.size(); ++i) {
    deltas.push_back(static_cast<std::int32_t>(
        static_cast<std::uint32_t>(values[i]) -
        static_cast<std::uint32_t>(values[i - 1])));
  }
  std::vector<std::uint32_t> adjusted(kDeltaMiniblockSize);
  for (std::size_t block = 0; block < deltas.size(); block += kDeltaBlockSize) {
    const std::size_t block_len = std::min(kDeltaBlockSize, deltas.size() - block);
    const auto first = deltas.begin() + block;
    const std::int32_t min_delta = *std::min_element(first, first + block_len);
    put_uleb128(out, zigzag_encode(min_delta));
    std::array<int, kDeltaMiniblocks> widths{};
    for (std::size_t m = 0; m < kDeltaMiniblocks; ++m) {
      const std::size_t start = m * kDeltaMiniblockSize;
      if (start >= block_len) break;
      std::uint64_t max_adjusted = 0;
      for (std::size_t j = start; j < std::min(block_len, start + kDeltaMiniblockSize); ++j) {
        max_adjusted = std::max<std::uint64_t>(
            max_adjusted, std::uint64_t(std::int64_t(first[j]) - min_delta));
      }
      widths[m] = bit_width(max_adjusted);
    }
    for (int w : widths) out.push_back(static_cast<std::uint8_t>(w));
    for (std::size_t m = 0; m < kDeltaMiniblocks; ++m) {
      const std::size_t start = m * kDeltaMiniblockSize;
      if (start >= block_len) break;
      std::fill(adjusted.begin(), adjusted.end(), 0u);
      for (std::size_t j = start; j < std::min(block_len, start + kDeltaMiniblockSize); ++j) {
        adjusted[j - start] =
            static_cast<std::uint32_t>(std::int64_t(first[j]) - min_delta);
      }
      bit_pack(adjusted, widths[m], out);
    }
  }
}

std::vector<std::int32_t> delta_binary_unpack(std::span<const std::uint8_t> in,
                                              std::size_t count) {
  std::size_t pos = 0;
  const std::uint64_t block_size = get_uleb128(in, pos);
  const std::uint64_t miniblocks = get_uleb128(in, pos);
  const std::uint64_t total = get_uleb128(in, pos);
  std::int64_t first = zigzag_decode(get_uleb128(in, pos));
  if (block_size == 0 || block_size % 128 != 0 || miniblocks == 0 ||
      block_size % miniblocks != 0 || (block_size / miniblocks) % 32 != 0) {
    corrupt("bad delta block header");
  }
  if (total != count) {
    corrupt("delta stream holds " + std::to_string(total) + " values, expected " +
            std::to_string(count));
  }
  const std::size_t per_mini = block_size / miniblocks;
  std::vector<std::int32_t> out;
  out.reserve(count);
  if (count == 0) return out;
  auto prev = static_cast<std::uint32_t>(first);
  out.push_back(static_cast<std::int32_t>(prev));
  std::vector<std::uint32_t> unpacked(per_mini);
  std::vector<int> widths(miniblocks);
  while (out.size() < count) {
    const auto min_delta = static_cast<std::uint32_t>(zigzag_decode(get_uleb128(in, pos)));
    if (pos + miniblocks > in.size()) corrupt("truncated miniblock widths");
    for (std::size_t m = 0; m < miniblocks; ++m) widths[m] = in[pos++];
    for (std::size_t m = 0; m < miniblocks && out.size() < count; ++m) {
      const std::size_t bytes = per_mini * std::size_t(widths[m]) / 8;
      if (pos + bytes > in.size()) corrupt("truncated miniblock");
      bit_unpack(in.subspan(pos, bytes), widths[m], per_mini, unpacked.data());
      pos += bytes;
      for (std::size_t j = 0; j < per_mini && out.size() < count; ++j) {
        prev = prev + min_delta + unpacked[j];
        out.push_back(static_cast<std::int32_t>(prev));
      }
    }
  }
  return out;
}

void byte_stream_split(std::span<const std::uint8_t> values, std::size_t width,
                       Bytes& out) {
  const std::size_t n = values.size() / width;
  const std::size_t base = out.size();
  out.resize(base + values.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < width; ++k) {
      out[base + k * n + i] = values[i * width + k];
    }
  }
}

void byte_stream_join(std::span<const std::uint8_t> in, std::size_t width,
                      std::size_t count, std::uint8_t* out) {
  if (in.size() < count * width) corrupt("byte stream split page truncated");
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t k = 0; k < width; ++k) {
      out[i * width + k] = in[k * count + i];
    }
  }
}

}  // namespace plastiscope::parquet
