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

#include "plastiscope/parquet/snappy.hpp"

#include <array>
#include <cstring>

#include "plastiscope/error.hpp"

namespace plastiscope::parquet::snappy {

namespace {

// Matches never reach back further than one fragment, so every copy fits
// the two-byte-offset form.
constexpr std::size_t kFragmentSize = 1 << 16;
constexpr int kHashBits = 14;

enum Tag : std::uint8_t { kLiteral = 0, kCopy1 = 1, kCopy2 = 2, kCopy4 = 3 };

std::uint32_t load32(const std::uint8_t* p) {
  std::uint32_t v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

std::uint32_t hash32(std::uint32_t v) {
  return (v * 0x1e35a7bdu) >> (32 - kHashBits);
}

void put_varint(std::vector<std::uint8_t>& out, std::uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(v | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(v));
}

void emit_literal(std::vector<std::uint8_t>& out, const std::uint8_t* data,
                  std::size_t len) {
  if (len == 0) return;
  const std::size_t n = len - 1;
  if (n < 60) {
    out.push_back(static_cast<std::uint8_t>(n << 2 | kLiteral));
  } else {
    int bytes = n < (1u << 8) ? 1 : n < (1u << 16) ? 2 : n < (1u << 24) ? 3 : 4;
    out.push_back(static_cast<std::uint8_t>((59 + bytes) << 2 | kLiteral));
    for (int i = 0; i < bytes; ++i) {
      out.push_back(static_cast<std::uint8_t>(n >> (8 * i)));
    }
  }
  out.insert(out.end(), data, data + len);
}

void emit_copy_upto64(std::vector<std::uint8_t>& out, std::size_t offset,
                      std::size_t len) {
  if (len < 12 && offset < 2048) {
    out.push_back(static_cast<std::uint8_t>(kCopy1 | (len - 4) << 2 |
                                            (offset >> 8) << 5));
    out.push_back(static_cast<std::uint8_t>(offset & 0xFF));
  } else {
    out.push_back(static_cast<std::uint8_t>(kCopy2 | (len - 1) << 2));
    out.push_back(static_cast<std::uint8_t>(offset & 0xFF));
    out.push_back(static_cast<std::uint8_t>(offset >> 8));
  }
}

void emit_copy(std::vector<std::uint8_t>& out, std::size_t offset,
               std::size_t len) {
  while (len >= 68) {
    emit_copy_upto64(out, offset, 64);
    len -= 64;
  }
  if (len > 64) {
    emit_copy_upto64(out, offset, 60);
    len -= 60;
  }
  emit_copy_upto64(out, offset, len);
}

void compress_fragment(const std::uint8_t* base, std::size_t size,
                       std::vector<std::uint8_t>& out) {
  std::array<std::int32_t, 1 << kHashBits> table;
  table.fill(-1);
  std::size_t literal_start = 0;
  std::size_t ip = 0;
  if (size >= 4) {
    const std::size_t limit = size - 4;
    while (ip <= limit) {
      const std::uint32_t word = load32(base + ip);
      const std::uint32_t h = hash32(word);
      const std::int32_t candidate = table[h];
      table[h] = static_cast<std::int32_t>(ip);
      if (candidate >= 0 && load32(base + candidate) == word) {
        std::size_t len = 4;
        while (ip + len < size && base[candidate + len] == base[ip + len]) ++len;
        emit_literal(out, base + literal_start, ip - literal_start);
        emit_copy(out, ip - std::size_t(candidate), len);
        ip += len;
        literal_start = ip;
        if (ip >= 1 && ip - 1 <= limit) {
          table[hash32(load32(base + ip - 1))] = static_cast<std::int32_t>(ip - 1);
        }
      } else {
        ++ip;
      }
    }
  }
  emit_literal(out, base + literal_start, size - literal_start);
}

[[noreturn]] void corrupt(const char* what) {
  fail(ErrorCode::format, std::string("corrupt snappy block: ") + what);
}

}  // namespace

std::vector<std::uint8_t> compress(std::span<const std::uint8_t> input) {
  std::vector<std::uint8_t> out;
  out.reserve(input.size() + input.size() / 6 + 32);
  put_varint(out, input.size());
  for (std::size_t pos = 0; pos < input.size(); pos += kFragmentSize) {
    std::size_t n = std::min(kFragmentSize, input.size() - pos);
    compress_fragment(input.data() + pos, n, out);
  }
  return out;
}

std::vector<std::uint8_t> uncompress(std::span<const std::uint8_t> input) {
  std::size_t pos = 0;
  std::uint64_t expected = 0;
  for (int shift = 0;; shift += 7) {
    if (pos >= input.size() || shift > 35) corrupt("bad length preamble");
    std::uint8_t b = input[pos++];
    expected |= std::uint64_t(b & 0x7F) << shift;
    if ((b & 0x80) == 0) break;
  }
  if (expected > (std::uint64_t(1) << 32)) corrupt("length too large");
  std::vector<std::uint8_t> out;
  out.reserve(expected);
  while (pos < input.size()) {
    const std::uint8_t tag = input[pos++];
    if ((tag & 3) == kLiteral) {
      std::size_t len = tag >> 2;
      if (len >= 60) {
        const int bytes = int(len) - 59;
        if (pos + bytes > input.size()) corrupt("truncated literal length");
        len = 0;
        for (int i = 0; i < bytes; ++i) len |= std::size_t(input[pos++]) << (8 * i);
      }
      len += 1;
      if (pos + len > input.size() || out.size() + len > expected) {
        corrupt("literal overruns");
      }
      out.insert(out.end(), input.begin() + pos, input.begin() + pos + len);
      pos += len;
      continue;
    }
    std::size_t len = 0;
    std::size_t offset = 0;
    switch (tag & 3) {
      case kCopy1:
        if (pos + 1 > input.size()) corrupt("truncated copy");
        len = ((tag >> 2) & 7) + 4;
        offset = std::size_t(tag >> 5) << 8 | input[pos];
        pos += 1;
        break;
      case kCopy2:
        if (pos + 2 > input.size()) corrupt("truncated copy");
        len = (tag >> 2) + 1;
        offset = input[pos] | std::size_t(input[pos + 1]) << 8;
        pos += 2;
        break;
      default:
        if (pos + 4 > input.size()) corrupt("truncated copy");
        len = (tag >> 2) + 1;
        offset = input[pos] | std::size_t(input[pos + 1]) << 8 |
                 std::size_t(input[pos + 2]) << 16 |
                 std::size_t(input[pos + 3]) << 24;
        pos += 4;
        break;
    }
    if (offset == 0 || offset > out.size()) corrupt("copy offset out of range");
    if (out.size() + len > expected) corrupt("copy overruns");
    std::size_t from = out.size() - offset;
    for (std::size_t i = 0; i < len; ++i) out.push_back(out[from + i]);
  }
  if (out.size() != expected) corrupt("length mismatch");
  return out;
}

}  // namespace plastiscope::parquet::snappy
