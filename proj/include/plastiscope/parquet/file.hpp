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

// Flat Parquet files. The writer emits one row group of required columns
// and picks, per column, the smallest candidate encoding after compression.
// The reader also takes files from other writers as long as they are flat
// and hold no nulls (optional columns and v2 data pages are fine).

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "plastiscope/error.hpp"

namespace plastiscope::parquet {

enum class ColumnType : std::uint8_t { boolean, uint16, uint32, int32, float32 };

std::string_view to_string(ColumnType t) noexcept;

// Storage for each logical type; booleans are one byte per value (0 or 1).
using ColumnData =
    std::variant<std::vector<std::uint8_t>, std::vector<std::uint16_t>,
                 std::vector<std::uint32_t>, std::vector<std::int32_t>,
                 std::vector<float>>;

struct Column {
  std::string name;
  ColumnType type = ColumnType::float32;
  ColumnData data;

  std::size_t size() const noexcept;
};

Column make_column(std::string name, std::vector<std::uint8_t> booleans);
Column make_column(std::string name, std::vector<std::uint16_t> values);
Column make_column(std::string name, std::vector<std::uint32_t> values);
Column make_column(std::string name, std::vector<std::int32_t> values);
Column make_column(std::string name, std::vector<float> values);

using KeyValue = std::pair<std::string, std::string>;

struct Table {
  std::vector<Column> columns;
  std::vector<KeyValue> metadata;

  std::size_t num_rows() const noexcept;
  const Column& column(std::string_view name) const;  // Error(schema) if absent
  const std::string* metadata_value(std::string_view key) const noexcept;

  template <class T>
  const std::vector<T>& values(std::string_view name) const;
};

enum class Codec : std::uint8_t { uncompressed = 0, snappy = 1 };

// Parquet Encoding enum values.
enum class Encoding : std::int32_t {
  plain = 0,
  plain_dictionary = 2,
  rle = 3,
  delta_binary_packed = 5,
  rle_dictionary = 8,
  byte_stream_split = 9,
};

std::string_view to_string(Encoding e) noexcept;

struct WriteOptions {
  Codec codec = Codec::snappy;
  std::string created_by = "plastiscope version 1.0.0";
};

std::vector<std::uint8_t> write_table(const Table& table,
                                      const WriteOptions& options = {});

// Footer-level description of a file, without decoding any page.
struct ColumnInfo {
  std::string name;
  ColumnType type = ColumnType::float32;
  std::vector<Encoding> encodings;
  Codec codec = Codec::uncompressed;
  std::int64_t compressed_bytes = 0;
  std::int64_t uncompressed_bytes = 0;
};

struct FileInfo {
  std::int64_t num_rows = 0;
  std::size_t row_groups = 0;
  std::vector<ColumnInfo> columns;
  std::vector<KeyValue> metadata;
  std::string created_by;
};

FileInfo inspect(std::span<const std::uint8_t> file);

// Errors: Error(format) for damaged bytes, Error(schema) for shapes this
// reader does not support (nested columns, nulls, codecs other than snappy).
Table read_table(std::span<const std::uint8_t> file);

template <class T>
const std::vector<T>& Table::values(std::string_view name) const {
  const Column& c = column(name);
  if (const auto* v = std::get_if<std::vector<T>>(&c.data)) return *v;
  fail(ErrorCode::schema, "column " + c.name + " has type " +
                              std::string(to_string(c.type)));
}

}  // namespace plastiscope::parquet
