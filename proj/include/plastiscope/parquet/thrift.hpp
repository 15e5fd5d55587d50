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

// Thrift compact protocol, enough of it for Parquet footers and page
// headers. Writing is imperative (field by field); reading produces a
// generic tree so unknown fields from other writers are skipped naturally.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace plastiscope::parquet::thrift {

enum class Type : std::uint8_t {
  stop = 0,
  bool_true = 1,
  bool_false = 2,
  i8 = 3,
  i16 = 4,
  i32 = 5,
  i64 = 6,
  dbl = 7,
  binary = 8,
  list = 9,
  set = 10,
  map = 11,
  structure = 12,
};

class CompactWriter {
 public:
  void field_bool(std::int16_t id, bool v);
  void field_i8(std::int16_t id, std::int8_t v);
  void field_i32(std::int16_t id, std::int32_t v);
  void field_i64(std::int16_t id, std::int64_t v);
  void field_binary(std::int16_t id, std::string_view v);

  void begin_struct_field(std::int16_t id);
  void end_struct();  // closes a struct field or a struct list element

  void begin_list_field(std::int16_t id, Type element, std::size_t size);
  void list_i32(std::int32_t v);
  void list_binary(std::string_view v);
  void begin_list_struct();

  // Writes the stop byte of the outermost struct.
  void finish();

  const std::vector<std::uint8_t>& bytes() const noexcept { return out_; }
  std::vector<std::uint8_t> release() { return std::move(out_); }

 private:
  void field_header(std::int16_t id, Type t);
  void varint(std::uint64_t v);
  void zigzag(std::int64_t v);

  std::vector<std::uint8_t> out_;
  std::vector<std::int16_t> last_id_{0};
};

struct Value;

struct List {
  Type element = Type::stop;
  std::vector<Value> items;
};

struct Struct {
  std::vector<std::int16_t> ids;
  std::vector<Value> values;

  const Value* find(std::int16_t id) const;
};

struct Value {
  std::variant<std::monostate, bool, std::int64_t, double, std::string, List,
               Struct>
      data;
};

// Field accessors; the "required" forms throw Error(schema) when absent or of
// the wrong kind. what names the enclosing structure in messages.
std::int64_t required_int(const Struct& s, std::int16_t id, const char* what);
std::optional<std::int64_t> optional_int(const Struct& s, std::int16_t id);
std::optional<bool> optional_bool(const Struct& s, std::int16_t id);
const std::string& required_binary(const Struct& s, std::int16_t id,
                                   const char* what);
const std::string* optional_binary(const Struct& s, std::int16_t id);
const Struct& required_struct(const Struct& s, std::int16_t id, const char* what);
const Struct* optional_struct(const Struct& s, std::int16_t id);
const List& required_list(const Struct& s, std::int16_t id, const char* what);
const List* optional_list(const Struct& s, std::int16_t id);

// Parses one struct starting at data[0]. consumed receives the byte length.
// Throws Error(format) on malformed input.
Struct read_struct(std::span<const std::uint8_t> data, std::size_t& consumed);

}  // namespace plastiscope::parquet::thrift
