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

#include "plastiscope/parquet/thrift.hpp"

#include <cstring>

#include "plastiscope/error.hpp"

namespace plastiscope::parquet::thrift {

void CompactWriter::varint(std::uint64_t v) {
  while (v >= 0x80) {
    out_.push_back(static_cast<std::uint8_t>(v | 0x80));
    v >>= 7;
  }
  out_.push_back(static_cast<std::uint8_t>(v));
}

void CompactWriter::zigzag(std::int64_t v) {
  varint((static_cast<std::uint64_t>(v) << 1) ^
         static_cast<std::uint64_t>(v >> 63));
}

void CompactWriter::field_header(std::int16_t id, Type t) {
  std::int16_t& last = last_id_.back();
  int delta = id - last;
  if (delta > 0 && delta <= 15) {
    out_.push_back(static_cast<std::uint8_t>(delta << 4 | int(t)));
  } else {
    out_.push_back(static_cast<std::uint8_t>(t));
    zigzag(id);
  }
  last = id;
}

void CompactWriter::field_bool(std::int16_t id, bool v) {
  field_header(id, v ? Type::bool_true : Type::bool_false);
}

void CompactWriter::field_i8(std::int16_t id, std::int8_t v) {
  field_header(id, Type::i8);
  out_.push_back(static_cast<std::uint8_t>(v));
}

void CompactWriter::field_i32(std::int16_t id, std::int32_t v) {
  field_header(id, Type::i32);
  zigzag(v);
}

void CompactWriter::field_i64(std::int16_t id, std::int64_t v) {
  field_header(id, Type::i64);
  zigzag(v);
}

void CompactWriter::field_binary(std::int16_t id, std::string_view v) {
  field_header(id, Type::binary);
  list_binary(v);
}

void CompactWriter::begin_struct_field(std::int16_t id) {
  field_header(id, Type::structure);
  last_id_.push_back(0);
}

void CompactWriter::end_struct() {
  out_.push_back(0);
  last_id_.pop_back();
}

void CompactWriter::begin_list_field(std::int16_t id, Type element,
                                     std::size_t size) {
  field_header(id, Type::list);
  if (size < 15) {
    out_.push_back(static_cast<std::uint8_t>(size << 4 | int(element)));
  } else {
    out_.push_back(static_cast<std::uint8_t>(0xF0 | int(element)));
    varint(size);
  }
}

void CompactWriter::list_i32(std::int32_t v) { zigzag(v); }

void CompactWriter::list_binary(std::string_view v) {
  varint(v.size());
  out_.insert(out_.end(), v.begin(), v.end());
}

void CompactWriter::begin_list_struct() { last_id_.push_back(0); }

void CompactWriter::finish() { out_.push_back(0); }

const Value* Struct::find(std::int16_t id) const {
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == id) return &values[i];
  }
  return nullptr;
}

namespace {

[[noreturn]] void missing(const char* what, std::int16_t id) {
  fail(ErrorCode::schema, std::string(what) + ": missing or mistyped field " +
                              std::to_string(id));
}

constexpr int kMaxDepth = 64;

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  std::size_t position() const noexcept { return pos_; }

  Struct read_struct(int depth) {
    if (depth > kMaxDepth) bad("nesting too deep");
    Struct s;
    std::int16_t last = 0;
    for (;;) {
      std::uint8_t header = byte();
      if (header == 0) break;
      auto type = static_cast<Type>(header & 0x0F);
      int delta = header >> 4;
      std::int16_t id = delta != 0 ? static_cast<std::int16_t>(last + delta)
                                   : static_cast<std::int16_t>(zigzag());
      last = id;
      Value v;
      if (type == Type::bool_true || type == Type::bool_false) {
        v.data = type == Type::bool_true;
      } else {
        v = read_value(type, depth);
      }
      s.ids.push_back(id);
      s.values.push_back(std::move(v));
    }
    return s;
  }

 private:
  [[noreturn]] void bad(const char* what) {
    fail(ErrorCode::format, std::string("malformed thrift data: ") + what);
  }

  std::uint8_t byte() {
    if (pos_ >= data_.size()) bad("unexpected end of input");
    return data_[pos_++];
  }

  std::uint64_t varint() {
    std::uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      std::uint8_t b = byte();
      v |= std::uint64_t(b & 0x7F) << shift;
      if ((b & 0x80) == 0) return v;
    }
    bad("varint too long");
  }

  std::int64_t zigzag() {
    std::uint64_t v = varint();
    return static_cast<std::int64_t>(v >> 1) ^ -static_cast<std::int64_t>(v & 1);
  }

  Value read_value(Type type, int depth) {
    Value v;
    switch (type) {
      case Type::bool_true:
      case Type::bool_false:
        v.data = byte() == 1;
        break;
      case Type::i8:
        v.data = std::int64_t(static_cast<std::int8_t>(byte()));
        break;
      case Type::i16:
      case Type::i32:
      case Type::i64:
        v.data = zigzag();
        break;
      case Type::dbl: {
        if (pos_ + 8 > data_.size()) bad("truncated double");
        double d;
        std::memcpy(&d, data_.data() + pos_, 8);
        pos_ += 8;
        v.data = d;
        break;
      }
      case Type::binary: {
        std::uint64_t n = varint();
        if (n > data_.size() - pos_) bad("truncated binary");
        v.data = std::string(reinterpret_cast<const char*>(data_.data() + pos_), n);
        pos_ += n;
        break;
      }
      case Type::list:
      case Type::set: {
        std::uint8_t header = byte();
        std::uint64_t n = header >> 4;
        if (n == 15) n = varint();
        if (n > data_.size() - pos_) bad("list size exceeds input");
        List l;
        l.element = static_cast<Type>(header & 0x0F);
        l.items.reserve(n);
        for (std::uint64_t i = 0; i < n; ++i) {
          l.items.push_back(read_value(l.element, depth + 1));
        }
        v.data = std::move(l);
        break;
      }
      case Type::map: {
        // Parquet metadata has no maps; parse to keep the stream aligned.
        std::uint64_t n = varint();
        if (n > 0) {
          std::uint8_t kv = byte();
          for (std::uint64_t i = 0; i < n; ++i) {
            read_value(static_cast<Type>(kv >> 4), depth + 1);
            read_value(static_cast<Type>(kv & 0x0F), depth + 1);
          }
        }
        break;
      }
      case Type::structure:
        v.data = read_struct(depth + 1);
        break;
      default:
        bad("unknown type id");
    }
    return v;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

}  // namespace

std::int64_t required_int(const Struct& s, std::int16_t id, const char* what) {
  auto v = optional_int(s, id);
  if (!v) missing(what, id);
  return *v;
}

std::optional<std::int64_t> optional_int(const Struct& s, std::int16_t id) {
  const Value* v = s.find(id);
  if (v == nullptr) return std::nullopt;
  if (auto* i = std::get_if<std::int64_t>(&v->data)) return *i;
  return std::nullopt;
}

std::optional<bool> optional_bool(const Struct& s, std::int16_t id) {
  const Value* v = s.find(id);
  if (v == nullptr) return std::nullopt;
  if (auto* b = std::get_if<bool>(&v->data)) return *b;
  return std::nullopt;
}

const std::string& required_binary(const Struct& s, std::int16_t id,
                                   const char* what) {
  const std::string* b = optional_binary(s, id);
  if (b == nullptr) missing(what, id);
  return *b;
}

const std::string* optional_binary(const Struct& s, std::int16_t id) {
  const Value* v = s.find(id);
  return v == nullptr ? nullptr : std::get_if<std::string>(&v->data);
}

const Struct& required_struct(const Struct& s, std::int16_t id,
                              const char* what) {
  const Struct* r = optional_struct(s, id);
  if (r == nullptr) missing(what, id);
  return *r;
}

const Struct* optional_struct(const Struct& s, std::int16_t id) {
  const Value* v = s.find(id);
  return v == nullptr ? nullptr : std::get_if<Struct>(&v->data);
}

const List& required_list(const Struct& s, std::int16_t id, const char* what) {
  const List* l = optional_list(s, id);
  if (l == nullptr) missing(what, id);
  return *l;
}

const List* optional_list(const Struct& s, std::int16_t id) {
  const Value* v = s.find(id);
  return v == nullptr ? nullptr : std::get_if<List>(&v->data);
}

Struct read_struct(std::span<const std::uint8_t> data, std::size_t& consumed) {
  Reader r(data);
  Struct s = r.read_struct(0);
  consumed = r.position();
  return s;
}

}  // namespace plastiscope::parquet::thrift
