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

#include "plastiscope/parquet/file.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <limits>
#include <optional>
#include <unordered_map>

#include "plastiscope/error.hpp"
#include "plastiscope/parquet/encoding.hpp"
#include "plastiscope/parquet/snappy.hpp"
#include "plastiscope/parquet/thrift.hpp"

namespace plastiscope::parquet {

namespace {

constexpr std::string_view kMagic = "PAR1";

// parquet.thrift enumerations
enum PhysicalType : std::int32_t { kBoolean = 0, kInt32 = 1, kFloat = 4 };
enum ConvertedType : std::int32_t { kUint16 = 12, kUint32 = 13 };
enum PageType : std::int32_t { kDataPage = 0, kIndexPage = 1, kDictionaryPage = 2, kDataPageV2 = 3 };
constexpr std::int32_t kRequired = 0;
constexpr std::int32_t kOptional = 1;

// A dictionary larger than this is never worth it for our value counts.
constexpr std::size_t kMaxDictionarySize = 1 << 16;

std::int32_t physical_type(ColumnType t) {
  switch (t) {
    case ColumnType::boolean: return kBoolean;
    case ColumnType::float32: return kFloat;
    default: return kInt32;
  }
}

struct Annotation {
  std::int32_t converted;
  std::int8_t bits;
};

std::optional<Annotation> annotation(ColumnType t) {
  if (t == ColumnType::uint16) return Annotation{kUint16, 16};
  if (t == ColumnType::uint32) return Annotation{kUint32, 32};
  return std::nullopt;
}

// All non-boolean values travel as 32-bit words.
std::vector<std::uint32_t> as_words(const ColumnData& data) {
  std::vector<std::uint32_t> words;
  std::visit(
      [&](const auto& v) {
        using T = typename std::decay_t<decltype(v)>::value_type;
        words.reserve(v.size());
        for (T x : v) {
          if constexpr (std::is_same_v<T, float>) {
            words.push_back(std::bit_cast<std::uint32_t>(x));
          } else if constexpr (std::is_same_v<T, std::int32_t>) {
            words.push_back(static_cast<std::uint32_t>(x));
          } else {
            words.push_back(x);
          }
        }
      },
      data);
  return words;
}

void put_words_plain(std::span<const std::uint32_t> words, Bytes& out) {
  for (std::uint32_t w : words) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(w >> (8 * b)));
  }
}

struct Page {
  std::int32_t type = kDataPage;
  Encoding encoding = Encoding::plain;
  std::size_t num_values = 0;
  Bytes body;  // uncompressed
};

struct Candidate {
  std::vector<Page> pages;
  std::vector<Encoding> encodings;
};

struct EncodedChunk {
  Bytes bytes;
  std::vector<Encoding> encodings;
  std::int64_t uncompressed = 0;
  bool has_dictionary = false;
  std::size_t dictionary_page_length = 0;
};

Bytes compress(Codec codec, const Bytes& body) {
  if (codec == Codec::snappy) return snappy::compress(body);
  return body;
}

EncodedChunk assemble(const Candidate& c, Codec codec) {
  EncodedChunk chunk;
  chunk.encodings = c.encodings;
  for (const Page& page : c.pages) {
    Bytes compressed = compress(codec, page.body);
    thrift::CompactWriter w;
    w.field_i32(1, page.type);
    w.field_i32(2, static_cast<std::int32_t>(page.body.size()));
    w.field_i32(3, static_cast<std::int32_t>(compressed.size()));
    if (page.type == kDictionaryPage) {
      w.begin_struct_field(7);
      w.field_i32(1, static_cast<std::int32_t>(page.num_values));
      w.field_i32(2, static_cast<std::int32_t>(Encoding::plain));
      w.end_struct();
    } else {
      w.begin_struct_field(5);
      w.field_i32(1, static_cast<std::int32_t>(page.num_values));
      w.field_i32(2, static_cast<std::int32_t>(page.encoding));
      w.field_i32(3, static_cast<std::int32_t>(Encoding::rle));
      w.field_i32(4, static_cast<std::int32_t>(Encoding::rle));
      w.end_struct();
    }
    w.finish();
    const Bytes& header = w.bytes();
    chunk.uncompressed += static_cast<std::int64_t>(header.size() + page.body.size());
    chunk.bytes.insert(chunk.bytes.end(), header.begin(), header.end());
    chunk.bytes.insert(chunk.bytes.end(), compressed.begin(), compressed.end());
    if (page.type == kDictionaryPage) {
      chunk.has_dictionary = true;
      chunk.dictionary_page_length = chunk.bytes.size();
    }
  }
  return chunk;
}

std::optional<Candidate> dictionary_candidate(std::span<const std::uint32_t> words) {
  std::unordered_map<std::uint32_t, std::uint32_t> index;
  std::vector<std::uint32_t> dictionary;
  std::vector<std::uint32_t> ids;
  ids.reserve(words.size());
  for (std::uint32_t w : words) {
    auto [it, inserted] = index.try_emplace(w, static_cast<std::uint32_t>(dictionary.size()));
    if (inserted) {
      dictionary.push_back(w);
      if (dictionary.size() > kMaxDictionarySize) return std::nullopt;
    }
    ids.push_back(it->second);
  }
  Candidate c;
  Page dict{kDictionaryPage, Encoding::plain, dictionary.size(), {}};
  put_words_plain(dictionary, dict.body);
  Page data{kDataPage, Encoding::rle_dictionary, words.size(), {}};
  // Some readers reject a zero bit width, so a one-entry dictionary still uses 1.
  const int width = std::max(1, bit_width(dictionary.empty() ? 0 : dictionary.size() - 1));
  data.body.push_back(static_cast<std::uint8_t>(width));
  rle_hybrid_encode(ids, width, data.body);
  c.pages = {std::move(dict), std::move(data)};
  c.encodings = {Encoding::plain, Encoding::rle_dictionary};
  return c;
}

Candidate single_page(Encoding e, std::size_t n, Bytes body) {
  Candidate c;
  c.pages.push_back(Page{kDataPage, e, n, std::move(body)});
  c.encodings = {e};
  return c;
}

EncodedChunk encode_column(const Column& column, Codec codec) {
  const std::size_t n = column.size();
  if (column.type == ColumnType::boolean) {
    const auto& flags = std::get<std::vector<std::uint8_t>>(column.data);
    std::vector<std::uint32_t> bits(flags.begin(), flags.end());
    Bytes body;
    bit_pack(bits, 1, body);
    return assemble(single_page(Encoding::plain, n, std::move(body)), codec);
  }

  const std::vector<std::uint32_t> words = as_words(column.data);
  std::vector<Candidate> candidates;
  {
    Bytes body;
    put_words_plain(words, body);
    candidates.push_back(single_page(Encoding::plain, n, std::move(body)));
  }
  if (column.type == ColumnType::float32) {
    Bytes plain;
    put_words_plain(words, plain);
    Bytes body;
    byte_stream_split(plain, 4, body);
    candidates.push_back(single_page(Encoding::byte_stream_split, n, std::move(body)));
  } else {
    std::vector<std::int32_t> ints(words.begin(), words.end());
    Bytes body;
    delta_binary_pack(ints, body);
    candidates.push_back(single_page(Encoding::delta_binary_packed, n, std::move(body)));
  }
  if (auto dict = dictionary_candidate(words)) candidates.push_back(std::move(*dict));

  std::optional<EncodedChunk> best;
  for (const Candidate& c : candidates) {
    EncodedChunk chunk = assemble(c, codec);
    if (!best || chunk.bytes.size() < best->bytes.size()) best = std::move(chunk);
  }
  return std::move(*best);
}

void write_schema_element(thrift::CompactWriter& w, const Column& c) {
  w.begin_list_struct();
  w.field_i32(1, physical_type(c.type));
  w.field_i32(3, kRequired);
  w.field_binary(4, c.name);
  if (auto a = annotation(c.type)) {
    w.field_i32(6, a->converted);
    w.begin_struct_field(10);  // LogicalType
    w.begin_struct_field(10);  // INTEGER
    w.field_i8(1, a->bits);
    w.field_bool(2, false);
    w.end_struct();
    w.end_struct();
  }
  w.end_struct();
}

}  // namespace

std::string_view to_string(ColumnType t) noexcept {
  switch (t) {
    case ColumnType::boolean: return "boolean";
    case ColumnType::uint16: return "uint16";
    case ColumnType::uint32: return "uint32";
    case ColumnType::int32: return "int32";
    case ColumnType::float32: return "float32";
  }
  return "unknown";
}

std::string_view to_string(Encoding e) noexcept {
  switch (e) {
    case Encoding::plain: return "PLAIN";
    case Encoding::plain_dictionary: return "PLAIN_DICTIONARY";
    case Encoding::rle: return "RLE";
    case Encoding::delta_binary_packed: return "DELTA_BINARY_PACKED";
    case Encoding::rle_dictionary: return "RLE_DICTIONARY";
    case Encoding::byte_stream_split: return "BYTE_STREAM_SPLIT";
  }
  return "OTHER";
}

std::size_t Column::size() const noexcept {
  return std::visit([](const auto& v) { return v.size(); }, data);
}

Column make_column(std::string name, std::vector<std::uint8_t> booleans) {
  return Column{std::move(name), ColumnType::boolean, std::move(booleans)};
}
Column make_column(std::string name, std::vector<std::uint16_t> values) {
  return Column{std::move(name), ColumnType::uint16, std::move(values)};
}
Column make_column(std::string name, std::vector<std::uint32_t> values) {
  return Column{std::move(name), ColumnType::uint32, std::move(values)};
}
Column make_column(std::string name, std::vector<std::int32_t> values) {
  return Column{std::move(name), ColumnType::int32, std::move(values)};
}
Column make_column(std::string name, std::vector<float> values) {
  return Column{std::move(name), ColumnType::float32, std::move(values)};
}

std::size_t Table::num_rows() const noexcept {
  return columns.empty() ? 0 : columns.front().size();
}

const Column& Table::column(std::string_view name) const {
  for (const Column& c : columns) {
    if (c.name == name) return c;
  }
  fail(ErrorCode::schema, "missing column " + std::string(name));
}

const std::string* Table::metadata_value(std::string_view key) const noexcept {
  for (const auto& [k, v] : metadata) {
    if (k == key) return &v;
  }
  return nullptr;
}

std::vector<std::uint8_t> write_table(const Table& table,
                                      const WriteOptions& options) {
  const std::size_t rows = table.num_rows();
  for (const Column& c : table.columns) {
    if (c.size() != rows) {
      fail(ErrorCode::validation, "column " + c.name + " has " +
                                      std::to_string(c.size()) + " rows, expected " +
                                      std::to_string(rows));
    }
    if (c.type == ColumnType::boolean) {
      for (std::uint8_t b : std::get<std::vector<std::uint8_t>>(c.data)) {
        if (b > 1) fail(ErrorCode::validation, "boolean column " + c.name + " holds " + std::to_string(b));
      }
    }
  }
  if (rows > std::size_t(std::numeric_limits<std::int32_t>::max())) {
    fail(ErrorCode::validation, "too many rows for one page");
  }

  Bytes out(kMagic.begin(), kMagic.end());
  struct Placed {
    EncodedChunk chunk;
    std::int64_t offset = 0;
  };
  std::vector<Placed> placed;
  if (rows > 0) {
    for (const Column& c : table.columns) {
      Placed p{encode_column(c, options.codec), static_cast<std::int64_t>(out.size())};
      out.insert(out.end(), p.chunk.bytes.begin(), p.chunk.bytes.end());
      placed.push_back(std::move(p));
    }
  }

  thrift::CompactWriter w;
  w.field_i32(1, 2);
  w.begin_list_field(2, thrift::Type::structure, table.columns.size() + 1);
  w.begin_list_struct();
  w.field_binary(4, "schema");
  w.field_i32(5, static_cast<std::int32_t>(table.columns.size()));
  w.end_struct();
  for (const Column& c : table.columns) write_schema_element(w, c);
  w.field_i64(3, static_cast<std::int64_t>(rows));
  w.begin_list_field(4, thrift::Type::structure, placed.empty() ? 0 : 1);
  if (!placed.empty()) {
    std::int64_t total_uncompressed = 0;
    std::int64_t total_compressed = 0;
    w.begin_list_struct();
    w.begin_list_field(1, thrift::Type::structure, placed.size());
    for (std::size_t i = 0; i < placed.size(); ++i) {
      const Column& c = table.columns[i];
      const Placed& p = placed[i];
      const auto compressed = static_cast<std::int64_t>(p.chunk.bytes.size());
      total_uncompressed += p.chunk.uncompressed;
      total_compressed += compressed;
      w.begin_list_struct();
      w.field_i64(2, p.offset);
      w.begin_struct_field(3);
      w.field_i32(1, physical_type(c.type));
      w.begin_list_field(2, thrift::Type::i32, p.chunk.encodings.size());
      for (Encoding e : p.chunk.encodings) w.list_i32(static_cast<std::int32_t>(e));
      w.begin_list_field(3, thrift::Type::binary, 1);
      w.list_binary(c.name);
      w.field_i32(4, static_cast<std::int32_t>(options.codec));
      w.field_i64(5, static_cast<std::int64_t>(rows));
      w.field_i64(6, p.chunk.uncompressed);
      w.field_i64(7, compressed);
      w.field_i64(9, p.offset + static_cast<std::int64_t>(p.chunk.dictionary_page_length));
      if (p.chunk.has_dictionary) w.field_i64(11, p.offset);
      w.end_struct();
      w.end_struct();
    }
    w.field_i64(2, total_uncompressed);
    w.field_i64(3, static_cast<std::int64_t>(rows));
    w.field_i64(5, placed.front().offset);
    w.field_i64(6, total_compressed);
    w.end_struct();
  }
  if (!table.metadata.empty()) {
    w.begin_list_field(5, thrift::Type::structure, table.metadata.size());
    for (const auto& [k, v] : table.metadata) {
      w.begin_list_struct();
      w.field_binary(1, k);
      w.field_binary(2, v);
      w.end_struct();
    }
  }
  w.field_binary(6, options.created_by);
  w.finish();

  const Bytes& footer = w.bytes();
  out.insert(out.end(), footer.begin(), footer.end());
  const auto len = static_cast<std::uint32_t>(footer.size());
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(len >> (8 * b)));
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  return out;
}

namespace {

struct Footer {
  thrift::Struct meta;
  std::vector<ColumnInfo> columns;
  std::vector<bool> optional;  // definition levels present, nulls still rejected
  std::vector<KeyValue> metadata;
};

ColumnType leaf_type(const thrift::Struct& element, const std::string& name) {
  auto physical = thrift::optional_int(element, 1);
  if (!physical) fail(ErrorCode::schema, "column " + name + " has no physical type");
  auto converted = thrift::optional_int(element, 6);
  std::optional<std::pair<std::int64_t, bool>> integer;
  if (const thrift::Struct* logical = thrift::optional_struct(element, 10)) {
    if (const thrift::Struct* it = thrift::optional_struct(*logical, 10)) {
      integer = std::make_pair(thrift::required_int(*it, 1, "IntType"),
                               thrift::optional_bool(*it, 2).value_or(true));
    }
  }
  switch (*physical) {
    case kBoolean: return ColumnType::boolean;
    case kFloat: return ColumnType::float32;
    case kInt32:
      if (converted == kUint16 || (integer && !integer->second && integer->first == 16)) {
        return ColumnType::uint16;
      }
      if (converted == kUint32 || (integer && !integer->second && integer->first == 32)) {
        return ColumnType::uint32;
      }
      if (!converted && (!integer || (integer->second && integer->first == 32))) {
        return ColumnType::int32;
      }
      break;
    default:
      break;
  }
  fail(ErrorCode::schema, "column " + name + " has an unsupported type");
}

Footer parse_footer(std::span<const std::uint8_t> file) {
  if (file.size() < 12 ||
      std::memcmp(file.data(), kMagic.data(), 4) != 0 ||
      std::memcmp(file.data() + file.size() - 4, kMagic.data(), 4) != 0) {
    fail(ErrorCode::format, "not a parquet file");
  }
  std::uint32_t len = 0;
  for (int b = 0; b < 4; ++b) len |= std::uint32_t(file[file.size() - 8 + b]) << (8 * b);
  if (len > file.size() - 12) fail(ErrorCode::format, "footer length out of range");
  std::size_t consumed = 0;
  Footer f;
  f.meta = thrift::read_struct(file.subspan(file.size() - 8 - len, len), consumed);

  const thrift::List& schema = thrift::required_list(f.meta, 2, "FileMetaData");
  if (schema.items.empty()) fail(ErrorCode::schema, "empty schema");
  const auto* root = std::get_if<thrift::Struct>(&schema.items[0].data);
  if (root == nullptr) fail(ErrorCode::format, "schema root is not a struct");
  const auto children = thrift::optional_int(*root, 5).value_or(0);
  if (children != static_cast<std::int64_t>(schema.items.size()) - 1) {
    fail(ErrorCode::schema, "nested schemas are not supported");
  }
  for (std::size_t i = 1; i < schema.items.size(); ++i) {
    const auto* e = std::get_if<thrift::Struct>(&schema.items[i].data);
    if (e == nullptr) fail(ErrorCode::format, "schema element is not a struct");
    ColumnInfo info;
    info.name = thrift::required_binary(*e, 4, "SchemaElement");
    if (thrift::optional_int(*e, 5).value_or(0) != 0) {
      fail(ErrorCode::schema, "nested column " + info.name);
    }
    const auto repetition = thrift::optional_int(*e, 3).value_or(kRequired);
    if (repetition != kRequired && repetition != kOptional) {
      fail(ErrorCode::schema, "column " + info.name + " is repeated");
    }
    info.type = leaf_type(*e, info.name);
    f.columns.push_back(std::move(info));
    f.optional.push_back(repetition == kOptional);
  }
  if (const thrift::List* kv = thrift::optional_list(f.meta, 5)) {
    for (const thrift::Value& item : kv->items) {
      const auto* s = std::get_if<thrift::Struct>(&item.data);
      if (s == nullptr) continue;
      const std::string* value = thrift::optional_binary(*s, 2);
      f.metadata.emplace_back(thrift::required_binary(*s, 1, "KeyValue"),
                              value ? *value : std::string());
    }
  }
  return f;
}

Bytes decompress(std::int64_t codec, std::span<const std::uint8_t> body,
                 std::size_t uncompressed) {
  Bytes out;
  if (codec == static_cast<std::int64_t>(Codec::uncompressed)) {
    out.assign(body.begin(), body.end());
  } else if (codec == static_cast<std::int64_t>(Codec::snappy)) {
    out = snappy::uncompress(body);
  } else {
    fail(ErrorCode::schema, "unsupported compression codec " + std::to_string(codec));
  }
  if (out.size() != uncompressed) fail(ErrorCode::format, "page size mismatch");
  return out;
}

void check_no_nulls(std::span<const std::uint8_t> levels, std::size_t n,
                    const std::string& name) {
  for (std::uint32_t level : rle_hybrid_decode(levels, 1, n)) {
    if (level == 0) fail(ErrorCode::schema, "column " + name + " contains nulls");
  }
}

std::vector<std::uint32_t> plain_words(std::span<const std::uint8_t> body,
                                       std::size_t count) {
  if (body.size() < count * 4) fail(ErrorCode::format, "plain page truncated");
  std::vector<std::uint32_t> words(count);
  for (std::size_t i = 0; i < count; ++i) {
    words[i] = std::uint32_t(body[4 * i]) | std::uint32_t(body[4 * i + 1]) << 8 |
               std::uint32_t(body[4 * i + 2]) << 16 |
               std::uint32_t(body[4 * i + 3]) << 24;
  }
  return words;
}

struct Dictionary {
  std::vector<std::uint32_t> words;
  bool present = false;
};

std::vector<std::uint32_t> decode_values(std::span<const std::uint8_t> body,
                                         Encoding encoding, ColumnType type,
                                         std::size_t n, const Dictionary& dict,
                                         const std::string& name) {
  std::vector<std::uint32_t> page;
  switch (encoding) {
    case Encoding::plain:
      if (type == ColumnType::boolean) {
        page.resize(n);
        bit_unpack(body, 1, n, page.data());
      } else {
        page = plain_words(body, n);
      }
      return page;
    case Encoding::rle:
      if (type != ColumnType::boolean || body.size() < 4) {
        fail(ErrorCode::schema, "RLE values only supported for booleans");
      }
      return rle_hybrid_decode(body.subspan(4), 1, n);
    case Encoding::plain_dictionary:
    case Encoding::rle_dictionary: {
      if (!dict.present) fail(ErrorCode::format, "dictionary page missing");
      if (body.empty()) fail(ErrorCode::format, "dictionary indices missing");
      page.reserve(n);
      for (std::uint32_t id : rle_hybrid_decode(body.subspan(1), body[0], n)) {
        if (id >= dict.words.size()) fail(ErrorCode::format, "dictionary index out of range");
        page.push_back(dict.words[id]);
      }
      return page;
    }
    case Encoding::delta_binary_packed: {
      if (type == ColumnType::boolean || type == ColumnType::float32) {
        fail(ErrorCode::format, "delta encoding on a non-integer column");
      }
      std::vector<std::int32_t> ints = delta_binary_unpack(body, n);
      return std::vector<std::uint32_t>(ints.begin(), ints.end());
    }
    case Encoding::byte_stream_split: {
      if (type == ColumnType::boolean) fail(ErrorCode::format, "byte stream split on booleans");
      Bytes joined(n * 4);
      byte_stream_join(body, 4, n, joined.data());
      return plain_words(joined, n);
    }
  }
  fail(ErrorCode::schema, "unsupported encoding " +
                              std::to_string(static_cast<int>(encoding)) +
                              " in column " + name);
}

// Skips the definition levels of an optional column, rejecting nulls.
std::span<const std::uint8_t> skip_levels(std::span<const std::uint8_t> body,
                                          std::size_t n, const std::string& name) {
  if (body.size() < 4) fail(ErrorCode::format, "definition levels truncated");
  const std::uint32_t len = std::uint32_t(body[0]) | std::uint32_t(body[1]) << 8 |
                            std::uint32_t(body[2]) << 16 | std::uint32_t(body[3]) << 24;
  if (len > body.size() - 4) fail(ErrorCode::format, "definition levels truncated");
  check_no_nulls(body.subspan(4, len), n, name);
  return body.subspan(4 + len);
}

// Decodes one column chunk into 32-bit words (or 0/1 for booleans).
std::vector<std::uint32_t> read_chunk(std::span<const std::uint8_t> file,
                                      const thrift::Struct& meta, ColumnType type,
                                      const std::string& name, bool optional) {
  const std::int64_t codec = thrift::required_int(meta, 4, "ColumnMetaData");
  const std::int64_t num_values = thrift::required_int(meta, 5, "ColumnMetaData");
  std::int64_t pos = thrift::required_int(meta, 9, "ColumnMetaData");
  if (auto dict = thrift::optional_int(meta, 11); dict && *dict > 0 && *dict < pos) {
    pos = *dict;
  }
  std::vector<std::uint32_t> values;
  values.reserve(static_cast<std::size_t>(std::max<std::int64_t>(num_values, 0)));
  Dictionary dictionary;
  while (static_cast<std::int64_t>(values.size()) < num_values) {
    if (pos < 0 || static_cast<std::size_t>(pos) >= file.size()) {
      fail(ErrorCode::format, "column " + name + " runs past end of file");
    }
    std::size_t header_len = 0;
    const thrift::Struct header =
        thrift::read_struct(file.subspan(static_cast<std::size_t>(pos)), header_len);
    const std::int64_t page_type = thrift::required_int(header, 1, "PageHeader");
    const std::int64_t raw_size = thrift::required_int(header, 2, "PageHeader");
    const std::int64_t stored_size = thrift::required_int(header, 3, "PageHeader");
    const std::size_t body_start = static_cast<std::size_t>(pos) + header_len;
    if (stored_size < 0 || raw_size < 0 ||
        body_start + static_cast<std::size_t>(stored_size) > file.size()) {
      fail(ErrorCode::format, "page of column " + name + " is truncated");
    }
    pos = static_cast<std::int64_t>(body_start) + stored_size;
    const auto stored = file.subspan(body_start, static_cast<std::size_t>(stored_size));

    std::vector<std::uint32_t> page;
    if (page_type == kIndexPage) {
      continue;
    } else if (page_type == kDictionaryPage) {
      const Bytes body = decompress(codec, stored, static_cast<std::size_t>(raw_size));
      const thrift::Struct& dh = thrift::required_struct(header, 7, "PageHeader");
      const auto n = static_cast<std::size_t>(thrift::required_int(dh, 1, "DictionaryPageHeader"));
      dictionary.words = plain_words(body, n);
      dictionary.present = true;
      continue;
    } else if (page_type == kDataPage) {
      const Bytes body = decompress(codec, stored, static_cast<std::size_t>(raw_size));
      const thrift::Struct& dh = thrift::required_struct(header, 5, "PageHeader");
      const auto n = static_cast<std::size_t>(thrift::required_int(dh, 1, "DataPageHeader"));
      const auto encoding = static_cast<Encoding>(thrift::required_int(dh, 2, "DataPageHeader"));
      std::span<const std::uint8_t> data(body);
      if (optional) data = skip_levels(data, n, name);
      page = decode_values(data, encoding, type, n, dictionary, name);
    } else if (page_type == kDataPageV2) {
      // Levels sit uncompressed in front of the (possibly compressed) values.
      const thrift::Struct& dh = thrift::required_struct(header, 8, "PageHeader");
      const auto n = static_cast<std::size_t>(thrift::required_int(dh, 1, "DataPageHeaderV2"));
      if (thrift::required_int(dh, 2, "DataPageHeaderV2") != 0) {
        fail(ErrorCode::schema, "column " + name + " contains nulls");
      }
      const auto encoding = static_cast<Encoding>(thrift::required_int(dh, 4, "DataPageHeaderV2"));
      const auto def_len = thrift::required_int(dh, 5, "DataPageHeaderV2");
      const auto rep_len = thrift::required_int(dh, 6, "DataPageHeaderV2");
      if (def_len < 0 || rep_len < 0 || def_len + rep_len > stored_size ||
          def_len + rep_len > raw_size) {
        fail(ErrorCode::format, "bad level lengths in column " + name);
      }
      const auto skip = static_cast<std::size_t>(def_len + rep_len);
      const bool compressed = thrift::optional_bool(dh, 7).value_or(true);
      const auto rest = stored.subspan(skip);
      const Bytes body = compressed
                             ? decompress(codec, rest, static_cast<std::size_t>(raw_size) - skip)
                             : Bytes(rest.begin(), rest.end());
      page = decode_values(body, encoding, type, n, dictionary, name);
    } else {
      fail(ErrorCode::format, "unknown page type " + std::to_string(page_type));
    }
    values.insert(values.end(), page.begin(), page.end());
  }
  if (static_cast<std::int64_t>(values.size()) != num_values) {
    fail(ErrorCode::format, "column " + name + " holds more values than declared");
  }
  return values;
}

ColumnData to_column_data(ColumnType type, const std::vector<std::uint32_t>& words) {
  switch (type) {
    case ColumnType::boolean: {
      std::vector<std::uint8_t> v(words.size());
      for (std::size_t i = 0; i < words.size(); ++i) v[i] = words[i] != 0;
      return v;
    }
    case ColumnType::uint16: {
      std::vector<std::uint16_t> v(words.size());
      for (std::size_t i = 0; i < words.size(); ++i) {
        if (words[i] > 0xFFFF) fail(ErrorCode::format, "uint16 value out of range");
        v[i] = static_cast<std::uint16_t>(words[i]);
      }
      return v;
    }
    case ColumnType::uint32: return std::vector<std::uint32_t>(words.begin(), words.end());
    case ColumnType::int32: {
      std::vector<std::int32_t> v(words.size());
      for (std::size_t i = 0; i < words.size(); ++i) v[i] = static_cast<std::int32_t>(words[i]);
      return v;
    }
    case ColumnType::float32: {
      std::vector<float> v(words.size());
      for (std::size_t i = 0; i < words.size(); ++i) v[i] = std::bit_cast<float>(words[i]);
      return v;
    }
  }
  fail(ErrorCode::schema, "unknown column type");
}

}  // namespace

FileInfo inspect(std::span<const std::uint8_t> file) {
  Footer f = parse_footer(file);
  FileInfo info;
  info.num_rows = thrift::required_int(f.meta, 3, "FileMetaData");
  info.metadata = std::move(f.metadata);
  if (const std::string* cb = thrift::optional_binary(f.meta, 6)) info.created_by = *cb;
  info.columns = std::move(f.columns);
  const thrift::List& groups = thrift::required_list(f.meta, 4, "FileMetaData");
  info.row_groups = groups.items.size();
  for (const thrift::Value& g : groups.items) {
    const auto* group = std::get_if<thrift::Struct>(&g.data);
    if (group == nullptr) fail(ErrorCode::format, "row group is not a struct");
    const thrift::List& chunks = thrift::required_list(*group, 1, "RowGroup");
    if (chunks.items.size() != info.columns.size()) {
      fail(ErrorCode::format, "row group column count differs from schema");
    }
    for (std::size_t i = 0; i < chunks.items.size(); ++i) {
      const auto* chunk = std::get_if<thrift::Struct>(&chunks.items[i].data);
      if (chunk == nullptr) fail(ErrorCode::format, "column chunk is not a struct");
      const thrift::Struct& meta = thrift::required_struct(*chunk, 3, "ColumnChunk");
      ColumnInfo& c = info.columns[i];
      c.codec = static_cast<Codec>(thrift::required_int(meta, 4, "ColumnMetaData"));
      c.uncompressed_bytes += thrift::required_int(meta, 6, "ColumnMetaData");
      c.compressed_bytes += thrift::required_int(meta, 7, "ColumnMetaData");
      for (const thrift::Value& e : thrift::required_list(meta, 2, "ColumnMetaData").items) {
        if (const auto* v = std::get_if<std::int64_t>(&e.data)) {
          auto enc = static_cast<Encoding>(*v);
          if (std::find(c.encodings.begin(), c.encodings.end(), enc) == c.encodings.end()) {
            c.encodings.push_back(enc);
          }
        }
      }
    }
  }
  return info;
}

Table read_table(std::span<const std::uint8_t> file) {
  Footer f = parse_footer(file);
  const std::int64_t rows = thrift::required_int(f.meta, 3, "FileMetaData");
  std::vector<std::vector<std::uint32_t>> words(f.columns.size());
  for (const thrift::Value& g : thrift::required_list(f.meta, 4, "FileMetaData").items) {
    const auto* group = std::get_if<thrift::Struct>(&g.data);
    if (group == nullptr) fail(ErrorCode::format, "row group is not a struct");
    const thrift::List& chunks = thrift::required_list(*group, 1, "RowGroup");
    if (chunks.items.size() != f.columns.size()) {
      fail(ErrorCode::format, "row group column count differs from schema");
    }
    for (std::size_t i = 0; i < chunks.items.size(); ++i) {
      const auto* chunk = std::get_if<thrift::Struct>(&chunks.items[i].data);
      if (chunk == nullptr) fail(ErrorCode::format, "column chunk is not a struct");
      const thrift::Struct& meta = thrift::required_struct(*chunk, 3, "ColumnChunk");
      std::vector<std::uint32_t> part = read_chunk(file, meta, f.columns[i].type,
                                                       f.columns[i].name, f.optional[i]);
      words[i].insert(words[i].end(), part.begin(), part.end());
    }
  }
  Table table;
  table.metadata = std::move(f.metadata);
  for (std::size_t i = 0; i < f.columns.size(); ++i) {
    if (static_cast<std::int64_t>(words[i].size()) != rows) {
      fail(ErrorCode::format, "column " + f.columns[i].name + " length differs from row count");
    }
    table.columns.push_back(Column{f.columns[i].name, f.columns[i].type,
                                   to_column_data(f.columns[i].type, words[i])});
  }
  return table;
}

}  // namespace plastiscope::parquet
