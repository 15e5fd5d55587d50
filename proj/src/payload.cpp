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

#include "plastiscope/payload.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <limits>
#include <string>

#include "plastiscope/kernels.hpp"

namespace plastiscope::payload {

namespace {

static_assert(std::endian::native == std::endian::little,
              "payload encoding assumes a little-endian host");

using Bytes = std::vector<std::uint8_t>;

[[noreturn]] void bad(const std::string& what) { fail(ErrorCode::format, "bad payload: " + what); }

template <class T>
void put(Bytes& out, std::size_t at, T v) {
  std::memcpy(out.data() + at, &v, sizeof v);
}

template <class T>
T get(std::span<const std::uint8_t> in, std::size_t at) {
  if (at + sizeof(T) > in.size()) bad("truncated at byte " + std::to_string(at));
  T v;
  std::memcpy(&v, in.data() + at, sizeof v);
  return v;
}

std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::u8: case DType::i8: return 1;
    case DType::u16: case DType::i16: return 2;
    case DType::u32: case DType::i32: case DType::f32: return 4;
    case DType::bitmask: return 0;
  }
  return 0;
}

std::size_t column_bytes(DType t, std::size_t n) {
  return t == DType::bitmask ? (n + 7) / 8 : dtype_size(t) * n;
}

std::size_t align4(std::size_t v) { return (v + 3) & ~std::size_t(3); }

DType narrow_unsigned(std::span<const std::uint32_t> v) {
  const double hi = kernels::min_max(v).max;
  return hi <= 0xFF ? DType::u8 : hi <= 0xFFFF ? DType::u16 : DType::u32;
}

DType narrow_signed(std::span<const std::int32_t> v) {
  const kernels::MinMax m = kernels::min_max(v);
  if (m.finite == 0 || (m.min >= -128 && m.max <= 127)) return DType::i8;
  if (m.min >= -32768 && m.max <= 32767) return DType::i16;
  return DType::i32;
}

// One column to be laid out: its dtype and a writer into the final buffer.
struct Pending {
  NeuronProperty property;
  DType dtype;
  ColumnView source;
};

void write_column(const Pending& c, std::uint8_t* out, std::size_t n) {
  std::visit([&](auto s) {
    using T = std::remove_const_t<typename decltype(s)::element_type>;
    switch (c.dtype) {
      case DType::bitmask:
        for (std::size_t i = 0; i < n; ++i) out[i / 8] |= std::uint8_t((s[i] != 0) << (i % 8));
        break;
      case DType::f32:
        if constexpr (std::is_same_v<T, float>) std::memcpy(out, s.data(), n * 4);
        break;
      default: {
        auto narrow = [&]<class U>(U*) {
          for (std::size_t i = 0; i < n; ++i) {
            const U v = static_cast<U>(s[i]);
            std::memcpy(out + i * sizeof(U), &v, sizeof(U));
          }
        };
        switch (c.dtype) {
          case DType::u8: narrow((std::uint8_t*)nullptr); break;
          case DType::u16: narrow((std::uint16_t*)nullptr); break;
          case DType::u32: narrow((std::uint32_t*)nullptr); break;
          case DType::i8: narrow((std::int8_t*)nullptr); break;
          case DType::i16: narrow((std::int16_t*)nullptr); break;
          case DType::i32: narrow((std::int32_t*)nullptr); break;
          default: break;
        }
      }
    }
  }, c.source);
}

struct Triplet {
  std::uint16_t src;
  std::uint16_t dst;
  std::uint32_t bits;  // u32 count or i32 delta
};

Bytes assemble(const Header& h, const std::vector<Pending>& columns,
               const std::vector<Triplet>& triplets) {
  const std::size_t n = h.neuron_count;
  std::size_t offset = kHeaderSize + columns.size() * kDescriptorSize;
  std::vector<std::size_t> offsets;
  for (const Pending& c : columns) {
    offsets.push_back(offset);
    offset = align4(offset + column_bytes(c.dtype, n));
  }
  if (offset + triplets.size() * kTripletSize > std::numeric_limits<std::uint32_t>::max()) {
    fail(ErrorCode::validation, "frame too large for a payload");
  }
  Bytes out(offset + triplets.size() * kTripletSize, 0);
  std::copy(kFrameMagic.begin(), kFrameMagic.end(), out.begin());
  out[4] = kVersion;
  out[5] = static_cast<std::uint8_t>(h.kind);
  out[6] = h.flags;
  out[7] = static_cast<std::uint8_t>(columns.size());
  put<std::uint32_t>(out, 8, h.neuron_count);
  put<std::uint16_t>(out, 12, h.area_count);
  out[14] = static_cast<std::uint8_t>(h.base.scenario);
  out[15] = static_cast<std::uint8_t>(h.other.scenario);
  put<std::uint32_t>(out, 16, h.base.timestep);
  put<std::uint32_t>(out, 20, h.other.timestep);
  put<std::uint32_t>(out, 24, static_cast<std::uint32_t>(triplets.size()));
  for (std::size_t k = 0; k < columns.size(); ++k) {
    const std::size_t d = kHeaderSize + k * kDescriptorSize;
    out[d] = static_cast<std::uint8_t>(columns[k].property);
    out[d + 1] = static_cast<std::uint8_t>(columns[k].dtype);
    put<std::uint32_t>(out, d + 4, static_cast<std::uint32_t>(offsets[k]));
    write_column(columns[k], out.data() + offsets[k], n);
  }
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const std::size_t at = offset + k * kTripletSize;
    put(out, at, triplets[k].src);
    put(out, at + 2, triplets[k].dst);
    put(out, at + 4, triplets[k].bits);
  }
  return out;
}

std::uint16_t checked_areas(std::size_t a) {
  if (a > 0xFFFF) fail(ErrorCode::validation, std::to_string(a) + " areas do not fit a payload");
  return static_cast<std::uint16_t>(a);
}

Scenario scenario_byte(std::uint8_t b) {
  if (b >= kAllScenarios.size()) bad("unknown scenario " + std::to_string(b));
  return static_cast<Scenario>(b);
}

struct Parsed {
  Header header;
  std::vector<ColumnDescriptor> columns;
  std::size_t triplets_at = 0;
};

Parsed parse(std::span<const std::uint8_t> in) {
  if (in.size() < kHeaderSize) bad("shorter than its header");
  if (!std::equal(kFrameMagic.begin(), kFrameMagic.end(), in.begin())) bad("magic is not PLSF");
  if (in[4] != kVersion) bad("unsupported version " + std::to_string(in[4]));
  Parsed p;
  Header& h = p.header;
  if (in[5] > 1) bad("unknown kind " + std::to_string(in[5]));
  h.kind = static_cast<Kind>(in[5]);
  h.flags = in[6];
  h.column_count = in[7];
  h.neuron_count = get<std::uint32_t>(in, 8);
  h.area_count = get<std::uint16_t>(in, 12);
  h.base = {scenario_byte(in[14]), get<std::uint32_t>(in, 16)};
  h.other = {scenario_byte(in[15]), get<std::uint32_t>(in, 20)};
  h.triplet_count = get<std::uint32_t>(in, 24);

  const std::size_t n = h.neuron_count;
  std::size_t end = kHeaderSize + std::size_t(h.column_count) * kDescriptorSize;
  if (end > in.size()) bad("descriptor table truncated");
  for (std::size_t k = 0; k < h.column_count; ++k) {
    const std::size_t d = kHeaderSize + k * kDescriptorSize;
    ColumnDescriptor c;
    if (in[d] >= kAllProperties.size()) bad("unknown property id " + std::to_string(in[d]));
    if (in[d + 1] > static_cast<std::uint8_t>(DType::bitmask)) bad("unknown dtype " + std::to_string(in[d + 1]));
    c.property = static_cast<NeuronProperty>(in[d]);
    c.dtype = static_cast<DType>(in[d + 1]);
    c.offset = get<std::uint32_t>(in, d + 4);
    if (c.offset % 4 != 0 || c.offset < end || c.offset + column_bytes(c.dtype, n) > in.size()) {
      bad("column " + std::string(property_name(c.property)) + " lies outside the payload");
    }
    end = std::max<std::size_t>(end, align4(c.offset + column_bytes(c.dtype, n)));
    p.columns.push_back(c);
  }
  p.triplets_at = end;
  if (end + std::size_t(h.triplet_count) * kTripletSize != in.size()) {
    bad("size " + std::to_string(in.size()) + " does not match its header");
  }
  return p;
}

const ColumnDescriptor& find(const Parsed& p, NeuronProperty prop) {
  const ColumnDescriptor* hit = nullptr;
  for (const ColumnDescriptor& c : p.columns) {
    if (c.property == prop) {
      if (hit != nullptr) bad("column " + std::string(property_name(prop)) + " appears twice");
      hit = &c;
    }
  }
  if (hit == nullptr) bad("column " + std::string(property_name(prop)) + " is missing");
  return *hit;
}

template <class T>
void read_column(std::span<const std::uint8_t> in, const ColumnDescriptor& c, std::size_t n,
                 std::vector<T>& out) {
  out.resize(n);
  const std::uint8_t* src = in.data() + c.offset;
  auto widen = [&]<class U>(U*) {
    for (std::size_t i = 0; i < n; ++i) {
      U v;
      std::memcpy(&v, src + i * sizeof(U), sizeof(U));
      out[i] = static_cast<T>(v);
    }
  };
  const bool want_float = std::is_same_v<T, float>;
  const bool want_signed = std::is_signed_v<T> && !want_float;
  switch (c.dtype) {
    case DType::f32:
      if (!want_float) break;
      widen((float*)nullptr);
      return;
    case DType::bitmask:
      if (want_float) break;
      for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<T>((src[i / 8] >> (i % 8)) & 1);
      return;
    case DType::u8: if (want_float || want_signed) break; widen((std::uint8_t*)nullptr); return;
    case DType::u16: if (want_float || want_signed || sizeof(T) < 2) break; widen((std::uint16_t*)nullptr); return;
    case DType::u32: if (want_float || want_signed || sizeof(T) < 4) break; widen((std::uint32_t*)nullptr); return;
    case DType::i8: if (!want_signed) break; widen((std::int8_t*)nullptr); return;
    case DType::i16: if (!want_signed || sizeof(T) < 2) break; widen((std::int16_t*)nullptr); return;
    case DType::i32: if (!want_signed || sizeof(T) < 4) break; widen((std::int32_t*)nullptr); return;
  }
  bad("column " + std::string(property_name(c.property)) + " has an unexpected dtype");
}

}  // namespace

Bytes encode_frame(const TimestepFrame& f) {
  f.validate();
  Header h;
  h.kind = Kind::frame;
  h.flags = f.connectivity_missing ? kFlagConnectivityMissing : 0;
  h.neuron_count = static_cast<std::uint32_t>(f.neuron_count());
  h.area_count = checked_areas(f.connectivity.area_count());
  h.base = h.other = f.key;
  const std::vector<Pending> columns = {
      {NeuronProperty::calcium, DType::f32, std::span<const float>(f.calcium)},
      {NeuronProperty::calcium_target_delta, DType::f32, std::span<const float>(f.calcium_target_delta)},
      {NeuronProperty::fired, DType::bitmask, std::span<const std::uint8_t>(f.fired)},
      {NeuronProperty::fired_fraction, DType::f32, std::span<const float>(f.fired_fraction)},
      {NeuronProperty::grown_axons, DType::f32, std::span<const float>(f.grown_axons)},
      {NeuronProperty::grown_dendrites, DType::f32, std::span<const float>(f.grown_dendrites)},
      {NeuronProperty::synapses_out, narrow_unsigned(f.synapses_out), std::span<const std::uint32_t>(f.synapses_out)},
      {NeuronProperty::synapses_in, narrow_unsigned(f.synapses_in), std::span<const std::uint32_t>(f.synapses_in)},
  };
  std::vector<Triplet> triplets;
  const std::size_t a = f.connectivity.area_count();
  for (std::size_t s = 0; s < a; ++s) {
    for (std::size_t t = 0; t < a; ++t) {
      if (const std::uint32_t c = f.connectivity.at(s, t)) {
        triplets.push_back({std::uint16_t(s), std::uint16_t(t), c});
      }
    }
  }
  return assemble(h, columns, triplets);
}

Bytes encode_diff(const DiffFrame& d, bool connectivity_missing) {
  const std::size_t n = d.neuron_count();
  for (std::size_t size : {d.calcium_target_delta.size(), d.fired.size(), d.fired_fraction.size(),
                           d.grown_axons.size(), d.grown_dendrites.size(), d.synapses_out.size(),
                           d.synapses_in.size()}) {
    if (size != n) fail(ErrorCode::validation, "diff has ragged columns");
  }
  if (d.connectivity_delta.size() != d.area_count * d.area_count) {
    fail(ErrorCode::validation, "diff connectivity is not area_count squared");
  }
  Header h;
  h.kind = Kind::diff;
  h.flags = connectivity_missing ? kFlagConnectivityMissing : 0;
  h.neuron_count = static_cast<std::uint32_t>(n);
  h.area_count = checked_areas(d.area_count);
  h.base = d.base;
  h.other = d.other;
  const std::vector<Pending> columns = {
      {NeuronProperty::calcium, DType::f32, std::span<const float>(d.calcium)},
      {NeuronProperty::calcium_target_delta, DType::f32, std::span<const float>(d.calcium_target_delta)},
      {NeuronProperty::fired, DType::i8, std::span<const std::int8_t>(d.fired)},
      {NeuronProperty::fired_fraction, DType::f32, std::span<const float>(d.fired_fraction)},
      {NeuronProperty::grown_axons, DType::f32, std::span<const float>(d.grown_axons)},
      {NeuronProperty::grown_dendrites, DType::f32, std::span<const float>(d.grown_dendrites)},
      {NeuronProperty::synapses_out, narrow_signed(d.synapses_out), std::span<const std::int32_t>(d.synapses_out)},
      {NeuronProperty::synapses_in, narrow_signed(d.synapses_in), std::span<const std::int32_t>(d.synapses_in)},
  };
  std::vector<Triplet> triplets;
  for (std::size_t s = 0; s < d.area_count; ++s) {
    for (std::size_t t = 0; t < d.area_count; ++t) {
      if (const std::int32_t c = d.connectivity_at(s, t)) {
        triplets.push_back({std::uint16_t(s), std::uint16_t(t), static_cast<std::uint32_t>(c)});
      }
    }
  }
  return assemble(h, columns, triplets);
}

Header read_header(std::span<const std::uint8_t> bytes) { return parse(bytes).header; }

std::vector<ColumnDescriptor> read_descriptors(std::span<const std::uint8_t> bytes) {
  return parse(bytes).columns;
}

namespace {

template <class Set>
void read_triplets(std::span<const std::uint8_t> in, const Parsed& p, Set&& set) {
  std::uint32_t prev = 0;
  for (std::size_t k = 0; k < p.header.triplet_count; ++k) {
    const std::size_t at = p.triplets_at + k * kTripletSize;
    const auto s = get<std::uint16_t>(in, at);
    const auto t = get<std::uint16_t>(in, at + 2);
    if (s >= p.header.area_count || t >= p.header.area_count) bad("triplet names an unknown area");
    const std::uint32_t cell = std::uint32_t(s) * p.header.area_count + t;
    if (k > 0 && cell <= prev) bad("triplets are not in ascending (src, dst) order");
    prev = cell;
    set(s, t, get<std::uint32_t>(in, at + 4));
  }
}

}  // namespace

TimestepFrame decode_frame(std::span<const std::uint8_t> bytes) {
  const Parsed p = parse(bytes);
  if (p.header.kind != Kind::frame) bad("expected a frame, got a diff");
  if (!(p.header.base == p.header.other)) bad("frame names two different keys");
  const std::size_t n = p.header.neuron_count;
  TimestepFrame f;
  f.key = p.header.base;
  f.connectivity_missing = (p.header.flags & kFlagConnectivityMissing) != 0;
  read_column(bytes, find(p, NeuronProperty::calcium), n, f.calcium);
  read_column(bytes, find(p, NeuronProperty::calcium_target_delta), n, f.calcium_target_delta);
  read_column(bytes, find(p, NeuronProperty::fired), n, f.fired);
  read_column(bytes, find(p, NeuronProperty::fired_fraction), n, f.fired_fraction);
  read_column(bytes, find(p, NeuronProperty::grown_axons), n, f.grown_axons);
  read_column(bytes, find(p, NeuronProperty::grown_dendrites), n, f.grown_dendrites);
  read_column(bytes, find(p, NeuronProperty::synapses_out), n, f.synapses_out);
  read_column(bytes, find(p, NeuronProperty::synapses_in), n, f.synapses_in);
  f.connectivity = AreaConnectivity(p.header.area_count);
  read_triplets(bytes, p, [&](std::uint16_t s, std::uint16_t t, std::uint32_t v) {
    if (v == 0) bad("zero count in triplet list");
    f.connectivity.at(s, t) = v;
  });
  try {
    f.validate();
  } catch (const Error& e) {
    bad(e.what());
  }
  return f;
}

DiffFrame decode_diff(std::span<const std::uint8_t> bytes) {
  const Parsed p = parse(bytes);
  if (p.header.kind != Kind::diff) bad("expected a diff, got a frame");
  const std::size_t n = p.header.neuron_count;
  DiffFrame d;
  d.base = p.header.base;
  d.other = p.header.other;
  read_column(bytes, find(p, NeuronProperty::calcium), n, d.calcium);
  read_column(bytes, find(p, NeuronProperty::calcium_target_delta), n, d.calcium_target_delta);
  read_column(bytes, find(p, NeuronProperty::fired), n, d.fired);
  read_column(bytes, find(p, NeuronProperty::fired_fraction), n, d.fired_fraction);
  read_column(bytes, find(p, NeuronProperty::grown_axons), n, d.grown_axons);
  read_column(bytes, find(p, NeuronProperty::grown_dendrites), n, d.grown_dendrites);
  read_column(bytes, find(p, NeuronProperty::synapses_out), n, d.synapses_out);
  read_column(bytes, find(p, NeuronProperty::synapses_in), n, d.synapses_in);
  d.area_count = p.header.area_count;
  d.connectivity_delta.assign(d.area_count * d.area_count, 0);
  read_triplets(bytes, p, [&](std::uint16_t s, std::uint16_t t, std::uint32_t v) {
    if (v == 0) bad("zero delta in triplet list");
    d.connectivity_delta[std::size_t(s) * d.area_count + t] = static_cast<std::int32_t>(v);
  });
  return d;
}

Bytes encode_positions(const StaticTable& statics) {
  const std::size_t n = statics.neuron_count();
  Bytes out(kPositionsHeaderSize + n * kPositionRecordSize, 0);
  std::copy(kPositionsMagic.begin(), kPositionsMagic.end(), out.begin());
  out[4] = kVersion;
  put<std::uint32_t>(out, 8, static_cast<std::uint32_t>(n));
  put<std::uint16_t>(out, 12, checked_areas(statics.area_count()));
  for (std::size_t i = 0; i < n; ++i) {
    const NeuronStatic& s = statics.neurons()[i];
    const std::size_t at = kPositionsHeaderSize + i * kPositionRecordSize;
    put(out, at, s.neuron_id);
    put(out, at + 4, s.position.x);
    put(out, at + 8, s.position.y);
    put(out, at + 12, s.position.z);
    put(out, at + 16, s.cluster_id);
    out[at + 20] = s.cluster_slot;
    put(out, at + 22, s.area_id);
  }
  return out;
}

std::vector<NeuronStatic> decode_positions(std::span<const std::uint8_t> in) {
  if (in.size() < kPositionsHeaderSize) bad("shorter than its header");
  if (!std::equal(kPositionsMagic.begin(), kPositionsMagic.end(), in.begin())) bad("magic is not PLSP");
  if (in[4] != kVersion) bad("unsupported version " + std::to_string(in[4]));
  const std::size_t n = get<std::uint32_t>(in, 8);
  const std::size_t areas = get<std::uint16_t>(in, 12);
  if (in.size() != kPositionsHeaderSize + n * kPositionRecordSize) bad("size does not match neuron count");
  std::vector<NeuronStatic> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t at = kPositionsHeaderSize + i * kPositionRecordSize;
    NeuronStatic& s = out[i];
    s.neuron_id = get<std::uint32_t>(in, at);
    s.position = {get<float>(in, at + 4), get<float>(in, at + 8), get<float>(in, at + 12)};
    s.cluster_id = get<std::uint32_t>(in, at + 16);
    s.cluster_slot = in[at + 20];
    s.area_id = get<std::uint16_t>(in, at + 22);
    if (s.area_id >= areas) bad("record " + std::to_string(i) + " names an unknown area");
  }
  return out;
}

}  // namespace plastiscope::payload
