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

#include "plastiscope/store.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <thread>

#include <unistd.h>

#include "plastiscope/parquet/file.hpp"

namespace plastiscope::store {

namespace {

using parquet::ColumnType;
using parquet::Table;

std::string padded(std::uint32_t t) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06u", t);
  return buf;
}

struct Field {
  const char* name;
  ColumnType type;
};

constexpr Field kNeuronSchema[] = {
    {"neuron_id", ColumnType::uint32},      {"calcium", ColumnType::float32},
    {"calcium_target_delta", ColumnType::float32}, {"fired", ColumnType::boolean},
    {"fired_fraction", ColumnType::float32}, {"grown_axons", ColumnType::float32},
    {"grown_dendrites", ColumnType::float32}, {"synapses_in", ColumnType::uint32},
    {"synapses_out", ColumnType::uint32},
};

constexpr Field kConnectivitySchema[] = {
    {"src_area", ColumnType::uint16},
    {"dst_area", ColumnType::uint16},
    {"count", ColumnType::uint32},
};

constexpr Field kStaticSchema[] = {
    {"neuron_id", ColumnType::uint32}, {"x", ColumnType::float32},
    {"y", ColumnType::float32},        {"z", ColumnType::float32},
    {"cluster_id", ColumnType::uint32}, {"cluster_slot", ColumnType::uint16},
    {"area_id", ColumnType::uint16},
};

template <std::size_t K>
void check_schema(const std::vector<parquet::ColumnInfo>& columns,
                  const Field (&schema)[K], ErrorCode code, const fs::path& path) {
  bool same = columns.size() == K;
  for (std::size_t i = 0; same && i < K; ++i) {
    same = columns[i].name == schema[i].name && columns[i].type == schema[i].type;
  }
  if (!same) {
    std::string got;
    for (const auto& c : columns) {
      got += (got.empty() ? "" : ", ") + c.name + ":" + std::string(parquet::to_string(c.type));
    }
    fail(code, path.string() + " has schema {" + got + "}");
  }
}

template <std::size_t K>
void check_schema(const Table& t, const Field (&schema)[K], const fs::path& path) {
  std::vector<parquet::ColumnInfo> info;
  for (const auto& c : t.columns) info.push_back({c.name, c.type, {}, {}, 0, 0});
  check_schema(info, schema, ErrorCode::schema, path);
}

// Refuses to replace a file that holds a different schema.
template <std::size_t K>
void guard_overwrite(const fs::path& path, const Field (&schema)[K]) {
  if (!fs::exists(path)) return;
  parquet::FileInfo info;
  try {
    info = parquet::inspect(read_file(path));
  } catch (const Error& e) {
    fail(ErrorCode::conflict, "refusing to overwrite " + path.string() + ": " + e.what());
  }
  try {
    check_schema(info.columns, schema, ErrorCode::conflict, path);
  } catch (const Error& e) {
    fail(ErrorCode::conflict, std::string("refusing to overwrite: ") + e.what());
  }
}

std::string required_metadata(const Table& t, const char* key, const fs::path& path) {
  const std::string* v = t.metadata_value(key);
  if (v == nullptr) fail(ErrorCode::schema, path.string() + " lacks metadata key " + key);
  return *v;
}

std::uint64_t parse_count(const std::string& s, const char* what) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) fail(ErrorCode::format, std::string("bad ") + what + " '" + s + "'");
  return v;
}

std::vector<std::uint8_t> encode(const Table& t) { return parquet::write_table(t); }

}  // namespace

FrameLocator locate(const fs::path& root, const FrameKey& key) {
  const fs::path dir = root / std::string(scenario_id(key.scenario));
  return FrameLocator{key, dir / ("frame_" + padded(key.timestep) + ".parquet"),
                      dir / ("conn_" + padded(key.timestep) + ".parquet")};
}

std::vector<std::uint8_t> encode_neuron_file(const TimestepFrame& f) {
  const std::size_t n = f.neuron_count();
  std::vector<std::uint32_t> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<std::uint32_t>(i);
  Table t;
  t.columns = {
      parquet::make_column("neuron_id", std::move(ids)),
      parquet::make_column("calcium", f.calcium),
      parquet::make_column("calcium_target_delta", f.calcium_target_delta),
      parquet::make_column("fired", f.fired),
      parquet::make_column("fired_fraction", f.fired_fraction),
      parquet::make_column("grown_axons", f.grown_axons),
      parquet::make_column("grown_dendrites", f.grown_dendrites),
      parquet::make_column("synapses_in", f.synapses_in),
      parquet::make_column("synapses_out", f.synapses_out),
  };
  t.metadata = {{"scenario", std::string(scenario_id(f.key.scenario))},
                {"timestep", std::to_string(f.key.timestep)}};
  return encode(t);
}

std::vector<std::uint8_t> encode_connectivity_file(const TimestepFrame& f) {
  const std::size_t a = f.connectivity.area_count();
  std::vector<std::uint16_t> src, dst;
  std::vector<std::uint32_t> count;
  for (std::size_t s = 0; s < a; ++s) {
    for (std::size_t d = 0; d < a; ++d) {
      if (std::uint32_t c = f.connectivity.at(s, d)) {
        src.push_back(static_cast<std::uint16_t>(s));
        dst.push_back(static_cast<std::uint16_t>(d));
        count.push_back(c);
      }
    }
  }
  Table t;
  t.columns = {parquet::make_column("src_area", std::move(src)),
               parquet::make_column("dst_area", std::move(dst)),
               parquet::make_column("count", std::move(count))};
  t.metadata = {{"scenario", std::string(scenario_id(f.key.scenario))},
                {"timestep", std::to_string(f.key.timestep)},
                {"area_count", std::to_string(a)},
                {"connectivity", f.connectivity_missing ? "missing" : "present"}};
  return encode(t);
}

FrameLocator write_frame(const TimestepFrame& frame, const fs::path& root) {
  frame.validate();
  if (frame.connectivity.area_count() > 0xFFFF) {
    fail(ErrorCode::validation, "too many areas for a u16 area id");
  }
  const FrameLocator loc = locate(root, frame.key);
  guard_overwrite(loc.neuron_file, kNeuronSchema);
  guard_overwrite(loc.connectivity_file, kConnectivitySchema);
  write_file_atomic(loc.neuron_file, encode_neuron_file(frame));
  write_file_atomic(loc.connectivity_file, encode_connectivity_file(frame));
  return loc;
}

std::uintmax_t stored_size(const FrameLocator& loc) {
  std::error_code ec1, ec2;
  const auto a = fs::file_size(loc.neuron_file, ec1);
  const auto b = fs::file_size(loc.connectivity_file, ec2);
  if (ec1 || ec2) fail(ErrorCode::not_found, "frame " + to_string(loc.key) + " is not stored");
  return a + b;
}

TimestepFrame decode_frame(const FrameKey& key, std::span<const std::uint8_t> neuron_bytes,
                           std::span<const std::uint8_t> connectivity_bytes) {
  const FrameLocator names = locate("", key);
  const Table nt = parquet::read_table(neuron_bytes);
  check_schema(nt, kNeuronSchema, names.neuron_file);
  const Table ct = parquet::read_table(connectivity_bytes);
  check_schema(ct, kConnectivitySchema, names.connectivity_file);

  for (const Table* t : {&nt, &ct}) {
    const std::string scenario = required_metadata(*t, "scenario", names.neuron_file);
    const std::string timestep = required_metadata(*t, "timestep", names.neuron_file);
    if (scenario != scenario_id(key.scenario) || parse_count(timestep, "timestep") != key.timestep) {
      fail(ErrorCode::format, "file holds frame " + scenario + "@" + timestep +
                                  ", expected " + to_string(key));
    }
  }

  TimestepFrame f;
  f.key = key;
  const auto& ids = nt.values<std::uint32_t>("neuron_id");
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] != i) fail(ErrorCode::format, "neuron ids are not dense at row " + std::to_string(i));
  }
  f.calcium = nt.values<float>("calcium");
  f.calcium_target_delta = nt.values<float>("calcium_target_delta");
  f.fired = nt.values<std::uint8_t>("fired");
  f.fired_fraction = nt.values<float>("fired_fraction");
  f.grown_axons = nt.values<float>("grown_axons");
  f.grown_dendrites = nt.values<float>("grown_dendrites");
  f.synapses_in = nt.values<std::uint32_t>("synapses_in");
  f.synapses_out = nt.values<std::uint32_t>("synapses_out");

  const auto areas = parse_count(required_metadata(ct, "area_count", names.connectivity_file), "area_count");
  if (areas > 0xFFFF + 1ull) fail(ErrorCode::format, "area_count out of range");
  const std::string marker = required_metadata(ct, "connectivity", names.connectivity_file);
  if (marker != "present" && marker != "missing") {
    fail(ErrorCode::format, "unknown connectivity marker '" + marker + "'");
  }
  f.connectivity_missing = marker == "missing";
  f.connectivity = AreaConnectivity(static_cast<std::size_t>(areas));
  const auto& src = ct.values<std::uint16_t>("src_area");
  const auto& dst = ct.values<std::uint16_t>("dst_area");
  const auto& count = ct.values<std::uint32_t>("count");
  for (std::size_t r = 0; r < src.size(); ++r) {
    if (src[r] >= areas || dst[r] >= areas) {
      fail(ErrorCode::format, "connectivity row " + std::to_string(r) + " names an unknown area");
    }
    f.connectivity.at(src[r], dst[r]) = count[r];
  }
  f.validate();
  return f;
}

TimestepFrame read_frame(const FrameLocator& loc) {
  if (!fs::exists(loc.neuron_file) || !fs::exists(loc.connectivity_file)) {
    fail(ErrorCode::not_found, "frame " + to_string(loc.key) + " is not stored");
  }
  return decode_frame(loc.key, read_file(loc.neuron_file), read_file(loc.connectivity_file));
}

TimestepFrame read_frame(const fs::path& root, const FrameKey& key) {
  return read_frame(locate(root, key));
}

fs::path static_path(const fs::path& root) { return root / "static.parquet"; }

void write_static(const StaticTable& statics, const fs::path& root) {
  const std::size_t n = statics.neuron_count();
  std::vector<std::uint32_t> ids(n), clusters(n);
  std::vector<float> x(n), y(n), z(n);
  std::vector<std::uint16_t> slots(n), areas(n);
  for (std::size_t i = 0; i < n; ++i) {
    const NeuronStatic& s = statics.neurons()[i];
    ids[i] = s.neuron_id;
    x[i] = s.position.x;
    y[i] = s.position.y;
    z[i] = s.position.z;
    clusters[i] = s.cluster_id;
    slots[i] = s.cluster_slot;
    areas[i] = s.area_id;
  }
  Table t;
  t.columns = {parquet::make_column("neuron_id", std::move(ids)),
               parquet::make_column("x", std::move(x)),
               parquet::make_column("y", std::move(y)),
               parquet::make_column("z", std::move(z)),
               parquet::make_column("cluster_id", std::move(clusters)),
               parquet::make_column("cluster_slot", std::move(slots)),
               parquet::make_column("area_id", std::move(areas))};
  t.metadata = {{"area_names", nlohmann::json(statics.area_names()).dump()}};
  const fs::path path = static_path(root);
  guard_overwrite(path, kStaticSchema);
  write_file_atomic(path, encode(t));
}

StaticTable read_static(const fs::path& root) {
  const fs::path path = static_path(root);
  if (!fs::exists(path)) fail(ErrorCode::not_found, path.string() + " does not exist");
  const Table t = parquet::read_table(read_file(path));
  check_schema(t, kStaticSchema, path);
  std::vector<std::string> names;
  try {
    names = nlohmann::json::parse(required_metadata(t, "area_names", path)).get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::format, path.string() + ": bad area_names: " + e.what());
  }
  const auto& ids = t.values<std::uint32_t>("neuron_id");
  const auto& x = t.values<float>("x");
  const auto& y = t.values<float>("y");
  const auto& z = t.values<float>("z");
  const auto& clusters = t.values<std::uint32_t>("cluster_id");
  const auto& slots = t.values<std::uint16_t>("cluster_slot");
  const auto& areas = t.values<std::uint16_t>("area_id");
  std::vector<NeuronStatic> neurons(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (slots[i] >= kClusterSize) fail(ErrorCode::format, "cluster slot out of range");
    neurons[i] = NeuronStatic{ids[i], Vec3{x[i], y[i], z[i]}, clusters[i],
                              static_cast<std::uint8_t>(slots[i]), areas[i]};
  }
  return StaticTable(std::move(neurons), std::move(names));
}

fs::path catalog_path(const fs::path& root) { return root / "catalog.json"; }

nlohmann::json catalog_to_json(const ScenarioCatalog& c) {
  nlohmann::json j;
  j["neuron_count"] = c.neuron_count;
  j["area_table"] = c.area_table;
  j["scenarios"] = nlohmann::json::array();
  j["timesteps"] = nlohmann::json::object();
  j["global_ranges"] = nlohmann::json::object();
  for (const ScenarioEntry& s : c.scenarios) {
    const std::string id(scenario_id(s.id));
    j["scenarios"].push_back({{"id", id}, {"display_name", s.display_name}});
    j["timesteps"][id] = s.timesteps;
    nlohmann::json ranges = nlohmann::json::object();
    for (const auto& [p, r] : s.global_ranges) {
      ranges[std::string(property_name(p))] = {{"min", r.min}, {"max", r.max}};
    }
    j["global_ranges"][id] = std::move(ranges);
  }
  return j;
}

ScenarioCatalog catalog_from_json(const nlohmann::json& j) {
  ScenarioCatalog c;
  try {
    c.neuron_count = j.at("neuron_count").get<std::uint32_t>();
    c.area_table = j.at("area_table").get<std::vector<std::string>>();
    for (const auto& entry : j.at("scenarios")) {
      const std::string id = entry.at("id").get<std::string>();
      auto scenario = parse_scenario(id);
      if (!scenario) fail(ErrorCode::format, "catalog names unknown scenario '" + id + "'");
      ScenarioEntry s;
      s.id = *scenario;
      s.display_name = entry.at("display_name").get<std::string>();
      s.timesteps = j.at("timesteps").at(id).get<std::vector<std::uint32_t>>();
      if (j.contains("global_ranges") && j["global_ranges"].contains(id)) {
        for (const auto& [name, r] : j["global_ranges"][id].items()) {
          auto p = parse_property(name);
          if (!p) fail(ErrorCode::format, "catalog names unknown property '" + name + "'");
          s.global_ranges[*p] = PropertyRange{r.at("min").get<double>(), r.at("max").get<double>()};
        }
      }
      c.scenarios.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::format, std::string("malformed catalog: ") + e.what());
  }
  try {
    c.validate();
  } catch (const Error& e) {
    fail(ErrorCode::format, std::string("malformed catalog: ") + e.what());
  }
  return c;
}

void write_catalog(const ScenarioCatalog& catalog, const fs::path& root) {
  catalog.validate();
  const std::string text = catalog_to_json(catalog).dump(2) + "\n";
  write_file_atomic(catalog_path(root),
                    std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

ScenarioCatalog read_catalog(const fs::path& root) {
  const fs::path path = catalog_path(root);
  if (!fs::exists(path)) fail(ErrorCode::not_found, path.string() + " does not exist");
  const std::vector<std::uint8_t> bytes = read_file(path);
  nlohmann::json j = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::format, path.string() + " is not valid JSON");
  return catalog_from_json(j);
}

void write_file_atomic(const fs::path& path, std::span<const std::uint8_t> bytes) {
  static std::atomic<unsigned> counter{0};
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) fail(ErrorCode::io, "cannot create " + path.parent_path().string() + ": " + ec.message());
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot open " + tmp.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp, ec);
      fail(ErrorCode::io, "short write to " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    fail(ErrorCode::io, "cannot rename into " + path.string() + ": " + ec.message());
  }
}

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (!fs::exists(path)) fail(ErrorCode::not_found, path.string() + " does not exist");
    fail(ErrorCode::io, "cannot open " + path.string());
  }
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) fail(ErrorCode::io, "error reading " + path.string());
  return bytes;
}

}  // namespace plastiscope::store
