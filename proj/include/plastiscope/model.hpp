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

// Domain types shared by the pipeline, the data service and the
// collaboration server. Nothing in here performs I/O.

#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "plastiscope/error.hpp"

namespace plastiscope {

// Neurons are generated in groups of ten around one measured location.
inline constexpr std::uint32_t kClusterSize = 10;

// Trailing window (in recorded output steps) for fired_fraction.
inline constexpr std::uint32_t kFiredWindow = 100;

enum class Scenario : std::uint8_t {
  no_initial_connectivity = 0,
  learning = 1,
  injury = 2,
  calcium_targets = 3,
};

inline constexpr std::array<Scenario, 4> kAllScenarios = {
    Scenario::no_initial_connectivity, Scenario::learning, Scenario::injury,
    Scenario::calcium_targets};

std::string_view scenario_id(Scenario s) noexcept;
std::string_view scenario_display_name(Scenario s) noexcept;
std::optional<Scenario> parse_scenario(std::string_view id) noexcept;

enum class NeuronProperty : std::uint8_t {
  area = 0,
  calcium,
  calcium_target_delta,
  fired,
  fired_fraction,
  grown_axons,
  grown_dendrites,
  synapses_out,
  synapses_in,
};

inline constexpr std::array<NeuronProperty, 9> kAllProperties = {
    NeuronProperty::area,           NeuronProperty::calcium,
    NeuronProperty::calcium_target_delta, NeuronProperty::fired,
    NeuronProperty::fired_fraction, NeuronProperty::grown_axons,
    NeuronProperty::grown_dendrites, NeuronProperty::synapses_out,
    NeuronProperty::synapses_in};

// Properties that live in a frame column (area comes from static data).
inline constexpr std::array<NeuronProperty, 8> kFrameProperties = {
    NeuronProperty::calcium,        NeuronProperty::calcium_target_delta,
    NeuronProperty::fired,          NeuronProperty::fired_fraction,
    NeuronProperty::grown_axons,    NeuronProperty::grown_dendrites,
    NeuronProperty::synapses_out,   NeuronProperty::synapses_in};

std::string_view property_name(NeuronProperty p) noexcept;
std::optional<NeuronProperty> parse_property(std::string_view name) noexcept;

struct Vec3 {
  float x = 0;
  float y = 0;
  float z = 0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

struct NeuronStatic {
  std::uint32_t neuron_id = 0;
  Vec3 position;  // millimeters
  std::uint32_t cluster_id = 0;
  std::uint8_t cluster_slot = 0;
  std::uint16_t area_id = 0;

  friend bool operator==(const NeuronStatic&, const NeuronStatic&) = default;
};

/// Immutable per-neuron identity plus the area name table.
///
/// Construction enforces the cluster layout: ids are dense, each cluster
/// holds exactly kClusterSize neurons and all of them share one area.
class StaticTable {
 public:
  StaticTable() = default;
  StaticTable(std::vector<NeuronStatic> neurons,
              std::vector<std::string> area_names);

  std::size_t neuron_count() const noexcept { return neurons_.size(); }
  std::size_t cluster_count() const noexcept {
    return neurons_.size() / kClusterSize;
  }
  std::size_t area_count() const noexcept { return area_names_.size(); }

  std::span<const NeuronStatic> neurons() const noexcept { return neurons_; }
  const NeuronStatic& neuron(std::size_t i) const;
  std::span<const std::uint16_t> area_column() const noexcept {
    return area_ids_;
  }
  const std::vector<std::string>& area_names() const noexcept {
    return area_names_;
  }

  // Largest pairwise distance between two neurons of the same cluster.
  double max_cluster_extent() const;

  friend bool operator==(const StaticTable& a, const StaticTable& b) {
    return a.neurons_ == b.neurons_ && a.area_names_ == b.area_names_;
  }

 private:
  std::vector<NeuronStatic> neurons_;
  std::vector<std::uint16_t> area_ids_;
  std::vector<std::string> area_names_;
};

struct PropertyRange {
  double min = 0;
  double max = 0;

  bool contains(const PropertyRange& other) const noexcept {
    return min <= other.min && other.max <= max;
  }
  friend bool operator==(const PropertyRange&, const PropertyRange&) = default;
};

/// Dense A x A synapse counts; entry (s, t) counts synapses whose source
/// neuron is in area s and whose target neuron is in area t.
class AreaConnectivity {
 public:
  AreaConnectivity() = default;
  explicit AreaConnectivity(std::size_t area_count)
      : area_count_(area_count), counts_(area_count * area_count, 0) {}
  AreaConnectivity(std::size_t area_count, std::vector<std::uint32_t> counts);

  std::size_t area_count() const noexcept { return area_count_; }
  std::uint32_t at(std::size_t src, std::size_t dst) const {
    return counts_.at(src * area_count_ + dst);
  }
  std::uint32_t& at(std::size_t src, std::size_t dst) {
    return counts_.at(src * area_count_ + dst);
  }
  std::span<const std::uint32_t> counts() const noexcept { return counts_; }
  std::span<std::uint32_t> counts() noexcept { return counts_; }
  std::uint64_t total() const noexcept;
  std::size_t nonzero_count() const noexcept;

  friend bool operator==(const AreaConnectivity&,
                         const AreaConnectivity&) = default;

 private:
  std::size_t area_count_ = 0;
  std::vector<std::uint32_t> counts_;
};

struct FrameKey {
  Scenario scenario = Scenario::learning;
  std::uint32_t timestep = 0;

  friend auto operator<=>(const FrameKey&, const FrameKey&) = default;
};

std::string to_string(const FrameKey& key);

/// Column-major snapshot of every per-neuron property at one output step.
struct TimestepFrame {
  FrameKey key;
  std::vector<float> calcium;
  std::vector<float> calcium_target_delta;  // calcium - target, signed
  std::vector<std::uint8_t> fired;          // 0 or 1
  std::vector<float> fired_fraction;
  std::vector<float> grown_axons;
  std::vector<float> grown_dendrites;
  std::vector<std::uint32_t> synapses_out;
  std::vector<std::uint32_t> synapses_in;
  AreaConnectivity connectivity;
  // Set when the network file for this step was absent at ingest time.
  bool connectivity_missing = false;

  std::size_t neuron_count() const noexcept { return calcium.size(); }
  void resize(std::size_t n);

  // Throws validation errors for ragged columns or out-of-domain values.
  void validate() const;

  // Bitwise comparison of every column; -0.0f and 0.0f differ, NaNs with
  // the same payload compare equal.
  friend bool operator==(const TimestepFrame& a, const TimestepFrame& b);
};

using ColumnView =
    std::variant<std::span<const float>, std::span<const std::uint32_t>,
                 std::span<const std::uint16_t>, std::span<const std::uint8_t>,
                 std::span<const std::int32_t>, std::span<const std::int8_t>>;

std::size_t column_size(const ColumnView& column) noexcept;

// Column for p; area resolves to the static area column.
ColumnView frame_column(const TimestepFrame& frame, const StaticTable& statics,
                        NeuronProperty p);

double property_value(const TimestepFrame& frame, const StaticTable& statics,
                      NeuronProperty p, std::size_t neuron);

/// Signed per-neuron and per-area-pair deltas: other - base.
struct DiffFrame {
  FrameKey base;
  FrameKey other;
  std::vector<float> calcium;
  std::vector<float> calcium_target_delta;
  std::vector<std::int8_t> fired;
  std::vector<float> fired_fraction;
  std::vector<float> grown_axons;
  std::vector<float> grown_dendrites;
  std::vector<std::int32_t> synapses_out;
  std::vector<std::int32_t> synapses_in;
  std::size_t area_count = 0;
  std::vector<std::int32_t> connectivity_delta;  // row-major A x A

  std::size_t neuron_count() const noexcept { return calcium.size(); }
  std::int32_t connectivity_at(std::size_t src, std::size_t dst) const {
    return connectivity_delta.at(src * area_count + dst);
  }

  friend bool operator==(const DiffFrame& a, const DiffFrame& b);
};

// Column for p; area has no delta and raises a domain error.
ColumnView diff_column(const DiffFrame& diff, NeuronProperty p);

struct ScenarioEntry {
  Scenario id = Scenario::learning;
  std::string display_name;
  std::vector<std::uint32_t> timesteps;  // ascending
  std::map<NeuronProperty, PropertyRange> global_ranges;

  bool has_timestep(std::uint32_t t) const noexcept;
  friend bool operator==(const ScenarioEntry&, const ScenarioEntry&) = default;
};

struct ScenarioCatalog {
  std::vector<ScenarioEntry> scenarios;
  std::uint32_t neuron_count = 0;
  std::vector<std::string> area_table;

  const ScenarioEntry* find(Scenario s) const noexcept;
  bool contains(const FrameKey& key) const noexcept;
  void validate() const;

  friend bool operator==(const ScenarioCatalog&,
                         const ScenarioCatalog&) = default;
};

}  // namespace plastiscope
