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

#include "plastiscope/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <set>

namespace plastiscope {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::bounds: return "bounds";
    case ErrorCode::format: return "format";
    case ErrorCode::validation: return "validation";
    case ErrorCode::inconsistency: return "inconsistency";
    case ErrorCode::io: return "io";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::schema: return "schema";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::domain: return "domain";
  }
  return "unknown";
}

std::string_view scenario_id(Scenario s) noexcept {
  switch (s) {
    case Scenario::no_initial_connectivity: return "no_initial_connectivity";
    case Scenario::learning: return "learning";
    case Scenario::injury: return "injury";
    case Scenario::calcium_targets: return "calcium_targets";
  }
  return "";
}

std::string_view scenario_display_name(Scenario s) noexcept {
  switch (s) {
    case Scenario::no_initial_connectivity: return "No initial connectivity";
    case Scenario::learning: return "Learning";
    case Scenario::injury: return "Injury";
    case Scenario::calcium_targets: return "Per-neuron calcium targets";
  }
  return "";
}

std::optional<Scenario> parse_scenario(std::string_view id) noexcept {
  for (Scenario s : kAllScenarios) {
    if (scenario_id(s) == id) return s;
  }
  return std::nullopt;
}

std::string_view property_name(NeuronProperty p) noexcept {
  switch (p) {
    case NeuronProperty::area: return "area";
    case NeuronProperty::calcium: return "calcium";
    case NeuronProperty::calcium_target_delta: return "calcium_target_delta";
    case NeuronProperty::fired: return "fired";
    case NeuronProperty::fired_fraction: return "fired_fraction";
    case NeuronProperty::grown_axons: return "grown_axons";
    case NeuronProperty::grown_dendrites: return "grown_dendrites";
    case NeuronProperty::synapses_out: return "synapses_out";
    case NeuronProperty::synapses_in: return "synapses_in";
  }
  return "";
}

std::optional<NeuronProperty> parse_property(std::string_view name) noexcept {
  for (NeuronProperty p : kAllProperties) {
    if (property_name(p) == name) return p;
  }
  return std::nullopt;
}

StaticTable::StaticTable(std::vector<NeuronStatic> neurons,
                         std::vector<std::string> area_names)
    : neurons_(std::move(neurons)), area_names_(std::move(area_names)) {
  if (neurons_.size() % kClusterSize != 0) {
    fail(ErrorCode::validation,
         "neuron count " + std::to_string(neurons_.size()) +
             " is not a multiple of the cluster size");
  }
  if (area_names_.size() > 0xFFFF) {
    fail(ErrorCode::validation, "too many areas");
  }
  area_ids_.reserve(neurons_.size());
  for (std::size_t i = 0; i < neurons_.size(); ++i) {
    const NeuronStatic& n = neurons_[i];
    if (n.neuron_id != i) {
      fail(ErrorCode::validation,
           "neuron ids must be dense and sorted; found " +
               std::to_string(n.neuron_id) + " at index " + std::to_string(i));
    }
    if (n.cluster_id != i / kClusterSize || n.cluster_slot != i % kClusterSize) {
      fail(ErrorCode::validation,
           "neuron " + std::to_string(i) + " has an inconsistent cluster slot");
    }
    if (n.area_id >= area_names_.size()) {
      fail(ErrorCode::validation,
           "neuron " + std::to_string(i) + " references unknown area " +
               std::to_string(n.area_id));
    }
    if (n.cluster_slot != 0 && n.area_id != neurons_[i - 1].area_id) {
      fail(ErrorCode::validation,
           "cluster " + std::to_string(n.cluster_id) + " spans several areas");
    }
    area_ids_.push_back(n.area_id);
  }
}

const NeuronStatic& StaticTable::neuron(std::size_t i) const {
  if (i >= neurons_.size()) {
    fail(ErrorCode::bounds, "neuron index " + std::to_string(i) +
                                " out of range (N=" +
                                std::to_string(neurons_.size()) + ")");
  }
  return neurons_[i];
}

double StaticTable::max_cluster_extent() const {
  double extent = 0;
  for (std::size_t base = 0; base < neurons_.size(); base += kClusterSize) {
    for (std::size_t a = base; a < base + kClusterSize; ++a) {
      for (std::size_t b = a + 1; b < base + kClusterSize; ++b) {
        const Vec3& p = neurons_[a].position;
        const Vec3& q = neurons_[b].position;
        double dx = double(p.x) - q.x, dy = double(p.y) - q.y,
               dz = double(p.z) - q.z;
        extent = std::max(extent, std::sqrt(dx * dx + dy * dy + dz * dz));
      }
    }
  }
  return extent;
}

AreaConnectivity::AreaConnectivity(std::size_t area_count,
                                   std::vector<std::uint32_t> counts)
    : area_count_(area_count), counts_(std::move(counts)) {
  if (counts_.size() != area_count_ * area_count_) {
    fail(ErrorCode::validation, "connectivity matrix is not square");
  }
}

std::uint64_t AreaConnectivity::total() const noexcept {
  std::uint64_t sum = 0;
  for (std::uint32_t c : counts_) sum += c;
  return sum;
}

std::size_t AreaConnectivity::nonzero_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(counts_.begin(), counts_.end(),
                    [](std::uint32_t c) { return c != 0; }));
}

std::string to_string(const FrameKey& key) {
  return std::string(scenario_id(key.scenario)) + "@" +
         std::to_string(key.timestep);
}

void TimestepFrame::resize(std::size_t n) {
  calcium.resize(n);
  calcium_target_delta.resize(n);
  fired.resize(n);
  fired_fraction.resize(n);
  grown_axons.resize(n);
  grown_dendrites.resize(n);
  synapses_out.resize(n);
  synapses_in.resize(n);
}

void TimestepFrame::validate() const {
  const std::size_t n = calcium.size();
  if (calcium_target_delta.size() != n || fired.size() != n ||
      fired_fraction.size() != n || grown_axons.size() != n ||
      grown_dendrites.size() != n || synapses_out.size() != n ||
      synapses_in.size() != n) {
    fail(ErrorCode::validation, "frame " + to_string(key) + " has ragged columns");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (fired[i] > 1) {
      fail(ErrorCode::validation, "fired flag of neuron " + std::to_string(i) +
                                      " is not 0/1 in " + to_string(key));
    }
    if (!(fired_fraction[i] >= 0.0f && fired_fraction[i] <= 1.0f)) {
      fail(ErrorCode::validation, "fired_fraction of neuron " +
                                      std::to_string(i) + " outside [0,1] in " +
                                      to_string(key));
    }
  }
}

namespace {

template <class T>
bool same_bits(const std::vector<T>& a, const std::vector<T>& b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0);
}

template <class T>
std::span<const T> checked_index(std::span<const T> s, std::size_t i) {
  if (i >= s.size()) {
    fail(ErrorCode::bounds, "neuron index " + std::to_string(i) +
                                " out of range (N=" + std::to_string(s.size()) +
                                ")");
  }
  return s;
}

}  // namespace

bool operator==(const TimestepFrame& a, const TimestepFrame& b) {
  return a.key == b.key && a.connectivity_missing == b.connectivity_missing &&
         same_bits(a.calcium, b.calcium) &&
         same_bits(a.calcium_target_delta, b.calcium_target_delta) &&
         same_bits(a.fired, b.fired) &&
         same_bits(a.fired_fraction, b.fired_fraction) &&
         same_bits(a.grown_axons, b.grown_axons) &&
         same_bits(a.grown_dendrites, b.grown_dendrites) &&
         same_bits(a.synapses_out, b.synapses_out) &&
         same_bits(a.synapses_in, b.synapses_in) &&
         a.connectivity == b.connectivity;
}

bool operator==(const DiffFrame& a, const DiffFrame& b) {
  return a.base == b.base && a.other == b.other &&
         a.area_count == b.area_count && same_bits(a.calcium, b.calcium) &&
         same_bits(a.calcium_target_delta, b.calcium_target_delta) &&
         same_bits(a.fired, b.fired) &&
         same_bits(a.fired_fraction, b.fired_fraction) &&
         same_bits(a.grown_axons, b.grown_axons) &&
         same_bits(a.grown_dendrites, b.grown_dendrites) &&
         same_bits(a.synapses_out, b.synapses_out) &&
         same_bits(a.synapses_in, b.synapses_in) &&
         a.connectivity_delta == b.connectivity_delta;
}

std::size_t column_size(const ColumnView& column) noexcept {
  return std::visit([](auto s) { return s.size(); }, column);
}

ColumnView frame_column(const TimestepFrame& frame, const StaticTable& statics,
                        NeuronProperty p) {
  switch (p) {
    case NeuronProperty::area: return statics.area_column();
    case NeuronProperty::calcium: return std::span<const float>(frame.calcium);
    case NeuronProperty::calcium_target_delta:
      return std::span<const float>(frame.calcium_target_delta);
    case NeuronProperty::fired: return std::span<const std::uint8_t>(frame.fired);
    case NeuronProperty::fired_fraction:
      return std::span<const float>(frame.fired_fraction);
    case NeuronProperty::grown_axons:
      return std::span<const float>(frame.grown_axons);
    case NeuronProperty::grown_dendrites:
      return std::span<const float>(frame.grown_dendrites);
    case NeuronProperty::synapses_out:
      return std::span<const std::uint32_t>(frame.synapses_out);
    case NeuronProperty::synapses_in:
      return std::span<const std::uint32_t>(frame.synapses_in);
  }
  fail(ErrorCode::domain, "unknown property");
}

double property_value(const TimestepFrame& frame, const StaticTable& statics,
                      NeuronProperty p, std::size_t neuron) {
  ColumnView column = frame_column(frame, statics, p);
  return std::visit(
      [neuron](auto s) -> double { return checked_index(s, neuron)[neuron]; },
      column);
}

ColumnView diff_column(const DiffFrame& diff, NeuronProperty p) {
  switch (p) {
    case NeuronProperty::area:
      fail(ErrorCode::domain, "area has no difference column");
    case NeuronProperty::calcium: return std::span<const float>(diff.calcium);
    case NeuronProperty::calcium_target_delta:
      return std::span<const float>(diff.calcium_target_delta);
    case NeuronProperty::fired: return std::span<const std::int8_t>(diff.fired);
    case NeuronProperty::fired_fraction:
      return std::span<const float>(diff.fired_fraction);
    case NeuronProperty::grown_axons:
      return std::span<const float>(diff.grown_axons);
    case NeuronProperty::grown_dendrites:
      return std::span<const float>(diff.grown_dendrites);
    case NeuronProperty::synapses_out:
      return std::span<const std::int32_t>(diff.synapses_out);
    case NeuronProperty::synapses_in:
      return std::span<const std::int32_t>(diff.synapses_in);
  }
  fail(ErrorCode::domain, "unknown property");
}

bool ScenarioEntry::has_timestep(std::uint32_t t) const noexcept {
  return std::binary_search(timesteps.begin(), timesteps.end(), t);
}

const ScenarioEntry* ScenarioCatalog::find(Scenario s) const noexcept {
  for (const ScenarioEntry& e : scenarios) {
    if (e.id == s) return &e;
  }
  return nullptr;
}

bool ScenarioCatalog::contains(const FrameKey& key) const noexcept {
  const ScenarioEntry* e = find(key.scenario);
  return e != nullptr && e->has_timestep(key.timestep);
}

void ScenarioCatalog::validate() const {
  std::set<Scenario> seen;
  for (const ScenarioEntry& e : scenarios) {
    if (!seen.insert(e.id).second) {
      fail(ErrorCode::validation,
           "duplicate scenario id " + std::string(scenario_id(e.id)));
    }
    if (!std::is_sorted(e.timesteps.begin(), e.timesteps.end()) ||
        std::adjacent_find(e.timesteps.begin(), e.timesteps.end()) !=
            e.timesteps.end()) {
      fail(ErrorCode::validation, "timesteps of " +
                                      std::string(scenario_id(e.id)) +
                                      " are not strictly ascending");
    }
    for (const auto& [p, r] : e.global_ranges) {
      if (!(r.min <= r.max)) {
        fail(ErrorCode::validation,
             "range for " + std::string(property_name(p)) + " has min > max");
      }
    }
  }
}

}  // namespace plastiscope
