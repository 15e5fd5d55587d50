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

#include "plastiscope/aggregate.hpp"

#include <algorithm>

namespace plastiscope::aggregate {

void accumulate_connectivity(std::span<const kernels::Synapse> synapses,
                             const StaticTable& statics, AreaConnectivity& counts,
                             std::size_t first_row) {
  const std::size_t n = statics.neuron_count();
  if (counts.area_count() != statics.area_count()) {
    fail(ErrorCode::validation, "connectivity matrix has " + std::to_string(counts.area_count()) +
                                    " areas, static table " + std::to_string(statics.area_count()));
  }
  for (std::size_t row = 0; row < synapses.size(); ++row) {
    const kernels::Synapse& s = synapses[row];
    if (s.target >= n || s.source >= n) {
      fail(ErrorCode::validation,
           "synapse row " + std::to_string(first_row + row) + " (target " +
               std::to_string(s.target) + ", source " + std::to_string(s.source) +
               ") names a neuron outside 0.." + std::to_string(n == 0 ? 0 : n - 1));
    }
  }
  kernels::count_area_pairs(synapses, statics.area_column(), statics.area_count(),
                            counts.counts());
}

AreaConnectivity aggregate_connectivity(std::span<const kernels::Synapse> synapses,
                                        const StaticTable& statics) {
  AreaConnectivity result(statics.area_count());
  accumulate_connectivity(synapses, statics, result);
  return result;
}

namespace {

PropertyRange range_of(const ColumnView& column, std::string_view what) {
  const kernels::MinMax mm = std::visit([](auto s) { return kernels::min_max(s); }, column);
  if (mm.finite == 0) fail(ErrorCode::domain, "no finite values in " + std::string(what));
  return PropertyRange{mm.min, mm.max};
}

}  // namespace

PropertyRange local_range(const TimestepFrame& frame, NeuronProperty p) {
  if (p == NeuronProperty::area) {
    fail(ErrorCode::domain, "area is categorical and has no value range");
  }
  static const StaticTable kNoStatics;
  return range_of(frame_column(frame, kNoStatics, p),
                  std::string(property_name(p)) + " of " + to_string(frame.key));
}

void RangeAccumulator::add(NeuronProperty p, const PropertyRange& r) {
  auto [it, inserted] = ranges_.try_emplace(p, r);
  if (!inserted) {
    it->second.min = std::min(it->second.min, r.min);
    it->second.max = std::max(it->second.max, r.max);
  }
}

void RangeAccumulator::add(const TimestepFrame& frame) {
  if (frame.neuron_count() == 0) return;
  for (NeuronProperty p : kFrameProperties) {
    try {
      add(p, local_range(frame, p));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::domain) throw;  // column held only NaN/inf
    }
  }
}

PropertyRange global_range(std::span<const TimestepFrame> frames, NeuronProperty p) {
  if (frames.empty()) fail(ErrorCode::domain, "global range over zero frames");
  if (p == NeuronProperty::area) {
    fail(ErrorCode::domain, "area is categorical and has no value range");
  }
  RangeAccumulator acc;
  for (const TimestepFrame& f : frames) acc.add(f);
  if (!acc.has(p)) {
    fail(ErrorCode::domain, "no finite values of " + std::string(property_name(p)));
  }
  return acc.ranges().at(p);
}

DiffFrame diff_frames(const TimestepFrame& base, const TimestepFrame& other) {
  const std::size_t n = base.neuron_count();
  if (other.neuron_count() != n) {
    fail(ErrorCode::validation, "cannot diff " + to_string(base.key) + " (" + std::to_string(n) +
                                    " neurons) against " + to_string(other.key) + " (" +
                                    std::to_string(other.neuron_count()) + " neurons)");
  }
  const std::size_t a = base.connectivity.area_count();
  if (other.connectivity.area_count() != a) {
    fail(ErrorCode::validation, "cannot diff frames with " + std::to_string(a) + " and " +
                                    std::to_string(other.connectivity.area_count()) + " areas");
  }
  base.validate();
  other.validate();

  DiffFrame d;
  d.base = base.key;
  d.other = other.key;
  auto floats = [n](const std::vector<float>& b, const std::vector<float>& o,
                    std::vector<float>& out) {
    out.resize(n);
    kernels::subtract(b, o, out);
  };
  floats(base.calcium, other.calcium, d.calcium);
  floats(base.calcium_target_delta, other.calcium_target_delta, d.calcium_target_delta);
  floats(base.fired_fraction, other.fired_fraction, d.fired_fraction);
  floats(base.grown_axons, other.grown_axons, d.grown_axons);
  floats(base.grown_dendrites, other.grown_dendrites, d.grown_dendrites);
  d.fired.resize(n);
  kernels::subtract(base.fired, other.fired, d.fired);
  auto counts = [n](const std::vector<std::uint32_t>& b, const std::vector<std::uint32_t>& o,
                    std::vector<std::int32_t>& out, const char* what) {
    out.resize(n);
    if (!kernels::subtract(b, o, out)) {
      fail(ErrorCode::validation, std::string(what) + " delta does not fit in 32 bits");
    }
  };
  counts(base.synapses_out, other.synapses_out, d.synapses_out, "synapses_out");
  counts(base.synapses_in, other.synapses_in, d.synapses_in, "synapses_in");

  d.area_count = a;
  d.connectivity_delta.resize(a * a);
  const std::vector<std::uint32_t> zeros(a * a, 0);
  std::span<const std::uint32_t> bc = base.connectivity_missing ? zeros : base.connectivity.counts();
  std::span<const std::uint32_t> oc = other.connectivity_missing ? zeros : other.connectivity.counts();
  if (!kernels::subtract(bc, oc, d.connectivity_delta)) {
    fail(ErrorCode::validation, "connectivity delta does not fit in 32 bits");
  }
  return d;
}

PropertyRange diff_color_scale(const ColumnView& delta) {
  const double m = std::visit(
      [](auto s) -> double {
        using T = typename decltype(s)::element_type;
        if constexpr (std::is_same_v<T, const float> || std::is_same_v<T, const std::int32_t> ||
                      std::is_same_v<T, const std::int8_t>) {
          return kernels::max_abs(s);
        } else {
          // unsigned columns are never deltas, but the scale is still defined
          return kernels::min_max(s).finite == 0 ? 0.0 : kernels::min_max(s).max;
        }
      },
      delta);
  return PropertyRange{m == 0 ? 0.0 : -m, m};
}

Change classify(std::int32_t delta) noexcept {
  return delta > 0 ? Change::gained : delta < 0 ? Change::lost : Change::unchanged;
}

}  // namespace plastiscope::aggregate
