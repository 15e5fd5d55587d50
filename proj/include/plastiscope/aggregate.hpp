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

#pragma once

#include <map>
#include <span>

#include "plastiscope/kernels.hpp"
#include "plastiscope/model.hpp"

namespace plastiscope::aggregate {

// counts[s][t] = synapses whose source lies in area s and target in area t.
// Self-loops land on the diagonal. Error(validation) names the first row
// with an id >= N.
AreaConnectivity aggregate_connectivity(std::span<const kernels::Synapse> synapses,
                                        const StaticTable& statics);

// Adds one batch of a longer synapse stream into counts; first_row is the
// stream position of synapses[0], used in error messages.
void accumulate_connectivity(std::span<const kernels::Synapse> synapses,
                             const StaticTable& statics, AreaConnectivity& counts,
                             std::size_t first_row = 0);

// Exact min/max of a frame column; non-finite values are skipped.
// Error(domain) for the area property or when nothing is left.
PropertyRange local_range(const TimestepFrame& frame, NeuronProperty p);

// Folds local ranges of many frames into global ones.
class RangeAccumulator {
 public:
  void add(const TimestepFrame& frame);
  void add(NeuronProperty p, const PropertyRange& r);

  bool has(NeuronProperty p) const { return ranges_.count(p) != 0; }
  const std::map<NeuronProperty, PropertyRange>& ranges() const noexcept {
    return ranges_;
  }

 private:
  std::map<NeuronProperty, PropertyRange> ranges_;
};

// Error(domain) when frames is empty or holds no finite value.
PropertyRange global_range(std::span<const TimestepFrame> frames, NeuronProperty p);

// other - base, per neuron and per area pair. Frames whose connectivity was
// missing at ingest contribute a zero matrix. Error(validation) on shape
// mismatch or an int32 overflow in count deltas.
DiffFrame diff_frames(const TimestepFrame& base, const TimestepFrame& other);

// (-m, m) with m the largest finite |delta|; (0, 0) for an empty column.
PropertyRange diff_color_scale(const ColumnView& delta);

enum class Change { lost = -1, unchanged = 0, gained = 1 };
Change classify(std::int32_t connectivity_delta) noexcept;

}  // namespace plastiscope::aggregate
