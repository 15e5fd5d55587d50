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

// Statistics behind the 2D charts: histogram, per-area box plots and the
// parallel-coordinates extract.

#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "plastiscope/model.hpp"

namespace plastiscope::stats {

inline constexpr std::size_t kDefaultBins = 20;
inline constexpr std::size_t kDefaultParallelCap = 10000;

struct HistogramStats {
  PropertyRange range;
  std::vector<double> edges;          // bin_count + 1, last edge == range.max
  std::vector<std::uint64_t> counts;  // bin_count

  std::size_t bin_count() const noexcept { return counts.size(); }
  std::uint64_t total() const noexcept;
};

// Bins are [lo, hi) except the last, which is closed. Values outside the
// range land in the end bins, non-finite values are left out. A degenerate
// range puts everything in the last bin. Error(domain) for bins == 0 or
// range.min > range.max.
HistogramStats histogram(const ColumnView& column, const PropertyRange& range,
                         std::size_t bins = kDefaultBins);

// Type-7 quantile of sorted values (h = (n - 1) q). Error(domain) if empty.
double quantile(std::span<const double> sorted, double q);

struct BoxStats {
  std::uint16_t area_id = 0;
  std::size_t count = 0;
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
  double whisker_low = 0, whisker_high = 0;
  std::vector<double> outliers;  // ascending
};

// Box summary of arbitrary values (non-finite values are skipped).
// Error(domain) if nothing is left.
BoxStats box_stats(std::span<const double> values);

// One entry per area that holds at least one neuron, ascending area id.
std::vector<BoxStats> box_stats_by_area(const TimestepFrame& frame, NeuronProperty p,
                                        const StaticTable& statics);

inline constexpr std::array<NeuronProperty, 5> kParallelAxes = {
    NeuronProperty::area, NeuronProperty::calcium, NeuronProperty::fired_fraction,
    NeuronProperty::grown_axons, NeuronProperty::grown_dendrites};

inline constexpr std::array<std::string_view, 5> kParallelAxisLabels = {
    "area", "calcium", "fired rate", "axons", "dendrites"};

struct ParallelCoordsExtract {
  std::size_t stride = 1;
  std::vector<std::uint32_t> neuron_ids;
  std::vector<std::array<double, 5>> rows;  // in kParallelAxes order
};

// Every neuron when N <= cap, else every k-th with k = ceil(N / cap).
// Error(domain) for cap == 0.
ParallelCoordsExtract parallel_coords(const TimestepFrame& frame, const StaticTable& statics,
                                      std::size_t cap = kDefaultParallelCap);

}  // namespace plastiscope::stats
