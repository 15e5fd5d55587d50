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

#include "plastiscope/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "plastiscope/kernels.hpp"

namespace plastiscope::stats {

std::uint64_t HistogramStats::total() const noexcept {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

HistogramStats histogram(const ColumnView& column, const PropertyRange& range,
                         std::size_t bins) {
  if (bins == 0) fail(ErrorCode::domain, "histogram needs at least one bin");
  if (!(range.min <= range.max) || !std::isfinite(range.min) || !std::isfinite(range.max)) {
    fail(ErrorCode::domain, "histogram range must be finite with min <= max");
  }
  HistogramStats h;
  h.range = range;
  h.edges = kernels::histogram_edges(range.min, range.max, bins);
  h.counts.assign(bins, 0);
  std::visit([&](auto s) { kernels::histogram(s, h.edges, h.counts); }, column);
  return h;
}

double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) fail(ErrorCode::domain, "quantile of an empty sample");
  const double h = double(sorted.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - double(lo)) * (sorted[hi] - sorted[lo]);
}

BoxStats box_stats(std::span<const double> values) {
  std::vector<double> v;
  v.reserve(values.size());
  for (double x : values) {
    if (std::isfinite(x)) v.push_back(x);
  }
  if (v.empty()) fail(ErrorCode::domain, "box statistics of an empty sample");
  std::sort(v.begin(), v.end());
  BoxStats b;
  b.count = v.size();
  b.min = v.front();
  b.max = v.back();
  b.q1 = quantile(v, 0.25);
  b.median = quantile(v, 0.5);
  b.q3 = quantile(v, 0.75);
  const double iqr = b.q3 - b.q1;
  const double low_fence = b.q1 - 1.5 * iqr;
  const double high_fence = b.q3 + 1.5 * iqr;
  // Whiskers reach the most extreme sample inside the fences, but never
  // retreat into the box: with q1 interpolated between samples the nearest
  // inside sample can sit above q1.
  auto first_inside = std::lower_bound(v.begin(), v.end(), low_fence);
  auto last_inside = std::upper_bound(v.begin(), v.end(), high_fence);
  b.whisker_low = std::min(b.q1, *first_inside);
  b.whisker_high = std::max(b.q3, *std::prev(last_inside));
  b.outliers.assign(v.begin(), first_inside);
  b.outliers.insert(b.outliers.end(), last_inside, v.end());
  return b;
}

std::vector<BoxStats> box_stats_by_area(const TimestepFrame& frame, NeuronProperty p,
                                        const StaticTable& statics) {
  if (statics.neuron_count() != frame.neuron_count()) {
    fail(ErrorCode::validation, "frame " + to_string(frame.key) + " has " +
                                    std::to_string(frame.neuron_count()) +
                                    " neurons, static table has " +
                                    std::to_string(statics.neuron_count()));
  }
  std::vector<std::vector<double>> by_area(statics.area_count());
  const ColumnView column = frame_column(frame, statics, p);
  const auto areas = statics.area_column();
  std::visit(
      [&](auto s) {
        for (std::size_t i = 0; i < s.size(); ++i) by_area[areas[i]].push_back(double(s[i]));
      },
      column);
  std::vector<BoxStats> out;
  for (std::size_t a = 0; a < by_area.size(); ++a) {
    const bool any_finite = std::any_of(by_area[a].begin(), by_area[a].end(),
                                        [](double x) { return std::isfinite(x); });
    if (!any_finite) continue;
    BoxStats b = box_stats(by_area[a]);
    b.area_id = static_cast<std::uint16_t>(a);
    out.push_back(std::move(b));
  }
  return out;
}

ParallelCoordsExtract parallel_coords(const TimestepFrame& frame, const StaticTable& statics,
                                      std::size_t cap) {
  if (cap == 0) fail(ErrorCode::domain, "parallel coordinates cap must be at least 1");
  const std::size_t n = frame.neuron_count();
  if (statics.neuron_count() != n) {
    fail(ErrorCode::validation, "frame and static table disagree on neuron count");
  }
  ParallelCoordsExtract e;
  e.stride = n <= cap ? 1 : (n + cap - 1) / cap;
  for (std::size_t i = 0; i < n; i += e.stride) {
    e.neuron_ids.push_back(static_cast<std::uint32_t>(i));
    std::array<double, 5> row{};
    for (std::size_t k = 0; k < kParallelAxes.size(); ++k) {
      row[k] = property_value(frame, statics, kParallelAxes[k], i);
    }
    e.rows.push_back(row);
  }
  return e;
}

}  // namespace plastiscope::stats
