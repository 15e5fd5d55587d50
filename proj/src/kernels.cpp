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

#include "plastiscope/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace plastiscope::kernels {

namespace {

// Below this many elements the fork/join overhead dominates.
constexpr std::ptrdiff_t kParallelThreshold = 1 << 14;

// Per-thread dense matrices are used up to this many cells; above it the
// kernel falls back to atomic increments on the shared matrix.
constexpr std::size_t kPrivateMatrixCells = 1 << 16;

template <class T>
bool is_finite(T v) noexcept {
  if constexpr (std::is_floating_point_v<T>) {
    return std::isfinite(v);
  } else {
    return true;
  }
}

template <class T>
MinMax min_max_serial(std::span<const T> values) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t finite = 0;
  for (T v : values) {
    if (!is_finite(v)) continue;
    lo = std::min(lo, double(v));
    hi = std::max(hi, double(v));
    ++finite;
  }
  if (finite == 0) return {};
  return {lo, hi, finite};
}

template <class T>
MinMax min_max_parallel(std::span<const T> values) {
  const auto n = static_cast<std::ptrdiff_t>(values.size());
  if (n < kParallelThreshold) return min_max_serial(values);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  std::size_t finite = 0;
  const T* data = values.data();
#pragma omp parallel for schedule(static) reduction(min : lo) \
    reduction(max : hi) reduction(+ : finite)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    T v = data[i];
    if (!is_finite(v)) continue;
    lo = std::min(lo, double(v));
    hi = std::max(hi, double(v));
    ++finite;
  }
  if (finite == 0) return {};
  return {lo, hi, finite};
}

template <class T>
double max_abs_serial(std::span<const T> values) {
  double m = 0;
  for (T v : values) {
    if (is_finite(v)) m = std::max(m, std::abs(double(v)));
  }
  return m;
}

template <class T>
double max_abs_parallel(std::span<const T> values) {
  const auto n = static_cast<std::ptrdiff_t>(values.size());
  if (n < kParallelThreshold) return max_abs_serial(values);
  double m = 0;
  const T* data = values.data();
#pragma omp parallel for schedule(static) reduction(max : m)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    if (is_finite(data[i])) m = std::max(m, std::abs(double(data[i])));
  }
  return m;
}

template <class T>
void histogram_serial(std::span<const T> values, std::span<const double> edges,
                      std::span<std::uint64_t> counts) {
  for (T v : values) {
    if (!is_finite(v)) continue;
    ++counts[bin_index(double(v), edges)];
  }
}

template <class T>
void histogram_parallel(std::span<const T> values,
                        std::span<const double> edges,
                        std::span<std::uint64_t> counts) {
  const auto n = static_cast<std::ptrdiff_t>(values.size());
  if (n < kParallelThreshold) return histogram_serial(values, edges, counts);
  const T* data = values.data();
#pragma omp parallel
  {
    std::vector<std::uint64_t> local(counts.size(), 0);
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      if (!is_finite(data[i])) continue;
      ++local[bin_index(double(data[i]), edges)];
    }
#pragma omp critical(plastiscope_histogram_merge)
    for (std::size_t b = 0; b < counts.size(); ++b) counts[b] += local[b];
  }
}

void count_pairs_serial(std::span<const Synapse> synapses,
                        std::span<const std::uint16_t> area_of,
                        std::size_t area_count,
                        std::span<std::uint32_t> counts) {
  for (const Synapse& s : synapses) {
    ++counts[std::size_t(area_of[s.source]) * area_count + area_of[s.target]];
  }
}

bool subtract_counts_serial(std::span<const std::uint32_t> base,
                            std::span<const std::uint32_t> other,
                            std::span<std::int32_t> out) {
  bool ok = true;
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::int64_t d = std::int64_t(other[i]) - std::int64_t(base[i]);
    if (d < std::numeric_limits<std::int32_t>::min() ||
        d > std::numeric_limits<std::int32_t>::max()) {
      ok = false;
      d = 0;
    }
    out[i] = static_cast<std::int32_t>(d);
  }
  return ok;
}

}  // namespace

int thread_count() noexcept { return omp_get_max_threads(); }

std::vector<double> histogram_edges(double lo, double hi, std::size_t bins) {
  std::vector<double> edges(bins + 1);
  for (std::size_t b = 0; b < bins; ++b) {
    edges[b] = lo + (hi - lo) * double(b) / double(bins);
  }
  edges[bins] = hi;
  return edges;
}

std::size_t bin_index(double v, std::span<const double> edges) noexcept {
  const std::size_t bins = edges.size() - 1;
  const double lo = edges.front();
  const double hi = edges.back();
  if (v < lo) return 0;
  if (v >= hi) return bins - 1;
  auto i = static_cast<std::size_t>((v - lo) / (hi - lo) * double(bins));
  i = std::min(i, bins - 1);
  // The division can land one bin off near an edge; the edge table decides.
  while (i > 0 && v < edges[i]) --i;
  while (i + 1 < bins && v >= edges[i + 1]) ++i;
  return i;
}

void count_area_pairs(std::span<const Synapse> synapses,
                      std::span<const std::uint16_t> area_of,
                      std::size_t area_count, std::span<std::uint32_t> counts) {
  const auto n = static_cast<std::ptrdiff_t>(synapses.size());
  const std::size_t cells = area_count * area_count;
  if (n < kParallelThreshold) {
    return count_pairs_serial(synapses, area_of, area_count, counts);
  }
  const Synapse* data = synapses.data();
  if (cells > kPrivateMatrixCells) {
    std::uint32_t* shared = counts.data();
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      std::size_t cell =
          std::size_t(area_of[data[i].source]) * area_count + area_of[data[i].target];
#pragma omp atomic update
      ++shared[cell];
    }
    return;
  }
#pragma omp parallel
  {
    std::vector<std::uint32_t> local(cells, 0);
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      ++local[std::size_t(area_of[data[i].source]) * area_count +
              area_of[data[i].target]];
    }
#pragma omp critical(plastiscope_pairs_merge)
    for (std::size_t c = 0; c < cells; ++c) counts[c] += local[c];
  }
}

MinMax min_max(std::span<const float> v) { return min_max_parallel(v); }
MinMax min_max(std::span<const std::uint32_t> v) { return min_max_parallel(v); }
MinMax min_max(std::span<const std::uint16_t> v) { return min_max_parallel(v); }
MinMax min_max(std::span<const std::uint8_t> v) { return min_max_parallel(v); }
MinMax min_max(std::span<const std::int32_t> v) { return min_max_parallel(v); }
MinMax min_max(std::span<const std::int8_t> v) { return min_max_parallel(v); }

double max_abs(std::span<const float> v) { return max_abs_parallel(v); }
double max_abs(std::span<const std::int32_t> v) { return max_abs_parallel(v); }
double max_abs(std::span<const std::int8_t> v) { return max_abs_parallel(v); }

void histogram(std::span<const float> v, std::span<const double> e,
               std::span<std::uint64_t> c) {
  histogram_parallel(v, e, c);
}
void histogram(std::span<const std::uint32_t> v, std::span<const double> e,
               std::span<std::uint64_t> c) {
  histogram_parallel(v, e, c);
}
void histogram(std::span<const std::uint16_t> v, std::span<const double> e,
               std::span<std::uint64_t> c) {
  histogram_parallel(v, e, c);
}
void histogram(std::span<const std::uint8_t> v, std::span<const double> e,
               std::span<std::uint64_t> c) {
  histogram_parallel(v, e, c);
}
void histogram(std::span<const std::int32_t> v, std::span<const double> e,
               std::span<std::uint64_t> c) {
  histogram_parallel(v, e, c);
}
void histogram(std::span<const std::int8_t> v, std::span<const double> e,
               std::span<std::uint64_t> c) {
  histogram_parallel(v, e, c);
}

void subtract(std::span<const float> base, std::span<const float> other,
              std::span<float> out) {
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = other[i] - base[i];
}

bool subtract(std::span<const std::uint32_t> base,
              std::span<const std::uint32_t> other,
              std::span<std::int32_t> out) {
  const auto n = static_cast<std::ptrdiff_t>(out.size());
  if (n < kParallelThreshold) return subtract_counts_serial(base, other, out);
  bool ok = true;
#pragma omp parallel for schedule(static) reduction(&& : ok)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    std::int64_t d = std::int64_t(other[i]) - std::int64_t(base[i]);
    if (d < std::numeric_limits<std::int32_t>::min() ||
        d > std::numeric_limits<std::int32_t>::max()) {
      ok = false;
      d = 0;
    }
    out[i] = static_cast<std::int32_t>(d);
  }
  return ok;
}

void subtract(std::span<const std::uint8_t> base,
              std::span<const std::uint8_t> other, std::span<std::int8_t> out) {
  const auto n = static_cast<std::ptrdiff_t>(out.size());
#pragma omp parallel for schedule(static) if (n >= kParallelThreshold)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = static_cast<std::int8_t>(int(other[i]) - int(base[i]));
  }
}

namespace serial {

void count_area_pairs(std::span<const Synapse> synapses,
                      std::span<const std::uint16_t> area_of,
                      std::size_t area_count, std::span<std::uint32_t> counts) {
  count_pairs_serial(synapses, area_of, area_count, counts);
}

MinMax min_max(std::span<const float> v) { return min_max_serial(v); }
MinMax min_max(std::span<const std::uint32_t> v) { return min_max_serial(v); }
MinMax min_max(std::span<const std::uint16_t> v) { return min_max_serial(v); }
MinMax min_max(std::span<const std::uint8_t> v) { return min_max_serial(v); }
MinMax min_max(std::span<const std::int32_t> v) { return min_max_serial(v); }
MinMax min_max(std::span<const std::int8_t> v) { return min_max_serial(v); }

double max_abs(std::span<const float> v) { return max_abs_serial(v); }
double max_abs(std::span<const std::int32_t> v) { return max_abs_serial(v); }
double max_abs(std::span<const std::int8_t> v) { return max_abs_serial(v); }

void histogram(std::span<const float> v, std::span<const double> e,
               std::span<std::uint64_t> c) {
  histogram_serial(v, e, c);
}
void histogram(std::span<const std::uint32_t> v, std::span<const double> e,
               std::span<std::uint64_t> c) {
  histogram_serial(v, e, c);
}
void histogram(std::span<const std::uint16_t> v, std::span<const double> e,
               std::span<std::uint64_t> c) {
  histogram_serial(v, e, c);
}
void histogram(std::span<const std::uint8_t> v, std::span<const double> e,
               std::span<std::uint64_t> c) {
  histogram_serial(v, e, c);
}
void histogram(std::span<const std::int32_t> v, std::span<const double> e,
               std::span<std::uint64_t> c) {
  histogram_serial(v, e, c);
}
void histogram(std::span<const std::int8_t> v, std::span<const double> e,
               std::span<std::uint64_t> c) {
  histogram_serial(v, e, c);
}

void subtract(std::span<const float> base, std::span<const float> other,
              std::span<float> out) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = other[i] - base[i];
}

bool subtract(std::span<const std::uint32_t> base,
              std::span<const std::uint32_t> other,
              std::span<std::int32_t> out) {
  return subtract_counts_serial(base, other, out);
}

void subtract(std::span<const std::uint8_t> base,
              std::span<const std::uint8_t> other, std::span<std::int8_t> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::int8_t>(int(other[i]) - int(base[i]));
  }
}

}  // namespace serial

}  // namespace plastiscope::kernels
