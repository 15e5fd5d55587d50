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

// Data-parallel inner loops of the pipeline and the statistics service.
//
// Every kernel exists twice: the OpenMP version in plastiscope::kernels and
// a plain loop in plastiscope::kernels::serial. The library calls the
// OpenMP versions; the serial ones are kept as the reference the tests and
// the benchmark compare against. Both must produce identical results for
// every input (all reductions here are integer or min/max, so the thread
// count never changes the answer).

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace plastiscope::kernels {

struct Synapse {
  std::uint32_t target = 0;
  std::uint32_t source = 0;
};

struct MinMax {
  double min = 0;
  double max = 0;
  std::size_t finite = 0;  // number of values that took part
};

// Bin edges lo + (hi - lo) * b / bins for b = 0..bins; the last edge is hi.
std::vector<double> histogram_edges(double lo, double hi, std::size_t bins);

// Index of the bin holding v. Bins are [e_b, e_{b+1}) except the last, which
// is closed; values outside [lo, hi] clamp into the end bins. A degenerate
// range (lo == hi) sends everything >= lo to the last bin.
std::size_t bin_index(double v, std::span<const double> edges) noexcept;

// Ids must already be validated against area_of.size().
void count_area_pairs(std::span<const Synapse> synapses,
                      std::span<const std::uint16_t> area_of,
                      std::size_t area_count, std::span<std::uint32_t> counts);

MinMax min_max(std::span<const float> values);
MinMax min_max(std::span<const std::uint32_t> values);
MinMax min_max(std::span<const std::uint16_t> values);
MinMax min_max(std::span<const std::uint8_t> values);
MinMax min_max(std::span<const std::int32_t> values);
MinMax min_max(std::span<const std::int8_t> values);

// Largest |v| over finite values (0 for an empty column).
double max_abs(std::span<const float> values);
double max_abs(std::span<const std::int32_t> values);
double max_abs(std::span<const std::int8_t> values);

// Adds the bin counts of the finite values to counts (size = edges - 1).
void histogram(std::span<const float> values, std::span<const double> edges,
               std::span<std::uint64_t> counts);
void histogram(std::span<const std::uint32_t> values,
               std::span<const double> edges, std::span<std::uint64_t> counts);
void histogram(std::span<const std::uint16_t> values,
               std::span<const double> edges, std::span<std::uint64_t> counts);
void histogram(std::span<const std::uint8_t> values,
               std::span<const double> edges, std::span<std::uint64_t> counts);
void histogram(std::span<const std::int32_t> values,
               std::span<const double> edges, std::span<std::uint64_t> counts);
void histogram(std::span<const std::int8_t> values,
               std::span<const double> edges, std::span<std::uint64_t> counts);

// out = other - base. The integer forms return false if a delta does not fit.
void subtract(std::span<const float> base, std::span<const float> other,
              std::span<float> out);
bool subtract(std::span<const std::uint32_t> base,
              std::span<const std::uint32_t> other,
              std::span<std::int32_t> out);
void subtract(std::span<const std::uint8_t> base,
              std::span<const std::uint8_t> other, std::span<std::int8_t> out);

namespace serial {

void count_area_pairs(std::span<const Synapse> synapses,
                      std::span<const std::uint16_t> area_of,
                      std::size_t area_count, std::span<std::uint32_t> counts);

MinMax min_max(std::span<const float> values);
MinMax min_max(std::span<const std::uint32_t> values);
MinMax min_max(std::span<const std::uint16_t> values);
MinMax min_max(std::span<const std::uint8_t> values);
MinMax min_max(std::span<const std::int32_t> values);
MinMax min_max(std::span<const std::int8_t> values);

double max_abs(std::span<const float> values);
double max_abs(std::span<const std::int32_t> values);
double max_abs(std::span<const std::int8_t> values);

void histogram(std::span<const float> values, std::span<const double> edges,
               std::span<std::uint64_t> counts);
void histogram(std::span<const std::uint32_t> values,
               std::span<const double> edges, std::span<std::uint64_t> counts);
void histogram(std::span<const std::uint16_t> values,
               std::span<const double> edges, std::span<std::uint64_t> counts);
void histogram(std::span<const std::uint8_t> values,
               std::span<const double> edges, std::span<std::uint64_t> counts);
void histogram(std::span<const std::int32_t> values,
               std::span<const double> edges, std::span<std::uint64_t> counts);
void histogram(std::span<const std::int8_t> values,
               std::span<const double> edges, std::span<std::uint64_t> counts);

void subtract(std::span<const float> base, std::span<const float> other,
              std::span<float> out);
bool subtract(std::span<const std::uint32_t> base,
              std::span<const std::uint32_t> other,
              std::span<std::int32_t> out);
void subtract(std::span<const std::uint8_t> base,
              std::span<const std::uint8_t> other, std::span<std::int8_t> out);

}  // namespace serial

// Number of OpenMP threads the parallel kernels will use.
int thread_count() noexcept;

}  // namespace plastiscope::kernels
