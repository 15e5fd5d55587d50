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

// Serial reference kernels against their OpenMP counterparts, at full
// scale (50,000 neurons, synapse lists a few times larger).

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "plastiscope/kernels.hpp"

namespace {

using namespace plastiscope;

constexpr std::size_t kNeurons = 50000;
constexpr std::size_t kAreas = 8;

struct Inputs {
  std::vector<std::uint16_t> area_of;
  std::vector<kernels::Synapse> synapses;
  std::vector<float> a, b;
  std::vector<std::uint32_t> counts_a, counts_b;
  std::vector<double> edges;

  Inputs() : area_of(kNeurons), a(kNeurons), b(kNeurons), counts_a(kNeurons), counts_b(kNeurons) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<float> u(0.f, 1.f);
    for (std::size_t i = 0; i < kNeurons; ++i) {
      area_of[i] = static_cast<std::uint16_t>((i / 10) % kAreas);
      a[i] = u(rng);
      b[i] = u(rng);
      counts_a[i] = static_cast<std::uint32_t>(rng() % 50);
      counts_b[i] = static_cast<std::uint32_t>(rng() % 50);
    }
    synapses.resize(kNeurons * 8);
    for (auto& s : synapses) {
      s.target = static_cast<std::uint32_t>(rng() % kNeurons);
      s.source = static_cast<std::uint32_t>(rng() % kNeurons);
    }
    edges = kernels::histogram_edges(0.0, 1.0, 20);
  }
};

const Inputs& inputs() {
  static const Inputs in;
  return in;
}

template <bool Parallel>
void BM_CountAreaPairs(benchmark::State& state) {
  const Inputs& in = inputs();
  std::vector<std::uint32_t> counts(kAreas * kAreas);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::count_area_pairs(in.synapses, in.area_of, kAreas, counts);
    } else {
      kernels::serial::count_area_pairs(in.synapses, in.area_of, kAreas, counts);
    }
    benchmark::DoNotOptimize(counts.data());
  }
  state.SetItemsProcessed(state.iterations() * in.synapses.size());
}

template <bool Parallel>
void BM_Histogram(benchmark::State& state) {
  const Inputs& in = inputs();
  std::vector<std::uint64_t> bins(20);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::histogram(in.a, in.edges, bins);
    } else {
      kernels::serial::histogram(in.a, in.edges, bins);
    }
    benchmark::DoNotOptimize(bins.data());
  }
  state.SetItemsProcessed(state.iterations() * kNeurons);
}

template <bool Parallel>
void BM_MinMax(benchmark::State& state) {
  const Inputs& in = inputs();
  for (auto _ : state) {
    kernels::MinMax r = Parallel ? kernels::min_max(std::span<const float>(in.a))
                                 : kernels::serial::min_max(std::span<const float>(in.a));
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(state.iterations() * kNeurons);
}

template <bool Parallel>
void BM_SubtractCounts(benchmark::State& state) {
  const Inputs& in = inputs();
  std::vector<std::int32_t> out(kNeurons);
  for (auto _ : state) {
    bool ok = Parallel ? kernels::subtract(in.counts_a, in.counts_b, out)
                       : kernels::serial::subtract(in.counts_a, in.counts_b, out);
    benchmark::DoNotOptimize(ok);
  }
  state.SetItemsProcessed(state.iterations() * kNeurons);
}

BENCHMARK(BM_CountAreaPairs<false>)->Name("count_area_pairs/serial");
BENCHMARK(BM_CountAreaPairs<true>)->Name("count_area_pairs/openmp");
BENCHMARK(BM_Histogram<false>)->Name("histogram/serial");
BENCHMARK(BM_Histogram<true>)->Name("histogram/openmp");
BENCHMARK(BM_MinMax<false>)->Name("min_max/serial");
BENCHMARK(BM_MinMax<true>)->Name("min_max/openmp");
BENCHMARK(BM_SubtractCounts<false>)->Name("subtract_counts/serial");
BENCHMARK(BM_SubtractCounts<true>)->Name("subtract_counts/openmp");

}  // namespace

BENCHMARK_MAIN();
