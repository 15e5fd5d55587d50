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

// Seeded generator for raw datasets in the layout read by ingest. A small
// homeostatic growth model (calcium drives element growth, vacant elements
// pair up into synapses) produces plausible traces; everything draws from
// std::mt19937_64 through portable transforms, so a seed fixes the bytes.

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "plastiscope/model.hpp"

namespace plastiscope::ingest {

// Per-axis half width of a neuron's offset from its cluster center, mm.
inline constexpr double kClusterJitter = 0.25;
// Upper bound on the distance between two neurons of one cluster, allowing
// for the 1 um rounding of printed coordinates.
inline constexpr double kMaxClusterExtent = 2.0 * 1.7320508075688772 * (kClusterJitter + 0.001);

struct SynthOptions {
  std::uint32_t clusters = 500;
  std::uint32_t areas = 8;
  std::uint32_t timesteps = 100;  // recorded steps per scenario
  std::uint64_t seed = 42;
  std::vector<Scenario> scenarios{kAllScenarios.begin(), kAllScenarios.end()};
  std::uint32_t step_interval = 100;  // simulation steps between records
  std::uint32_t burn_in = 20;         // unrecorded updates before step 0
};

// Area whose synapses are removed halfway through the injury scenario, and
// the first recorded step after the removal.
inline constexpr std::uint16_t kInjuredArea = 0;
std::uint32_t injury_step(const SynthOptions& options);

struct SynthSummary {
  std::uint32_t neurons = 0;
  std::uint64_t files = 0;
  std::uint64_t bytes = 0;
};

// Error(validation) for zero clusters/areas/timesteps or more areas than
// clusters, Error(io) when the tree cannot be written.
SynthSummary generate_synthetic(const std::filesystem::path& root, const SynthOptions& options);

}  // namespace plastiscope::ingest
