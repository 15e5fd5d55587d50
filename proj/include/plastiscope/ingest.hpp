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

// Raw simulation output, stored per neuron:
//
//   <root>/positions.txt                      id x y z area_name
//   <root>/<scenario>/neurons/<id>.csv        step;fired;calcium;target;axons;dendrites;syn_in;syn_out
//   <root>/<scenario>/network/step_<t>.txt    target_id source_id weight
//
// and its transposition into one TimestepFrame per recorded step.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plastiscope/kernels.hpp"
#include "plastiscope/model.hpp"

namespace plastiscope::ingest {

namespace fs = std::filesystem;

inline constexpr std::string_view kMonitorHeader =
    "step;fired;calcium;target;axons;dendrites;syn_in;syn_out";

struct RawLayout {
  fs::path root;

  fs::path positions() const { return root / "positions.txt"; }
  fs::path scenario_dir(Scenario s) const { return root / std::string(scenario_id(s)); }
  fs::path monitor_file(Scenario s, std::uint32_t neuron) const;
  fs::path network_file(Scenario s, std::uint32_t step) const;
  // Scenarios whose directory exists, in canonical order.
  std::vector<Scenario> scenarios() const;
};

// Rows "id x y z area_name"; '#' comments and blank lines are skipped.
// Error(format) for duplicate ids or unparsable fields, Error(validation)
// for gaps in the ids or clusters that are not 10 neurons of one area.
StaticTable parse_positions(const fs::path& path);
StaticTable parse_positions_text(std::string_view text, std::string_view source = "positions");

struct MonitorRow {
  std::uint32_t step = 0;
  std::uint8_t fired = 0;
  float calcium = 0;
  float target = 0;
  float axons = 0;
  float dendrites = 0;
  std::uint32_t syn_in = 0;
  std::uint32_t syn_out = 0;
};

// One data line without its terminator. Error(format) describing the field.
MonitorRow parse_monitor_line(std::string_view line);

// Streams a network file in batches, calling sink with each batch and the
// row number of its first synapse. Error(format) names file and line.
void read_network_file(const fs::path& path,
                       const std::function<void(std::span<const kernels::Synapse>,
                                                std::size_t)>& sink);

// Reference implementation of the trailing window: count of fired flags in
// the last min(k, 100) recorded steps divided by that window length.
float fired_fraction(std::span<const std::uint8_t> history);

struct TransposeOptions {
  std::size_t chunk_steps = 16;    // rows read per file per pass
  std::size_t batch_files = 512;   // files parsed in parallel per batch
  // Order in which monitor files are visited; empty means ascending id.
  // Must be a permutation of 0..N-1. Output does not depend on it.
  std::vector<std::uint32_t> visit_order;
};

struct Warning {
  FrameKey key;
  std::string message;
};

// Streams one scenario in ascending timestep order while holding only a
// few rows per neuron in memory. Monitor files are read through saved
// byte offsets, so at most one batch of files is open at a time.
class ScenarioTransposer {
 public:
  ScenarioTransposer(RawLayout layout, Scenario scenario, const StaticTable& statics,
                     TransposeOptions options = {});

  // Next frame, or nullopt once every monitor file is exhausted.
  std::optional<TimestepFrame> next();

  const std::vector<Warning>& warnings() const noexcept { return warnings_; }
  std::uint64_t bytes_read() const noexcept { return bytes_read_; }

 private:
  struct Cursor {
    std::uint64_t offset = 0;
    bool done = false;
    bool have_last = false;
    std::uint32_t last_step = 0;
  };

  void load_chunk();
  TimestepFrame build_frame(std::size_t row);

  RawLayout layout_;
  Scenario scenario_;
  const StaticTable& statics_;
  TransposeOptions options_;
  std::vector<Cursor> cursors_;
  std::vector<MonitorRow> chunk_;          // neuron-major, chunk_steps rows each
  std::vector<std::uint32_t> chunk_steps_; // steps of the current chunk
  std::size_t chunk_pos_ = 0;
  std::vector<std::uint64_t> window_lo_, window_hi_;  // fired history bits
  std::uint32_t recorded_ = 0;
  bool finished_ = false;
  std::vector<Warning> warnings_;
  std::uint64_t bytes_read_ = 0;
};

// Convenience for tests: every frame of a scenario.
std::vector<TimestepFrame> transpose_all(const RawLayout& layout, Scenario scenario,
                                         const StaticTable& statics,
                                         TransposeOptions options = {});

}  // namespace plastiscope::ingest
