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

#include "plastiscope/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "plastiscope/aggregate.hpp"
#include "plastiscope/store.hpp"

namespace plastiscope::pipeline {

namespace fs = std::filesystem;

namespace {

struct ScenarioResult {
  ScenarioEntry entry;
  std::uint64_t frames = 0;
  std::uint64_t bytes_in = 0;
  std::uint64_t bytes_out = 0;
  std::vector<ingest::Warning> warnings;
  std::exception_ptr error;
};

void run_scenario(const ingest::RawLayout& layout, const fs::path& output,
                  const StaticTable& statics, const PreprocessOptions& options,
                  ScenarioResult& result) {
  const Scenario s = result.entry.id;
  ingest::ScenarioTransposer transposer(layout, s, statics, options.transpose);
  aggregate::RangeAccumulator ranges;
  while (auto frame = transposer.next()) {
    ranges.add(*frame);
    const store::FrameLocator loc = store::write_frame(*frame, output);
    result.bytes_out += store::stored_size(loc);
    result.entry.timesteps.push_back(frame->key.timestep);
    ++result.frames;
    if (options.on_frame) options.on_frame(frame->key);
  }
  result.entry.global_ranges = ranges.ranges();
  result.bytes_in = transposer.bytes_read();
  result.warnings = transposer.warnings();
}

}  // namespace

PreprocessSummary preprocess(const fs::path& input, const fs::path& output,
                             const PreprocessOptions& options) {
  const ingest::RawLayout layout{input};
  std::vector<Scenario> scenarios = options.scenarios;
  if (scenarios.empty()) scenarios = layout.scenarios();
  std::sort(scenarios.begin(), scenarios.end());
  scenarios.erase(std::unique(scenarios.begin(), scenarios.end()), scenarios.end());
  for (Scenario s : scenarios) {
    if (!fs::is_directory(layout.scenario_dir(s))) {
      fail(ErrorCode::not_found, "no raw data for scenario " + std::string(scenario_id(s)) +
                                     " under " + input.string());
    }
  }

  const StaticTable statics = ingest::parse_positions(layout.positions());
  std::vector<ScenarioResult> results(scenarios.size());
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    results[i].entry.id = scenarios[i];
    results[i].entry.display_name = std::string(scenario_display_name(scenarios[i]));
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < results.size();) {
      try {
        run_scenario(layout, output, statics, options, results[i]);
      } catch (...) {
        results[i].error = std::current_exception();
      }
    }
  };
  const std::size_t jobs =
      std::clamp<std::size_t>(options.jobs, 1, std::max<std::size_t>(results.size(), 1));
  std::vector<std::thread> threads;
  for (std::size_t j = 1; j < jobs; ++j) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  for (const ScenarioResult& r : results) {
    if (r.error) std::rethrow_exception(r.error);
  }

  ScenarioCatalog catalog;
  const bool reuse = fs::exists(store::catalog_path(output)) &&
                     fs::exists(store::static_path(output)) &&
                     store::read_static(output) == statics;
  if (reuse) {
    catalog = store::read_catalog(output);
    std::erase_if(catalog.scenarios, [&](const ScenarioEntry& e) {
      return std::find(scenarios.begin(), scenarios.end(), e.id) != scenarios.end();
    });
  }
  catalog.neuron_count = static_cast<std::uint32_t>(statics.neuron_count());
  catalog.area_table = statics.area_names();
  PreprocessSummary summary;
  for (ScenarioResult& r : results) {
    summary.frames += r.frames;
    summary.bytes_in += r.bytes_in;
    summary.bytes_out += r.bytes_out;
    summary.warnings.insert(summary.warnings.end(), r.warnings.begin(), r.warnings.end());
    catalog.scenarios.push_back(std::move(r.entry));
  }
  std::sort(catalog.scenarios.begin(), catalog.scenarios.end(),
            [](const ScenarioEntry& a, const ScenarioEntry& b) { return a.id < b.id; });
  catalog.validate();

  std::error_code ec;
  summary.bytes_in += fs::file_size(layout.positions(), ec);
  store::write_static(statics, output);
  summary.bytes_out += fs::file_size(store::static_path(output), ec);
  store::write_catalog(catalog, output);
  summary.bytes_out += fs::file_size(store::catalog_path(output), ec);
  return summary;
}

}  // namespace plastiscope::pipeline
