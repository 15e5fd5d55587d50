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

// Raw dataset to store: transposes every selected scenario, writes its
// frames and folds their ranges into the catalog.

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "plastiscope/ingest.hpp"
#include "plastiscope/model.hpp"

namespace plastiscope::pipeline {

struct PreprocessOptions {
  std::vector<Scenario> scenarios;  // empty: every scenario present in the raw tree
  unsigned jobs = 1;                // scenarios processed concurrently
  ingest::TransposeOptions transpose;
  // Called after each frame is written; may run on any worker thread.
  std::function<void(const FrameKey&)> on_frame;
};

struct PreprocessSummary {
  std::uint64_t frames = 0;
  std::uint64_t bytes_in = 0;
  std::uint64_t bytes_out = 0;
  std::vector<ingest::Warning> warnings;

  double ratio() const noexcept {
    return bytes_in == 0 ? 0.0 : double(bytes_out) / double(bytes_in);
  }
};

// Scenarios already in an existing catalog under output are kept unless
// reprocessed, provided the static table has not changed; otherwise the
// catalog is replaced. Errors from any scenario propagate (lowest scenario
// id first) after all workers stop.
PreprocessSummary preprocess(const std::filesystem::path& input,
                             const std::filesystem::path& output,
                             const PreprocessOptions& options = {});

}  // namespace plastiscope::pipeline
