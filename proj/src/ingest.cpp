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

#include "plastiscope/ingest.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "plastiscope/aggregate.hpp"

namespace plastiscope::ingest {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_whitespace(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  if (ec != std::errc() || ptr != end) return false;
  if constexpr (std::is_floating_point_v<T>) return std::isfinite(out);
  return true;
}

template <class T>
T field(std::string_view s, const char* name) {
  T v{};
  if (!parse_number(s, v)) {
    fail(ErrorCode::format, std::string("bad ") + name + " '" + std::string(s) + "'");
  }
  return v;
}

[[noreturn]] void rethrow_with(const Error& e, const std::string& where) {
  fail(e.code(), where + ": " + e.what());
}

}  // namespace

fs::path RawLayout::monitor_file(Scenario s, std::uint32_t neuron) const {
  return scenario_dir(s) / "neurons" / (std::to_string(neuron) + ".csv");
}

fs::path RawLayout::network_file(Scenario s, std::uint32_t step) const {
  return scenario_dir(s) / "network" / ("step_" + std::to_string(step) + ".txt");
}

std::vector<Scenario> RawLayout::scenarios() const {
  std::vector<Scenario> out;
  for (Scenario s : kAllScenarios) {
    if (fs::is_directory(scenario_dir(s))) out.push_back(s);
  }
  return out;
}

StaticTable parse_positions_text(std::string_view text, std::string_view source) {
  std::map<std::uint32_t, NeuronStatic> rows;
  std::vector<std::string> areas;
  std::map<std::string, std::uint16_t, std::less<>> area_index;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    const auto f = split_whitespace(line);
    if (f.size() != 5) {
      fail(ErrorCode::format, where + ": expected 'id x y z area', got " +
                                  std::to_string(f.size()) + " fields");
    }
    NeuronStatic n;
    try {
      n.neuron_id = field<std::uint32_t>(f[0], "neuron id");
      n.position = Vec3{field<float>(f[1], "x coordinate"), field<float>(f[2], "y coordinate"),
                        field<float>(f[3], "z coordinate")};
    } catch (const Error& e) {
      rethrow_with(e, where);
    }
    auto it = area_index.find(f[4]);
    if (it == area_index.end()) {
      if (areas.size() == 0xFFFF) fail(ErrorCode::validation, where + ": too many areas");
      it = area_index.emplace(std::string(f[4]), static_cast<std::uint16_t>(areas.size())).first;
      areas.emplace_back(f[4]);
    }
    n.area_id = it->second;
    n.cluster_id = n.neuron_id / kClusterSize;
    n.cluster_slot = static_cast<std::uint8_t>(n.neuron_id % kClusterSize);
    if (!rows.emplace(n.neuron_id, n).second) {
      fail(ErrorCode::format, where + ": duplicate neuron id " + std::to_string(n.neuron_id));
    }
  }
  std::vector<NeuronStatic> neurons;
  neurons.reserve(rows.size());
  std::uint32_t expected = 0;
  for (const auto& [id, n] : rows) {
    if (id != expected) {
      fail(ErrorCode::validation, std::string(source) + ": neuron ids jump from " +
                                      std::to_string(expected) + " to " + std::to_string(id) +
                                      ", so cluster " + std::to_string(expected / kClusterSize) +
                                      " does not have 10 neurons");
    }
    neurons.push_back(n);
    ++expected;
  }
  if (neurons.size() % kClusterSize != 0) {
    fail(ErrorCode::validation, std::string(source) + ": last cluster has " +
                                    std::to_string(neurons.size() % kClusterSize) +
                                    " neurons instead of 10");
  }
  return StaticTable(std::move(neurons), std::move(areas));
}

StaticTable parse_positions(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::not_found, "cannot open positions file " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_positions_text(text, path.string());
}

MonitorRow parse_monitor_line(std::string_view line) {
  std::string_view f[8];
  std::size_t count = 0;
  while (true) {
    const std::size_t semi = line.find(';');
    if (count == 8) fail(ErrorCode::format, "more than 8 fields");
    f[count++] = trim(line.substr(0, semi));
    if (semi == std::string_view::npos) break;
    line.remove_prefix(semi + 1);
  }
  if (count != 8) {
    fail(ErrorCode::format, "expected 8 fields, got " + std::to_string(count));
  }
  MonitorRow r;
  r.step = field<std::uint32_t>(f[0], "step");
  const auto fired = field<std::uint32_t>(f[1], "fired flag");
  if (fired > 1) fail(ErrorCode::format, "fired flag must be 0 or 1, got " + std::string(f[1]));
  r.fired = static_cast<std::uint8_t>(fired);
  r.calcium = field<float>(f[2], "calcium");
  r.target = field<float>(f[3], "target");
  r.axons = field<float>(f[4], "axons");
  r.dendrites = field<float>(f[5], "dendrites");
  r.syn_in = field<std::uint32_t>(f[6], "syn_in");
  r.syn_out = field<std::uint32_t>(f[7], "syn_out");
  return r;
}

void read_network_file(const fs::path& path,
                       const std::function<void(std::span<const kernels::Synapse>,
                                                std::size_t)>& sink) {
  constexpr std::size_t kBatch = 1 << 16;
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::not_found, "cannot open network file " + path.string());
  std::vector<kernels::Synapse> batch;
  batch.reserve(kBatch);
  std::size_t first_row = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view v = trim(line);
    if (v.empty() || v.front() == '#') continue;
    const auto f = split_whitespace(v);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (f.size() != 3) {
      fail(ErrorCode::format, where + ": expected 'target source weight', got " +
                                  std::to_string(f.size()) + " fields");
    }
    kernels::Synapse s;
    try {
      s.target = field<std::uint32_t>(f[0], "target id");
      s.source = field<std::uint32_t>(f[1], "source id");
      field<double>(f[2], "weight");  // validated, not used
    } catch (const Error& e) {
      rethrow_with(e, where);
    }
    batch.push_back(s);
    if (batch.size() == kBatch) {
      sink(batch, first_row);
      first_row += batch.size();
      batch.clear();
    }
  }
  if (in.bad()) fail(ErrorCode::io, "error reading " + path.string());
  if (!batch.empty()) sink(batch, first_row);
}

float fired_fraction(std::span<const std::uint8_t> history) {
  if (history.empty()) return 0.0f;
  const std::size_t k = std::min<std::size_t>(history.size(), kFiredWindow);
  std::size_t fired = 0;
  for (std::size_t i = history.size() - k; i < history.size(); ++i) fired += history[i];
  return static_cast<float>(fired) / static_cast<float>(k);
}

ScenarioTransposer::ScenarioTransposer(RawLayout layout, Scenario scenario,
                                       const StaticTable& statics, TransposeOptions options)
    : layout_(std::move(layout)),
      scenario_(scenario),
      statics_(statics),
      options_(std::move(options)) {
  const std::size_t n = statics_.neuron_count();
  if (options_.chunk_steps == 0) options_.chunk_steps = 1;
  if (options_.batch_files == 0) options_.batch_files = 1;
  if (options_.visit_order.empty()) {
    options_.visit_order.resize(n);
    std::iota(options_.visit_order.begin(), options_.visit_order.end(), 0u);
  } else {
    std::vector<bool> seen(n, false);
    bool ok = options_.visit_order.size() == n;
    for (std::uint32_t id : options_.visit_order) {
      ok = ok && id < n && !seen[id];
      if (ok) seen[id] = true;
    }
    if (!ok) fail(ErrorCode::validation, "visit order is not a permutation of the neuron ids");
  }
  cursors_.resize(n);
  window_lo_.assign(n, 0);
  window_hi_.assign(n, 0);
  if (n == 0) finished_ = true;
}

namespace {

struct ReadResult {
  std::size_t rows = 0;
  std::uint64_t bytes = 0;
  bool eof = false;
};

}  // namespace

void ScenarioTransposer::load_chunk() {
  const std::size_t n = statics_.neuron_count();
  const std::size_t k = options_.chunk_steps;
  chunk_.assign(n * k, MonitorRow{});
  std::vector<std::size_t> rows(n, 0);
  std::vector<std::optional<Error>> errors(n);
  std::vector<std::uint64_t> bytes(n, 0);

  auto read_rows = [&](std::uint32_t id) {
    Cursor& c = cursors_[id];
    if (c.done) return;
    const fs::path path = layout_.monitor_file(scenario_, id);
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::not_found, "monitor file of neuron " + std::to_string(id) +
                                            " is missing: " + path.string());
    in.seekg(static_cast<std::streamoff>(c.offset));
    std::string line;
    std::size_t got = 0;
    while (got < k) {
      if (!std::getline(in, line)) {
        if (c.offset == 0) fail(ErrorCode::format, path.string() + ": empty monitor file");
        c.done = true;
        break;
      }
      const bool terminated = !in.eof();
      const std::uint64_t consumed = line.size() + (terminated ? 1 : 0);
      if (!terminated) {
        fail(ErrorCode::format, path.string() + ": final line has no line terminator "
                                                "(truncated file?)");
      }
      const bool header = c.offset == 0;
      c.offset += consumed;
      bytes[id] += consumed;
      const std::string_view v = trim(line);
      if (v.empty()) continue;
      if (header) {
        if (v != kMonitorHeader) {
          fail(ErrorCode::format, path.string() + ": unexpected header '" + std::string(v) + "'");
        }
        continue;
      }
      MonitorRow r;
      try {
        r = parse_monitor_line(v);
      } catch (const Error& e) {
        rethrow_with(e, path.string());
      }
      if (c.have_last && r.step <= c.last_step) {
        fail(ErrorCode::format, path.string() + ": step " + std::to_string(r.step) +
                                    " does not follow step " + std::to_string(c.last_step));
      }
      c.have_last = true;
      c.last_step = r.step;
      chunk_[std::size_t(id) * k + got] = r;
      ++got;
    }
    rows[id] = got;
  };

  const auto& order = options_.visit_order;
  for (std::size_t start = 0; start < n; start += options_.batch_files) {
    const auto end = static_cast<std::ptrdiff_t>(std::min(n, start + options_.batch_files));
#pragma omp parallel for schedule(dynamic, 8)
    for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(start); j < end; ++j) {
      const std::uint32_t id = order[static_cast<std::size_t>(j)];
      try {
        read_rows(id);
      } catch (const Error& e) {
        errors[id] = e;
      } catch (const std::exception& e) {
        errors[id] = Error(ErrorCode::io, e.what());
      }
    }
  }
  for (std::size_t id = 0; id < n; ++id) {
    if (errors[id]) throw *errors[id];
    bytes_read_ += bytes[id];
  }

  // Every file must record exactly the steps neuron 0 records.
  chunk_steps_.clear();
  for (std::size_t r = 0; r < rows[0]; ++r) chunk_steps_.push_back(chunk_[r].step);
  for (std::size_t id = 1; id < n; ++id) {
    for (std::size_t r = 0; r < std::max(rows[id], rows[0]); ++r) {
      if (r >= rows[id]) {
        fail(ErrorCode::inconsistency,
             "monitor file of neuron " + std::to_string(id) + " ends before step " +
                 std::to_string(chunk_steps_[r]) + " recorded by neuron 0");
      }
      const std::uint32_t step = chunk_[id * k + r].step;
      if (r >= rows[0]) {
        fail(ErrorCode::inconsistency, "monitor file of neuron " + std::to_string(id) +
                                           " records step " + std::to_string(step) +
                                           " beyond the last step of neuron 0");
      }
      if (step != chunk_steps_[r]) {
        fail(ErrorCode::inconsistency, "monitor file of neuron " + std::to_string(id) +
                                           " records step " + std::to_string(step) +
                                           " where neuron 0 records step " +
                                           std::to_string(chunk_steps_[r]));
      }
    }
  }
  chunk_pos_ = 0;
  if (chunk_steps_.empty()) finished_ = true;
}

TimestepFrame ScenarioTransposer::build_frame(std::size_t row) {
  const std::size_t n = statics_.neuron_count();
  const std::size_t k = options_.chunk_steps;
  TimestepFrame f;
  f.key = FrameKey{scenario_, chunk_steps_[row]};
  f.resize(n);
  ++recorded_;
  const float window = static_cast<float>(std::min(recorded_, kFiredWindow));
  constexpr std::uint64_t kHighMask = (std::uint64_t(1) << (kFiredWindow - 64)) - 1;
  for (std::size_t i = 0; i < n; ++i) {
    const MonitorRow& r = chunk_[i * k + row];
    f.calcium[i] = r.calcium;
    f.calcium_target_delta[i] = r.calcium - r.target;
    f.fired[i] = r.fired;
    window_hi_[i] = (window_hi_[i] << 1) | (window_lo_[i] >> 63);
    window_lo_[i] = (window_lo_[i] << 1) | r.fired;
    const int fired = std::popcount(window_lo_[i]) + std::popcount(window_hi_[i] & kHighMask);
    f.fired_fraction[i] = static_cast<float>(fired) / window;
    f.grown_axons[i] = r.axons;
    f.grown_dendrites[i] = r.dendrites;
    f.synapses_in[i] = r.syn_in;
    f.synapses_out[i] = r.syn_out;
  }

  f.connectivity = AreaConnectivity(statics_.area_count());
  const fs::path net = layout_.network_file(scenario_, f.key.timestep);
  if (!fs::exists(net)) {
    f.connectivity_missing = true;
    warnings_.push_back({f.key, "network file " + net.string() +
                                    " is missing; connectivity left empty"});
  } else {
    read_network_file(net, [&](std::span<const kernels::Synapse> batch, std::size_t first) {
      aggregate::accumulate_connectivity(batch, statics_, f.connectivity, first);
    });
    std::error_code ec;
    bytes_read_ += fs::file_size(net, ec);
  }
  return f;
}

std::optional<TimestepFrame> ScenarioTransposer::next() {
  if (finished_) return std::nullopt;
  if (chunk_pos_ >= chunk_steps_.size()) {
    load_chunk();
    if (finished_) return std::nullopt;
  }
  return build_frame(chunk_pos_++);
}

std::vector<TimestepFrame> transpose_all(const RawLayout& layout, Scenario scenario,
                                         const StaticTable& statics, TransposeOptions options) {
  ScenarioTransposer t(layout, scenario, statics, std::move(options));
  std::vector<TimestepFrame> frames;
  while (auto f = t.next()) frames.push_back(std::move(*f));
  return frames;
}

}  // namespace plastiscope::ingest
