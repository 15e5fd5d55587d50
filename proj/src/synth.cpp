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

#include "plastiscope/synth.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <string>

#include "plastiscope/ingest.hpp"

namespace plastiscope::ingest {

namespace {

namespace fs = std::filesystem;

// Ellipsoid the brain fits in, semi-axes in mm.
constexpr double kBrainAxes[3] = {70.0, 90.0, 60.0};
constexpr double kAreaSpread = 8.0;

constexpr double kBaseRate = 0.03;
constexpr double kInputRate = 0.02;
constexpr double kStimulusRate = 0.25;
constexpr double kCalciumDecay = 0.1;
constexpr double kCalciumPerSpike = 1.5;
constexpr double kDefaultTarget = 0.12;
constexpr double kAxonGrowth = 0.5;
constexpr double kDendriteGrowth = 0.45;
constexpr double kMaxElements = 4.0;
constexpr double kSameAreaBias = 0.7;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// std distributions are implementation-defined; these transforms are not.
class Random {
 public:
  explicit Random(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return double(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }
  bool chance(double p) { return uniform() < p; }
  double normal() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

 private:
  std::mt19937_64 engine_;
};

// Values are printed with 4 decimals (3 for coordinates), like typical
// simulator monitors; the float parsed back is the value ingest sees.
double quantize(double v, double scale) { return std::round(v * scale) / scale; }

void append_float(std::string& out, double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, static_cast<float>(v));
  out.append(buf, end);
}

void append_uint(std::string& out, std::uint64_t v) {
  char buf[24];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, end);
}

class Writer {
 public:
  void write(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::io, "cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) fail(ErrorCode::io, "short write to " + path.string());
    ++summary.files;
    summary.bytes += text.size();
  }
  void mkdirs(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
  }
  SynthSummary summary;
};

struct Neuron {
  double calcium = 0;
  double target = kDefaultTarget;
  double axons = 0;
  double dendrites = 0;
  std::vector<std::uint32_t> out;  // targets
  std::vector<std::uint32_t> in;   // sources
  bool fired = false;
  bool dead = false;
};

void erase_one(std::vector<std::uint32_t>& v, std::uint32_t x) {
  auto it = std::find(v.begin(), v.end(), x);
  if (it != v.end()) v.erase(it);
}

class Network {
 public:
  Network(std::vector<std::uint16_t> area_of, std::size_t areas, Random& rng)
      : area_of_(std::move(area_of)), areas_(areas), rng_(rng), neurons_(area_of_.size()) {}

  std::vector<Neuron>& neurons() { return neurons_; }

  void remove_synapse(std::uint32_t src, std::size_t slot) {
    const std::uint32_t dst = neurons_[src].out[slot];
    neurons_[src].out.erase(neurons_[src].out.begin() + static_cast<std::ptrdiff_t>(slot));
    erase_one(neurons_[dst].in, src);
  }

  void isolate(std::uint32_t id) {
    while (!neurons_[id].out.empty()) remove_synapse(id, neurons_[id].out.size() - 1);
    while (!neurons_[id].in.empty()) {
      const std::uint32_t src = neurons_[id].in.back();
      auto& out = neurons_[src].out;
      remove_synapse(src, static_cast<std::size_t>(std::find(out.begin(), out.end(), id) - out.begin()));
    }
  }

  // Elements that shrank below their bound synapses release random ones;
  // vacant axonal elements then bind vacant dendritic ones.
  void rewire() {
    const auto n = static_cast<std::uint32_t>(neurons_.size());
    for (std::uint32_t i = 0; i < n; ++i) {
      Neuron& nr = neurons_[i];
      while (nr.out.size() > static_cast<std::size_t>(nr.axons)) {
        remove_synapse(i, rng_.index(nr.out.size()));
      }
      while (nr.in.size() > static_cast<std::size_t>(nr.dendrites)) {
        const std::uint32_t src = nr.in[rng_.index(nr.in.size())];
        auto& out = neurons_[src].out;
        remove_synapse(src, static_cast<std::size_t>(std::find(out.begin(), out.end(), i) - out.begin()));
      }
    }
    std::vector<std::vector<std::uint32_t>> vacant(areas_);
    for (std::uint32_t i = 0; i < n; ++i) {
      const auto free = static_cast<std::size_t>(neurons_[i].dendrites) - neurons_[i].in.size();
      for (std::size_t k = 0; k < free; ++k) vacant[area_of_[i]].push_back(i);
    }
    for (std::uint32_t i = 0; i < n; ++i) {
      Neuron& nr = neurons_[i];
      const auto free = static_cast<std::size_t>(nr.axons) - nr.out.size();
      for (std::size_t k = 0; k < free; ++k) {
        const std::size_t area =
            rng_.chance(kSameAreaBias) ? area_of_[i] : rng_.index(areas_);
        auto& pool = vacant[area];
        if (pool.empty()) continue;
        const std::size_t pick = rng_.index(pool.size());
        const std::uint32_t dst = pool[pick];
        if (dst == i) continue;
        pool[pick] = pool.back();
        pool.pop_back();
        nr.out.push_back(dst);
        neurons_[dst].in.push_back(i);
      }
    }
  }

 private:
  std::vector<std::uint16_t> area_of_;
  std::size_t areas_;
  Random& rng_;
  std::vector<Neuron> neurons_;
};

struct Geometry {
  std::vector<std::uint16_t> area_of;
  std::string positions_text;
};

bool inside_brain(const double p[3], double scale) {
  double r = 0;
  for (int d = 0; d < 3; ++d) r += (p[d] / (kBrainAxes[d] * scale)) * (p[d] / (kBrainAxes[d] * scale));
  return r <= 1.0;
}

Geometry make_geometry(const SynthOptions& o) {
  Random rng(splitmix(o.seed));
  std::vector<std::array<double, 3>> area_centers(o.areas);
  for (auto& c : area_centers) {
    do {
      for (int d = 0; d < 3; ++d) c[d] = rng.uniform(-kBrainAxes[d], kBrainAxes[d]);
    } while (!inside_brain(c.data(), 0.7));
  }
  Geometry g;
  g.positions_text = "# id x y z area\n";
  for (std::uint32_t cluster = 0; cluster < o.clusters; ++cluster) {
    // Round-robin keeps every area populated; positions follow the area.
    const auto area = static_cast<std::uint16_t>(cluster % o.areas);
    double center[3];
    int tries = 0;
    do {
      for (int d = 0; d < 3; ++d) center[d] = area_centers[area][d] + kAreaSpread * rng.normal();
    } while (!inside_brain(center, 1.0) && ++tries < 100);
    if (tries == 100) std::copy(area_centers[area].begin(), area_centers[area].end(), center);
    for (std::uint32_t slot = 0; slot < kClusterSize; ++slot) {
      const std::uint32_t id = cluster * kClusterSize + slot;
      append_uint(g.positions_text, id);
      for (int d = 0; d < 3; ++d) {
        g.positions_text += ' ';
        append_float(g.positions_text,
                     quantize(center[d], 1e3) + quantize(rng.uniform(-kClusterJitter, kClusterJitter), 1e3));
      }
      g.positions_text += " area_";
      append_uint(g.positions_text, area);
      g.positions_text += '\n';
      g.area_of.push_back(area);
    }
  }
  return g;
}

void simulate(const fs::path& root, Scenario scenario, const SynthOptions& o,
              const Geometry& geo, Writer& writer) {
  Random rng(splitmix(o.seed ^ splitmix(0x5C0000 + static_cast<std::uint64_t>(scenario))));
  const std::size_t n = geo.area_of.size();
  Network net(geo.area_of, o.areas, rng);
  auto& neurons = net.neurons();
  const bool grows_from_zero = scenario == Scenario::no_initial_connectivity;
  const std::uint16_t stimulated = o.areas > 1 ? 1 : 0;
  const std::uint32_t injury_record = o.timesteps / 2;

  for (std::size_t i = 0; i < n; ++i) {
    Neuron& nr = neurons[i];
    if (scenario == Scenario::calcium_targets) nr.target = quantize(rng.uniform(0.07, 0.17), 1e4);
    nr.calcium = quantize(rng.uniform(0.0, 2.0 * nr.target), 1e4);
    if (!grows_from_zero) {
      nr.axons = rng.uniform(1.0, 3.5);
      nr.dendrites = rng.uniform(1.0, 3.5);
    }
  }
  if (!grows_from_zero) net.rewire();

  auto update = [&](std::uint32_t record, bool recording) {
    const bool stimulus = recording && scenario == Scenario::learning &&
                          record >= o.timesteps / 4 && record < o.timesteps / 2;
    for (std::size_t i = 0; i < n; ++i) {
      Neuron& nr = neurons[i];
      double p = kBaseRate + kInputRate * double(std::min<std::size_t>(nr.in.size(), 10));
      if (stimulus && geo.area_of[i] == stimulated) p += kStimulusRate;
      if (nr.dead) p = 0;
      nr.fired = rng.chance(p);
    }
    for (std::size_t i = 0; i < n; ++i) {
      Neuron& nr = neurons[i];
      nr.calcium = quantize(nr.calcium * (1.0 - kCalciumDecay) +
                                kCalciumDecay * (nr.fired ? kCalciumPerSpike : 0.0),
                            1e4);
      if (nr.dead) continue;
      const double drive = 1.0 - nr.calcium / nr.target;
      nr.axons = quantize(std::clamp(nr.axons + kAxonGrowth * drive + 0.05 * rng.normal(), 0.0, kMaxElements), 1e4);
      nr.dendrites = quantize(std::clamp(nr.dendrites + kDendriteGrowth * drive + 0.05 * rng.normal(), 0.0, kMaxElements), 1e4);
    }
    net.rewire();
  };

  if (!grows_from_zero) {
    for (std::uint32_t b = 0; b < o.burn_in; ++b) update(0, false);
  }

  const fs::path dir = root / std::string(scenario_id(scenario));
  writer.mkdirs(dir / "neurons");
  writer.mkdirs(dir / "network");
  std::vector<std::string> monitors(n, std::string(kMonitorHeader) + "\n");
  std::string network;
  for (std::uint32_t record = 0; record < o.timesteps; ++record) {
    if (scenario == Scenario::injury && record == injury_record) {
      for (std::size_t i = 0; i < n; ++i) {
        if (geo.area_of[i] != kInjuredArea) continue;
        net.isolate(static_cast<std::uint32_t>(i));
        neurons[i].dead = true;
        neurons[i].axons = neurons[i].dendrites = 0;
      }
    }
    update(record, true);
    const std::uint64_t step = std::uint64_t(record) * o.step_interval;
    network.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Neuron& nr = neurons[i];
      std::string& m = monitors[i];
      append_uint(m, step);
      m += nr.fired ? ";1;" : ";0;";
      append_float(m, nr.calcium);
      m += ';';
      append_float(m, nr.target);
      m += ';';
      append_float(m, nr.axons);
      m += ';';
      append_float(m, nr.dendrites);
      m += ';';
      append_uint(m, nr.in.size());
      m += ';';
      append_uint(m, nr.out.size());
      m += '\n';
      for (std::uint32_t src : nr.in) {
        append_uint(network, i);
        network += ' ';
        append_uint(network, src);
        network += " 1\n";
      }
    }
    writer.write(dir / "network" / ("step_" + std::to_string(step) + ".txt"), network);
  }
  for (std::size_t i = 0; i < n; ++i) {
    writer.write(dir / "neurons" / (std::to_string(i) + ".csv"), monitors[i]);
  }
}

}  // namespace

std::uint32_t injury_step(const SynthOptions& o) { return (o.timesteps / 2) * o.step_interval; }

SynthSummary generate_synthetic(const fs::path& root, const SynthOptions& o) {
  if (o.clusters == 0 || o.areas == 0 || o.timesteps == 0) {
    fail(ErrorCode::validation, "clusters, areas and timesteps must all be at least 1");
  }
  if (o.areas > o.clusters) {
    fail(ErrorCode::validation, "more areas (" + std::to_string(o.areas) + ") than clusters (" +
                                    std::to_string(o.clusters) + ")");
  }
  if (o.areas > 0xFFFF) fail(ErrorCode::validation, "too many areas");
  if (std::uint64_t(o.clusters) * kClusterSize > 0xFFFFFFFFull ||
      std::uint64_t(o.timesteps) * o.step_interval > 0xFFFFFFFFull) {
    fail(ErrorCode::validation, "dataset too large for 32-bit ids or steps");
  }
  Writer writer;
  writer.mkdirs(root);
  const Geometry geo = make_geometry(o);
  writer.write(root / "positions.txt", geo.positions_text);
  for (Scenario s : o.scenarios) simulate(root, s, o, geo, writer);
  writer.summary.neurons = static_cast<std::uint32_t>(geo.area_of.size());
  return writer.summary;
}

}  // namespace plastiscope::ingest
