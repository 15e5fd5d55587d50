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

#include <cstdlib>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "plastiscope/aggregate.hpp"
#include "plastiscope/ingest.hpp"
#include "plastiscope/pipeline.hpp"
#include "plastiscope/store.hpp"
#include "plastiscope/synth.hpp"
#include "test_util.hpp"

namespace plastiscope::ingest {
namespace {

using testing::code_of;
using testing::TempDir;
using testing::write_text;

std::string positions_text(std::size_t clusters, std::size_t areas) {
  std::string s = "# id x y z area\n";
  for (std::size_t i = 0; i < clusters * kClusterSize; ++i) {
    const std::size_t c = i / kClusterSize;
    s += std::to_string(i) + " " + std::to_string(c) + ".5 " + std::to_string(i % 10) +
         " -1.25 region_" + std::to_string(c % areas) + "\n";
  }
  return s;
}

// One cluster, 3 steps; neuron 0 fires at the first two.
void write_tiny_raw(const fs::path& root, Scenario s = Scenario::learning,
                    const char* eol = "\n") {
  const RawLayout layout{root};
  write_text(layout.positions(), positions_text(1, 1));
  for (std::uint32_t id = 0; id < 10; ++id) {
    std::string text = std::string(kMonitorHeader) + eol;
    for (std::uint32_t r = 0; r < 3; ++r) {
      const int fired = id == 0 ? (r < 2) : (id + r) % 2;
      text += std::to_string(r * 100) + ";" + std::to_string(fired) + ";0." + std::to_string(id) +
              std::to_string(r) + "1;0.1;" + std::to_string(r) + ".5;1.25;" + std::to_string(id) +
              ";" + std::to_string(r) + eol;
    }
    write_text(layout.monitor_file(s, id), text);
  }
  for (std::uint32_t r = 0; r < 3; ++r) {
    write_text(layout.network_file(s, r * 100), "# target source weight\n0 1 1\n2 3 0.5\n\n");
  }
}

TEST(Positions, TwentyRowsTwoAreas) {
  const StaticTable t = parse_positions_text(positions_text(2, 2));
  EXPECT_EQ(t.neuron_count(), 20u);
  EXPECT_EQ(t.cluster_count(), 2u);
  EXPECT_EQ(t.area_names(), (std::vector<std::string>{"region_0", "region_1"}));
  EXPECT_EQ(t.neuron(13).cluster_id, 1u);
  EXPECT_EQ(t.neuron(13).cluster_slot, 3);
  EXPECT_EQ(t.neuron(13).position, (Vec3{1.5f, 3.0f, -1.25f}));
}

TEST(Positions, AreaTableInFirstAppearanceOrder) {
  std::string s;
  for (int i = 0; i < 20; ++i) s += std::to_string(i) + " 0 0 0 " + (i < 10 ? "zeta" : "alpha") + "\n";
  EXPECT_EQ(parse_positions_text(s).area_names(), (std::vector<std::string>{"zeta", "alpha"}));
}

TEST(Positions, RowsMayComeInAnyOrder) {
  std::string s;
  for (int i = 9; i >= 0; --i) s += std::to_string(i) + " 1 2 3 a\n";
  EXPECT_EQ(parse_positions_text(s).neuron(0).position, (Vec3{1, 2, 3}));
}

TEST(Positions, Errors) {
  std::string dup = positions_text(1, 1);
  dup += "5 0 0 0 region_0\n";
  EXPECT_EQ(code_of([&] { parse_positions_text(dup); }), ErrorCode::format);
  std::string bad = positions_text(1, 1);
  bad.replace(bad.find("0.5"), 3, "abc");
  EXPECT_EQ(code_of([&] { parse_positions_text(bad); }), ErrorCode::format);
  std::string short_cluster;
  for (int i = 0; i < 15; ++i) short_cluster += std::to_string(i) + " 0 0 0 a\n";
  EXPECT_EQ(code_of([&] { parse_positions_text(short_cluster); }), ErrorCode::validation);
  std::string split;
  for (int i = 0; i < 10; ++i) split += std::to_string(i) + " 0 0 0 " + (i < 5 ? "a" : "b") + "\n";
  EXPECT_EQ(code_of([&] { parse_positions_text(split); }), ErrorCode::validation);
  std::string gap;
  for (int i = 0; i < 10; ++i) gap += std::to_string(i == 9 ? 10 : i) + " 0 0 0 a\n";
  EXPECT_EQ(code_of([&] { parse_positions_text(gap); }), ErrorCode::validation);
  EXPECT_EQ(code_of([] { parse_positions("/nonexistent/positions.txt"); }), ErrorCode::not_found);
}

TEST(Monitor, ParsesLine) {
  const MonitorRow r = parse_monitor_line("300;1;0.125;0.1;2.5;1;7;9");
  EXPECT_EQ(r.step, 300u);
  EXPECT_EQ(r.fired, 1);
  EXPECT_EQ(r.calcium, 0.125f);
  EXPECT_EQ(r.target, 0.1f);
  EXPECT_EQ(r.axons, 2.5f);
  EXPECT_EQ(r.syn_in, 7u);
  EXPECT_EQ(r.syn_out, 9u);
  for (const char* bad : {"300;2;0;0;0;0;0;0", "300;1;0;0;0;0;0", "300;1;0;0;0;0;0;0;0",
                          "x;1;0;0;0;0;0;0", "1;1;nan;0;0;0;0;0", "1;1;0;0;0;0;-1;0", ""}) {
    EXPECT_EQ(code_of([&] { parse_monitor_line(bad); }), ErrorCode::format) << bad;
  }
}

TEST(FiredFraction, TrailingWindow) {
  const std::vector<std::uint8_t> h = {1, 1, 0};
  EXPECT_EQ(fired_fraction(h), 2.0f / 3.0f);
  std::vector<std::uint8_t> long_history(150, 0);
  std::fill(long_history.begin(), long_history.begin() + 50, 1);
  EXPECT_EQ(fired_fraction(long_history), 0.0f);  // the early spikes left the window
  long_history[60] = 1;
  EXPECT_EQ(fired_fraction(long_history), 0.01f);
  EXPECT_EQ(fired_fraction({}), 0.0f);
}

TEST(Transpose, TwoByThreeShape) {
  TempDir dir;
  const RawLayout layout{dir.path()};
  write_text(layout.positions(), positions_text(1, 1));
  // Only the first two monitor files matter for shape; write all ten.
  for (std::uint32_t id = 0; id < 10; ++id) {
    std::string t = std::string(kMonitorHeader) + "\n";
    for (int s = 0; s < 3; ++s) t += std::to_string(s) + ";0;0.5;0.5;0;0;0;0\n";
    write_text(layout.monitor_file(Scenario::injury, id), t);
    }
  for (int s = 0; s < 3; ++s) write_text(layout.network_file(Scenario::injury, s), "");
  const auto frames = transpose_all(layout, Scenario::injury, parse_positions(layout.positions()));
  ASSERT_EQ(frames.size(), 3u);
  for (std::uint32_t s = 0; s < 3; ++s) {
    EXPECT_EQ(frames[s].key.timestep, s);
    EXPECT_EQ(frames[s].neuron_count(), 10u);
    EXPECT_EQ(frames[s].connectivity.total(), 0u);
    EXPECT_FALSE(frames[s].connectivity_missing);
  }
}

TEST(Transpose, ValuesAndFiredFraction) {
  TempDir dir;
  write_tiny_raw(dir.path());
  const RawLayout layout{dir.path()};
  const StaticTable st = parse_positions(layout.positions());
  const auto frames = transpose_all(layout, Scenario::learning, st);
  ASSERT_EQ(frames.size(), 3u);
  EXPECT_EQ(frames[2].fired_fraction[0], 2.0f / 3.0f);
  EXPECT_EQ(frames[0].fired_fraction[0], 1.0f);
  EXPECT_EQ(frames[1].calcium[4], 0.411f);
  EXPECT_EQ(frames[1].calcium_target_delta[4], 0.411f - 0.1f);
  EXPECT_EQ(frames[2].grown_axons[7], 2.5f);
  EXPECT_EQ(frames[2].synapses_in[7], 7u);
  EXPECT_EQ(frames[2].synapses_out[7], 2u);
  EXPECT_EQ(frames[0].connectivity.at(0, 0), 2u);
}

TEST(Transpose, CrlfAccepted) {
  TempDir a, b;
  write_tiny_raw(a.path());
  write_tiny_raw(b.path(), Scenario::learning, "\r\n");
  const StaticTable st = parse_positions(RawLayout{a.path()}.positions());
  EXPECT_EQ(transpose_all({a.path()}, Scenario::learning, st),
            transpose_all({b.path()}, Scenario::learning, st));
}

TEST(Transpose, DisagreeingStepsNameTheNeuron) {
  TempDir dir;
  write_tiny_raw(dir.path());
  const RawLayout layout{dir.path()};
  std::string text = testing::read_text(layout.monitor_file(Scenario::learning, 7));
  text.replace(text.find("\n100;"), 5, "\n150;");
  write_text(layout.monitor_file(Scenario::learning, 7), text);
  const StaticTable st = parse_positions(layout.positions());
  try {
    transpose_all(layout, Scenario::learning, st);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::inconsistency);
    EXPECT_NE(std::string(e.what()).find("neuron 7"), std::string::npos) << e.what();
  }
}

TEST(Transpose, ShortFileIsInconsistent) {
  TempDir dir;
  write_tiny_raw(dir.path());
  const RawLayout layout{dir.path()};
  std::string text = testing::read_text(layout.monitor_file(Scenario::learning, 3));
  text.erase(text.rfind("200;"));
  write_text(layout.monitor_file(Scenario::learning, 3), text);
  EXPECT_EQ(code_of([&] { transpose_all(layout, Scenario::learning, parse_positions(layout.positions())); }),
            ErrorCode::inconsistency);
}

TEST(Transpose, TruncatedFinalLineIsFormatError) {
  TempDir dir;
  write_tiny_raw(dir.path());
  const RawLayout layout{dir.path()};
  std::string text = testing::read_text(layout.monitor_file(Scenario::learning, 2));
  text.pop_back();  // drop the final LF: the last row may be cut short
  write_text(layout.monitor_file(Scenario::learning, 2), text);
  EXPECT_EQ(code_of([&] { transpose_all(layout, Scenario::learning, parse_positions(layout.positions())); }),
            ErrorCode::format);
  text.resize(text.size() - 6);
  write_text(layout.monitor_file(Scenario::learning, 2), text);
  EXPECT_EQ(code_of([&] { transpose_all(layout, Scenario::learning, parse_positions(layout.positions())); }),
            ErrorCode::format);
}

TEST(Transpose, BadHeaderAndEmptyFile) {
  TempDir dir;
  write_tiny_raw(dir.path());
  const RawLayout layout{dir.path()};
  const StaticTable st = parse_positions(layout.positions());
  write_text(layout.monitor_file(Scenario::learning, 1), "");
  EXPECT_EQ(code_of([&] { transpose_all(layout, Scenario::learning, st); }), ErrorCode::format);
  write_text(layout.monitor_file(Scenario::learning, 1), "step;fired\n0;1\n");
  EXPECT_EQ(code_of([&] { transpose_all(layout, Scenario::learning, st); }), ErrorCode::format);
  fs::remove(layout.monitor_file(Scenario::learning, 1));
  EXPECT_TRUE(code_of([&] { transpose_all(layout, Scenario::learning, st); }).has_value());
}

TEST(Transpose, MissingNetworkFileGivesMarkerAndWarning) {
  TempDir dir;
  write_tiny_raw(dir.path());
  const RawLayout layout{dir.path()};
  fs::remove(layout.network_file(Scenario::learning, 100));
  const StaticTable st = parse_positions(layout.positions());
  ScenarioTransposer t(layout, Scenario::learning, st);
  std::vector<TimestepFrame> frames;
  while (auto f = t.next()) frames.push_back(std::move(*f));
  ASSERT_EQ(frames.size(), 3u);
  EXPECT_FALSE(frames[0].connectivity_missing);
  EXPECT_TRUE(frames[1].connectivity_missing);
  EXPECT_EQ(frames[1].connectivity.total(), 0u);
  ASSERT_EQ(t.warnings().size(), 1u);
  EXPECT_EQ(t.warnings()[0].key, (FrameKey{Scenario::learning, 100}));
  // The marker survives the store.
  TempDir out;
  store::write_frame(frames[1], out.path());
  EXPECT_TRUE(store::read_frame(out.path(), frames[1].key).connectivity_missing);
}

TEST(Transpose, BadNetworkRowsAreErrors) {
  TempDir dir;
  write_tiny_raw(dir.path());
  const RawLayout layout{dir.path()};
  const StaticTable st = parse_positions(layout.positions());
  write_text(layout.network_file(Scenario::learning, 0), "0 1\n");
  EXPECT_EQ(code_of([&] { transpose_all(layout, Scenario::learning, st); }), ErrorCode::format);
  write_text(layout.network_file(Scenario::learning, 0), "0 10 1\n");
  EXPECT_EQ(code_of([&] { transpose_all(layout, Scenario::learning, st); }), ErrorCode::validation);
}

// Reads every monitor file whole with iostreams: an independent path to the
// values the streaming transposer must reproduce.
struct NaiveScenario {
  std::vector<std::uint32_t> steps;
  std::vector<std::vector<std::vector<std::string>>> fields;  // [neuron][row][col]
};

NaiveScenario naive_read(const RawLayout& layout, Scenario s, std::size_t n) {
  NaiveScenario out;
  out.fields.resize(n);
  for (std::size_t id = 0; id < n; ++id) {
    std::ifstream in(layout.monitor_file(s, std::uint32_t(id)));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::vector<std::string> cols;
      std::stringstream ss(line);
      for (std::string c; std::getline(ss, c, ';');) cols.push_back(c);
      out.fields[id].push_back(cols);
      if (id == 0) out.steps.push_back(std::uint32_t(std::stoul(cols[0])));
    }
  }
  return out;
}

void expect_matches_naive(const std::vector<TimestepFrame>& frames, const NaiveScenario& raw) {
  ASSERT_EQ(frames.size(), raw.steps.size());
  for (std::size_t r = 0; r < frames.size(); ++r) {
    const TimestepFrame& f = frames[r];
    ASSERT_EQ(f.key.timestep, raw.steps[r]);
    for (std::size_t i = 0; i < f.neuron_count(); ++i) {
      const auto& c = raw.fields[i][r];
      const float ca = std::strtof(c[2].c_str(), nullptr);
      const float target = std::strtof(c[3].c_str(), nullptr);
      std::size_t fired = 0;
      const std::size_t k = std::min<std::size_t>(r + 1, 100);
      for (std::size_t q = r + 1 - k; q <= r; ++q) fired += raw.fields[i][q][1] == "1";
      ASSERT_EQ(f.fired[i], c[1] == "1" ? 1 : 0);
      ASSERT_EQ(f.calcium[i], ca);
      ASSERT_EQ(f.calcium_target_delta[i], ca - target);
      ASSERT_EQ(f.fired_fraction[i], float(fired) / float(k));
      ASSERT_EQ(f.grown_axons[i], std::strtof(c[4].c_str(), nullptr));
      ASSERT_EQ(f.grown_dendrites[i], std::strtof(c[5].c_str(), nullptr));
      ASSERT_EQ(f.synapses_in[i], std::stoul(c[6]));
      ASSERT_EQ(f.synapses_out[i], std::stoul(c[7]));
    }
  }
}

class SynthFixture : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir;
    SynthOptions o;
    o.clusters = 12;
    o.areas = 3;
    o.timesteps = 130;  // past the fired window
    o.seed = 5;
    generate_synthetic(dir_->path(), o);
    statics_ = new StaticTable(parse_positions(RawLayout{dir_->path()}.positions()));
  }
  static void TearDownTestSuite() {
    delete statics_;
    delete dir_;
  }
  static RawLayout layout() { return {dir_->path()}; }

  static TempDir* dir_;
  static StaticTable* statics_;
};

TempDir* SynthFixture::dir_ = nullptr;
StaticTable* SynthFixture::statics_ = nullptr;

TEST_F(SynthFixture, StreamingMatchesNaiveReadBitExact) {
  for (Scenario s : kAllScenarios) {
    expect_matches_naive(transpose_all(layout(), s, *statics_),
                         naive_read(layout(), s, statics_->neuron_count()));
  }
}

TEST_F(SynthFixture, OutputIndependentOfVisitOrderAndChunking) {
  const auto reference = transpose_all(layout(), Scenario::learning, *statics_);
  std::vector<std::uint32_t> order(statics_->neuron_count());
  std::iota(order.begin(), order.end(), 0u);
  std::mt19937 rng(1);
  for (std::size_t chunk : {1u, 3u, 7u, 200u}) {
    std::shuffle(order.begin(), order.end(), rng);
    TransposeOptions o;
    o.chunk_steps = chunk;
    o.batch_files = 1 + chunk % 5;
    o.visit_order = order;
    EXPECT_EQ(transpose_all(layout(), Scenario::learning, *statics_, o), reference) << chunk;
  }
  TransposeOptions bad;
  bad.visit_order = {0, 0, 1};
  EXPECT_TRUE(code_of([&] { transpose_all(layout(), Scenario::learning, *statics_, bad); }));
}

TEST_F(SynthFixture, SynapseCountsMatchNetworkFiles) {
  for (Scenario s : kAllScenarios) {
    const auto frames = transpose_all(layout(), s, *statics_);
    for (const auto& f : frames) {
      const std::uint64_t in = std::accumulate(f.synapses_in.begin(), f.synapses_in.end(), std::uint64_t(0));
      const std::uint64_t out = std::accumulate(f.synapses_out.begin(), f.synapses_out.end(), std::uint64_t(0));
      EXPECT_EQ(in, f.connectivity.total());
      EXPECT_EQ(out, f.connectivity.total());
    }
  }
}

TEST_F(SynthFixture, ClusterJitterWithinBound) {
  EXPECT_LE(statics_->max_cluster_extent(), kMaxClusterExtent);
  EXPECT_GT(statics_->max_cluster_extent(), 0.0);
  EXPECT_EQ(statics_->area_count(), 3u);
}

TEST_F(SynthFixture, ScenariosBehaveDifferently) {
  SynthOptions o;
  o.timesteps = 130;
  const auto none = transpose_all(layout(), Scenario::no_initial_connectivity, *statics_);
  EXPECT_EQ(none.front().connectivity.total(), 0u);
  EXPECT_GT(none.back().connectivity.total(), 0u);

  // Injury: area 0 is cut off at the injury step.
  const auto injury = transpose_all(layout(), Scenario::injury, *statics_);
  const std::uint32_t cut = injury_step(o);
  const TimestepFrame* before = nullptr;
  const TimestepFrame* after = nullptr;
  for (std::size_t r = 0; r + 1 < injury.size(); ++r) {
    if (injury[r + 1].key.timestep == cut) {
      before = &injury[r];
      after = &injury[r + 1];
    }
  }
  ASSERT_TRUE(before && after);
  const DiffFrame d = aggregate::diff_frames(*before, *after);
  std::int64_t area0 = 0;
  for (std::size_t t = 0; t < 3; ++t) {
    area0 += d.connectivity_at(kInjuredArea, t) + (t == kInjuredArea ? 0 : d.connectivity_at(t, kInjuredArea));
    EXPECT_EQ(after->connectivity.at(kInjuredArea, t), 0u);
    EXPECT_EQ(after->connectivity.at(t, kInjuredArea), 0u);
  }
  EXPECT_LT(area0, 0);

  // Per-neuron targets differ only in that scenario.
  const auto targets = transpose_all(layout(), Scenario::calcium_targets, *statics_);
  const auto learning = transpose_all(layout(), Scenario::learning, *statics_);
  auto spread = [](const TimestepFrame& f) {
    std::vector<float> t(f.neuron_count());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = f.calcium[i] - f.calcium_target_delta[i];
    auto [lo, hi] = std::minmax_element(t.begin(), t.end());
    return *hi - *lo;
  };
  EXPECT_GT(spread(targets.front()), 0.01f);
  EXPECT_LT(spread(learning.front()), 1e-6f);
}

TEST(Synth, MinimalCase) {
  TempDir dir;
  SynthOptions o;
  o.clusters = 1;
  o.areas = 1;
  o.timesteps = 1;
  o.seed = 0;
  const SynthSummary s = generate_synthetic(dir.path(), o);
  EXPECT_EQ(s.neurons, 10u);
  const StaticTable st = parse_positions(RawLayout{dir.path()}.positions());
  EXPECT_EQ(st.neuron_count(), 10u);
  EXPECT_EQ(st.area_count(), 1u);
  for (Scenario sc : kAllScenarios) {
    EXPECT_EQ(transpose_all({dir.path()}, sc, st).size(), 1u);
  }
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = testing::read_text(e.path());
  }
  return out;
}

TEST(Synth, SameSeedSameBytes) {
  TempDir a, b, c;
  SynthOptions o;
  o.clusters = 8;
  o.areas = 2;
  o.timesteps = 12;
  generate_synthetic(a.path(), o);
  generate_synthetic(b.path(), o);
  EXPECT_EQ(tree(a.path()), tree(b.path()));
  o.seed = 43;
  generate_synthetic(c.path(), o);
  EXPECT_NE(tree(a.path()), tree(c.path()));
}

TEST(Synth, RejectsBadOptions) {
  TempDir dir;
  SynthOptions o;
  o.clusters = 2;
  o.areas = 3;
  EXPECT_EQ(code_of([&] { generate_synthetic(dir.path(), o); }), ErrorCode::validation);
  o.areas = 0;
  EXPECT_EQ(code_of([&] { generate_synthetic(dir.path(), o); }), ErrorCode::validation);
  o = {};
  o.timesteps = 0;
  EXPECT_EQ(code_of([&] { generate_synthetic(dir.path(), o); }), ErrorCode::validation);
  testing::write_text(dir / "file", "x");
  o = {};
  o.clusters = 1;
  o.areas = 1;
  o.timesteps = 1;
  EXPECT_EQ(code_of([&] { generate_synthetic(dir / "file" / "sub", o); }), ErrorCode::io);
}

TEST(Synth, FiftyThousandNeurons) {
  TempDir dir;
  SynthOptions o;
  o.clusters = 5000;
  o.timesteps = 1;
  o.seed = 1;
  o.scenarios = {Scenario::learning};
  EXPECT_EQ(generate_synthetic(dir.path(), o).neurons, 50000u);
  const StaticTable st = parse_positions(RawLayout{dir.path()}.positions());
  EXPECT_EQ(st.neuron_count(), 50000u);
  EXPECT_EQ(st.cluster_count(), 5000u);
}

// Default fixture size, measured once (113,194,363 bytes) and pinned with
// 20% slack; it must also stay under 200 MB.
TEST(Synth, DefaultFixtureSize) {
  TempDir dir;
  const SynthSummary s = generate_synthetic(dir.path(), SynthOptions{});
  EXPECT_EQ(s.neurons, 5000u);
  EXPECT_LT(s.bytes, 200'000'000u);
  EXPECT_NEAR(double(s.bytes), 113194363.0, 0.2 * 113194363.0);
}

TEST(Pipeline, PreprocessWritesCatalogAndFrames) {
  TempDir raw, out;
  SynthOptions o;
  o.clusters = 6;
  o.areas = 2;
  o.timesteps = 9;
  generate_synthetic(raw.path(), o);
  pipeline::PreprocessOptions po;
  po.jobs = 3;
  const auto summary = pipeline::preprocess(raw.path(), out.path(), po);
  EXPECT_EQ(summary.frames, 36u);
  EXPECT_GT(summary.bytes_in, 0u);
  EXPECT_GT(summary.bytes_out, 0u);
  const ScenarioCatalog c = store::read_catalog(out.path());
  ASSERT_EQ(c.scenarios.size(), 4u);
  EXPECT_EQ(c.neuron_count, 60u);
  EXPECT_EQ(c.area_table.size(), 2u);
  const StaticTable st = parse_positions(RawLayout{raw.path()}.positions());
  EXPECT_EQ(store::read_static(out.path()), st);
  for (const ScenarioEntry& e : c.scenarios) {
    EXPECT_EQ(e.timesteps.size(), 9u);
    const auto frames = transpose_all({raw.path()}, e.id, st);
    for (const auto& f : frames) EXPECT_EQ(store::read_frame(out.path(), f.key), f);
    for (NeuronProperty p : kFrameProperties) {
      EXPECT_EQ(e.global_ranges.at(p), aggregate::global_range(frames, p));
    }
  }
}

TEST(Pipeline, SerialAndParallelRunsWriteIdenticalStores) {
  TempDir raw, a, b;
  SynthOptions o;
  o.clusters = 6;
  o.areas = 2;
  o.timesteps = 5;
  generate_synthetic(raw.path(), o);
  pipeline::PreprocessOptions po;
  pipeline::preprocess(raw.path(), a.path(), po);
  po.jobs = 4;
  po.transpose.chunk_steps = 2;
  pipeline::preprocess(raw.path(), b.path(), po);
  EXPECT_EQ(tree(a.path()), tree(b.path()));
}

TEST(Pipeline, ScenarioSubsetKeepsOthers) {
  TempDir raw, out;
  SynthOptions o;
  o.clusters = 3;
  o.areas = 1;
  o.timesteps = 3;
  generate_synthetic(raw.path(), o);
  pipeline::PreprocessOptions po;
  po.scenarios = {Scenario::learning};
  EXPECT_EQ(pipeline::preprocess(raw.path(), out.path(), po).frames, 3u);
  ScenarioCatalog c = store::read_catalog(out.path());
  ASSERT_EQ(c.scenarios.size(), 1u);
  EXPECT_EQ(c.scenarios[0].id, Scenario::learning);
  EXPECT_FALSE(fs::exists(out / "injury"));
  po.scenarios = {Scenario::injury};
  pipeline::preprocess(raw.path(), out.path(), po);
  c = store::read_catalog(out.path());
  ASSERT_EQ(c.scenarios.size(), 2u);
  EXPECT_EQ(c.scenarios[0].id, Scenario::learning);
  EXPECT_EQ(c.scenarios[1].id, Scenario::injury);
}

TEST(Pipeline, MissingScenarioDirectoryIsNotFound) {
  TempDir raw, out;
  SynthOptions o;
  o.clusters = 1;
  o.areas = 1;
  o.timesteps = 1;
  o.scenarios = {Scenario::learning};
  generate_synthetic(raw.path(), o);
  pipeline::PreprocessOptions po;
  po.scenarios = {Scenario::injury};
  EXPECT_EQ(code_of([&] { pipeline::preprocess(raw.path(), out.path(), po); }), ErrorCode::not_found);
}

}  // namespace
}  // namespace plastiscope::ingest
