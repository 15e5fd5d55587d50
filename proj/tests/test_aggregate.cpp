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

#include <random>

#include <gtest/gtest.h>

#include "plastiscope/aggregate.hpp"
#include "test_util.hpp"

namespace plastiscope::aggregate {
namespace {

using kernels::Synapse;
using testing::code_of;
using testing::make_statics;
using testing::random_frame;

AreaConnectivity naive_counts(const std::vector<Synapse>& syn, const StaticTable& statics) {
  const std::size_t a = statics.area_count();
  AreaConnectivity out(a);
  for (std::size_t s = 0; s < a; ++s) {
    for (std::size_t t = 0; t < a; ++t) {
      for (const Synapse& x : syn) {
        if (statics.neuron(x.source).area_id == s && statics.neuron(x.target).area_id == t) ++out.at(s, t);
      }
    }
  }
  return out;
}

TEST(Aggregate, HandBuiltConnectivity) {
  const StaticTable st = make_statics(3, 2);  // clusters 0,2 -> area 0; cluster 1 -> area 1
  // target, source
  const std::vector<Synapse> syn = {{0, 10}, {1, 11}, {10, 0}, {20, 25}, {5, 5}};
  const AreaConnectivity c = aggregate_connectivity(syn, st);
  EXPECT_EQ(c.at(1, 0), 2u);
  EXPECT_EQ(c.at(0, 1), 1u);
  EXPECT_EQ(c.at(0, 0), 2u);  // includes the self-loop
  EXPECT_EQ(c.at(1, 1), 0u);
  EXPECT_EQ(c.total(), syn.size());
}

TEST(Aggregate, MatchesNestedLoopRecount) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const StaticTable st = make_statics(20 + trial, 1 + trial % 7);
    std::vector<Synapse> syn(3000);
    for (auto& s : syn) {
      s = {std::uint32_t(rng() % st.neuron_count()), std::uint32_t(rng() % st.neuron_count())};
    }
    EXPECT_EQ(aggregate_connectivity(syn, st), naive_counts(syn, st));
  }
}

TEST(Aggregate, BatchedAccumulationEqualsOneShot) {
  const StaticTable st = make_statics(30, 4);
  std::mt19937_64 rng(3);
  std::vector<Synapse> syn(1000);
  for (auto& s : syn) s = {std::uint32_t(rng() % 300), std::uint32_t(rng() % 300)};
  AreaConnectivity acc(4);
  for (std::size_t i = 0; i < syn.size(); i += 77) {
    const std::size_t n = std::min<std::size_t>(77, syn.size() - i);
    accumulate_connectivity(std::span(syn).subspan(i, n), st, acc, i);
  }
  EXPECT_EQ(acc, aggregate_connectivity(syn, st));
}

TEST(Aggregate, UnknownNeuronIsNamed) {
  const StaticTable st = make_statics(1, 1);
  const std::vector<Synapse> syn = {{1, 2}, {3, 10}};
  try {
    aggregate_connectivity(syn, st);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::validation);
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos) << e.what();
  }
}

TEST(Aggregate, LocalRangeSkipsNonFinite) {
  TimestepFrame f = random_frame(50, 1, 4);
  f.calcium[3] = std::numeric_limits<float>::quiet_NaN();
  f.calcium[4] = 9.0f;
  f.calcium[5] = -std::numeric_limits<float>::infinity();
  const PropertyRange r = local_range(f, NeuronProperty::calcium);
  EXPECT_EQ(r.max, 9.0);
  EXPECT_GE(r.min, 0.0);
  EXPECT_EQ(code_of([&] { local_range(f, NeuronProperty::area); }), ErrorCode::domain);
  for (auto& v : f.grown_axons) v = std::numeric_limits<float>::quiet_NaN();
  EXPECT_EQ(code_of([&] { local_range(f, NeuronProperty::grown_axons); }), ErrorCode::domain);
}

TEST(Aggregate, GlobalRangeContainsEveryLocalRange) {
  std::vector<TimestepFrame> frames;
  for (std::uint32_t t = 0; t < 8; ++t) frames.push_back(random_frame(100, 2, t, {Scenario::injury, t}));
  for (NeuronProperty p : kFrameProperties) {
    const PropertyRange g = global_range(frames, p);
    for (const auto& f : frames) EXPECT_TRUE(g.contains(local_range(f, p)));
  }
  EXPECT_EQ(code_of([&] { global_range({}, NeuronProperty::calcium); }), ErrorCode::domain);
}

TEST(Aggregate, DiffOfIdenticalFramesIsZero) {
  const TimestepFrame f = random_frame(100, 4, 5);
  const DiffFrame d = diff_frames(f, f);
  for (NeuronProperty p : kFrameProperties) {
    std::visit([](auto s) {
      for (auto v : s) EXPECT_EQ(v, 0);
    }, diff_column(d, p));
  }
  for (auto v : d.connectivity_delta) EXPECT_EQ(v, 0);
}

TEST(Aggregate, DiffIsAntisymmetric) {
  const TimestepFrame a = random_frame(100, 4, 5, {Scenario::learning, 0});
  const TimestepFrame b = random_frame(100, 4, 6, {Scenario::injury, 100});
  const DiffFrame ab = diff_frames(a, b), ba = diff_frames(b, a);
  EXPECT_EQ(ab.base, a.key);
  EXPECT_EQ(ab.other, b.key);
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_EQ(ab.calcium[i], b.calcium[i] - a.calcium[i]);
    EXPECT_EQ(ab.calcium[i], -ba.calcium[i]);
    EXPECT_EQ(ab.fired[i], -ba.fired[i]);
    EXPECT_EQ(ab.synapses_in[i], -ba.synapses_in[i]);
  }
  for (std::size_t k = 0; k < ab.connectivity_delta.size(); ++k) {
    EXPECT_EQ(ab.connectivity_delta[k], -ba.connectivity_delta[k]);
  }
}

TEST(Aggregate, MissingConnectivityDiffsAgainstZeros) {
  const TimestepFrame a = random_frame(10, 2, 1);
  TimestepFrame b = random_frame(10, 2, 2);
  b.connectivity_missing = true;
  const DiffFrame d = diff_frames(a, b);
  ASSERT_EQ(d.area_count, 2u);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(d.connectivity_delta[k], -std::int32_t(a.connectivity.counts()[k]));
  }
}

TEST(Aggregate, DiffRejectsShapeMismatchAndOverflow) {
  EXPECT_EQ(code_of([] { diff_frames(random_frame(10, 2, 1), random_frame(20, 2, 1)); }),
            ErrorCode::validation);
  EXPECT_EQ(code_of([] { diff_frames(random_frame(10, 2, 1), random_frame(10, 3, 1)); }),
            ErrorCode::validation);
  TimestepFrame a = random_frame(10, 1, 1), b = a;
  a.synapses_in[0] = 0;
  b.synapses_in[0] = 0xFFFFFFFFu;
  EXPECT_EQ(code_of([&] { diff_frames(a, b); }), ErrorCode::validation);
}

TEST(Aggregate, ColorScaleIsSymmetric) {
  const std::vector<float> v = {-0.5f, 2.0f, std::numeric_limits<float>::quiet_NaN()};
  const PropertyRange r = diff_color_scale(std::span<const float>(v));
  EXPECT_EQ(r.min, -2.0);
  EXPECT_EQ(r.max, 2.0);
  const std::vector<std::int32_t> z(5, 0);
  EXPECT_EQ(diff_color_scale(std::span<const std::int32_t>(z)), (PropertyRange{0, 0}));
  EXPECT_EQ(diff_color_scale(std::span<const float>()), (PropertyRange{0, 0}));
}

TEST(Aggregate, Classify) {
  EXPECT_EQ(classify(-3), Change::lost);
  EXPECT_EQ(classify(0), Change::unchanged);
  EXPECT_EQ(classify(7), Change::gained);
}

}  // namespace
}  // namespace plastiscope::aggregate
