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

#include <gtest/gtest.h>

#include "plastiscope/model.hpp"
#include "test_util.hpp"

namespace plastiscope {
namespace {

TEST(Model, ScenarioAndPropertyNames) {
  EXPECT_EQ(kAllProperties.size(), 9u);
  for (Scenario s : kAllScenarios) EXPECT_EQ(parse_scenario(scenario_id(s)), s);
  for (NeuronProperty p : kAllProperties) EXPECT_EQ(parse_property(property_name(p)), p);
  EXPECT_EQ(scenario_display_name(Scenario::no_initial_connectivity), "No initial connectivity");
  EXPECT_EQ(scenario_display_name(Scenario::calcium_targets), "Per-neuron calcium targets");
  EXPECT_FALSE(parse_scenario("bogus"));
  EXPECT_FALSE(parse_property("weight"));
}

TEST(Model, StaticTableEnforcesClusterInvariants) {
  const StaticTable t = testing::make_statics(3, 2);
  EXPECT_EQ(t.neuron_count(), 30u);
  EXPECT_EQ(t.cluster_count(), 3u);
  for (const NeuronStatic& n : t.neurons()) {
    EXPECT_EQ(n.neuron_id, n.cluster_id * kClusterSize + n.cluster_slot);
  }
  std::vector<NeuronStatic> bad(t.neurons().begin(), t.neurons().end());
  bad[3].area_id = 1;  // cluster 0 now spans two areas
  EXPECT_THROW(StaticTable(bad, {"a", "b"}), Error);
  bad = {t.neurons().begin(), t.neurons().begin() + 9};
  EXPECT_THROW(StaticTable(bad, {"a", "b"}), Error);
  EXPECT_THROW(t.neuron(30), Error);
}

TEST(Model, PropertyValueLooksUpColumns) {
  const StaticTable statics = testing::make_statics(1, 1);
  TimestepFrame f = testing::random_frame(10, 1, 1);
  f.calcium[3] = 0.7f;
  f.fired[4] = 0;
  EXPECT_EQ(property_value(f, statics, NeuronProperty::calcium, 3), 0.7f);
  EXPECT_EQ(property_value(f, statics, NeuronProperty::fired, 4), 0.0);
  EXPECT_EQ(property_value(f, statics, NeuronProperty::area, 4), 0.0);
  try {
    property_value(f, statics, NeuronProperty::calcium, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::bounds);
  }
}

TEST(Model, FrameValidation) {
  TimestepFrame f = testing::random_frame(10, 2, 1);
  EXPECT_NO_THROW(f.validate());
  f.fired_fraction[2] = 1.5f;
  EXPECT_THROW(f.validate(), Error);
  f = testing::random_frame(10, 2, 1);
  f.fired[0] = 2;
  EXPECT_THROW(f.validate(), Error);
  f = testing::random_frame(10, 2, 1);
  f.synapses_in.pop_back();
  EXPECT_THROW(f.validate(), Error);
}

TEST(Model, FrameEqualityIsBitwise) {
  TimestepFrame a = testing::random_frame(10, 2, 1);
  TimestepFrame b = a;
  EXPECT_EQ(a, b);
  a.calcium[0] = 0.0f;
  b.calcium[0] = -0.0f;
  EXPECT_FALSE(a == b);
  a.calcium[0] = b.calcium[0] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_EQ(a, b);
}

TEST(Model, CatalogValidation) {
  ScenarioCatalog c;
  c.scenarios.push_back({Scenario::learning, "Learning", {0, 100}, {}});
  EXPECT_NO_THROW(c.validate());
  EXPECT_TRUE(c.contains({Scenario::learning, 100}));
  EXPECT_FALSE(c.contains({Scenario::learning, 50}));
  EXPECT_FALSE(c.contains({Scenario::injury, 0}));
  c.scenarios.push_back(c.scenarios.front());
  EXPECT_THROW(c.validate(), Error);
  c.scenarios.pop_back();
  c.scenarios[0].timesteps = {100, 0};
  EXPECT_THROW(c.validate(), Error);
  c.scenarios[0].timesteps = {0};
  c.scenarios[0].global_ranges[NeuronProperty::calcium] = {2, 1};
  EXPECT_THROW(c.validate(), Error);
}

TEST(Model, DiffColumnRejectsArea) {
  DiffFrame d;
  EXPECT_THROW(diff_column(d, NeuronProperty::area), Error);
}

}  // namespace
}  // namespace plastiscope
