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

// The OpenMP kernels against their serial references, forced onto several
// threads even on a single-core machine.

#include <omp.h>

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "plastiscope/kernels.hpp"

namespace plastiscope::kernels {
namespace {

class Kernels : public ::testing::Test {
 protected:
  void SetUp() override {
    saved_ = omp_get_max_threads();
    omp_set_num_threads(4);
  }
  void TearDown() override { omp_set_num_threads(saved_); }

 private:
  int saved_ = 1;
};

constexpr std::size_t kN = 100003;  // above the parallel threshold, odd

TEST_F(Kernels, CountAreaPairsMatchesSerial) {
  std::mt19937_64 rng(1);
  for (std::size_t areas : {1u, 8u, 300u}) {  // 300^2 cells takes the atomic path
    std::vector<std::uint16_t> area_of(5000);
    for (auto& a : area_of) a = static_cast<std::uint16_t>(rng() % areas);
    std::vector<Synapse> syn(kN);
    for (auto& s : syn) s = {static_cast<std::uint32_t>(rng() % 5000), static_cast<std::uint32_t>(rng() % 5000)};
    std::vector<std::uint32_t> par(areas * areas), ser(areas * areas);
    count_area_pairs(syn, area_of, areas, par);
    serial::count_area_pairs(syn, area_of, areas, ser);
    EXPECT_EQ(par, ser) << areas;
    std::uint64_t total = 0;
    for (auto c : par) total += c;
    EXPECT_EQ(total, kN);
  }
}

TEST_F(Kernels, MinMaxMatchesSerialAndSkipsNonFinite) {
  std::mt19937_64 rng(2);
  std::vector<float> f(kN);
  std::vector<std::uint32_t> u(kN);
  std::vector<std::int8_t> s(kN);
  for (std::size_t i = 0; i < kN; ++i) {
    f[i] = std::ldexp(float(rng() % 1000) - 500.f, int(rng() % 20) - 10);
    u[i] = static_cast<std::uint32_t>(rng());
    s[i] = static_cast<std::int8_t>(rng());
  }
  f[7] = std::numeric_limits<float>::quiet_NaN();
  f[9] = std::numeric_limits<float>::infinity();
  f[11] = -std::numeric_limits<float>::infinity();
  const MinMax a = min_max(std::span<const float>(f));
  const MinMax b = serial::min_max(std::span<const float>(f));
  EXPECT_EQ(a.min, b.min);
  EXPECT_EQ(a.max, b.max);
  EXPECT_EQ(a.finite, kN - 3);
  EXPECT_EQ(min_max(std::span<const std::uint32_t>(u)).max, serial::min_max(std::span<const std::uint32_t>(u)).max);
  EXPECT_EQ(min_max(std::span<const std::int8_t>(s)).min, serial::min_max(std::span<const std::int8_t>(s)).min);
  EXPECT_EQ(max_abs(std::span<const float>(f)), serial::max_abs(std::span<const float>(f)));
  EXPECT_EQ(max_abs(std::span<const std::int8_t>(s)), 128.0);
  EXPECT_EQ(min_max(std::span<const float>()).finite, 0u);
}

TEST_F(Kernels, HistogramMatchesSerial) {
  std::mt19937_64 rng(3);
  std::vector<float> f(kN);
  for (auto& x : f) x = float(rng() % 10000) / 1000.f - 1.f;  // some below range
  for (std::size_t bins : {1u, 3u, 20u, 257u}) {
    const auto edges = histogram_edges(0.0, 7.5, bins);
    std::vector<std::uint64_t> par(bins), ser(bins);
    histogram(std::span<const float>(f), edges, par);
    serial::histogram(std::span<const float>(f), edges, ser);
    EXPECT_EQ(par, ser) << bins;
  }
}

TEST_F(Kernels, BinIndexAgreesWithEdgeTable) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const double lo = double(rng() % 1000) / 7.0 - 50.0;
    const double hi = lo + double(1 + rng() % 1000) / 3.0;
    const std::size_t bins = 1 + rng() % 50;
    const auto edges = histogram_edges(lo, hi, bins);
    ASSERT_EQ(edges.back(), hi);
    for (int k = 0; k < 200; ++k) {
      // probe exact edges as well as random points
      const double v = k % 3 == 0 ? edges[rng() % edges.size()] : lo + (hi - lo) * double(rng() % 10001) / 10000.0;
      const std::size_t b = bin_index(v, edges);
      ASSERT_LT(b, bins);
      if (b + 1 < bins) {
        ASSERT_TRUE(edges[b] <= v && v < edges[b + 1]) << v;
      } else {
        ASSERT_TRUE(edges[b] <= v && v <= edges[b + 1]) << v;
      }
    }
  }
}

TEST_F(Kernels, SubtractMatchesSerialAndFlagsOverflow) {
  std::mt19937_64 rng(5);
  std::vector<std::uint32_t> a(kN), b(kN);
  std::vector<float> fa(kN), fb(kN);
  std::vector<std::uint8_t> ua(kN), ub(kN);
  for (std::size_t i = 0; i < kN; ++i) {
    a[i] = static_cast<std::uint32_t>(rng() % 100000);
    b[i] = static_cast<std::uint32_t>(rng() % 100000);
    fa[i] = float(rng() % 1000) / 3.f;
    fb[i] = float(rng() % 1000) / 7.f;
    ua[i] = rng() % 2;
    ub[i] = rng() % 2;
  }
  std::vector<std::int32_t> p(kN), s(kN);
  EXPECT_TRUE(subtract(a, b, p));
  EXPECT_TRUE(serial::subtract(a, b, s));
  EXPECT_EQ(p, s);
  EXPECT_EQ(p[10], std::int32_t(b[10]) - std::int32_t(a[10]));
  std::vector<float> pf(kN), sf(kN);
  subtract(fa, fb, pf);
  serial::subtract(fa, fb, sf);
  EXPECT_EQ(pf, sf);
  std::vector<std::int8_t> pi(kN), si(kN);
  subtract(ua, ub, pi);
  serial::subtract(ua, ub, si);
  EXPECT_EQ(pi, si);
  a[kN - 1] = 0;
  b[kN - 1] = 0xFFFFFFFFu;
  EXPECT_FALSE(subtract(a, b, p));
  EXPECT_FALSE(serial::subtract(a, b, s));
}

}  // namespace
}  // namespace plastiscope::kernels
