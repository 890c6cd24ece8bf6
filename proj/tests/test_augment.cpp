// Copyright 2026 The amrkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "amr/augment.hpp"
#include "amr/detect.hpp"
#include "amr/random.hpp"
#include "amr/synthetic.hpp"
#include "test_util.hpp"

namespace amr {
namespace {

using testing::kind_of;

MeterAnnotation with_reading(std::string id, std::string reading) {
  auto m = make_synthetic_meters(1, 77).front().annotation;
  m.image_id = std::move(id);
  m.reading = std::move(reading);
  return m;
}

// Counts produced by using every one of the 120 arrangements exactly once.
ClassPositionCounts enumerate_all(const std::string& reading) {
  ClassPositionCounts c{};
  Permutation p{0, 1, 2, 3, 4};
  do {
    for (int i = 0; i < 5; ++i) ++c[reading[p[i]] - '0'][i];
  } while (std::next_permutation(p.begin(), p.end()));
  return c;
}

TEST(Plan, DistinctDigitsBalancePerfectly) {
  const std::vector<MeterAnnotation> pool{with_reading("a", "01234")};
  const auto plans = plan_permutations(pool, 120, 9);
  ASSERT_EQ(plans.size(), 120u);
  const auto counts = count_plans(plans, pool);
  EXPECT_EQ(counts, enumerate_all("01234"));
  for (int c = 0; c < 5; ++c) {
    for (int p = 0; p < 5; ++p) EXPECT_EQ(counts[c][p], 24);
  }
  std::set<Permutation> distinct;
  for (const auto& pl : plans) distinct.insert(pl.permutation);
  EXPECT_EQ(distinct.size(), 120u);
}

TEST(Plan, RepeatedDigitSource) {
  const std::vector<MeterAnnotation> pool{with_reading("z", "00000")};
  const auto plans = plan_permutations(pool, 37, 1);
  for (const auto& pl : plans) EXPECT_EQ(permuted_reading("00000", pl.permutation), "00000");
  const auto counts = count_plans(plans, pool);
  for (int p = 0; p < 5; ++p) EXPECT_EQ(counts[0][p], 37);
}

TEST(Plan, Deterministic) {
  std::vector<MeterAnnotation> pool;
  for (const auto& m : make_synthetic_meters(12, 5)) pool.push_back(m.annotation);
  EXPECT_EQ(plan_permutations(pool, 500, 42), plan_permutations(pool, 500, 42));
  auto reversed = pool;
  std::reverse(reversed.begin(), reversed.end());
  EXPECT_EQ(plan_permutations(reversed, 500, 42), plan_permutations(pool, 500, 42));
}

TEST(Plan, PermutationsAreComplete) {
  const auto& all = all_permutations();
  EXPECT_EQ(all.size(), 120u);
  EXPECT_EQ(all.front(), (Permutation{0, 1, 2, 3, 4}));
  EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
  EXPECT_EQ(permuted_reading("04063", {4, 3, 2, 1, 0}), "36040");
}

// Twenty counters whose readings hold every digit class ten times.
std::vector<MeterAnnotation> balanced_pool(std::uint64_t seed) {
  std::vector<char> digits;
  for (int c = 0; c < 10; ++c) digits.insert(digits.end(), 10, static_cast<char>('0' + c));
  Rng rng(seed);
  rng.shuffle(std::span<char>(digits));
  std::vector<MeterAnnotation> pool;
  const auto meters = make_synthetic_meters(20, seed);
  for (int i = 0; i < 20; ++i) {
    auto a = meters[i].annotation;
    a.reading.assign(digits.begin() + 5 * i, digits.begin() + 5 * i + 5);
    pool.push_back(a);
  }
  return pool;
}

TEST(Plan, ToyPoolStaysBalanced) {
  const auto pool = balanced_pool(3);
  const auto counts = count_plans(plan_permutations(pool, 2000, 8), pool);
  for (int c = 0; c < 10; ++c) {
    const auto [lo, hi] = std::minmax_element(counts[c].begin(), counts[c].end());
    ASSERT_GT(*lo, 0);
    EXPECT_LE(static_cast<double>(*hi) / static_cast<double>(*lo), 1.5) << "class " << c;
  }
  for (int p = 0; p < 5; ++p) {
    std::int64_t lo = INT64_MAX, hi = 0;
    for (int c = 0; c < 10; ++c) {
      lo = std::min(lo, counts[c][p]);
      hi = std::max(hi, counts[c][p]);
    }
    EXPECT_LE(static_cast<double>(hi) / static_cast<double>(lo), 1.5) << "position " << p;
  }
}

TEST(Plan, LargeTotalAccepted) {
  const auto pool = balanced_pool(4);
  const auto plans = plan_permutations(pool, 300000, 1);
  EXPECT_EQ(plans.size(), 300000u);
}

TEST(Plan, Errors) {
  EXPECT_EQ(kind_of([] { plan_permutations({}, 10, 0); }), ErrorKind::EmptyDataset);
  const std::vector<MeterAnnotation> pool{with_reading("a", "01234")};
  EXPECT_EQ(kind_of([&] { count_plans({{"missing", Permutation{0, 1, 2, 3, 4}}}, pool); }),
            ErrorKind::NotFound);
}

CounterPatch patch_for(const SyntheticMeter& m) {
  const Raster full = render_synthetic_image(m);
  const Box around = expand_margin(m.annotation.counter, 0.2, full.width(), full.height());
  const int x0 = static_cast<int>(around.x), y0 = static_cast<int>(around.y);
  const int w = static_cast<int>(around.right()) - x0, h = static_cast<int>(around.bottom()) - y0;
  const auto& c = m.annotation.counter;
  return CounterPatch{crop(full, x0, y0, w, h), Box{c.x - x0, c.y - y0, c.w, c.h}};
}

TEST(Render, IdentityLeavesCounterUntouched) {
  const auto m = make_synthetic_meters(1, 12).front();
  const auto patch = patch_for(m);
  const auto s = render_sample(m.annotation, patch, {0, 1, 2, 3, 4}, JitterRanges::identity(), 5);
  const auto& cb = patch.counter;
  const Raster want = crop(patch.pixels, static_cast<int>(std::lround(cb.x)), static_cast<int>(std::lround(cb.y)),
                           static_cast<int>(std::lround(cb.right())) - static_cast<int>(std::lround(cb.x)),
                           static_cast<int>(std::lround(cb.bottom())) - static_cast<int>(std::lround(cb.y)));
  EXPECT_EQ(s.image, want);
  EXPECT_EQ(s.reading, m.annotation.reading);
  EXPECT_EQ(s.applied.brightness, 1.0);
  EXPECT_EQ(s.applied.rotation_deg, 0.0);
}

TEST(Render, BrightnessDoublesAndClamps) {
  const Raster gray(8, 4, 3, 128);
  const Raster out = scale_brightness(gray, 2.0);
  for (auto v : out.pixels()) EXPECT_EQ(v, 255);
  const Raster dim(8, 4, 3, 60);
  const Raster brighter = scale_brightness(dim, 2.0);
  for (auto v : brighter.pixels()) EXPECT_EQ(v, 120);
  EXPECT_EQ(scale_brightness(dim, 1.0), dim);
}

TEST(Render, SwappedDigitsMoveTheirPixels) {
  const auto m = make_synthetic_meters(1, 31).front();
  const auto patch = patch_for(m);
  const Permutation swap{1, 0, 2, 3, 4};
  const auto s = render_sample(m.annotation, patch, swap, JitterRanges::identity(), 5);
  const auto id = render_sample(m.annotation, patch, {0, 1, 2, 3, 4}, JitterRanges::identity(), 5);
  EXPECT_EQ(s.reading, permuted_reading(m.annotation.reading, swap));
  if (m.annotation.reading[0] != m.annotation.reading[1]) EXPECT_NE(s.image, id.image);
}

TEST(Render, PropertyRangesAndReading) {
  const auto meters = make_synthetic_meters(4, 2);
  std::vector<CounterPatch> patches;
  for (const auto& m : meters) patches.push_back(patch_for(m));
  const JitterRanges ranges;
  const auto& perms = all_permutations();
  for (int i = 0; i < 1000; ++i) {
    const auto& m = meters[i % 4];
    const auto& perm = perms[(i * 37) % 120];
    const auto s = render_sample(m.annotation, patches[i % 4], perm, ranges, sample_seed(99, i));
    ASSERT_TRUE(ranges.brightness.contains(s.applied.brightness));
    ASSERT_TRUE(ranges.rotation_deg.contains(s.applied.rotation_deg));
    for (int k = 0; k < 4; ++k) {
      ASSERT_TRUE(ranges.crop.contains(s.applied.crop[k]));
      ASSERT_LE(s.applied.crop_effective[k], s.applied.crop[k] + 1e-12);
    }
    for (int p = 0; p < 5; ++p) ASSERT_EQ(s.reading[p], m.annotation.reading[perm[p]]);
    ASSERT_FALSE(s.image.empty());
    for (const auto& d : s.digits) {
      ASSERT_GE(d.x, 0.0);
      ASSERT_LE(d.right(), s.image.width() + 1e-9);
    }
  }
}

TEST(Render, PreservesDigitMultiset) {
  Rng rng(6);
  for (int i = 0; i < 500; ++i) {
    std::string r(5, '0');
    for (auto& ch : r) ch = static_cast<char>('0' + rng.below(10));
    const auto& perm = all_permutations()[rng.below(120)];
    auto a = permuted_reading(r, perm);
    std::sort(a.begin(), a.end());
    std::sort(r.begin(), r.end());
    EXPECT_EQ(a, r);
  }
}

TEST(Generate, EmptyAndDeterministic) {
  const auto meters = make_synthetic_meters(3, 8);
  std::vector<MeterAnnotation> pool;
  std::map<std::string, CounterPatch> patches;
  for (const auto& m : meters) {
    pool.push_back(m.annotation);
    patches.emplace(m.annotation.image_id, patch_for(m));
  }
  EXPECT_TRUE(generate_set(pool, patches, 0, {}, 1).empty());
  const auto a = generate_set(pool, patches, 24, {}, 3, 1);
  const auto b = generate_set(pool, patches, 24, {}, 3, 4);
  ASSERT_EQ(a.size(), 24u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].image, b[i].image);
    EXPECT_EQ(a[i].reading, b[i].reading);
    EXPECT_NO_THROW(check_annotation(a[i].annotation("gen")));
  }
  patches.erase(pool.front().image_id);
  EXPECT_EQ(kind_of([&] { generate_set(pool, patches, 24, {}, 3, 2); }), ErrorKind::NotFound);
}

TEST(Jitter, RangeValidation) {
  JitterRanges r;
  r.rotation_deg = {5, -5};
  EXPECT_EQ(kind_of([&] { r.validate(); }), ErrorKind::EmptyRange);
  r = {};
  r.brightness = {0, 1};
  EXPECT_EQ(kind_of([&] { r.validate(); }), ErrorKind::EmptyRange);
  EXPECT_NO_THROW(JitterRanges{}.validate());
}

}  // namespace
}  // namespace amr
