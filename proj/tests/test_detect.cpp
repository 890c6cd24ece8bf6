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
#include <cmath>

#include "amr/detect.hpp"
#include "amr/random.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace amr {
namespace {

using testing::kind_of;

TEST(FilterCount, KnownLayers) {
  EXPECT_EQ(filter_count(1, 5), 30);
  EXPECT_EQ(filter_count(10, 5), 75);
  EXPECT_EQ(filter_count(1, 1), 6);
  EXPECT_EQ(kind_of([] { filter_count(0, 5); }), ErrorKind::InvalidArgument);
}

TEST(Iou, Examples) {
  const Box a{0, 0, 10, 10};
  EXPECT_DOUBLE_EQ(iou(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou(a, Box{20, 20, 5, 5}), 0.0);
  EXPECT_NEAR(iou(a, Box{5, 0, 10, 10}), 1.0 / 3.0, 1e-12);
  // touching edges share no area
  EXPECT_DOUBLE_EQ(iou(a, Box{10, 0, 10, 10}), 0.0);
}

TEST(Iou, MatchesUnitCellCount) {
  Rng rng(17);
  for (int i = 0; i < 400; ++i) {
    int v[8];
    for (int k = 0; k < 8; k += 4) {
      v[k] = static_cast<int>(rng.below(40));
      v[k + 1] = static_cast<int>(rng.below(40));
      v[k + 2] = 1 + static_cast<int>(rng.below(24));
      v[k + 3] = 1 + static_cast<int>(rng.below(24));
    }
    const Box a{double(v[0]), double(v[1]), double(v[2]), double(v[3])};
    const Box b{double(v[4]), double(v[5]), double(v[6]), double(v[7])};
    const double want = oracle::iou_unit_cells(v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]);
    EXPECT_NEAR(iou(a, b), want, 1e-12);
    EXPECT_EQ(iou(a, b), iou(b, a));
  }
}

TEST(Iou, WidthHeightOnly) {
  EXPECT_DOUBLE_EQ(iou_wh(2, 2, 2, 2), 1.0);
  EXPECT_NEAR(iou_wh(2, 2, 1, 1), 0.25, 1e-12);
  EXPECT_NEAR(iou_wh(4, 1, 1, 4), 1.0 / 7.0, 1e-12);
}

GridSpec one_anchor_spec(int classes = 1) {
  GridSpec s;
  s.anchors = {Anchor{1, 1}};
  s.num_classes = classes;
  return s;
}

TEST(DecodeGrid, ZeroLogitsCell) {
  for (int classes : {1, 4}) {
    const auto spec = one_anchor_spec(classes);
    const PredictionTensor t({13, 13, static_cast<std::uint32_t>(spec.channels())});
    const auto boxes = decode_grid(t, spec, 0.0);
    ASSERT_EQ(boxes.size(), 169u);
    const auto& first = boxes.front();
    EXPECT_NEAR(first.box.center_x(), 16.0, 1e-9);
    EXPECT_NEAR(first.box.center_y(), 16.0, 1e-9);
    EXPECT_NEAR(first.box.w, 32.0, 1e-9);
    EXPECT_NEAR(first.box.h, 32.0, 1e-9);
    EXPECT_NEAR(first.confidence, 0.5 / classes, 1e-12);
    EXPECT_EQ(first.class_id, 0);
  }
}

TEST(DecodeGrid, StrongNegativeIsEmpty) {
  GridSpec spec;
  spec.anchors.assign(5, Anchor{1.5, 0.5});
  const PredictionTensor t({13, 13, 30}, -20.0f);
  EXPECT_TRUE(decode_grid(t, spec, 0.5).empty());
}

TEST(DecodeGrid, ClampsToImage) {
  auto spec = one_anchor_spec();
  PredictionTensor t({13, 13, 6}, -20.0f);
  t.at(0, 0, 2) = 3.0f;  // wide box in the corner cell
  t.at(0, 0, 3) = 3.0f;
  t.at(0, 0, 4) = 20.0f;
  t.at(0, 0, 5) = 0.0f;
  const auto boxes = decode_grid(t, spec, 0.5);
  ASSERT_EQ(boxes.size(), 1u);
  EXPECT_GE(boxes[0].box.x, 0.0);
  EXPECT_GE(boxes[0].box.y, 0.0);
  EXPECT_LE(boxes[0].box.right(), 416.0);
  EXPECT_LE(boxes[0].box.bottom(), 416.0);
}

TEST(DecodeGrid, RejectsWrongChannelCount) {
  GridSpec spec;
  spec.anchors.assign(5, Anchor{1, 1});
  EXPECT_EQ(kind_of([&] { decode_grid(PredictionTensor({13, 13, 29}), spec, 0.5); }),
            ErrorKind::ShapeMismatch);
  EXPECT_EQ(kind_of([&] { decode_grid(PredictionTensor({13, 12, 30}), spec, 0.5); }),
            ErrorKind::ShapeMismatch);
  EXPECT_EQ(kind_of([&] { decode_grid(PredictionTensor({13, 390}), spec, 0.5); }),
            ErrorKind::ShapeMismatch);
}

std::vector<DecodedBox> random_boxes(Rng& rng, std::size_t n, int classes) {
  std::vector<DecodedBox> out;
  for (std::size_t i = 0; i < n; ++i) {
    DecodedBox d;
    // coarse values so exact ties on confidence and position actually occur
    d.box = Box{double(rng.below(20)) * 5, double(rng.below(20)) * 5, 10.0 + double(rng.below(6)) * 10,
                10.0 + double(rng.below(6)) * 10};
    d.confidence = double(rng.below(10)) / 10.0;
    d.class_id = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
    out.push_back(d);
  }
  return out;
}

TEST(Nms, MatchesBruteForce) {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const auto boxes = random_boxes(rng, 1 + rng.below(50), 1 + static_cast<int>(rng.below(3)));
    const double thr = 0.1 + 0.8 * rng.uniform();
    EXPECT_EQ(nms(boxes, thr), oracle::nms_brute_force(boxes, thr));
  }
}

TEST(Nms, InputOrderDoesNotMatter) {
  Rng rng(5);
  auto boxes = random_boxes(rng, 40, 2);
  const auto want = nms(boxes, 0.5);
  for (int i = 0; i < 10; ++i) {
    rng.shuffle(std::span<DecodedBox>(boxes));
    EXPECT_EQ(nms(boxes, 0.5), want);
  }
}

TEST(Nms, IdenticalAndDisjoint) {
  const DecodedBox a{Box{0, 0, 10, 10}, 0.9, 0};
  DecodedBox b = a;
  b.confidence = 0.8;
  auto kept = nms({b, a}, 0.5);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].confidence, 0.9);

  const DecodedBox c{Box{50, 50, 10, 10}, 0.3, 0};
  EXPECT_EQ(nms({a, c}, 0.5).size(), 2u);

  // overlap across classes is never suppressed
  DecodedBox other = b;
  other.class_id = 1;
  EXPECT_EQ(nms({a, other}, 0.5).size(), 2u);
}

TEST(SelectCounter, Cases) {
  EXPECT_FALSE(select_counter({}).has_value());
  const DecodedBox one{Box{1, 2, 3, 4}, 0.4, 0};
  EXPECT_EQ(select_counter({one}), one);
  std::vector<DecodedBox> three;
  for (double c : {0.3, 0.9, 0.5}) three.push_back(DecodedBox{Box{c * 100, 0, 10, 10}, c, 0});
  EXPECT_EQ(select_counter(three)->confidence, 0.9);
}

TEST(Margin, ScalesAboutCenter) {
  const Box b{100, 100, 200, 50};
  EXPECT_EQ(scale_about_center(b, 0.2), (Box{80, 95, 240, 60}));
  const Box e = expand_margin(b, 0.2, 1000, 1000);
  EXPECT_NEAR(e.x, 80, 1e-12);
  EXPECT_NEAR(e.y, 95, 1e-12);
  EXPECT_NEAR(e.w, 240, 1e-12);
  EXPECT_NEAR(e.h, 60, 1e-12);
  EXPECT_EQ(expand_margin(b, 0.0, 1000, 1000), b);
}

TEST(Margin, ClampedAtCorner) {
  const Box e = expand_margin(Box{0, 0, 100, 40}, 0.2, 640, 480);
  EXPECT_EQ(e.x, 0.0);
  EXPECT_EQ(e.y, 0.0);
  EXPECT_NEAR(e.w, 110, 1e-12);
  EXPECT_NEAR(e.h, 44, 1e-12);
  const Box f = expand_margin(Box{600, 450, 40, 30}, 0.5, 640, 480);
  EXPECT_LE(f.right(), 640.0);
  EXPECT_LE(f.bottom(), 480.0);
  EXPECT_EQ(kind_of([] { expand_margin(Box{0, 0, 1, 1}, -0.1, 10, 10); }), ErrorKind::InvalidArgument);
}

TEST(Margin, UnclampedComposition) {
  // (1+a)(1+b) = 1 + (a + b + ab)
  const Box b{300, 200, 120, 40};
  const Box twice = scale_about_center(scale_about_center(b, 0.1), 0.2);
  const Box once = scale_about_center(b, 0.1 + 0.2 + 0.02);
  EXPECT_NEAR(twice.x, once.x, 1e-9);
  EXPECT_NEAR(twice.w, once.w, 1e-9);
  EXPECT_NEAR(twice.h, once.h, 1e-9);
}

TEST(KMeans, IdenticalBoxes) {
  const std::vector<Anchor> boxes(12, Anchor{3.25, 1.5});
  const auto anchors = kmeans_anchors(boxes, 1, 7);
  ASSERT_EQ(anchors.size(), 1u);
  EXPECT_EQ(anchors[0], (Anchor{3.25, 1.5}));
}

TEST(KMeans, EachBoxItsOwnCluster) {
  const std::vector<Anchor> boxes{{1, 1}, {2, 5}, {7, 3}, {4, 4}};
  auto anchors = kmeans_anchors(boxes, 4, 3);
  auto sorted_boxes = boxes;
  auto key = [](const Anchor& a, const Anchor& b) { return std::tie(a.pw, a.ph) < std::tie(b.pw, b.ph); };
  std::sort(anchors.begin(), anchors.end(), key);
  std::sort(sorted_boxes.begin(), sorted_boxes.end(), key);
  EXPECT_EQ(anchors, sorted_boxes);
}

double objective(const std::vector<Anchor>& boxes, const std::vector<Anchor>& centers) {
  double s = 0;
  for (const auto& b : boxes) {
    double best = 1e300;
    for (const auto& c : centers) best = std::min(best, 1.0 - iou_wh(b.pw, b.ph, c.pw, c.ph));
    s += best;
  }
  return s;
}

TEST(KMeans, TwoClustersLandOnMeans) {
  Rng rng(11);
  std::vector<Anchor> boxes;
  for (int i = 0; i < 6; ++i) boxes.push_back({1.0 + 0.1 * rng.uniform(), 0.5 + 0.05 * rng.uniform()});
  for (int i = 0; i < 6; ++i) boxes.push_back({8.0 + 0.5 * rng.uniform(), 3.0 + 0.2 * rng.uniform()});

  // Brute force over every two-way partition, scoring each by its member means.
  const std::size_t n = boxes.size();
  double best = 1e300;
  std::vector<Anchor> best_means;
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    double sw[2] = {0, 0}, sh[2] = {0, 0};
    int cnt[2] = {0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      const int g = (mask >> i) & 1;
      sw[g] += boxes[i].pw;
      sh[g] += boxes[i].ph;
      ++cnt[g];
    }
    const std::vector<Anchor> means{{sw[0] / cnt[0], sh[0] / cnt[0]}, {sw[1] / cnt[1], sh[1] / cnt[1]}};
    const double o = objective(boxes, means);
    if (o < best) {
      best = o;
      best_means = means;
    }
  }

  auto got = kmeans_anchors(boxes, 2, 1234);
  auto by_w = [](const Anchor& a, const Anchor& b) { return a.pw < b.pw; };
  std::sort(got.begin(), got.end(), by_w);
  std::sort(best_means.begin(), best_means.end(), by_w);
  for (int j = 0; j < 2; ++j) {
    EXPECT_NEAR(got[j].pw, best_means[j].pw, 1e-6);
    EXPECT_NEAR(got[j].ph, best_means[j].ph, 1e-6);
  }
}

TEST(KMeans, DeterministicAndMonotone) {
  Rng rng(3);
  std::vector<Anchor> boxes;
  for (int i = 0; i < 300; ++i) boxes.push_back({0.2 + 6 * rng.uniform(), 0.2 + 3 * rng.uniform()});
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto a = kmeans_anchors_detailed(boxes, 5, seed);
    const auto b = kmeans_anchors_detailed(boxes, 5, seed);
    EXPECT_EQ(a.anchors, b.anchors);
    EXPECT_EQ(a.assignment, b.assignment);
    ASSERT_EQ(a.objective_history.size(), static_cast<std::size_t>(a.iterations) + 1);
    for (std::size_t i = 1; i < a.objective_history.size(); ++i) {
      EXPECT_LE(a.objective_history[i], a.objective_history[i - 1]);
    }
    EXPECT_LE(a.iterations, 300);
  }
}

TEST(KMeans, Errors) {
  EXPECT_EQ(kind_of([] { kmeans_anchors({{1, 1}, {2, 2}}, 3, 0); }), ErrorKind::InsufficientBoxes);
  EXPECT_EQ(kind_of([] { kmeans_anchors({{1, 1}}, 0, 0); }), ErrorKind::InsufficientBoxes);
}

TEST(Anchors, JsonRoundTrip) {
  const std::vector<Anchor> a{{1.08, 1.19}, {3.42, 4.41}, {0.5, 0.25}};
  EXPECT_EQ(anchors_from_json(anchors_to_json(a)), a);
  EXPECT_EQ(kind_of([] { anchors_from_json("[[1]]"); }), ErrorKind::MalformedLine);
  EXPECT_EQ(kind_of([] { anchors_from_json("[[1, -2]]"); }), ErrorKind::MalformedLine);
}

}  // namespace
}  // namespace amr
