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

#include <cmath>

#include "amr/random.hpp"
#include "amr/recognize.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace amr {
namespace {

using testing::kind_of;

// A one-row grid is enough to exercise assembly: each cell holds at most one digit.
GridSpec strip_spec() {
  GridSpec s;
  s.grid_w = 10;
  s.grid_h = 1;
  s.anchors = {Anchor{0.8, 0.8}};
  s.num_classes = 10;
  s.input_w = 100;
  s.input_h = 10;
  return s;
}

struct Placed {
  int cell;
  int digit;
  float objectness = 10.0f;
};

PredictionTensor strip_tensor(const std::vector<Placed>& digits) {
  PredictionTensor t({1, 10, 15}, -20.0f);
  for (const auto& d : digits) {
    for (int k = 0; k < 4; ++k) t.at(0, d.cell, k) = 0.0f;
    t.at(0, d.cell, 4) = d.objectness;
    t.at(0, d.cell, 5 + d.digit) = 10.0f;
  }
  return t;
}

TEST(CrNet, TooFewDigitsRejected) {
  const auto t = strip_tensor({{0, 1}, {2, 2}, {4, 3}, {6, 4}});
  const auto r = decode_crnet(t, strip_spec(), AssemblyMode::Fixed5, 0.5);
  EXPECT_EQ(r.status, ReadingStatus::RejectedTooFew);
  EXPECT_TRUE(r.reading.empty());
}

TEST(CrNet, AssemblesLeftToRight) {
  // listed out of order on purpose
  const auto t = strip_tensor({{7, 6}, {1, 0}, {9, 3}, {3, 4}, {5, 0}});
  const auto r = decode_crnet(t, strip_spec(), AssemblyMode::Fixed5, 0.5);
  EXPECT_EQ(r.status, ReadingStatus::Accepted);
  EXPECT_EQ(r.reading, "04063");
  ASSERT_EQ(r.digit_confidences.size(), 5u);
  for (double c : r.digit_confidences) EXPECT_GT(c, 0.99);
}

TEST(CrNet, Fixed5KeepsTopFive) {
  std::vector<Placed> digits{{0, 1}, {2, 2}, {4, 3}, {6, 4}, {8, 5}};
  digits.push_back({9, 9, 1.0f});  // weak sixth detection
  const auto r = decode_crnet(strip_tensor(digits), strip_spec(), AssemblyMode::Fixed5, 0.5);
  EXPECT_EQ(r.reading, "12345");
}

TEST(CrNet, VariableModeReadsSixDigits) {
  const auto t = strip_tensor({{0, 1}, {1, 2}, {3, 3}, {5, 4}, {7, 5}, {9, 6}});
  const auto r = decode_crnet(t, strip_spec(), AssemblyMode::Variable, 0.5);
  EXPECT_EQ(r.status, ReadingStatus::Accepted);
  EXPECT_EQ(r.reading, "123456");
  const auto few = decode_crnet(strip_tensor({{0, 7}, {4, 8}}), strip_spec(), AssemblyMode::Variable, 0.5);
  EXPECT_EQ(few.reading, "78");
  EXPECT_EQ(few.status, ReadingStatus::Accepted);
}

TEST(CrNet, ReadingOrderIgnoresInputOrder) {
  Rng rng(8);
  std::vector<DecodedBox> boxes;
  for (int i = 0; i < 7; ++i) {
    boxes.push_back(DecodedBox{Box{double(i) * 20, double(rng.below(5)), 10, 20}, 0.9, i});
  }
  const auto want = reading_order(boxes);
  for (int i = 0; i < 20; ++i) {
    rng.shuffle(std::span<DecodedBox>(boxes));
    EXPECT_EQ(reading_order(boxes), want);
  }
  for (int i = 0; i < 7; ++i) EXPECT_EQ(want[i].class_id, i);
}

TEST(CrNet, Errors) {
  auto spec = strip_spec();
  EXPECT_EQ(kind_of([&] { decode_crnet(strip_tensor({}), spec, AssemblyMode::Fixed5, 1.5); }),
            ErrorKind::InvalidArgument);
  spec.num_classes = 9;
  EXPECT_EQ(kind_of([&] { decode_crnet(strip_tensor({}), spec, AssemblyMode::Fixed5, 0.5); }),
            ErrorKind::ShapeMismatch);
}

PredictionTensor rows(const std::vector<std::vector<double>>& values) {
  std::vector<float> data;
  for (const auto& r : values) data.insert(data.end(), r.begin(), r.end());
  return PredictionTensor({static_cast<std::uint32_t>(values.size()),
                           static_cast<std::uint32_t>(values.front().size())},
                          std::move(data));
}

TEST(MultiTask, OneHot) {
  std::vector<std::vector<double>> v(5, std::vector<double>(10, 0.0));
  const int digits[5] = {0, 4, 0, 6, 3};
  for (int p = 0; p < 5; ++p) v[p][digits[p]] = 1.0;
  // one-hot probabilities are not logits; a large logit gap gives the same reading
  std::vector<std::vector<double>> logits(5, std::vector<double>(10, -1000.0));
  for (int p = 0; p < 5; ++p) logits[p][digits[p]] = 0.0;
  const auto r = decode_multitask(rows(logits));
  EXPECT_EQ(r.reading, "04063");
  for (double c : r.digit_confidences) EXPECT_DOUBLE_EQ(c, 1.0);
  EXPECT_EQ(decode_multitask(rows(v)).reading, "04063");
}

TEST(MultiTask, UniformTiesPickLowestClass) {
  const auto r = decode_multitask(rows(std::vector<std::vector<double>>(5, std::vector<double>(10, 0.3))));
  EXPECT_EQ(r.reading, "00000");
  for (double c : r.digit_confidences) EXPECT_NEAR(c, 0.1, 1e-12);
}

TEST(MultiTask, SoftmaxMatchesReference) {
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::vector<double>> v(5, std::vector<double>(10));
    for (auto& r : v) {
      for (auto& x : r) x = static_cast<float>(rng.uniform(-8, 8));
    }
    const auto got = decode_multitask(rows(v));
    const auto shifted = [&] {
      auto w = v;
      for (auto& r : w) {
        for (auto& x : r) x = static_cast<float>(x + 50.0);
      }
      return decode_multitask(rows(w));
    }();
    for (int p = 0; p < 5; ++p) {
      const auto probs = oracle::softmax_reference(v[p]);
      const int arg = got.reading[p] - '0';
      for (int c = 0; c < 10; ++c) EXPECT_LE(v[p][c], v[p][arg]);
      EXPECT_NEAR(got.digit_confidences[p], probs[arg], 1e-9);
    }
    EXPECT_EQ(shifted.reading, got.reading);
  }
}

TEST(MultiTask, WrongShape) {
  EXPECT_EQ(kind_of([] { decode_multitask(PredictionTensor({4, 10})); }), ErrorKind::ShapeMismatch);
  EXPECT_EQ(kind_of([] { decode_multitask(PredictionTensor({5, 11})); }), ErrorKind::ShapeMismatch);
}

std::vector<std::vector<double>> frames_for(const std::vector<int>& labels, double peak = 0.9) {
  std::vector<std::vector<double>> out;
  for (int l : labels) {
    std::vector<double> row(11, (1.0 - peak) / 10.0);
    row[l] = peak;
    out.push_back(row);
  }
  return out;
}

TEST(Ctc, AllBlankIsEmpty) {
  const auto m = CtcFrameMatrix::from_probabilities(rows(frames_for(std::vector<int>(40, 10))));
  const auto r = decode_ctc_greedy(m);
  EXPECT_EQ(r.reading, "");
  EXPECT_TRUE(r.digit_confidences.empty());
  EXPECT_EQ(r.status, ReadingStatus::Accepted);
}

TEST(Ctc, CollapseThenDropBlank) {
  auto f = frames_for({1, 1, 10, 1, 0});
  f[1] = std::vector<double>(11, 0.005);
  f[1][1] = 0.95;
  const auto r = decode_ctc_greedy(CtcFrameMatrix::from_probabilities(rows(f)));
  EXPECT_EQ(r.reading, "110");
  ASSERT_EQ(r.digit_confidences.size(), 3u);
  EXPECT_NEAR(r.digit_confidences[0], 0.95, 1e-6);  // max over the collapsed run
  EXPECT_NEAR(r.digit_confidences[1], 0.9, 1e-6);
}

TEST(Ctc, MatchesCollapseReference) {
  Rng rng(404);
  for (int trial = 0; trial < 10000; ++trial) {
    const int frames = 1 + static_cast<int>(rng.below(40));
    std::vector<std::vector<double>> f;
    for (int i = 0; i < frames; ++i) {
      std::vector<double> row(11);
      // few distinct levels so repeated labels and blanks are common
      double s = 0;
      for (auto& x : row) s += (x = 1.0 + double(rng.below(4)));
      row[rng.below(11)] += 5.0;
      s += 5.0;
      for (auto& x : row) x /= s;
      f.push_back(row);
    }
    const auto t = rows(f);
    // the reference sees the same float-rounded values the decoder does
    std::vector<std::vector<double>> as_read(frames, std::vector<double>(11));
    for (int i = 0; i < frames; ++i) {
      for (int l = 0; l < 11; ++l) as_read[i][l] = t.at(i, l);
    }
    EXPECT_EQ(decode_ctc_greedy(CtcFrameMatrix::from_probabilities(t)).reading,
              oracle::ctc_collapse_reference(as_read));
  }
}

TEST(Ctc, FromLogitsAgreesWithProbabilities) {
  std::vector<std::vector<double>> logits{{0, 0, 5, 0, 0, 0, 0, 0, 0, 0, 1}, {0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 9}};
  const auto m = CtcFrameMatrix::from_logits(rows(logits));
  EXPECT_EQ(decode_ctc_greedy(m).reading, "2");
  double s = 0;
  for (int l = 0; l < 11; ++l) s += m.prob(0, l);
  EXPECT_NEAR(s, 1.0, 1e-12);
}

TEST(Ctc, RejectsNonDistribution) {
  auto f = frames_for({1, 2});
  f[0][3] += 0.1;
  EXPECT_EQ(kind_of([&] { CtcFrameMatrix::from_probabilities(rows(f)); }), ErrorKind::NonDistribution);
  f = frames_for({1, 2});
  f[1][4] = -0.01;
  f[1][5] += 0.01;
  EXPECT_EQ(kind_of([&] { CtcFrameMatrix::from_probabilities(rows(f)); }), ErrorKind::NonDistribution);
  EXPECT_EQ(kind_of([] { CtcFrameMatrix::from_probabilities(PredictionTensor({3, 10}, 0.1f)); }),
            ErrorKind::ShapeMismatch);
}

}  // namespace
}  // namespace amr
