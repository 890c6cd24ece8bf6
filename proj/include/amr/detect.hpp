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

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "amr/geometry.hpp"
#include "amr/tensor.hpp"

namespace amr {

/// Prior box size in grid-cell units.
struct Anchor {
  double pw = 1.0;
  double ph = 1.0;

  friend bool operator==(const Anchor&, const Anchor&) = default;
};

/// Output layout of an anchor-based grid detector. The tensor is
/// [grid_h, grid_w, A * (C + 5)], each anchor slot laid out as
/// (tx, ty, tw, th, objectness, class logits...).
struct GridSpec {
  int grid_w = 13;
  int grid_h = 13;
  std::vector<Anchor> anchors;
  int num_classes = 1;
  int input_w = 416;
  int input_h = 416;

  int channels() const;
  /// Throws ShapeMismatch on non-positive sizes or anchors.
  void validate() const;
};

/// Channels in the final convolution: (classes + 5) * anchors.
int filter_count(int num_classes, int num_anchors);

struct DecodedBox {
  Box box;
  double confidence = 0.0;
  int class_id = 0;

  friend bool operator==(const DecodedBox&, const DecodedBox&) = default;
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

/// Decodes every (cell, anchor) slot whose confidence, objectness times the best
/// class probability, reaches `conf_threshold`. Boxes are in input-image pixels,
/// clamped to the input bounds; slots that clamp to nothing are dropped.
std::vector<DecodedBox> decode_grid(const PredictionTensor& t, const GridSpec& spec,
                                    double conf_threshold);

/// Strict ordering used by NMS and counter selection: confidence descending,
/// then class id, x, y, w, h ascending.
bool ranks_before(const DecodedBox& a, const DecodedBox& b);

/// Greedy per-class suppression. Kept boxes are returned in rank order.
std::vector<DecodedBox> nms(std::vector<DecodedBox> boxes, double iou_threshold);

/// Highest-ranked box, or nullopt when nothing was detected.
std::optional<DecodedBox> select_counter(const std::vector<DecodedBox>& boxes);

/// Scales `b` by (1 + m) about its center without clamping.
Box scale_about_center(const Box& b, double m);

/// Scales by (1 + m) about the center, then clamps to the image.
Box expand_margin(const Box& b, double m, double image_w, double image_h);

struct KMeansResult {
  std::vector<Anchor> anchors;
  std::vector<int> assignment;
  /// Mean (1 - IoU) to the assigned anchor after each iteration; index 0 is the seeding.
  std::vector<double> objective_history;
  int iterations = 0;
};

/// k-means over (w, h) pairs with distance 1 - IoU of co-centered boxes.
/// Farthest-point seeding from a seeded first pick; stops at an assignment
/// fixpoint or after 300 iterations. Throws InsufficientBoxes when k > |boxes|.
KMeansResult kmeans_anchors_detailed(const std::vector<Anchor>& boxes, int k, std::uint64_t seed);
std::vector<Anchor> kmeans_anchors(const std::vector<Anchor>& boxes, int k, std::uint64_t seed);

std::string anchors_to_json(const std::vector<Anchor>& anchors);
std::vector<Anchor> anchors_from_json(std::string_view json);

/// One JSON object per line: {image_id, class_id, confidence, x, y, w, h}.
std::string decoded_box_to_jsonl(std::string_view image_id, const DecodedBox& box);

}  // namespace amr
