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

#include <algorithm>
#include <cmath>

namespace amr {

/// Axis-aligned rectangle in pixels; (x, y) is the top-left corner.
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double center_x() const { return x + 0.5 * w; }
  double center_y() const { return y + 0.5 * h; }
  double area() const { return w * h; }

  bool contains_point(double px, double py) const {
    return px >= x && px <= right() && py >= y && py <= bottom();
  }

  static Box from_corners(double x0, double y0, double x1, double y1) {
    return Box{x0, y0, x1 - x0, y1 - y0};
  }
  static Box from_center(double cx, double cy, double w, double h) {
    return Box{cx - 0.5 * w, cy - 0.5 * h, w, h};
  }

  friend bool operator==(const Box&, const Box&) = default;
};

inline bool is_valid(const Box& b) {
  return std::isfinite(b.x) && std::isfinite(b.y) && std::isfinite(b.w) && std::isfinite(b.h) &&
         b.w > 0.0 && b.h > 0.0;
}

/// Intersection over union; 0 for disjoint or degenerate boxes.
double iou(const Box& a, const Box& b);

/// IoU of two boxes that share a center, given only their sizes.
double iou_wh(double w1, double h1, double w2, double h2);

/// Intersection of `b` with [0, width] x [0, height]. The result may have zero extent.
Box clamp_to(const Box& b, double width, double height);

}  // namespace amr
