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
#include <span>
#include <vector>

#include "amr/geometry.hpp"

namespace amr {

/// 8-bit interleaved image, row-major, 1 or 3 channels.
class Raster {
 public:
  Raster() = default;
  Raster(int width, int height, int channels, std::uint8_t fill = 0);
  Raster(int width, int height, int channels, std::vector<std::uint8_t> pixels);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return pixels_.empty(); }

  std::uint8_t at(int x, int y, int c) const {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::uint8_t& at(int x, int y, int c) {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::span<const std::uint8_t> pixels() const { return pixels_; }

  /// Bilinear sample at continuous pixel coordinates (pixel centers at integers),
  /// replicating edge pixels outside the image.
  double sample(double x, double y, int c) const;

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Integer crop of [x, x+w) x [y, y+h), intersected with the image.
Raster crop(const Raster& src, int x, int y, int w, int h);

/// Bilinear resample of the real-valued `region` of `src` onto an out_w x out_h grid.
Raster resample_region(const Raster& src, const Box& region, int out_w, int out_h);

Raster resize_bilinear(const Raster& src, int out_w, int out_h);

/// Rotates about (cx, cy) by `degrees` (counter-clockwise on screen), bilinear,
/// edge-replicate fill. The output has the input's size.
Raster rotate(const Raster& src, double degrees, double cx, double cy);

/// Multiplies every channel by `factor`, rounding and clamping to [0, 255].
Raster scale_brightness(const Raster& src, double factor);

/// Pastes `patch` with its top-left corner at (x, y); clipped to `dst`.
void paste(Raster& dst, const Raster& patch, int x, int y);

}  // namespace amr
