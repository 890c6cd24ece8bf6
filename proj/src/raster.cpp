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

#include "amr/raster.hpp"

#include <algorithm>
#include <cmath>

#include "amr/error.hpp"

namespace amr {
namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

}  // namespace

Raster::Raster(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  if (width <= 0 || height <= 0 || (channels != 1 && channels != 3)) {
    throw Error(ErrorKind::InvalidArgument, "raster needs positive size and 1 or 3 channels");
  }
  pixels_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

Raster::Raster(int width, int height, int channels, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0 || (channels != 1 && channels != 3) ||
      pixels_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw Error(ErrorKind::InvalidArgument, "raster buffer does not match its shape");
  }
}

double Raster::sample(double x, double y, int c) const {
  x = std::clamp(x, 0.0, static_cast<double>(width_ - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height_ - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, width_ - 1);
  const int y1 = std::min(y0 + 1, height_ - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = at(x0, y0, c) * (1.0 - fx) + at(x1, y0, c) * fx;
  const double bot = at(x0, y1, c) * (1.0 - fx) + at(x1, y1, c) * fx;
  return top * (1.0 - fy) + bot * fy;
}

Raster crop(const Raster& src, int x, int y, int w, int h) {
  const int x0 = std::clamp(x, 0, src.width());
  const int y0 = std::clamp(y, 0, src.height());
  const int x1 = std::clamp(x + w, 0, src.width());
  const int y1 = std::clamp(y + h, 0, src.height());
  if (x1 <= x0 || y1 <= y0) throw Error(ErrorKind::GeometryError, "crop lies outside the image");
  Raster out(x1 - x0, y1 - y0, src.channels());
  for (int yy = y0; yy < y1; ++yy)
    for (int xx = x0; xx < x1; ++xx)
      for (int c = 0; c < src.channels(); ++c) out.at(xx - x0, yy - y0, c) = src.at(xx, yy, c);
  return out;
}

Raster resample_region(const Raster& src, const Box& region, int out_w, int out_h) {
  if (!is_valid(region)) throw Error(ErrorKind::GeometryError, "empty resample region");
  Raster out(out_w, out_h, src.channels());
  const double sx = region.w / out_w;
  const double sy = region.h / out_h;
  for (int y = 0; y < out_h; ++y) {
    const double fy = region.y + (y + 0.5) * sy - 0.5;
    for (int x = 0; x < out_w; ++x) {
      const double fx = region.x + (x + 0.5) * sx - 0.5;
      for (int c = 0; c < src.channels(); ++c) out.at(x, y, c) = to_byte(src.sample(fx, fy, c));
    }
  }
  return out;
}

Raster resize_bilinear(const Raster& src, int out_w, int out_h) {
  return resample_region(src, Box{0, 0, static_cast<double>(src.width()), static_cast<double>(src.height())},
                         out_w, out_h);
}

Raster rotate(const Raster& src, double degrees, double cx, double cy) {
  if (degrees == 0.0) return src;
  const double rad = degrees * M_PI / 180.0;
  const double cs = std::cos(rad);
  const double sn = std::sin(rad);
  Raster out(src.width(), src.height(), src.channels());
  for (int y = 0; y < src.height(); ++y) {
    for (int x = 0; x < src.width(); ++x) {
      // Inverse mapping: output pixel center -> source coordinates.
      const double dx = x + 0.5 - cx;
      const double dy = y + 0.5 - cy;
      const double sx = cx + cs * dx - sn * dy - 0.5;
      const double sy = cy + sn * dx + cs * dy - 0.5;
      for (int c = 0; c < src.channels(); ++c) out.at(x, y, c) = to_byte(src.sample(sx, sy, c));
    }
  }
  return out;
}

Raster scale_brightness(const Raster& src, double factor) {
  if (factor == 1.0) return src;
  Raster out(src.width(), src.height(), src.channels());
  for (int y = 0; y < src.height(); ++y)
    for (int x = 0; x < src.width(); ++x)
      for (int c = 0; c < src.channels(); ++c) out.at(x, y, c) = to_byte(src.at(x, y, c) * factor);
  return out;
}

void paste(Raster& dst, const Raster& patch, int x, int y) {
  for (int yy = 0; yy < patch.height(); ++yy) {
    const int ty = y + yy;
    if (ty < 0 || ty >= dst.height()) continue;
    for (int xx = 0; xx < patch.width(); ++xx) {
      const int tx = x + xx;
      if (tx < 0 || tx >= dst.width()) continue;
      for (int c = 0; c < dst.channels(); ++c) dst.at(tx, ty, c) = patch.at(xx, yy, c);
    }
  }
}

}  // namespace amr
