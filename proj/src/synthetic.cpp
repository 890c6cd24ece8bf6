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

#include "amr/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "amr/random.hpp"

namespace amr {
namespace {

// Segments a..g of a seven-segment display, per digit.
constexpr std::array<std::uint8_t, 10> kSegments{
    0b0111111, 0b0000110, 0b1011011, 0b1001111, 0b1100110,
    0b1101101, 0b1111101, 0b0000111, 0b1111111, 0b1101111,
};

void fill(Raster& r, double x0, double y0, double x1, double y1, std::array<std::uint8_t, 3> color) {
  const int ix0 = std::clamp(static_cast<int>(std::lround(x0)), 0, r.width());
  const int iy0 = std::clamp(static_cast<int>(std::lround(y0)), 0, r.height());
  const int ix1 = std::clamp(static_cast<int>(std::lround(x1)), 0, r.width());
  const int iy1 = std::clamp(static_cast<int>(std::lround(y1)), 0, r.height());
  for (int y = iy0; y < iy1; ++y)
    for (int x = ix0; x < ix1; ++x)
      for (int c = 0; c < 3; ++c) r.at(x, y, c) = color[c];
}

void draw_digit(Raster& r, const Box& b, int digit) {
  const double t = std::max(1.0, std::min(b.w, b.h) * 0.14);
  const double x0 = b.x + 0.1 * b.w, x1 = b.right() - 0.1 * b.w;
  const double y0 = b.y + 0.08 * b.h, y1 = b.bottom() - 0.08 * b.h;
  const double ym = 0.5 * (y0 + y1);
  const std::array<std::uint8_t, 3> ink{235, 235, 235};
  const auto seg = kSegments[static_cast<std::size_t>(digit)];
  if (seg & 1) fill(r, x0, y0, x1, y0 + t, ink);              // a
  if (seg & 2) fill(r, x1 - t, y0, x1, ym, ink);              // b
  if (seg & 4) fill(r, x1 - t, ym, x1, y1, ink);              // c
  if (seg & 8) fill(r, x0, y1 - t, x1, y1, ink);              // d
  if (seg & 16) fill(r, x0, ym, x0 + t, y1, ink);             // e
  if (seg & 32) fill(r, x0, y0, x0 + t, ym, ink);             // f
  if (seg & 64) fill(r, x0, ym - 0.5 * t, x1, ym + 0.5 * t, ink);  // g
}

}  // namespace

std::vector<SyntheticMeter> make_synthetic_meters(std::size_t count, std::uint64_t seed,
                                                  const SyntheticOptions& options) {
  static const std::array<const char*, 3> kCameras{"LG G3 D855", "Samsung Galaxy J7 Prime", "iPhone 6s"};
  Rng rng(seed);
  std::vector<SyntheticMeter> out;
  out.reserve(count);
  const double iw = options.image_w;
  const double ih = options.image_h;
  for (std::size_t i = 0; i < count; ++i) {
    SyntheticMeter m;
    m.width = options.image_w;
    m.height = options.image_h;
    auto& a = m.annotation;
    char id[32];
    std::snprintf(id, sizeof(id), "meter_%04zu", i);
    a.image_id = id;
    a.camera = kCameras[rng.below(kCameras.size())];

    const double cw = std::round(rng.uniform(0.35, 0.6) * iw);
    const double ch = std::round(cw / rng.uniform(3.2, 4.2));
    // Keep room for a 20% margin on every side.
    const double cx = std::round(rng.uniform(0.15 * iw + 0.5 * cw, 0.85 * iw - 0.5 * cw));
    const double cy = std::round(rng.uniform(0.15 * ih + 0.5 * ch, 0.85 * ih - 0.5 * ch));
    a.counter = Box{cx - std::round(0.5 * cw), cy - std::round(0.5 * ch), cw, ch};

    const double pitch = cw / kDigitsPerCounter;
    const double dw = std::round(pitch * rng.uniform(0.55, 0.7));
    const double dh = std::round(ch * rng.uniform(0.65, 0.8));
    for (int p = 0; p < kDigitsPerCounter; ++p) {
      const double dcx = a.counter.x + (p + 0.5) * pitch + rng.uniform(-0.05, 0.05) * pitch;
      const double dcy = a.counter.center_y() + rng.uniform(-0.05, 0.05) * ch;
      a.digits[p] = Box{std::round(dcx - 0.5 * dw), std::round(dcy - 0.5 * dh), dw, dh};
      a.reading.push_back(static_cast<char>('0' + rng.below(10)));
    }
    out.push_back(std::move(m));
  }
  return out;
}

Raster render_synthetic_image(const SyntheticMeter& meter) {
  Raster r(meter.width, meter.height, 3, 0);
  for (int y = 0; y < r.height(); ++y) {
    const auto shade = static_cast<std::uint8_t>(150 + 60 * y / r.height());
    for (int x = 0; x < r.width(); ++x) {
      r.at(x, y, 0) = shade;
      r.at(x, y, 1) = shade;
      r.at(x, y, 2) = static_cast<std::uint8_t>(shade - 10);
    }
  }
  const auto& a = meter.annotation;
  fill(r, a.counter.x, a.counter.y, a.counter.right(), a.counter.bottom(), {30, 30, 35});
  for (int p = 0; p < kDigitsPerCounter; ++p) {
    fill(r, a.digits[p].x, a.digits[p].y, a.digits[p].right(), a.digits[p].bottom(), {55, 55, 60});
    draw_digit(r, a.digits[p], a.reading[p] - '0');
  }
  return r;
}

}  // namespace amr
