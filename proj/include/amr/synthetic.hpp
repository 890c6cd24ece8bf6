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
#include <vector>

#include "amr/dataset.hpp"
#include "amr/raster.hpp"

namespace amr {

struct SyntheticMeter {
  MeterAnnotation annotation;
  int width = 0;
  int height = 0;
};

struct SyntheticOptions {
  int image_w = 640;
  int image_h = 480;
};

/// Random but valid meter annotations: one counter per image, five evenly
/// spaced digits, uniformly random readings. Ids are "meter_0000", ...
std::vector<SyntheticMeter> make_synthetic_meters(std::size_t count, std::uint64_t seed,
                                                  const SyntheticOptions& options = {});

/// Draws a light background, a dark counter window and seven-segment digits.
Raster render_synthetic_image(const SyntheticMeter& meter);

}  // namespace amr
