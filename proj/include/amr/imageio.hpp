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

#include <filesystem>
#include <utility>

#include "amr/raster.hpp"

namespace amr {

/// Decodes a JPEG/PNG file into a 3-channel raster (channel order as stored by the codec).
Raster load_image(const std::filesystem::path& path);

void save_png(const std::filesystem::path& path, const Raster& image);

}  // namespace amr
