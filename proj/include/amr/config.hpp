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

#include <string>
#include <string_view>

#include "amr/pipeline.hpp"

namespace amr {

/// Pipeline configuration file (JSON). Missing keys keep the values in `base`,
/// so `{}` yields the defaults:
///
///   { "detector":   { "grid_w", "grid_h", "input_w", "input_h", "anchors": [[pw, ph], ...],
///                     "anchors_path", "conf_threshold", "nms_threshold" },
///     "recognizer": { "kind": "crnet|multitask|crnn", "mode": "fixed5|variable",
///                     "threshold", "nms_threshold",
///                     "crnet": { "grid_w", "grid_h", "input_w", "input_h", "anchors", "anchors_path" },
///                     "multitask": { "input_w", "input_h" },
///                     "crnn": { "input_w", "input_h", "frames" } },
///     "margin": 0.2 }
///
/// Relative anchors_path entries resolve against `base_dir`.
PipelineConfig pipeline_config_from_json(std::string_view text, const PipelineConfig& base = {},
                                         const std::string& base_dir = ".");

std::string pipeline_config_to_json(const PipelineConfig& config);

}  // namespace amr
