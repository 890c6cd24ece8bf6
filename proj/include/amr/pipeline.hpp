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

#include "amr/detect.hpp"
#include "amr/provider.hpp"
#include "amr/raster.hpp"
#include "amr/recognize.hpp"

namespace amr {

enum class RecognizerKind { CrNet, MultiTask, Crnn };

std::string_view to_string(RecognizerKind kind);
RecognizerKind recognizer_from_string(std::string_view name);
ModelRole role_of(RecognizerKind kind);

struct PipelineConfig {
  ModelLayout layout;
  RecognizerKind recognizer = RecognizerKind::CrNet;
  AssemblyMode mode = AssemblyMode::Fixed5;
  double detection_threshold = 0.25;
  double detection_nms = 0.5;
  double recognition_threshold = 0.5;
  double recognition_nms = 0.5;
  double margin = 0.2;

  /// Detector input divisible by 32, margin >= 0, thresholds in [0, 1].
  void validate() const;
};

struct PipelineInput {
  std::string image_id;
  int width = 0;
  int height = 0;
  const Raster* image = nullptr;  // optional; when set, network inputs are resampled from it
};

/// Everything one image produced; serialized as one JSON line.
struct PipelineTrace {
  std::string image_id;
  std::optional<DecodedBox> counter;  // original-image pixels
  std::optional<Box> margin_box;
  ReadingResult result;
  std::string error;  // non-empty when this image failed

  bool failed() const { return !error.empty(); }
};

/// Detect, pick the most confident counter, expand it by the margin, crop and
/// resize to the recognizer input, decode. No counter gives NegativeNoCounter.
PipelineTrace run_pipeline(const PipelineInput& input, const InferenceProvider& provider,
                           const PipelineConfig& config);

/// Runs every input, capturing per-image failures in the trace instead of throwing.
std::vector<PipelineTrace> run_batch(const std::vector<PipelineInput>& inputs, const InferenceProvider& provider,
                                     const PipelineConfig& config, int workers);

std::string trace_to_jsonl(const PipelineTrace& trace);
PipelineTrace trace_from_jsonl(std::string_view line);

/// Worker count: AMR_WORKERS if set, else `requested` if positive, else hardware concurrency.
int resolve_workers(int requested);

}  // namespace amr
