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
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "amr/dataset.hpp"
#include "amr/detect.hpp"
#include "amr/raster.hpp"
#include "amr/tensor.hpp"

namespace amr {

enum class ModelRole { Detector, CrNet, MultiTask, Crnn };

std::string_view to_string(ModelRole role);
ModelRole role_from_string(std::string_view name);

/// Output geometry of the four networks. Defaults follow the published models:
/// Fast-YOLO 416x416 -> 13x13x30, CR-NET 400x106 -> 13x50x75 (stride 8),
/// multi-task 220x60 -> 5x10, CRNN 160x40 -> 40x11.
struct ModelLayout {
  GridSpec detector = default_detector_spec();
  GridSpec crnet = default_crnet_spec();
  int multitask_input_w = 220;
  int multitask_input_h = 60;
  int crnn_input_w = 160;
  int crnn_input_h = 40;
  int crnn_frames = 40;

  std::vector<std::uint32_t> output_shape(ModelRole role) const;
  /// Network input width and height in pixels.
  std::pair<int, int> input_size(ModelRole role) const;

  static GridSpec default_detector_spec();
  static GridSpec default_crnet_spec();
};

inline constexpr int kMultiTaskPositions = 5;
inline constexpr int kCtcLabels = 11;  // 10 digits + blank
inline constexpr int kCtcBlank = 10;

struct InferenceRequest {
  std::string image_id;
  ModelRole role = ModelRole::Detector;
  /// Region of the original image fed to the network, in original-image pixels.
  Box region;
  /// The region resampled to the network input size; null when pixels are unavailable.
  const Raster* input = nullptr;
};

/// Boundary around a network forward pass. Implementations must be safe for
/// concurrent const use and return a fixed shape per role.
class InferenceProvider {
 public:
  virtual ~InferenceProvider() = default;
  virtual std::vector<std::uint32_t> output_shape(ModelRole role) const = 0;
  virtual PredictionTensor infer(const InferenceRequest& request) const = 0;
};

struct OracleNoise {
  double box_jitter = 0.0;        // fraction of counter size, [0, 0.2]
  double confidence_floor = 0.99;  // (0.5, 1]
  std::uint64_t seed = 0;

  void validate() const;
};

/// Logit assigned to every slot that should decode to nothing.
inline constexpr float kStrongNegative = -20.0f;

/// Test double for the networks: synthesizes tensors from ground truth by
/// inverting the decoders, so the real decode path reproduces the annotation.
/// Only the detector box is jittered; digit placement is always exact.
class OracleProvider final : public InferenceProvider {
 public:
  OracleProvider(const std::vector<MeterAnnotation>& annotations, ModelLayout layout,
                 OracleNoise noise = {});

  std::vector<std::uint32_t> output_shape(ModelRole role) const override;
  PredictionTensor infer(const InferenceRequest& request) const override;

  /// Counter box the detector tensor encodes for `image_id` (after jitter).
  Box emitted_counter(const std::string& image_id) const;

 private:
  const MeterAnnotation& lookup(const std::string& image_id) const;
  PredictionTensor detector(const MeterAnnotation& a, const Box& region) const;
  PredictionTensor crnet(const MeterAnnotation& a, const Box& region) const;
  PredictionTensor multitask(const MeterAnnotation& a) const;
  PredictionTensor crnn(const MeterAnnotation& a, const Box& region) const;

  std::map<std::string, MeterAnnotation> annotations_;
  ModelLayout layout_;
  OracleNoise noise_;
  double target_confidence_;
};

/// Offline network dumps: `<root>/<image_id>.<role>.amrt`.
class DirectoryProvider final : public InferenceProvider {
 public:
  DirectoryProvider(std::filesystem::path root, ModelLayout layout);

  std::vector<std::uint32_t> output_shape(ModelRole role) const override;
  PredictionTensor infer(const InferenceRequest& request) const override;

  static std::filesystem::path tensor_path(const std::filesystem::path& root,
                                           const std::string& image_id, ModelRole role);

 private:
  std::filesystem::path root_;
  ModelLayout layout_;
};

/// Forwards to another provider and saves each produced tensor in
/// DirectoryProvider layout, so a run can be replayed offline.
class RecordingProvider final : public InferenceProvider {
 public:
  RecordingProvider(const InferenceProvider& inner, std::filesystem::path root);

  std::vector<std::uint32_t> output_shape(ModelRole role) const override;
  PredictionTensor infer(const InferenceRequest& request) const override;

 private:
  const InferenceProvider& inner_;
  std::filesystem::path root_;
};

}  // namespace amr
