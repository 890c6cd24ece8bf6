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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "amr/detect.hpp"
#include "amr/tensor.hpp"

namespace amr {

enum class ReadingStatus { Accepted, RejectedTooFew, NegativeNoCounter };

std::string_view to_string(ReadingStatus status);
ReadingStatus status_from_string(std::string_view name);

struct ReadingResult {
  std::string reading;
  std::vector<double> digit_confidences;
  ReadingStatus status = ReadingStatus::Accepted;

  friend bool operator==(const ReadingResult&, const ReadingResult&) = default;
};

enum class AssemblyMode {
  Fixed5,    // exactly five digits or reject
  Variable,  // every digit above threshold
};

std::string_view to_string(AssemblyMode mode);
AssemblyMode mode_from_string(std::string_view name);

/// Digit detections sorted into reading order: x-center, then y-center, then class.
std::vector<DecodedBox> reading_order(std::vector<DecodedBox> digits);

/// CR-NET style: grid decode, per-class NMS, then assemble left to right.
/// Fixed5 keeps the five most confident survivors and rejects with fewer;
/// Variable keeps everything at or above `threshold` (at most grid_w digits).
ReadingResult decode_crnet(const PredictionTensor& t, const GridSpec& spec, AssemblyMode mode,
                           double threshold, double nms_threshold = 0.5);

/// One 10-way head per digit position; tensor shape [5, 10].
ReadingResult decode_multitask(const PredictionTensor& outputs);

/// Per-frame label distributions over 10 digits plus blank (label 10).
class CtcFrameMatrix {
 public:
  static constexpr int kLabels = 11;
  static constexpr int kBlank = 10;

  /// Rows must already be distributions (non-negative, sum to 1 within 1e-6).
  static CtcFrameMatrix from_probabilities(const PredictionTensor& t);
  /// Applies a row-wise softmax to raw scores.
  static CtcFrameMatrix from_logits(const PredictionTensor& t);

  int frames() const { return frames_; }
  double prob(int frame, int label) const { return probs_[static_cast<std::size_t>(frame) * kLabels + label]; }

 private:
  CtcFrameMatrix(int frames, std::vector<double> probs) : frames_(frames), probs_(std::move(probs)) {}
  static void check_shape(const PredictionTensor& t);

  int frames_ = 0;
  std::vector<double> probs_;
};

/// Best path: per-frame argmax, merge repeats, drop blanks. Each digit's
/// confidence is the highest frame probability within its run.
ReadingResult decode_ctc_greedy(const CtcFrameMatrix& m);

}  // namespace amr
