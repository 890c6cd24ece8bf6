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

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "amr/geometry.hpp"
#include "amr/recognize.hpp"

namespace amr {

struct ScoredBox {
  std::string image_id;
  Box box;
  double confidence = 1.0;
};

struct LabeledBox {
  std::string image_id;
  Box box;
};

struct DetectionEval {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f_measure = 0.0;
  double mean_iou = 0.0;
  double iou_threshold = 0.5;
};

/// Precision, recall and F from counts; each is 0 when its denominator is 0.
void finalize_counts(DetectionEval& e);

/// One counter per image: the most confident prediction of each image is
/// correct when its IoU with the ground truth exceeds `iou_threshold`; a wrong
/// one counts as both a false positive and a missed counter. mean_iou averages
/// over images that have both a prediction and a ground truth.
DetectionEval eval_detection(const std::vector<ScoredBox>& preds, const std::vector<LabeledBox>& gts,
                             double iou_threshold);

struct RecognitionOutcome {
  std::string image_id;
  std::string truth;
  std::string predicted;
  std::string status;  // reading status, or "missing" when no result was given
  std::size_t correct_digits = 0;
  std::size_t total_digits = 0;
  bool counter_correct = false;
};

struct RecognitionEval {
  double digit_accuracy = 0.0;
  double counter_accuracy = 0.0;
  std::size_t digits_correct = 0;
  std::size_t digits_total = 0;
  std::size_t counters_correct = 0;
  std::size_t counters_total = 0;
  std::vector<RecognitionOutcome> outcomes;  // sorted by image_id
};

/// Digit accuracy compares positions over the common prefix; positions past the
/// shorter string, and every digit of a non-accepted result, count as wrong.
/// Ground truths without a result count as fully wrong.
RecognitionEval eval_recognition(const std::vector<std::pair<std::string, ReadingResult>>& results,
                                 const std::vector<std::pair<std::string, std::string>>& gts);

struct RunScores {
  double digit_accuracy = 0.0;
  double counter_accuracy = 0.0;
};

struct TTest {
  double t = 0.0;
  int dof = 0;
  double p_value = 1.0;
  double critical = 0.0;  // two-tailed critical |t| at alpha
  bool significant = false;
  bool degenerate = false;  // every paired difference equal; t undefined
};

/// Paired two-tailed t-test on d = b - a. Throws ZeroVariance when all
/// differences are equal and InvalidArgument on length mismatch or n < 2.
TTest paired_t_test(const std::vector<double>& a, const std::vector<double>& b, double alpha);

struct RunSummary {
  std::vector<RunScores> runs;
  RunScores mean;
  RunScores stddev;  // sample (n - 1); zero for a single run
  double alpha = 0.05;
  /// Counter accuracy of `baseline` versus these runs (d = baseline - runs).
  std::optional<TTest> t_test;
};

RunSummary summarize_runs(const std::vector<RunScores>& runs, double alpha,
                          const std::optional<std::vector<RunScores>>& baseline = std::nullopt);

struct NamedDetection {
  std::string name;
  DetectionEval eval;
};
struct NamedRecognition {
  std::string name;
  RecognitionEval eval;
};
struct NamedSummary {
  std::string name;
  RunSummary summary;
};

/// Everything `eval` computes; stored losslessly as JSON and rendered by `report`.
struct EvalDocument {
  std::vector<NamedDetection> detection;
  std::vector<NamedRecognition> recognition;
  std::vector<NamedSummary> summaries;
};

std::string document_to_json(const EvalDocument& doc);
EvalDocument document_from_json(std::string_view text);

enum class ReportFormat { Text, Json, Csv };
ReportFormat report_format_from_string(std::string_view name);

/// Percentages rounded to two decimals; rows sorted by name.
std::string render_report(const EvalDocument& doc, ReportFormat format);

/// "94.13 ± 0.50" from fractions.
std::string format_mean_std(double mean, double stddev);

}  // namespace amr
