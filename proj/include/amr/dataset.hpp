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

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "amr/error.hpp"
#include "amr/geometry.hpp"

namespace amr {

inline constexpr int kDigitsPerCounter = 5;
inline constexpr int kDigitClasses = 10;

struct MeterAnnotation {
  std::string image_id;
  std::string camera;
  Box counter;
  std::array<Box, kDigitsPerCounter> digits;  // left-to-right by x-center
  std::string reading;

  friend bool operator==(const MeterAnnotation&, const MeterAnnotation&) = default;
};

/// Parses the line-oriented annotation format:
///
///     camera: <free text>
///     counter: <x> <y> <w> <h>
///     reading: <5 decimal digits>
///     digit: <x> <y> <w> <h>        (exactly 5 lines)
///
/// Digit boxes given out of order are re-sorted by x-center; a note is appended
/// to `warnings` when that happens. Throws Error with kinds MalformedLine,
/// CountMismatch, InvalidReading or GeometryError.
MeterAnnotation parse_annotation(std::string_view text, std::string image_id = {},
                                 std::vector<std::string>* warnings = nullptr);

/// Canonical text form; parse_annotation(serialize_annotation(a)) == a.
std::string serialize_annotation(const MeterAnnotation& a);

/// Throws GeometryError / InvalidReading / CountMismatch if `a` breaks an invariant.
void check_annotation(const MeterAnnotation& a);

/// Ground-truth label for a digit caught between `lower` and `upper`.
int resolve_transition_digit(int lower, int upper);

struct SplitRatios {
  double train = 0.4;
  double validation = 0.2;
  double test = 0.4;
};

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
  std::uint64_t seed = 0;

  friend bool operator==(const DatasetSplit&, const DatasetSplit&) = default;
};

/// Partition sizes for `n` items: floor of ratio*n, remainder handed out by
/// largest fractional part (ties go to the earlier partition).
std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios);

DatasetSplit split_dataset(std::vector<std::string> ids, const SplitRatios& ratios,
                           std::uint64_t seed);

std::string split_to_json(const DatasetSplit& split);
DatasetSplit split_from_json(std::string_view json);

struct SizeSummary {
  double min_w = 0, min_h = 0;
  double max_w = 0, max_h = 0;
  double mean_w = 0, mean_h = 0;
  double mean_aspect = 0;  // mean of per-box w/h
};

struct DatasetStats {
  std::size_t images = 0;
  std::map<std::string, std::size_t> per_camera;
  SizeSummary counters;
  SizeSummary digits;
  /// frequency[c][p]: how often digit class c appears at position p.
  std::array<std::array<std::size_t, kDigitsPerCounter>, kDigitClasses> frequency{};
};

DatasetStats compute_stats(const std::vector<MeterAnnotation>& annotations);
std::string stats_to_json(const DatasetStats& stats);

/// Rounds to two decimals, the precision used for aspect ratios in reports.
double round2(double v);

struct Violation {
  std::string image_id;
  ErrorKind kind;
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Scans `<root>/<id>.{jpg,png}` + `<root>/<id>.txt` pairs. Violations are returned
/// sorted by image_id; only I/O failures throw.
std::vector<Violation> validate_dataset(const std::filesystem::path& root);

/// Image file for `image_id` under `root`, or an empty path.
std::filesystem::path find_image(const std::filesystem::path& root, const std::string& image_id);

/// Loads every annotation under `root` (sorted by id). Throws on the first invalid file.
std::vector<MeterAnnotation> load_annotations(const std::filesystem::path& root);
MeterAnnotation load_annotation(const std::filesystem::path& file);

}  // namespace amr
