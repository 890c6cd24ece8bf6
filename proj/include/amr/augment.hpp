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
#include <map>
#include <string>
#include <vector>

#include "amr/dataset.hpp"
#include "amr/raster.hpp"

namespace amr {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double v) const { return v >= lo && v <= hi; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

struct JitterRanges {
  Interval brightness{0.5, 2.0};     // multiplicative factor
  Interval rotation_deg{-5.0, 5.0};  // degrees
  Interval crop{-0.02, 0.08};        // per side, fraction of counter size; negative grows

  /// Throws EmptyRange when an interval is inverted or non-finite, or brightness <= 0.
  void validate() const;
  /// Degenerate ranges that leave an image untouched.
  static JitterRanges identity();

  friend bool operator==(const JitterRanges&, const JitterRanges&) = default;
};

using Permutation = std::array<int, kDigitsPerCounter>;

/// permutation[p] is the index of the source digit placed at position p.
struct PermutationPlan {
  std::string source_id;
  Permutation permutation;

  friend bool operator==(const PermutationPlan&, const PermutationPlan&) = default;
};

/// All 120 permutations of {0..4} in lexicographic order.
const std::vector<Permutation>& all_permutations();

std::string permuted_reading(const std::string& reading, const Permutation& perm);

using ClassPositionCounts = std::array<std::array<std::int64_t, kDigitsPerCounter>, kDigitClasses>;

/// Greedy balancing: sources are visited round-robin in a seeded order; each
/// visit picks, among the source's 120 permutations, the one minimizing the
/// max - min spread of the class/position counts over the classes present in
/// that source. Ties go to the arrangement this source has used least, then to
/// the earliest in a fixed order that groups the permutations into cyclic-shift
/// Latin squares.
std::vector<PermutationPlan> plan_permutations(const std::vector<MeterAnnotation>& annotations,
                                               std::size_t total, std::uint64_t seed);

ClassPositionCounts count_plans(const std::vector<PermutationPlan>& plans,
                                const std::vector<MeterAnnotation>& annotations);

/// Pixels around a counter. `counter` locates the counter box inside `pixels`;
/// any surrounding context can serve outward crops.
struct CounterPatch {
  Raster pixels;
  Box counter;
};

struct AppliedJitter {
  double brightness = 1.0;
  double rotation_deg = 0.0;
  std::array<double, 4> crop{};            // drawn: left, top, right, bottom
  std::array<double, 4> crop_effective{};  // after clamping to the available pixels
};

struct AugmentedSample {
  std::string source_id;
  std::string camera;
  Permutation permutation{};
  std::string reading;
  AppliedJitter applied;
  Raster image;
  std::array<Box, kDigitsPerCounter> digits;  // in output image coordinates

  /// Annotation for the rendered image; the counter covers the whole image.
  MeterAnnotation annotation(const std::string& image_id) const;
};

/// Swaps digit patches per `permutation` (bilinear resize to each destination
/// box), scales brightness, rotates about the counter center, then crops each
/// side by a fraction drawn from the ranges.
AugmentedSample render_sample(const MeterAnnotation& annotation, const CounterPatch& patch,
                              const Permutation& permutation, const JitterRanges& ranges, std::uint64_t seed);

/// plan_permutations followed by render_sample per plan; sample i uses a seed
/// derived from (seed, i), so output does not depend on the worker count.
std::vector<AugmentedSample> generate_set(const std::vector<MeterAnnotation>& annotations,
                                          const std::map<std::string, CounterPatch>& patches,
                                          std::size_t total, const JitterRanges& ranges,
                                          std::uint64_t seed, int workers = 1);

std::uint64_t sample_seed(std::uint64_t seed, std::size_t index);

}  // namespace amr
