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

#include "amr/augment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "amr/error.hpp"
#include "amr/random.hpp"

namespace amr {
namespace {

struct PixelRect {
  int x0, y0, x1, y1;
};

PixelRect to_pixels(const Box& b) {
  PixelRect r{static_cast<int>(std::lround(b.x)), static_cast<int>(std::lround(b.y)),
              static_cast<int>(std::lround(b.right())), static_cast<int>(std::lround(b.bottom()))};
  r.x1 = std::max(r.x1, r.x0 + 1);
  r.y1 = std::max(r.y1, r.y0 + 1);
  return r;
}

void check_interval(const Interval& i, const char* name) {
  if (!std::isfinite(i.lo) || !std::isfinite(i.hi) || i.lo > i.hi) {
    throw Error(ErrorKind::EmptyRange, std::string(name) + " range is empty");
  }
}

/// Forward rotation of a point about (cx, cy), matching amr::rotate.
std::pair<double, double> rotate_point(double x, double y, double degrees, double cx, double cy) {
  const double rad = degrees * M_PI / 180.0;
  const double cs = std::cos(rad), sn = std::sin(rad);
  const double dx = x - cx, dy = y - cy;
  return {cx + cs * dx + sn * dy, cy - sn * dx + cs * dy};
}

Box rotate_box(const Box& b, double degrees, double cx, double cy) {
  if (degrees == 0.0) return b;
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0;
  double x1 = -x0, y1 = -x0;
  for (auto [px, py] : {std::pair{b.x, b.y}, {b.right(), b.y}, {b.x, b.bottom()}, {b.right(), b.bottom()}}) {
    const auto [rx, ry] = rotate_point(px, py, degrees, cx, cy);
    x0 = std::min(x0, rx);
    y0 = std::min(y0, ry);
    x1 = std::max(x1, rx);
    y1 = std::max(y1, ry);
  }
  return Box::from_corners(x0, y0, x1, y1);
}

}  // namespace

void JitterRanges::validate() const {
  check_interval(brightness, "brightness");
  check_interval(rotation_deg, "rotation");
  check_interval(crop, "crop");
  if (!(brightness.lo > 0.0)) throw Error(ErrorKind::EmptyRange, "brightness factors must be positive");
  if (!(crop.lo > -0.5 && crop.hi < 0.5)) throw Error(ErrorKind::EmptyRange, "crop fractions must lie in (-0.5, 0.5)");
}

JitterRanges JitterRanges::identity() { return JitterRanges{{1.0, 1.0}, {0.0, 0.0}, {0.0, 0.0}}; }

const std::vector<Permutation>& all_permutations() {
  static const std::vector<Permutation> perms = [] {
    std::vector<Permutation> out;
    Permutation p{0, 1, 2, 3, 4};
    do {
      out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
  }();
  return perms;
}

// Candidate order for planning: all_permutations() regrouped into the cosets
// sigma o shift^k. Each coset is a Latin square (every source position lands on
// every output position once), so walking them in order lets a single source
// reach perfect balance every five samples without repeating an arrangement.
static const std::vector<Permutation>& planning_order() {
  static const std::vector<Permutation> order = [] {
    std::vector<Permutation> out;
    std::set<Permutation> seen;
    for (const auto& sigma : all_permutations()) {
      if (seen.count(sigma)) continue;
      for (int k = 0; k < kDigitsPerCounter; ++k) {
        Permutation q{};
        for (int p = 0; p < kDigitsPerCounter; ++p) q[p] = sigma[(p + k) % kDigitsPerCounter];
        seen.insert(q);
        out.push_back(q);
      }
    }
    return out;
  }();
  return order;
}

std::string permuted_reading(const std::string& reading, const Permutation& perm) {
  std::string out(kDigitsPerCounter, '0');
  for (int p = 0; p < kDigitsPerCounter; ++p) out[p] = reading.at(static_cast<std::size_t>(perm[p]));
  return out;
}

std::vector<PermutationPlan> plan_permutations(const std::vector<MeterAnnotation>& annotations,
                                               std::size_t total, std::uint64_t seed) {
  if (annotations.empty()) throw Error(ErrorKind::EmptyDataset, "no source counters to permute");
  for (const auto& a : annotations) check_annotation(a);

  std::vector<std::size_t> order(annotations.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return annotations[a].image_id < annotations[b].image_id;
  });
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));

  ClassPositionCounts counts{};
  std::vector<PermutationPlan> plans;
  plans.reserve(total);
  const auto& perms = planning_order();
  // Per source, how often each permutation was already taken; breaks spread ties
  // toward unused arrangements so one source yields distinct images.
  std::vector<std::vector<std::uint32_t>> used(annotations.size(), std::vector<std::uint32_t>(perms.size(), 0));

  for (std::size_t i = 0; i < total; ++i) {
    const std::size_t src_index = order[i % order.size()];
    const auto& src = annotations[src_index];
    auto& uses = used[src_index];
    std::array<int, kDigitsPerCounter> digit{};
    std::array<bool, kDigitClasses> present{};
    for (int p = 0; p < kDigitsPerCounter; ++p) {
      digit[p] = src.reading[p] - '0';
      present[digit[p]] = true;
    }

    std::size_t best = 0;
    std::int64_t best_spread = std::numeric_limits<std::int64_t>::max();
    for (std::size_t k = 0; k < perms.size(); ++k) {
      auto trial = counts;
      for (int p = 0; p < kDigitsPerCounter; ++p) ++trial[digit[perms[k][p]]][p];
      std::int64_t lo = std::numeric_limits<std::int64_t>::max(), hi = 0;
      for (int c = 0; c < kDigitClasses; ++c) {
        if (!present[c]) continue;
        for (int p = 0; p < kDigitsPerCounter; ++p) {
          lo = std::min(lo, trial[c][p]);
          hi = std::max(hi, trial[c][p]);
        }
      }
      if (hi - lo < best_spread || (hi - lo == best_spread && uses[k] < uses[best])) {
        best_spread = hi - lo;
        best = k;
      }
    }
    for (int p = 0; p < kDigitsPerCounter; ++p) ++counts[digit[perms[best][p]]][p];
    ++uses[best];
    plans.push_back({src.image_id, perms[best]});
  }
  return plans;
}

ClassPositionCounts count_plans(const std::vector<PermutationPlan>& plans,
                                const std::vector<MeterAnnotation>& annotations) {
  std::map<std::string, const MeterAnnotation*> by_id;
  for (const auto& a : annotations) by_id[a.image_id] = &a;
  ClassPositionCounts counts{};
  for (const auto& plan : plans) {
    auto it = by_id.find(plan.source_id);
    if (it == by_id.end()) throw Error(ErrorKind::NotFound, "plan references unknown source " + plan.source_id);
    const auto reading = permuted_reading(it->second->reading, plan.permutation);
    for (int p = 0; p < kDigitsPerCounter; ++p) ++counts[reading[p] - '0'][p];
  }
  return counts;
}

MeterAnnotation AugmentedSample::annotation(const std::string& image_id) const {
  MeterAnnotation a;
  a.image_id = image_id;
  a.camera = camera;
  a.counter = Box{0.0, 0.0, static_cast<double>(image.width()), static_cast<double>(image.height())};
  a.digits = digits;
  a.reading = reading;
  return a;
}

AugmentedSample render_sample(const MeterAnnotation& annotation, const CounterPatch& patch,
                              const Permutation& permutation, const JitterRanges& ranges, std::uint64_t seed) {
  ranges.validate();
  {
    auto sorted = permutation;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != Permutation{0, 1, 2, 3, 4}) throw Error(ErrorKind::InvalidArgument, "not a permutation of 0..4");
  }
  const auto& src = patch.pixels;
  const Box& cb = patch.counter;
  if (src.empty() || !is_valid(cb)) throw Error(ErrorKind::GeometryError, "empty counter patch");

  // Digit boxes in patch coordinates.
  std::array<Box, kDigitsPerCounter> boxes;
  std::array<PixelRect, kDigitsPerCounter> rects;
  for (int p = 0; p < kDigitsPerCounter; ++p) {
    const auto& d = annotation.digits[p];
    boxes[p] = Box{d.x - annotation.counter.x + cb.x, d.y - annotation.counter.y + cb.y, d.w, d.h};
    rects[p] = to_pixels(boxes[p]);
    if (rects[p].x0 < 0 || rects[p].y0 < 0 || rects[p].x1 > src.width() || rects[p].y1 > src.height()) {
      throw Error(ErrorKind::GeometryError, "digit " + std::to_string(p) + " exceeds the counter crop");
    }
  }

  Rng rng(seed);
  AugmentedSample s;
  s.source_id = annotation.image_id;
  s.camera = annotation.camera;
  s.permutation = permutation;
  s.reading = permuted_reading(annotation.reading, permutation);
  s.applied.brightness = rng.uniform(ranges.brightness.lo, ranges.brightness.hi);
  s.applied.rotation_deg = rng.uniform(ranges.rotation_deg.lo, ranges.rotation_deg.hi);
  for (auto& c : s.applied.crop) c = rng.uniform(ranges.crop.lo, ranges.crop.hi);

  Raster canvas = src;
  for (int p = 0; p < kDigitsPerCounter; ++p) {
    const int from = permutation[p];
    if (from == p) continue;
    const auto& sr = rects[from];
    const auto& dr = rects[p];
    const Box source_box{static_cast<double>(sr.x0), static_cast<double>(sr.y0),
                         static_cast<double>(sr.x1 - sr.x0), static_cast<double>(sr.y1 - sr.y0)};
    paste(canvas, resample_region(src, source_box, dr.x1 - dr.x0, dr.y1 - dr.y0), dr.x0, dr.y0);
  }

  canvas = scale_brightness(canvas, s.applied.brightness);
  canvas = rotate(canvas, s.applied.rotation_deg, cb.center_x(), cb.center_y());

  const auto& c = s.applied.crop;
  const double x0 = std::clamp(cb.x + c[0] * cb.w, 0.0, static_cast<double>(src.width()));
  const double y0 = std::clamp(cb.y + c[1] * cb.h, 0.0, static_cast<double>(src.height()));
  const double x1 = std::clamp(cb.right() - c[2] * cb.w, 0.0, static_cast<double>(src.width()));
  const double y1 = std::clamp(cb.bottom() - c[3] * cb.h, 0.0, static_cast<double>(src.height()));
  s.applied.crop_effective = {(x0 - cb.x) / cb.w, (y0 - cb.y) / cb.h, (cb.right() - x1) / cb.w,
                              (cb.bottom() - y1) / cb.h};
  const int ix0 = static_cast<int>(std::lround(x0));
  const int iy0 = static_cast<int>(std::lround(y0));
  const int ix1 = std::max(static_cast<int>(std::lround(x1)), ix0 + 1);
  const int iy1 = std::max(static_cast<int>(std::lround(y1)), iy0 + 1);
  s.image = crop(canvas, ix0, iy0, ix1 - ix0, iy1 - iy0);

  for (int p = 0; p < kDigitsPerCounter; ++p) {
    Box b = rotate_box(boxes[p], s.applied.rotation_deg, cb.center_x(), cb.center_y());
    b.x -= ix0;
    b.y -= iy0;
    s.digits[p] = clamp_to(b, s.image.width(), s.image.height());
  }
  return s;
}

std::uint64_t sample_seed(std::uint64_t seed, std::size_t index) { return derive_seed(seed, index); }

std::vector<AugmentedSample> generate_set(const std::vector<MeterAnnotation>& annotations,
                                          const std::map<std::string, CounterPatch>& patches,
                                          std::size_t total, const JitterRanges& ranges,
                                          std::uint64_t seed, int workers) {
  ranges.validate();
  if (total == 0) return {};
  const auto plans = plan_permutations(annotations, total, seed);
  std::map<std::string, const MeterAnnotation*> by_id;
  for (const auto& a : annotations) by_id[a.image_id] = &a;

  std::vector<AugmentedSample> out(plans.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (std::size_t i = next++; i < plans.size(); i = next++) {
      try {
        const auto& plan = plans[i];
        auto patch = patches.find(plan.source_id);
        if (patch == patches.end()) throw Error(ErrorKind::NotFound, "no pixels for " + plan.source_id);
        out[i] = render_sample(*by_id.at(plan.source_id), patch->second, plan.permutation, ranges,
                               sample_seed(seed, i));
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(plans.size())));
  {
    std::vector<std::jthread> pool;
    for (int i = 1; i < n; ++i) pool.emplace_back(work);
    work();
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace amr
