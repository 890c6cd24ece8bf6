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

#include "amr/provider.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "amr/error.hpp"
#include "amr/random.hpp"

namespace amr {
namespace {

// Keeps sigmoid offsets away from 0 and 1 where the logit diverges.
constexpr double kOffsetEps = 1e-4;
// Logit large enough that sigmoid/softmax round to exactly 1 in double precision.
constexpr double kSaturatedLogit = 40.0;

double offset_logit(double frac) { return logit(std::clamp(frac, kOffsetEps, 1.0 - kOffsetEps)); }

/// Logit gap over `others` equal competitors giving softmax probability p.
double softmax_gap(double p, int others) {
  if (p >= 1.0) return 60.0;
  return std::log(others * p / (1.0 - p));
}

double objectness_logit(double p) { return p >= 1.0 ? kSaturatedLogit : logit(p); }

std::string shape_string(const std::vector<std::uint32_t>& dims) {
  std::string s;
  for (auto d : dims) s += (s.empty() ? "" : "x") + std::to_string(d);
  return s;
}

/// Writes one object into the grid tensor. `box` is in network-input pixels.
void encode_slot(PredictionTensor& t, const GridSpec& spec, const Box& box, int class_id,
                 double objectness_p, double class_p, std::vector<char>& occupied) {
  const double gx = box.center_x() / spec.input_w * spec.grid_w;
  const double gy = box.center_y() / spec.input_h * spec.grid_h;
  const int cx = std::clamp(static_cast<int>(std::floor(gx)), 0, spec.grid_w - 1);
  const int cy = std::clamp(static_cast<int>(std::floor(gy)), 0, spec.grid_h - 1);
  const double bw = box.w / spec.input_w * spec.grid_w;
  const double bh = box.h / spec.input_h * spec.grid_h;

  std::vector<std::size_t> order(spec.anchors.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return iou_wh(bw, bh, spec.anchors[a].pw, spec.anchors[a].ph) >
           iou_wh(bw, bh, spec.anchors[b].pw, spec.anchors[b].ph);
  });
  const std::size_t cell = static_cast<std::size_t>(cy) * spec.grid_w + cx;
  for (std::size_t a : order) {
    auto& used = occupied[cell * spec.anchors.size() + a];
    if (used) continue;
    used = 1;
    const std::size_t base = a * static_cast<std::size_t>(spec.num_classes + 5);
    t.at(cy, cx, base + 0) = static_cast<float>(offset_logit(gx - cx));
    t.at(cy, cx, base + 1) = static_cast<float>(offset_logit(gy - cy));
    t.at(cy, cx, base + 2) = static_cast<float>(std::log(bw / spec.anchors[a].pw));
    t.at(cy, cx, base + 3) = static_cast<float>(std::log(bh / spec.anchors[a].ph));
    t.at(cy, cx, base + 4) = static_cast<float>(objectness_logit(objectness_p));
    if (spec.num_classes > 1) {
      for (int c = 0; c < spec.num_classes; ++c) t.at(cy, cx, base + 5 + c) = kStrongNegative;
      t.at(cy, cx, base + 5 + class_id) =
          static_cast<float>(kStrongNegative + softmax_gap(class_p, spec.num_classes - 1));
    }
    return;
  }
  throw Error(ErrorKind::ShapeMismatch, "grid cell (" + std::to_string(cx) + ", " + std::to_string(cy) +
                                            ") has no free anchor slot");
}

PredictionTensor empty_grid(const GridSpec& spec) {
  PredictionTensor t({static_cast<std::uint32_t>(spec.grid_h), static_cast<std::uint32_t>(spec.grid_w),
                      static_cast<std::uint32_t>(spec.channels())});
  const std::size_t slot = static_cast<std::size_t>(spec.num_classes + 5);
  auto data = t.mutable_data();
  for (std::size_t i = 4; i < data.size(); i += slot) data[i] = kStrongNegative;
  return t;
}

/// Maps an original-image box into network-input pixels for `region`.
Box to_input(const Box& b, const Box& region, int input_w, int input_h) {
  const double sx = input_w / region.w;
  const double sy = input_h / region.h;
  return Box{(b.x - region.x) * sx, (b.y - region.y) * sy, b.w * sx, b.h * sy};
}

bool center_inside(const Box& b, int w, int h) {
  return b.center_x() >= 0.0 && b.center_x() < w && b.center_y() >= 0.0 && b.center_y() < h;
}

}  // namespace

std::string_view to_string(ModelRole role) {
  switch (role) {
    case ModelRole::Detector: return "detector";
    case ModelRole::CrNet: return "crnet";
    case ModelRole::MultiTask: return "multitask";
    case ModelRole::Crnn: return "crnn";
  }
  return "unknown";
}

ModelRole role_from_string(std::string_view name) {
  for (auto r : {ModelRole::Detector, ModelRole::CrNet, ModelRole::MultiTask, ModelRole::Crnn}) {
    if (to_string(r) == name) return r;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown model role '" + std::string(name) + "'");
}

GridSpec ModelLayout::default_detector_spec() {
  GridSpec s;
  s.grid_w = 13;
  s.grid_h = 13;
  s.input_w = 416;
  s.input_h = 416;
  s.num_classes = 1;
  // Wide, short priors shaped like counters (grid units).
  s.anchors = {{1.6, 0.45}, {2.3, 0.65}, {3.0, 0.85}, {4.0, 1.1}, {5.5, 1.5}};
  return s;
}

GridSpec ModelLayout::default_crnet_spec() {
  GridSpec s;
  s.grid_w = 50;
  s.grid_h = 13;
  s.input_w = 400;
  s.input_h = 106;
  s.num_classes = 10;
  // Tall priors shaped like digits (grid units of 8 px).
  s.anchors = {{2.5, 5.0}, {3.2, 6.5}, {4.0, 8.0}, {5.0, 9.5}, {6.2, 11.0}};
  return s;
}

std::vector<std::uint32_t> ModelLayout::output_shape(ModelRole role) const {
  auto grid = [](const GridSpec& s) {
    return std::vector<std::uint32_t>{static_cast<std::uint32_t>(s.grid_h), static_cast<std::uint32_t>(s.grid_w),
                                      static_cast<std::uint32_t>(s.channels())};
  };
  switch (role) {
    case ModelRole::Detector: return grid(detector);
    case ModelRole::CrNet: return grid(crnet);
    case ModelRole::MultiTask: return {kMultiTaskPositions, kDigitClasses};
    case ModelRole::Crnn: return {static_cast<std::uint32_t>(crnn_frames), kCtcLabels};
  }
  return {};
}

std::pair<int, int> ModelLayout::input_size(ModelRole role) const {
  switch (role) {
    case ModelRole::Detector: return {detector.input_w, detector.input_h};
    case ModelRole::CrNet: return {crnet.input_w, crnet.input_h};
    case ModelRole::MultiTask: return {multitask_input_w, multitask_input_h};
    case ModelRole::Crnn: return {crnn_input_w, crnn_input_h};
  }
  return {0, 0};
}

void OracleNoise::validate() const {
  if (!(box_jitter >= 0.0 && box_jitter <= 0.2)) {
    throw Error(ErrorKind::InvalidArgument, "box jitter must lie in [0, 0.2]");
  }
  if (!(confidence_floor > 0.5 && confidence_floor <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "confidence floor must lie in (0.5, 1]");
  }
}

OracleProvider::OracleProvider(const std::vector<MeterAnnotation>& annotations, ModelLayout layout,
                               OracleNoise noise)
    : layout_(std::move(layout)), noise_(noise) {
  noise_.validate();
  layout_.detector.validate();
  layout_.crnet.validate();
  for (const auto& a : annotations) annotations_.emplace(a.image_id, a);
  target_confidence_ = noise_.confidence_floor >= 1.0 ? 1.0 : 0.5 * (1.0 + noise_.confidence_floor);
}

std::vector<std::uint32_t> OracleProvider::output_shape(ModelRole role) const {
  return layout_.output_shape(role);
}

const MeterAnnotation& OracleProvider::lookup(const std::string& image_id) const {
  auto it = annotations_.find(image_id);
  if (it == annotations_.end()) throw Error(ErrorKind::NotFound, "no annotation for '" + image_id + "'");
  return it->second;
}

Box OracleProvider::emitted_counter(const std::string& image_id) const {
  const auto& a = lookup(image_id);
  if (noise_.box_jitter == 0.0) return a.counter;
  Rng rng(derive_seed(noise_.seed, fnv1a64(image_id)));
  const double j = noise_.box_jitter;
  const auto& c = a.counter;
  const double cx = c.center_x() + rng.uniform(-j, j) * c.w;
  const double cy = c.center_y() + rng.uniform(-j, j) * c.h;
  const double w = c.w * (1.0 + rng.uniform(-j, j));
  const double h = c.h * (1.0 + rng.uniform(-j, j));
  return Box::from_center(cx, cy, w, h);
}

PredictionTensor OracleProvider::infer(const InferenceRequest& request) const {
  const auto& a = lookup(request.image_id);
  if (!is_valid(request.region)) throw Error(ErrorKind::GeometryError, "empty request region");
  switch (request.role) {
    case ModelRole::Detector: return detector(a, request.region);
    case ModelRole::CrNet: return crnet(a, request.region);
    case ModelRole::MultiTask: return multitask(a);
    case ModelRole::Crnn: return crnn(a, request.region);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown role");
}

PredictionTensor OracleProvider::detector(const MeterAnnotation& a, const Box& region) const {
  const auto& spec = layout_.detector;
  auto t = empty_grid(spec);
  std::vector<char> occupied(static_cast<std::size_t>(spec.grid_w * spec.grid_h) * spec.anchors.size(), 0);
  const Box box = to_input(emitted_counter(a.image_id), region, spec.input_w, spec.input_h);
  if (center_inside(box, spec.input_w, spec.input_h)) {
    encode_slot(t, spec, box, 0, target_confidence_, 1.0, occupied);
  }
  return t;
}

PredictionTensor OracleProvider::crnet(const MeterAnnotation& a, const Box& region) const {
  const auto& spec = layout_.crnet;
  auto t = empty_grid(spec);
  std::vector<char> occupied(static_cast<std::size_t>(spec.grid_w * spec.grid_h) * spec.anchors.size(), 0);
  const double part = std::sqrt(target_confidence_);
  for (std::size_t p = 0; p < a.digits.size(); ++p) {
    const Box box = to_input(a.digits[p], region, spec.input_w, spec.input_h);
    if (!center_inside(box, spec.input_w, spec.input_h)) continue;
    encode_slot(t, spec, box, a.reading[p] - '0', part, part, occupied);
  }
  return t;
}

PredictionTensor OracleProvider::multitask(const MeterAnnotation& a) const {
  PredictionTensor t({kMultiTaskPositions, kDigitClasses});
  const double gap = softmax_gap(target_confidence_, kDigitClasses - 1);
  for (int p = 0; p < kMultiTaskPositions; ++p) {
    t.at(p, a.reading[p] - '0') = static_cast<float>(gap);
  }
  return t;
}

PredictionTensor OracleProvider::crnn(const MeterAnnotation& a, const Box& region) const {
  const int frames = layout_.crnn_frames;
  std::vector<int> labels(static_cast<std::size_t>(frames), kCtcBlank);
  for (std::size_t p = 0; p < a.digits.size(); ++p) {
    const Box box = to_input(a.digits[p], region, layout_.crnn_input_w, layout_.crnn_input_h);
    if (!center_inside(box, layout_.crnn_input_w, layout_.crnn_input_h)) continue;
    const int f = std::clamp(static_cast<int>(box.center_x() / layout_.crnn_input_w * frames), 0, frames - 1);
    const int label = a.reading[p] - '0';
    if (labels[f] != kCtcBlank) {
      throw Error(ErrorKind::ShapeMismatch, "two digits share CTC frame " + std::to_string(f));
    }
    // Equal neighbours need a blank frame between them to survive the collapse.
    if ((f > 0 && labels[f - 1] == label) || (f + 1 < frames && labels[f + 1] == label)) {
      throw Error(ErrorKind::ShapeMismatch, "repeated digit without a separating blank frame");
    }
    labels[f] = label;
  }
  PredictionTensor t({static_cast<std::uint32_t>(frames), kCtcLabels});
  const double gap = softmax_gap(target_confidence_, kCtcLabels - 1);
  for (int f = 0; f < frames; ++f) t.at(f, labels[f]) = static_cast<float>(gap);
  return t;
}

DirectoryProvider::DirectoryProvider(std::filesystem::path root, ModelLayout layout)
    : root_(std::move(root)), layout_(std::move(layout)) {}

std::vector<std::uint32_t> DirectoryProvider::output_shape(ModelRole role) const {
  return layout_.output_shape(role);
}

std::filesystem::path DirectoryProvider::tensor_path(const std::filesystem::path& root,
                                                     const std::string& image_id, ModelRole role) {
  return root / (image_id + "." + std::string(to_string(role)) + ".amrt");
}

PredictionTensor DirectoryProvider::infer(const InferenceRequest& request) const {
  const auto path = tensor_path(root_, request.image_id, request.role);
  if (!std::filesystem::exists(path)) throw Error(ErrorKind::NotFound, "missing tensor " + path.string());
  auto t = load_tensor(path);
  const auto expected = layout_.output_shape(request.role);
  if (t.dims() != expected) {
    throw Error(ErrorKind::ShapeMismatch, path.filename().string() + " has shape " + shape_string(t.dims()) +
                                              ", expected " + shape_string(expected));
  }
  return t;
}

RecordingProvider::RecordingProvider(const InferenceProvider& inner, std::filesystem::path root)
    : inner_(inner), root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw Error(ErrorKind::IoError, "cannot create " + root_.string() + ": " + ec.message());
}

std::vector<std::uint32_t> RecordingProvider::output_shape(ModelRole role) const {
  return inner_.output_shape(role);
}

PredictionTensor RecordingProvider::infer(const InferenceRequest& request) const {
  auto t = inner_.infer(request);
  save_tensor(DirectoryProvider::tensor_path(root_, request.image_id, request.role), t);
  return t;
}

}  // namespace amr
