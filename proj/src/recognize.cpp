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

#include "amr/recognize.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "amr/error.hpp"

namespace amr {
namespace {

std::vector<double> softmax(std::span<const float> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(static_cast<double>(logits[i]) - mx);
    sum += out[i];
  }
  for (auto& v : out) v /= sum;
  return out;
}

}  // namespace

std::string_view to_string(ReadingStatus status) {
  switch (status) {
    case ReadingStatus::Accepted: return "accepted";
    case ReadingStatus::RejectedTooFew: return "rejected_too_few";
    case ReadingStatus::NegativeNoCounter: return "negative_no_counter";
  }
  return "unknown";
}

ReadingStatus status_from_string(std::string_view name) {
  for (auto s : {ReadingStatus::Accepted, ReadingStatus::RejectedTooFew, ReadingStatus::NegativeNoCounter}) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown reading status '" + std::string(name) + "'");
}

std::string_view to_string(AssemblyMode mode) { return mode == AssemblyMode::Fixed5 ? "fixed5" : "variable"; }

AssemblyMode mode_from_string(std::string_view name) {
  if (name == "fixed5") return AssemblyMode::Fixed5;
  if (name == "variable") return AssemblyMode::Variable;
  throw Error(ErrorKind::InvalidArgument, "unknown assembly mode '" + std::string(name) + "'");
}

std::vector<DecodedBox> reading_order(std::vector<DecodedBox> digits) {
  std::sort(digits.begin(), digits.end(), [](const DecodedBox& a, const DecodedBox& b) {
    return std::make_tuple(a.box.center_x(), a.box.center_y(), a.class_id) <
           std::make_tuple(b.box.center_x(), b.box.center_y(), b.class_id);
  });
  return digits;
}

ReadingResult decode_crnet(const PredictionTensor& t, const GridSpec& spec, AssemblyMode mode,
                           double threshold, double nms_threshold) {
  if (spec.num_classes != 10) throw Error(ErrorKind::ShapeMismatch, "CR-NET decoding needs 10 classes");
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "threshold must lie in [0, 1]");
  }
  auto kept = nms(decode_grid(t, spec, threshold), nms_threshold);  // rank order

  ReadingResult r;
  if (mode == AssemblyMode::Fixed5) {
    if (kept.size() < 5) {
      r.status = ReadingStatus::RejectedTooFew;
      return r;
    }
    kept.resize(5);
  } else if (kept.size() > static_cast<std::size_t>(spec.grid_w)) {
    kept.resize(static_cast<std::size_t>(spec.grid_w));
  }
  for (const auto& d : reading_order(std::move(kept))) {
    r.reading.push_back(static_cast<char>('0' + d.class_id));
    r.digit_confidences.push_back(d.confidence);
  }
  return r;
}

ReadingResult decode_multitask(const PredictionTensor& outputs) {
  const auto& dims = outputs.dims();
  if (dims.size() != 2 || dims[0] != 5 || dims[1] != 10) {
    throw Error(ErrorKind::ShapeMismatch, "multi-task output must be [5, 10]");
  }
  ReadingResult r;
  const auto data = outputs.data();
  for (std::size_t p = 0; p < dims[0]; ++p) {
    const auto row = data.subspan(p * 10, 10);
    // max_element returns the first maximum: lowest class wins ties.
    const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
    r.reading.push_back(static_cast<char>('0' + best));
    r.digit_confidences.push_back(softmax(row)[best]);
  }
  return r;
}

void CtcFrameMatrix::check_shape(const PredictionTensor& t) {
  const auto& dims = t.dims();
  if (dims.size() != 2 || dims[1] != kLabels || dims[0] == 0) {
    throw Error(ErrorKind::ShapeMismatch, "CTC frames must be [T >= 1, 11]");
  }
}

CtcFrameMatrix CtcFrameMatrix::from_probabilities(const PredictionTensor& t) {
  check_shape(t);
  const int frames = static_cast<int>(t.dims()[0]);
  std::vector<double> probs(t.data().begin(), t.data().end());
  for (int f = 0; f < frames; ++f) {
    double sum = 0.0;
    for (int l = 0; l < kLabels; ++l) {
      const double p = probs[static_cast<std::size_t>(f) * kLabels + l];
      if (p < 0.0) throw Error(ErrorKind::NonDistribution, "negative probability in frame " + std::to_string(f));
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw Error(ErrorKind::NonDistribution, "frame " + std::to_string(f) + " sums to " + std::to_string(sum));
    }
  }
  return CtcFrameMatrix(frames, std::move(probs));
}

CtcFrameMatrix CtcFrameMatrix::from_logits(const PredictionTensor& t) {
  check_shape(t);
  const int frames = static_cast<int>(t.dims()[0]);
  std::vector<double> probs;
  probs.reserve(t.size());
  for (int f = 0; f < frames; ++f) {
    const auto row = softmax(t.data().subspan(static_cast<std::size_t>(f) * kLabels, kLabels));
    probs.insert(probs.end(), row.begin(), row.end());
  }
  return CtcFrameMatrix(frames, std::move(probs));
}

ReadingResult decode_ctc_greedy(const CtcFrameMatrix& m) {
  ReadingResult r;
  int prev = -1;
  for (int f = 0; f < m.frames(); ++f) {
    int best = 0;
    for (int l = 1; l < CtcFrameMatrix::kLabels; ++l) {
      if (m.prob(f, l) > m.prob(f, best)) best = l;
    }
    const double p = m.prob(f, best);
    if (best == prev) {
      if (best != CtcFrameMatrix::kBlank) r.digit_confidences.back() = std::max(r.digit_confidences.back(), p);
    } else if (best != CtcFrameMatrix::kBlank) {
      r.reading.push_back(static_cast<char>('0' + best));
      r.digit_confidences.push_back(p);
    }
    prev = best;
  }
  return r;
}

}  // namespace amr
