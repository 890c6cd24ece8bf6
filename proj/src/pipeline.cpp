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

#include "amr/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>

#include "amr/error.hpp"
#include "json.hpp"

namespace amr {
namespace {

using json = nlohmann::json;

json box_json(const Box& b) { return json::array({b.x, b.y, b.w, b.h}); }

Box box_from(const json& j) {
  if (!j.is_array() || j.size() != 4) throw Error(ErrorKind::MalformedLine, "box must be [x, y, w, h]");
  return Box{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

ReadingResult recognize(const PredictionTensor& t, const PipelineConfig& config) {
  switch (config.recognizer) {
    case RecognizerKind::CrNet:
      return decode_crnet(t, config.layout.crnet, config.mode, config.recognition_threshold,
                          config.recognition_nms);
    case RecognizerKind::MultiTask:
      return decode_multitask(t);
    case RecognizerKind::Crnn:
      return decode_ctc_greedy(CtcFrameMatrix::from_logits(t));
  }
  throw Error(ErrorKind::InvalidArgument, "unknown recognizer");
}

}  // namespace

std::string_view to_string(RecognizerKind kind) {
  switch (kind) {
    case RecognizerKind::CrNet: return "crnet";
    case RecognizerKind::MultiTask: return "multitask";
    case RecognizerKind::Crnn: return "crnn";
  }
  return "unknown";
}

RecognizerKind recognizer_from_string(std::string_view name) {
  for (auto k : {RecognizerKind::CrNet, RecognizerKind::MultiTask, RecognizerKind::Crnn}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorKind::InvalidArgument, "unknown recognizer '" + std::string(name) + "'");
}

ModelRole role_of(RecognizerKind kind) {
  switch (kind) {
    case RecognizerKind::CrNet: return ModelRole::CrNet;
    case RecognizerKind::MultiTask: return ModelRole::MultiTask;
    case RecognizerKind::Crnn: return ModelRole::Crnn;
  }
  return ModelRole::CrNet;
}

void PipelineConfig::validate() const {
  layout.detector.validate();
  layout.crnet.validate();
  if (layout.detector.input_w % 32 != 0 || layout.detector.input_h % 32 != 0) {
    throw Error(ErrorKind::InvalidArgument, "detector input size must be divisible by 32");
  }
  if (layout.detector.num_classes != 1) throw Error(ErrorKind::InvalidArgument, "detector must have one class");
  if (layout.crnet.num_classes != 10) throw Error(ErrorKind::InvalidArgument, "CR-NET must have ten classes");
  if (!(margin >= 0.0)) throw Error(ErrorKind::InvalidArgument, "margin must be non-negative");
  for (double t : {detection_threshold, detection_nms, recognition_threshold, recognition_nms}) {
    if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::InvalidArgument, "thresholds must lie in [0, 1]");
  }
  if (layout.crnn_frames < 1 || layout.multitask_input_w < 1 || layout.multitask_input_h < 1 ||
      layout.crnn_input_w < 1 || layout.crnn_input_h < 1) {
    throw Error(ErrorKind::InvalidArgument, "recognizer input sizes must be positive");
  }
}

PipelineTrace run_pipeline(const PipelineInput& input, const InferenceProvider& provider,
                           const PipelineConfig& config) {
  if (input.width <= 0 || input.height <= 0) {
    throw Error(ErrorKind::InvalidArgument, "image size must be positive");
  }
  PipelineTrace trace;
  trace.image_id = input.image_id;
  const double iw = input.width;
  const double ih = input.height;
  const auto& det = config.layout.detector;

  InferenceRequest request;
  request.image_id = input.image_id;
  request.role = ModelRole::Detector;
  request.region = Box{0.0, 0.0, iw, ih};
  Raster resized;
  if (input.image) {
    resized = resample_region(*input.image, request.region, det.input_w, det.input_h);
    request.input = &resized;
  }
  const auto candidates =
      nms(decode_grid(provider.infer(request), det, config.detection_threshold), config.detection_nms);
  auto counter = select_counter(candidates);
  if (!counter) {
    trace.result.status = ReadingStatus::NegativeNoCounter;
    return trace;
  }

  // Network-input pixels back to the original image.
  const double sx = iw / det.input_w;
  const double sy = ih / det.input_h;
  counter->box = Box{counter->box.x * sx, counter->box.y * sy, counter->box.w * sx, counter->box.h * sy};
  trace.counter = counter;
  trace.margin_box = expand_margin(counter->box, config.margin, iw, ih);

  request.role = role_of(config.recognizer);
  request.region = *trace.margin_box;
  request.input = nullptr;
  if (input.image) {
    const auto [w, h] = config.layout.input_size(request.role);
    resized = resample_region(*input.image, request.region, w, h);
    request.input = &resized;
  }
  trace.result = recognize(provider.infer(request), config);
  return trace;
}

std::vector<PipelineTrace> run_batch(const std::vector<PipelineInput>& inputs, const InferenceProvider& provider,
                                     const PipelineConfig& config, int workers) {
  config.validate();
  std::vector<PipelineTrace> traces(inputs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < inputs.size(); i = next++) {
      try {
        traces[i] = run_pipeline(inputs[i], provider, config);
      } catch (const std::exception& e) {
        traces[i] = PipelineTrace{};
        traces[i].image_id = inputs[i].image_id;
        traces[i].error = e.what();
      }
    }
  };
  const int n = std::max(1, std::min<int>(workers, static_cast<int>(inputs.size())));
  std::vector<std::jthread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(work);
  work();
  return traces;
}

std::string trace_to_jsonl(const PipelineTrace& t) {
  json j;
  j["image_id"] = t.image_id;
  j["counter_box"] = t.counter ? box_json(t.counter->box) : json(nullptr);
  j["counter_confidence"] = t.counter ? json(t.counter->confidence) : json(nullptr);
  j["margin_box"] = t.margin_box ? box_json(*t.margin_box) : json(nullptr);
  j["reading"] = t.result.reading;
  j["status"] = t.failed() ? "error" : std::string(to_string(t.result.status));
  j["confidences"] = t.result.digit_confidences;
  if (t.failed()) j["error"] = t.error;
  return j.dump();
}

PipelineTrace trace_from_jsonl(std::string_view line) {
  try {
    const auto j = json::parse(line);
    PipelineTrace t;
    t.image_id = j.at("image_id").get<std::string>();
    if (j.contains("counter_box") && !j["counter_box"].is_null()) {
      DecodedBox d;
      d.box = box_from(j["counter_box"]);
      d.confidence = j.value("counter_confidence", json(1.0)).is_null() ? 1.0 : j["counter_confidence"].get<double>();
      t.counter = d;
    }
    if (j.contains("margin_box") && !j["margin_box"].is_null()) t.margin_box = box_from(j["margin_box"]);
    t.result.reading = j.value("reading", "");
    t.result.digit_confidences = j.value("confidences", std::vector<double>{});
    const auto status = j.value("status", std::string("accepted"));
    if (status == "error") {
      t.error = j.value("error", std::string("error"));
    } else {
      t.result.status = status_from_string(status);
    }
    return t;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedLine, std::string("trace line: ") + e.what());
  }
}

int resolve_workers(int requested) {
  if (const char* env = std::getenv("AMR_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace amr
