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

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <unistd.h>

#include "amr/config.hpp"
#include "amr/pipeline.hpp"
#include "amr/provider.hpp"
#include "amr/synthetic.hpp"
#include "test_util.hpp"

namespace amr {
void PrintTo(RecognizerKind kind, std::ostream* os) { *os << to_string(kind); }

namespace {

using testing::kind_of;

struct Fixture {
  std::vector<SyntheticMeter> meters;
  std::vector<MeterAnnotation> annotations;
  std::vector<PipelineInput> inputs;

  explicit Fixture(std::size_t n, std::uint64_t seed = 1) : meters(make_synthetic_meters(n, seed)) {
    for (const auto& m : meters) {
      annotations.push_back(m.annotation);
      inputs.push_back({m.annotation.image_id, m.width, m.height, nullptr});
    }
  }
};

MeterAnnotation with_reading(MeterAnnotation a, std::string reading) {
  a.reading = std::move(reading);
  return a;
}

TEST(Oracle, DetectorBoxRecovered) {
  Fixture f(30);
  const OracleProvider oracle(f.annotations, ModelLayout{}, OracleNoise{0.0, 0.99, 1});
  PipelineConfig config;
  for (std::size_t i = 0; i < f.inputs.size(); ++i) {
    const auto t = run_pipeline(f.inputs[i], oracle, config);
    ASSERT_TRUE(t.counter.has_value());
    EXPECT_GE(iou(t.counter->box, f.annotations[i].counter), 0.99) << f.inputs[i].image_id;
  }
}

class RecognizerRoundTrip : public ::testing::TestWithParam<RecognizerKind> {};

TEST_P(RecognizerRoundTrip, ReadsKnownCounter) {
  Fixture f(1, 4);
  f.annotations[0] = with_reading(f.annotations[0], "04063");
  const OracleProvider oracle(f.annotations, ModelLayout{}, OracleNoise{0.0, 0.99, 1});
  PipelineConfig config;
  config.recognizer = GetParam();
  const auto t = run_pipeline(f.inputs[0], oracle, config);
  EXPECT_EQ(t.result.status, ReadingStatus::Accepted);
  EXPECT_EQ(t.result.reading, "04063");
}

TEST_P(RecognizerRoundTrip, ConfidenceFloorHolds) {
  Fixture f(20, 9);
  const OracleProvider oracle(f.annotations, ModelLayout{}, OracleNoise{0.0, 0.9, 3});
  PipelineConfig config;
  config.recognizer = GetParam();
  for (const auto& t : run_batch(f.inputs, oracle, config, 2)) {
    ASSERT_FALSE(t.failed()) << t.error;
    ASSERT_EQ(t.result.digit_confidences.size(), 5u);
    for (double c : t.result.digit_confidences) EXPECT_GE(c, 0.9);
    EXPECT_GE(t.counter->confidence, 0.9);
  }
}

INSTANTIATE_TEST_SUITE_P(AllRecognizers, RecognizerRoundTrip,
                         ::testing::Values(RecognizerKind::CrNet, RecognizerKind::MultiTask, RecognizerKind::Crnn),
                         [](const auto& info) {
                           std::string name(to_string(info.param));
                           std::erase(name, '-');
                           return name;
                         });

TEST(Oracle, VariableModeOnCrNet) {
  Fixture f(10, 2);
  const OracleProvider oracle(f.annotations, ModelLayout{}, OracleNoise{});
  PipelineConfig config;
  config.mode = AssemblyMode::Variable;
  for (std::size_t i = 0; i < f.inputs.size(); ++i) {
    EXPECT_EQ(run_pipeline(f.inputs[i], oracle, config).result.reading, f.annotations[i].reading);
  }
}

TEST(Oracle, JitterMovesTheBox) {
  Fixture f(20, 3);
  const OracleProvider oracle(f.annotations, ModelLayout{}, OracleNoise{0.1, 0.99, 5});
  double total = 0;
  for (const auto& a : f.annotations) {
    const double v = iou(oracle.emitted_counter(a.image_id), a.counter);
    EXPECT_GT(v, 0.5);
    total += v;
  }
  EXPECT_LT(total / 20.0, 0.99);
  const OracleProvider again(f.annotations, ModelLayout{}, OracleNoise{0.1, 0.99, 5});
  EXPECT_EQ(again.emitted_counter(f.annotations[3].image_id), oracle.emitted_counter(f.annotations[3].image_id));
}

TEST(Oracle, NoiseValidation) {
  EXPECT_EQ(kind_of([] { OracleNoise{0.3, 0.99, 0}.validate(); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { OracleNoise{0.0, 0.4, 0}.validate(); }), ErrorKind::InvalidArgument);
  Fixture f(1);
  const OracleProvider oracle(f.annotations, ModelLayout{}, OracleNoise{});
  InferenceRequest r;
  r.image_id = "nobody";
  r.region = Box{0, 0, 10, 10};
  EXPECT_EQ(kind_of([&] { oracle.infer(r); }), ErrorKind::NotFound);
}

class EmptyGrid final : public InferenceProvider {
 public:
  std::vector<std::uint32_t> output_shape(ModelRole role) const override { return layout_.output_shape(role); }
  PredictionTensor infer(const InferenceRequest& r) const override {
    return PredictionTensor(layout_.output_shape(r.role), kStrongNegative);
  }

 private:
  ModelLayout layout_;
};

TEST(Pipeline, NoCounterIsNegative) {
  const EmptyGrid empty;
  const auto t = run_pipeline({"blank", 640, 480, nullptr}, empty, PipelineConfig{});
  EXPECT_EQ(t.result.status, ReadingStatus::NegativeNoCounter);
  EXPECT_FALSE(t.counter.has_value());
  EXPECT_FALSE(t.margin_box.has_value());
}

TEST(Pipeline, MarginBoxRecorded) {
  Fixture f(5, 6);
  const OracleProvider oracle(f.annotations, ModelLayout{}, OracleNoise{});
  PipelineConfig config;
  config.margin = 0.2;
  for (std::size_t i = 0; i < f.inputs.size(); ++i) {
    const auto t = run_pipeline(f.inputs[i], oracle, config);
    ASSERT_TRUE(t.margin_box.has_value());
    const Box want = expand_margin(t.counter->box, 0.2, f.inputs[i].width, f.inputs[i].height);
    EXPECT_NEAR(t.margin_box->w, want.w, 1e-9);
    EXPECT_NEAR(t.margin_box->w, 1.2 * t.counter->box.w, 1e-6);
    EXPECT_NEAR(t.margin_box->x, want.x, 1e-9);
  }
}

TEST(Pipeline, BatchRecordsPerImageFailures) {
  Fixture f(4, 7);
  const auto dir = std::filesystem::temp_directory_path() / ("amr_dir_provider_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  const OracleProvider oracle(f.annotations, ModelLayout{}, OracleNoise{});
  const RecordingProvider recorder(oracle, dir);
  const auto recorded = run_batch(f.inputs, recorder, PipelineConfig{}, 1);

  // drop one image's recognizer tensor; the rest of the batch must still run
  std::filesystem::remove(DirectoryProvider::tensor_path(dir, f.inputs[2].image_id, ModelRole::CrNet));
  const DirectoryProvider replay(dir, ModelLayout{});
  const auto traces = run_batch(f.inputs, replay, PipelineConfig{}, 3);
  for (std::size_t i = 0; i < traces.size(); ++i) {
    if (i == 2) {
      EXPECT_TRUE(traces[i].failed());
      EXPECT_NE(traces[i].error.find("NotFound"), std::string::npos);
    } else {
      ASSERT_FALSE(traces[i].failed()) << traces[i].error;
      EXPECT_EQ(traces[i].result, recorded[i].result);
    }
  }
  std::filesystem::remove_all(dir);
}

TEST(Pipeline, DirectoryProviderChecksShape) {
  const auto dir = std::filesystem::temp_directory_path() / ("amr_dir_shape_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  save_tensor(DirectoryProvider::tensor_path(dir, "x", ModelRole::Detector), PredictionTensor({13, 13, 29}));
  const DirectoryProvider p(dir, ModelLayout{});
  InferenceRequest r;
  r.image_id = "x";
  EXPECT_EQ(kind_of([&] { p.infer(r); }), ErrorKind::ShapeMismatch);
  std::filesystem::remove_all(dir);
}

TEST(Trace, JsonlRoundTrip) {
  Fixture f(6, 8);
  const OracleProvider oracle(f.annotations, ModelLayout{}, OracleNoise{0.05, 0.95, 2});
  auto traces = run_batch(f.inputs, oracle, PipelineConfig{}, 2);
  traces.push_back(run_pipeline({"blank", 640, 480, nullptr}, EmptyGrid{}, PipelineConfig{}));
  PipelineTrace failed;
  failed.image_id = "broken";
  failed.error = "NotFound: no tensor";
  traces.push_back(failed);
  for (const auto& t : traces) {
    const auto line = trace_to_jsonl(t);
    EXPECT_EQ(line.find('\n'), std::string::npos);
    const auto back = trace_from_jsonl(line);
    EXPECT_EQ(back.image_id, t.image_id);
    EXPECT_EQ(back.counter, t.counter);
    EXPECT_EQ(back.margin_box, t.margin_box);
    EXPECT_EQ(back.result, t.result);
    EXPECT_EQ(back.error, t.error);
    EXPECT_EQ(trace_to_jsonl(back), line);
  }
  EXPECT_EQ(kind_of([] { trace_from_jsonl("{not json"); }), ErrorKind::MalformedLine);
}

TEST(Config, DefaultsAndOverrides) {
  const PipelineConfig d;
  EXPECT_EQ(d.layout.detector.input_w, 416);
  EXPECT_EQ(d.layout.detector.anchors.size(), 5u);
  EXPECT_EQ(filter_count(1, 5), d.layout.detector.channels());
  EXPECT_EQ(d.layout.output_shape(ModelRole::Detector), (std::vector<std::uint32_t>{13, 13, 30}));
  EXPECT_EQ(d.layout.output_shape(ModelRole::CrNet), (std::vector<std::uint32_t>{13, 50, 75}));
  EXPECT_EQ(d.layout.output_shape(ModelRole::MultiTask), (std::vector<std::uint32_t>{5, 10}));
  EXPECT_EQ(d.layout.output_shape(ModelRole::Crnn), (std::vector<std::uint32_t>{40, 11}));

  const auto c = pipeline_config_from_json(
      R"({"margin": 0.1, "recognizer": {"kind": "crnn", "mode": "variable", "threshold": 0.4},
          "detector": {"conf_threshold": 0.3, "anchors": [[1, 2], [3, 4]]}})");
  EXPECT_EQ(c.margin, 0.1);
  EXPECT_EQ(c.recognizer, RecognizerKind::Crnn);
  EXPECT_EQ(c.mode, AssemblyMode::Variable);
  EXPECT_EQ(c.recognition_threshold, 0.4);
  EXPECT_EQ(c.detection_threshold, 0.3);
  EXPECT_EQ(c.layout.detector.anchors.size(), 2u);
  EXPECT_EQ(c.layout.detector.channels(), 12);

  const auto again = pipeline_config_from_json(pipeline_config_to_json(c));
  EXPECT_EQ(pipeline_config_to_json(again), pipeline_config_to_json(c));
}

TEST(Config, Rejections) {
  EXPECT_EQ(kind_of([] { pipeline_config_from_json(R"({"detector": {"input_w": 400}})"); }),
            ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { pipeline_config_from_json(R"({"margin": -1})"); }), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { pipeline_config_from_json(R"({"recognizer": {"kind": "lstm"}})"); }),
            ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of([] { pipeline_config_from_json("[1,"); }), ErrorKind::MalformedLine);
}

TEST(Workers, EnvironmentOverrides) {
  ::setenv("AMR_WORKERS", "3", 1);
  EXPECT_EQ(resolve_workers(8), 3);
  ::unsetenv("AMR_WORKERS");
  EXPECT_EQ(resolve_workers(5), 5);
  EXPECT_GE(resolve_workers(0), 1);
}

}  // namespace
}  // namespace amr
