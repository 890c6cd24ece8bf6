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

// Python bindings for the amr core library (module amrkit._amr).

#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>

#include "amr/augment.hpp"
#include "amr/dataset.hpp"
#include "amr/detect.hpp"
#include "amr/error.hpp"
#include "amr/metrics.hpp"
#include "amr/pipeline.hpp"
#include "amr/provider.hpp"
#include "amr/recognize.hpp"
#include "amr/synthetic.hpp"
#include "amr/tensor.hpp"

namespace py = pybind11;
using namespace amr;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

PredictionTensor to_tensor(const FloatArray& a) {
  std::vector<std::uint32_t> dims;
  for (py::ssize_t i = 0; i < a.ndim(); ++i) dims.push_back(static_cast<std::uint32_t>(a.shape(i)));
  return PredictionTensor(std::move(dims), std::vector<float>(a.data(), a.data() + a.size()));
}

FloatArray to_array(const PredictionTensor& t) {
  std::vector<py::ssize_t> shape(t.dims().begin(), t.dims().end());
  FloatArray out(shape);
  std::memcpy(out.mutable_data(), t.data().data(), t.size() * sizeof(float));
  return out;
}

std::vector<Anchor> to_anchors(const std::vector<std::pair<double, double>>& v) {
  std::vector<Anchor> out;
  for (const auto& [w, h] : v) out.push_back({w, h});
  return out;
}

}  // namespace

PYBIND11_MODULE(_amr, m) {
  m.doc() = "Automatic meter reading core: geometry, decoding, augmentation planning, metrics";

  static py::exception<Error> amr_error(m, "AmrError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      PyErr_SetString(amr_error.ptr(), e.what());
    }
  });

  py::class_<Box>(m, "Box")
      .def(py::init<>())
      .def(py::init<double, double, double, double>(), py::arg("x"), py::arg("y"), py::arg("w"), py::arg("h"))
      .def_readwrite("x", &Box::x)
      .def_readwrite("y", &Box::y)
      .def_readwrite("w", &Box::w)
      .def_readwrite("h", &Box::h)
      .def("area", &Box::area)
      .def(py::self == py::self)
      .def("__iter__", [](const Box& b) { return py::iter(py::make_tuple(b.x, b.y, b.w, b.h)); })
      .def("__repr__", [](const Box& b) {
        return "Box(" + std::to_string(b.x) + ", " + std::to_string(b.y) + ", " + std::to_string(b.w) + ", " +
               std::to_string(b.h) + ")";
      });

  py::class_<Anchor>(m, "Anchor")
      .def(py::init<double, double>(), py::arg("pw"), py::arg("ph"))
      .def_readwrite("pw", &Anchor::pw)
      .def_readwrite("ph", &Anchor::ph)
      .def(py::self == py::self);

  py::class_<DecodedBox>(m, "DecodedBox")
      .def(py::init<Box, double, int>(), py::arg("box"), py::arg("confidence"), py::arg("class_id") = 0)
      .def_readwrite("box", &DecodedBox::box)
      .def_readwrite("confidence", &DecodedBox::confidence)
      .def_readwrite("class_id", &DecodedBox::class_id)
      .def(py::self == py::self);

  py::class_<MeterAnnotation>(m, "MeterAnnotation")
      .def_readwrite("image_id", &MeterAnnotation::image_id)
      .def_readwrite("camera", &MeterAnnotation::camera)
      .def_readwrite("counter", &MeterAnnotation::counter)
      .def_property_readonly("digits",
                             [](const MeterAnnotation& a) { return std::vector<Box>(a.digits.begin(), a.digits.end()); })
      .def_readwrite("reading", &MeterAnnotation::reading);

  py::class_<ReadingResult>(m, "ReadingResult")
      .def_readonly("reading", &ReadingResult::reading)
      .def_readonly("digit_confidences", &ReadingResult::digit_confidences)
      .def_property_readonly("status", [](const ReadingResult& r) { return std::string(to_string(r.status)); });

  py::class_<PipelineTrace>(m, "PipelineTrace")
      .def_readonly("image_id", &PipelineTrace::image_id)
      .def_readonly("counter", &PipelineTrace::counter)
      .def_readonly("margin_box", &PipelineTrace::margin_box)
      .def_readonly("result", &PipelineTrace::result)
      .def_readonly("error", &PipelineTrace::error)
      .def("to_jsonl", &trace_to_jsonl);

  py::class_<TTest>(m, "TTest")
      .def_readonly("t", &TTest::t)
      .def_readonly("dof", &TTest::dof)
      .def_readonly("p_value", &TTest::p_value)
      .def_readonly("critical", &TTest::critical)
      .def_readonly("significant", &TTest::significant);

  // dataset
  m.def("parse_annotation", [](const std::string& text, const std::string& id) { return parse_annotation(text, id); },
        py::arg("text"), py::arg("image_id") = "");
  m.def("serialize_annotation", &serialize_annotation);
  m.def("resolve_transition_digit", &resolve_transition_digit, py::arg("lower"), py::arg("upper"));
  m.def(
      "split_sizes",
      [](std::size_t n, double train, double val, double test) { return split_sizes(n, {train, val, test}); },
      py::arg("n"), py::arg("train") = 0.4, py::arg("validation") = 0.2, py::arg("test") = 0.4);
  m.def(
      "split_dataset",
      [](std::vector<std::string> ids, std::uint64_t seed, double train, double val, double test) {
        auto s = split_dataset(std::move(ids), {train, val, test}, seed);
        return py::make_tuple(s.train, s.validation, s.test);
      },
      py::arg("ids"), py::arg("seed"), py::arg("train") = 0.4, py::arg("validation") = 0.2, py::arg("test") = 0.4);
  m.def(
      "make_synthetic_meters",
      [](std::size_t count, std::uint64_t seed) {
        std::vector<MeterAnnotation> out;
        for (auto& s : make_synthetic_meters(count, seed)) out.push_back(std::move(s.annotation));
        return out;
      },
      py::arg("count"), py::arg("seed") = 0);

  // tensors
  m.def("read_tensor", [](const py::bytes& b) {
    const std::string s = b;
    return to_array(read_tensor(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size())));
  });
  m.def("write_tensor", [](const FloatArray& a) {
    const auto bytes = write_tensor(to_tensor(a));
    return py::bytes(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  });

  // detection
  m.def("filter_count", &filter_count, py::arg("num_classes"), py::arg("num_anchors"));
  m.def("iou", &iou);
  m.def(
      "decode_grid",
      [](const FloatArray& t, const std::vector<std::pair<double, double>>& anchors, int num_classes, int input_w,
         int input_h, double threshold) {
        if (t.ndim() != 3) throw Error(ErrorKind::ShapeMismatch, "grid tensor must be 3-D");
        GridSpec spec;
        spec.grid_h = static_cast<int>(t.shape(0));
        spec.grid_w = static_cast<int>(t.shape(1));
        spec.anchors = to_anchors(anchors);
        spec.num_classes = num_classes;
        spec.input_w = input_w;
        spec.input_h = input_h;
        return decode_grid(to_tensor(t), spec, threshold);
      },
      py::arg("tensor"), py::arg("anchors"), py::arg("num_classes") = 1, py::arg("input_w") = 416,
      py::arg("input_h") = 416, py::arg("threshold") = 0.25);
  m.def("nms", &nms, py::arg("boxes"), py::arg("iou_threshold") = 0.5);
  m.def("select_counter", &select_counter);
  m.def("expand_margin", &expand_margin, py::arg("box"), py::arg("margin"), py::arg("image_w"), py::arg("image_h"));
  m.def(
      "kmeans_anchors",
      [](const std::vector<std::pair<double, double>>& boxes, int k, std::uint64_t seed) {
        std::vector<std::pair<double, double>> out;
        for (const auto& a : kmeans_anchors(to_anchors(boxes), k, seed)) out.emplace_back(a.pw, a.ph);
        return out;
      },
      py::arg("boxes"), py::arg("k") = 5, py::arg("seed") = 0);

  // recognition
  m.def("decode_multitask", [](const FloatArray& a) { return decode_multitask(to_tensor(a)); });
  m.def(
      "decode_ctc_greedy",
      [](const FloatArray& a, bool logits) {
        const auto t = to_tensor(a);
        return decode_ctc_greedy(logits ? CtcFrameMatrix::from_logits(t) : CtcFrameMatrix::from_probabilities(t));
      },
      py::arg("frames"), py::arg("logits") = false);

  // augmentation
  m.def("all_permutations", &all_permutations);
  m.def(
      "plan_counts",
      [](const std::vector<std::string>& readings, std::size_t total, std::uint64_t seed) {
        std::vector<MeterAnnotation> pool;
        const auto meters = make_synthetic_meters(readings.size(), seed);
        for (std::size_t i = 0; i < readings.size(); ++i) {
          auto a = meters[i].annotation;
          a.reading = readings[i];
          pool.push_back(a);
        }
        const auto counts = count_plans(plan_permutations(pool, total, seed), pool);
        py::array_t<std::int64_t> out({kDigitClasses, kDigitsPerCounter});
        for (int c = 0; c < kDigitClasses; ++c) {
          for (int p = 0; p < kDigitsPerCounter; ++p) out.mutable_at(c, p) = counts[c][p];
        }
        return out;
      },
      py::arg("readings"), py::arg("total"), py::arg("seed") = 0,
      "Class/position counts of a balanced permutation plan over counters with the given readings.");

  // pipeline and metrics
  m.def(
      "run_oracle",
      [](const std::vector<MeterAnnotation>& annotations, std::uint64_t seed, const std::string& recognizer,
         const std::string& mode, double jitter, double floor, double margin, int workers) {
        PipelineConfig config;
        config.recognizer = recognizer_from_string(recognizer);
        config.mode = mode_from_string(mode);
        config.margin = margin;
        const OracleProvider oracle(annotations, config.layout, OracleNoise{jitter, floor, seed});
        std::vector<PipelineInput> inputs;
        const SyntheticOptions size;
        for (const auto& a : annotations) inputs.push_back({a.image_id, size.image_w, size.image_h, nullptr});
        py::gil_scoped_release release;
        return run_batch(inputs, oracle, config, resolve_workers(workers));
      },
      py::arg("annotations"), py::arg("seed") = 0, py::arg("recognizer") = "crnet", py::arg("mode") = "fixed5",
      py::arg("jitter") = 0.0, py::arg("confidence_floor") = 0.99, py::arg("margin") = 0.2, py::arg("workers") = 1,
      "Run the two-stage pipeline against ground-truth-derived tensors (640x480 synthetic frames).");
  m.def(
      "eval_detection",
      [](const std::vector<std::pair<std::string, Box>>& preds, const std::vector<std::pair<std::string, Box>>& gts,
         double threshold) {
        std::vector<ScoredBox> p;
        for (const auto& [id, b] : preds) p.push_back({id, b, 1.0});
        std::vector<LabeledBox> g;
        for (const auto& [id, b] : gts) g.push_back({id, b});
        const auto e = eval_detection(p, g, threshold);
        py::dict d;
        d["tp"] = e.tp;
        d["fp"] = e.fp;
        d["fn"] = e.fn;
        d["precision"] = e.precision;
        d["recall"] = e.recall;
        d["f_measure"] = e.f_measure;
        d["mean_iou"] = e.mean_iou;
        return d;
      },
      py::arg("predictions"), py::arg("ground_truth"), py::arg("iou_threshold") = 0.5);
  m.def(
      "eval_recognition",
      [](const std::vector<std::pair<std::string, std::string>>& readings,
         const std::vector<std::pair<std::string, std::string>>& gts) {
        std::vector<std::pair<std::string, ReadingResult>> results;
        for (const auto& [id, r] : readings) results.emplace_back(id, ReadingResult{r, {}, ReadingStatus::Accepted});
        const auto e = eval_recognition(results, gts);
        return py::make_tuple(e.digit_accuracy, e.counter_accuracy);
      },
      py::arg("readings"), py::arg("ground_truth"));
  m.def("paired_t_test", &paired_t_test, py::arg("a"), py::arg("b"), py::arg("alpha") = 0.05);
}
