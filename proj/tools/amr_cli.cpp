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

// amr: batch workflows over a meter-reading dataset.
//
// A dataset root holds <id>.png (or .jpg) images next to <id>.txt annotations.
// Data goes to files or stdout, logs go to stderr. Exit codes: 0 ok, 1 data
// error or violations found, 2 missing file or directory, 64 bad usage.
//
// Sample usage:
//   amr synth --out data --count 200 --seed 1
//   amr split data --seed 7 --out split.json
//   amr anchors data --split split.json --seed 3 --out anchors.json
//   amr run data --split split.json --provider oracle --seed 5 --out trace.jsonl
//   amr eval --gt data --trace trace.jsonl --mode read --out eval.json
//   amr report eval.json --format text

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "amr/augment.hpp"
#include "amr/config.hpp"
#include "amr/dataset.hpp"
#include "amr/detect.hpp"
#include "amr/error.hpp"
#include "amr/fileio.hpp"
#include "amr/imageio.hpp"
#include "amr/metrics.hpp"
#include "amr/pipeline.hpp"
#include "amr/provider.hpp"
#include "amr/synthetic.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitData = 1;
constexpr int kExitIo = 2;
constexpr int kExitUsage = 64;

bool quiet = false;

void log(const std::string& msg) {
  if (!quiet) std::cerr << "amr: " << msg << "\n";
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// "-" means stdout.
void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
    std::cout.flush();
  } else {
    amr::write_file_atomic(out, text);
    log("wrote " + out);
  }
}

int workers_from(int flag) { return amr::resolve_workers(flag); }

std::vector<std::string> subset_ids(const std::string& split_path, const std::string& subset) {
  const auto split = amr::split_from_json(amr::read_file(split_path));
  if (subset == "train") return split.train;
  if (subset == "val" || subset == "validation") return split.validation;
  if (subset == "test") return split.test;
  if (subset == "all") {
    auto all = split.train;
    all.insert(all.end(), split.validation.begin(), split.validation.end());
    all.insert(all.end(), split.test.begin(), split.test.end());
    return all;
  }
  throw UsageError("unknown subset '" + subset + "' (train, val, test, all)");
}

// Annotations under root, optionally restricted to one split subset.
std::vector<amr::MeterAnnotation> load_subset(const fs::path& root, const std::string& split_path,
                                              const std::string& subset) {
  auto all = amr::load_annotations(root);
  if (split_path.empty()) return all;
  const auto ids = subset_ids(split_path, subset);
  const std::set<std::string> wanted(ids.begin(), ids.end());
  std::vector<amr::MeterAnnotation> out;
  for (auto& a : all) {
    if (wanted.count(a.image_id)) out.push_back(std::move(a));
  }
  if (out.size() != wanted.size()) {
    throw amr::Error(amr::ErrorKind::MissingAnnotation,
                     std::to_string(wanted.size() - out.size()) + " split ids have no annotation under " +
                         root.string());
  }
  return out;
}

amr::Interval parse_interval(const std::vector<double>& v, const char* name) {
  if (v.size() != 2) throw UsageError(std::string(name) + " takes two values: lo hi");
  return {v[0], v[1]};
}

// ---------------------------------------------------------------- commands

int cmd_synth(const std::string& out, std::size_t count, std::uint64_t seed) {
  fs::create_directories(out);
  for (const auto& m : amr::make_synthetic_meters(count, seed)) {
    const auto& id = m.annotation.image_id;
    amr::save_png(fs::path(out) / (id + ".png"), amr::render_synthetic_image(m));
    amr::write_file_atomic(fs::path(out) / (id + ".txt"), amr::serialize_annotation(m.annotation));
  }
  log("synthesized " + std::to_string(count) + " meters in " + out);
  return 0;
}

int cmd_validate(const std::string& root) {
  const auto violations = amr::validate_dataset(root);
  for (const auto& v : violations) {
    std::cerr << v.image_id << ": " << amr::to_string(v.kind) << ": " << v.message << "\n";
  }
  log(std::to_string(violations.size()) + " violation(s)");
  return violations.empty() ? 0 : kExitData;
}

int cmd_split(const std::string& root, const std::vector<double>& ratios, std::uint64_t seed,
              const std::string& out) {
  if (ratios.size() != 3) throw UsageError("--ratios takes three values");
  const double sum = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(sum - 1.0) > 1e-9 || ratios[0] <= 0 || ratios[1] <= 0 || ratios[2] <= 0) {
    throw UsageError("ratios must be positive and sum to 1 (got " + amr::format_real(sum) + ")");
  }
  std::vector<std::string> ids;
  for (const auto& a : amr::load_annotations(root)) ids.push_back(a.image_id);
  const auto split = amr::split_dataset(ids, {ratios[0], ratios[1], ratios[2]}, seed);
  log("split " + std::to_string(ids.size()) + " ids: " + std::to_string(split.train.size()) + "/" +
      std::to_string(split.validation.size()) + "/" + std::to_string(split.test.size()));
  emit(out, amr::split_to_json(split));
  return 0;
}

int cmd_stats(const std::string& root, const std::string& split, const std::string& subset,
              const std::string& out) {
  emit(out, amr::stats_to_json(amr::compute_stats(load_subset(root, split, subset))));
  return 0;
}

int cmd_anchors(const std::string& root, const std::string& split, const std::string& subset, int k,
                int grid, std::uint64_t seed, const std::string& out) {
  const auto annotations = load_subset(root, split, subset);
  std::vector<amr::Anchor> boxes;
  for (const auto& a : annotations) {
    const auto image = amr::load_image(amr::find_image(root, a.image_id));
    // counter size in detector grid cells
    boxes.push_back({a.counter.w / image.width() * grid, a.counter.h / image.height() * grid});
  }
  const auto r = amr::kmeans_anchors_detailed(boxes, k, seed);
  log("k-means over " + std::to_string(boxes.size()) + " boxes: " + std::to_string(r.iterations) +
      " iterations, mean 1-IoU " + amr::format_real(r.objective_history.back()));
  emit(out, amr::anchors_to_json(r.anchors));
  return 0;
}

struct AugmentArgs {
  std::string root, split, subset = "train", out;
  std::size_t total = 0;
  std::uint64_t seed = 0;
  std::vector<double> brightness{0.5, 2.0}, rotation{-5.0, 5.0}, crop{-0.02, 0.08};
  double context = 0.2;
  int workers = 0;
};

int cmd_augment(const AugmentArgs& args) {
  amr::JitterRanges ranges;
  ranges.brightness = parse_interval(args.brightness, "--brightness");
  ranges.rotation_deg = parse_interval(args.rotation, "--rotation");
  ranges.crop = parse_interval(args.crop, "--crop");
  ranges.validate();

  fs::create_directories(args.out);
  json manifest{{"seed", args.seed},
                {"total", args.total},
                {"ranges",
                 {{"brightness", {ranges.brightness.lo, ranges.brightness.hi}},
                  {"rotation_deg", {ranges.rotation_deg.lo, ranges.rotation_deg.hi}},
                  {"crop", {ranges.crop.lo, ranges.crop.hi}}}},
                {"samples", json::array()}};

  if (args.total > 0) {
    const auto pool = load_subset(args.root, args.split, args.subset);
    // Each source contributes its counter plus some context, so negative crops
    // have real pixels to grow into.
    std::map<std::string, amr::CounterPatch> patches;
    for (const auto& a : pool) {
      const auto image = amr::load_image(amr::find_image(args.root, a.image_id));
      const auto around = amr::expand_margin(a.counter, args.context, image.width(), image.height());
      const int x0 = static_cast<int>(around.x), y0 = static_cast<int>(around.y);
      const int x1 = static_cast<int>(std::ceil(around.right())), y1 = static_cast<int>(std::ceil(around.bottom()));
      patches.emplace(a.image_id, amr::CounterPatch{amr::crop(image, x0, y0, x1 - x0, y1 - y0),
                                                    amr::Box{a.counter.x - x0, a.counter.y - y0, a.counter.w,
                                                             a.counter.h}});
    }
    const auto samples =
        amr::generate_set(pool, patches, args.total, ranges, args.seed, workers_from(args.workers));
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      char id[32];
      std::snprintf(id, sizeof(id), "aug_%06zu", i);
      amr::save_png(fs::path(args.out) / (std::string(id) + ".png"), s.image);
      amr::write_file_atomic(fs::path(args.out) / (std::string(id) + ".txt"),
                             amr::serialize_annotation(s.annotation(id)));
      manifest["samples"].push_back({{"id", id},
                                     {"source", s.source_id},
                                     {"permutation", s.permutation},
                                     {"reading", s.reading},
                                     {"brightness", s.applied.brightness},
                                     {"rotation_deg", s.applied.rotation_deg},
                                     {"crop", s.applied.crop},
                                     {"crop_effective", s.applied.crop_effective}});
    }
  }
  amr::write_file_atomic(fs::path(args.out) / "manifest.json", manifest.dump(2) + "\n");
  log("generated " + std::to_string(args.total) + " samples in " + args.out);
  return 0;
}

struct RunArgs {
  std::string root, split, subset = "test", config, provider = "oracle", record_dir, out;
  std::optional<std::uint64_t> seed;
  double jitter = 0.0;
  double floor = 0.99;
  std::optional<std::string> recognizer, mode;
  std::optional<double> margin;
  int workers = 0;
};

int cmd_run(const RunArgs& args) {
  amr::PipelineConfig config;
  if (!args.config.empty()) {
    config = amr::pipeline_config_from_json(amr::read_file(args.config), config,
                                            fs::path(args.config).parent_path().string());
  }
  if (args.recognizer) config.recognizer = amr::recognizer_from_string(*args.recognizer);
  if (args.mode) config.mode = amr::mode_from_string(*args.mode);
  if (args.margin) config.margin = *args.margin;
  config.validate();

  const auto annotations = load_subset(args.root, args.split, args.subset);
  std::unique_ptr<amr::InferenceProvider> provider;
  if (args.provider == "oracle") {
    if (!args.seed) throw UsageError("--seed is required with the oracle provider");
    provider = std::make_unique<amr::OracleProvider>(annotations, config.layout,
                                                     amr::OracleNoise{args.jitter, args.floor, *args.seed});
  } else if (args.provider.rfind("dir:", 0) == 0) {
    provider = std::make_unique<amr::DirectoryProvider>(args.provider.substr(4), config.layout);
  } else {
    throw UsageError("--provider must be 'oracle' or 'dir:<path>'");
  }
  std::optional<amr::RecordingProvider> recorder;
  if (!args.record_dir.empty()) recorder.emplace(*provider, args.record_dir);
  const amr::InferenceProvider& active = recorder ? static_cast<const amr::InferenceProvider&>(*recorder) : *provider;

  // The bundled providers work from the region geometry alone, so only image
  // sizes are needed here; pixels are not kept for the run.
  std::vector<amr::PipelineInput> inputs;
  for (const auto& a : annotations) {
    const auto image = amr::load_image(amr::find_image(args.root, a.image_id));
    inputs.push_back({a.image_id, image.width(), image.height(), nullptr});
  }
  const auto traces = amr::run_batch(inputs, active, config, workers_from(args.workers));
  std::string text;
  std::size_t failed = 0;
  for (const auto& t : traces) {
    text += amr::trace_to_jsonl(t) + "\n";
    if (t.failed()) {
      ++failed;
      log(t.image_id + ": " + t.error);
    }
  }
  log("ran " + std::to_string(traces.size()) + " images, " + std::to_string(failed) + " failed");
  emit(args.out, text);
  return 0;
}

std::vector<amr::PipelineTrace> load_trace(const std::string& path) {
  std::vector<amr::PipelineTrace> out;
  std::istringstream in(amr::read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(amr::trace_from_jsonl(line));
  }
  return out;
}

struct EvalArgs {
  std::string gt, split, subset = "test", mode = "read", name, out;
  std::vector<std::string> traces, baseline;
  double iou = 0.5;
  double alpha = 0.05;
};

amr::RecognitionEval eval_read(const std::vector<amr::PipelineTrace>& traces,
                               const std::vector<std::pair<std::string, std::string>>& gts) {
  std::vector<std::pair<std::string, amr::ReadingResult>> results;
  for (const auto& t : traces) {
    if (!t.failed()) results.emplace_back(t.image_id, t.result);
  }
  return amr::eval_recognition(results, gts);
}

int cmd_eval(const EvalArgs& args) {
  if (args.mode != "detect" && args.mode != "read") throw UsageError("--mode must be detect or read");
  std::vector<std::vector<amr::PipelineTrace>> runs;
  for (const auto& p : args.traces) runs.push_back(load_trace(p));

  std::vector<amr::MeterAnnotation> annotations;
  if (!args.split.empty()) {
    annotations = load_subset(args.gt, args.split, args.subset);
  } else {
    // Without a split, score the images named in the traces.
    std::set<std::string> ids;
    for (const auto& run : runs) {
      for (const auto& t : run) ids.insert(t.image_id);
    }
    for (const auto& id : ids) annotations.push_back(amr::load_annotation(fs::path(args.gt) / (id + ".txt")));
  }

  const std::string base = args.name.empty() ? (args.mode == "detect" ? "detector" : "recognizer") : args.name;
  auto label = [&](std::size_t i) {
    return runs.size() == 1 ? base : base + "#" + std::to_string(i + 1);
  };
  amr::EvalDocument doc;
  if (args.mode == "detect") {
    std::vector<amr::LabeledBox> gts;
    for (const auto& a : annotations) gts.push_back({a.image_id, a.counter});
    for (std::size_t i = 0; i < runs.size(); ++i) {
      std::vector<amr::ScoredBox> preds;
      for (const auto& t : runs[i]) {
        if (t.counter) preds.push_back({t.image_id, t.counter->box, t.counter->confidence});
      }
      doc.detection.push_back({label(i), amr::eval_detection(preds, gts, args.iou)});
    }
  } else {
    std::vector<std::pair<std::string, std::string>> gts;
    for (const auto& a : annotations) gts.emplace_back(a.image_id, a.reading);
    std::vector<amr::RunScores> scores;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      auto e = eval_read(runs[i], gts);
      scores.push_back({e.digit_accuracy, e.counter_accuracy});
      doc.recognition.push_back({label(i), std::move(e)});
    }
    std::optional<std::vector<amr::RunScores>> baseline;
    if (!args.baseline.empty()) {
      if (args.baseline.size() != runs.size()) throw UsageError("--baseline needs one trace per --trace");
      baseline.emplace();
      for (const auto& p : args.baseline) {
        const auto e = eval_read(load_trace(p), gts);
        baseline->push_back({e.digit_accuracy, e.counter_accuracy});
      }
    }
    if (runs.size() > 1 || baseline) doc.summaries.push_back({base, amr::summarize_runs(scores, args.alpha, baseline)});
  }
  emit(args.out, amr::document_to_json(doc));
  return 0;
}

int cmd_report(const std::string& doc, const std::string& format, const std::string& out) {
  emit(out, amr::render_report(amr::document_from_json(amr::read_file(doc)), amr::report_format_from_string(format)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Automatic meter reading: dataset tools, batch inference and evaluation"};
  app.require_subcommand(1);
  app.add_flag("-q,--quiet", quiet, "Suppress log output on stderr");
  int workers = 0;
  app.add_option("-j,--workers", workers, "Worker threads (0 = all cores; AMR_WORKERS overrides)");

  std::uint64_t seed = 0;
  std::string root, out, split, subset;

  auto* synth = app.add_subcommand("synth", "Render a synthetic annotated dataset");
  std::size_t count = 0;
  synth->add_option("--out", out, "Output directory")->required();
  synth->add_option("--count", count, "Number of meters")->required();
  synth->add_option("--seed", seed, "Random seed")->required();

  auto* validate = app.add_subcommand("validate", "Check annotations and images under a dataset root");
  validate->add_option("root", root, "Dataset root")->required();

  auto* split_cmd = app.add_subcommand("split", "Split image ids into train/validation/test");
  std::vector<double> ratios{0.4, 0.2, 0.4};
  split_cmd->add_option("root", root, "Dataset root")->required();
  split_cmd->add_option("--ratios", ratios, "train validation test fractions")->expected(3);
  split_cmd->add_option("--seed", seed, "Random seed")->required();
  split_cmd->add_option("--out", out, "Output JSON ('-' for stdout)");

  auto* stats = app.add_subcommand("stats", "Dataset statistics");
  stats->add_option("root", root, "Dataset root")->required();
  stats->add_option("--split", split, "Split JSON to restrict to");
  stats->add_option("--subset", subset, "train, val, test or all")->default_val("all");
  stats->add_option("--out", out, "Output JSON ('-' for stdout)");

  auto* anchors = app.add_subcommand("anchors", "Cluster counter boxes into detector anchors");
  int k = 5, grid = 13;
  anchors->add_option("root", root, "Dataset root")->required();
  anchors->add_option("--split", split, "Split JSON; clusters the training subset");
  anchors->add_option("--subset", subset, "Subset to cluster")->default_val("train");
  anchors->add_option("-k", k, "Number of anchors")->default_val(5);
  anchors->add_option("--grid", grid, "Detector grid cells per side")->default_val(13);
  anchors->add_option("--seed", seed, "Random seed")->required();
  anchors->add_option("--out", out, "Output JSON ('-' for stdout)");

  auto* augment = app.add_subcommand("augment", "Generate digit-permuted, jittered counter images");
  AugmentArgs aug;
  augment->add_option("root", aug.root, "Dataset root")->required();
  augment->add_option("--split", aug.split, "Split JSON; draws from the training subset");
  augment->add_option("--subset", aug.subset, "Source subset")->default_val("train");
  augment->add_option("--total", aug.total, "Number of images to generate")->required();
  augment->add_option("--seed", aug.seed, "Random seed")->required();
  augment->add_option("--out", aug.out, "Output directory")->required();
  augment->add_option("--brightness", aug.brightness, "Brightness factor range")->expected(2);
  augment->add_option("--rotation", aug.rotation, "Rotation range in degrees")->expected(2);
  augment->add_option("--crop", aug.crop, "Per-side crop range, fraction of counter size")->expected(2);
  augment->add_option("--context", aug.context, "Context kept around each source counter")->default_val(0.2);

  auto* run = app.add_subcommand("run", "Run detector + recognizer over a dataset split");
  RunArgs ra;
  run->add_option("root", ra.root, "Dataset root")->required();
  run->add_option("--split", ra.split, "Split JSON");
  run->add_option("--subset", ra.subset, "Subset to run")->default_val("test");
  run->add_option("--config", ra.config, "Pipeline config JSON; flags override it");
  run->add_option("--provider", ra.provider, "oracle or dir:<tensor directory>")->default_val("oracle");
  run->add_option("--seed", ra.seed, "Seed for the oracle provider");
  run->add_option("--jitter", ra.jitter, "Oracle box jitter, fraction of counter size")->default_val(0.0);
  run->add_option("--confidence-floor", ra.floor, "Oracle confidence floor")->default_val(0.99);
  run->add_option("--record-dir", ra.record_dir, "Write every tensor the provider returns here");
  run->add_option("--recognizer", ra.recognizer, "crnet, multitask or crnn");
  run->add_option("--mode", ra.mode, "fixed5 or variable");
  run->add_option("--margin", ra.margin, "Margin around the detected counter");
  run->add_option("--out", ra.out, "Trace JSONL ('-' for stdout)");

  auto* eval = app.add_subcommand("eval", "Score traces against ground truth");
  EvalArgs ea;
  eval->add_option("--gt", ea.gt, "Dataset root with ground-truth annotations")->required();
  eval->add_option("--trace", ea.traces, "Trace JSONL; repeat for several runs")->required();
  eval->add_option("--baseline", ea.baseline, "Baseline trace per run, for a paired t-test");
  eval->add_option("--split", ea.split, "Split JSON defining the scored images");
  eval->add_option("--subset", ea.subset, "Subset to score")->default_val("test");
  eval->add_option("--mode", ea.mode, "detect or read")->default_val("read");
  eval->add_option("--iou", ea.iou, "IoU threshold for a correct detection")->default_val(0.5);
  eval->add_option("--alpha", ea.alpha, "Significance level")->default_val(0.05);
  eval->add_option("--name", ea.name, "Row name in the report");
  eval->add_option("--out", ea.out, "Evaluation JSON ('-' for stdout)");

  auto* report = app.add_subcommand("report", "Render an evaluation document");
  std::string doc, format = "text";
  report->add_option("doc", doc, "Evaluation JSON from 'eval'")->required();
  report->add_option("--format", format, "text, json or csv")->default_val("text");
  report->add_option("--out", out, "Output file ('-' for stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*synth) return cmd_synth(out, count, seed);
    if (*validate) return cmd_validate(root);
    if (*split_cmd) return cmd_split(root, ratios, seed, out);
    if (*stats) return cmd_stats(root, split, subset, out);
    if (*anchors) return cmd_anchors(root, split, subset, k, grid, seed, out);
    if (*augment) {
      aug.workers = workers;
      return cmd_augment(aug);
    }
    if (*run) {
      ra.workers = workers;
      return cmd_run(ra);
    }
    if (*eval) return cmd_eval(ea);
    if (*report) return cmd_report(doc, format, out);
  } catch (const UsageError& e) {
    std::cerr << "amr: usage: " << e.what() << "\n";
    return kExitUsage;
  } catch (const amr::Error& e) {
    std::cerr << "amr: " << e.what() << "\n";
    const auto kind = e.kind();
    return kind == amr::ErrorKind::IoError || kind == amr::ErrorKind::NotFound ? kExitIo : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "amr: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
