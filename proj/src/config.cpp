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

#include "amr/config.hpp"

#include <filesystem>

#include "amr/error.hpp"
#include "amr/fileio.hpp"
#include "json.hpp"

namespace amr {
namespace {

using json = nlohmann::json;

std::vector<Anchor> anchors_from(const json& j) {
  std::vector<Anchor> out;
  for (const auto& pair : j) out.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
  return out;
}

json anchors_json(const std::vector<Anchor>& anchors) {
  json j = json::array();
  for (const auto& a : anchors) j.push_back({a.pw, a.ph});
  return j;
}

void apply_grid(const json& j, GridSpec& spec, const std::string& base_dir) {
  spec.grid_w = j.value("grid_w", spec.grid_w);
  spec.grid_h = j.value("grid_h", spec.grid_h);
  spec.input_w = j.value("input_w", spec.input_w);
  spec.input_h = j.value("input_h", spec.input_h);
  if (j.contains("anchors")) spec.anchors = anchors_from(j["anchors"]);
  if (j.contains("anchors_path")) {
    std::filesystem::path p = j["anchors_path"].get<std::string>();
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    spec.anchors = anchors_from_json(read_file(p));
  }
}

json grid_json(const GridSpec& spec) {
  return {{"grid_w", spec.grid_w},   {"grid_h", spec.grid_h},
          {"input_w", spec.input_w}, {"input_h", spec.input_h},
          {"anchors", anchors_json(spec.anchors)}};
}

}  // namespace

PipelineConfig pipeline_config_from_json(std::string_view text, const PipelineConfig& base,
                                         const std::string& base_dir) {
  PipelineConfig c = base;
  try {
    const auto j = json::parse(text);
    if (j.contains("detector")) {
      const auto& d = j["detector"];
      apply_grid(d, c.layout.detector, base_dir);
      c.detection_threshold = d.value("conf_threshold", c.detection_threshold);
      c.detection_nms = d.value("nms_threshold", c.detection_nms);
    }
    if (j.contains("recognizer")) {
      const auto& r = j["recognizer"];
      if (r.contains("kind")) c.recognizer = recognizer_from_string(r["kind"].get<std::string>());
      if (r.contains("mode")) c.mode = mode_from_string(r["mode"].get<std::string>());
      c.recognition_threshold = r.value("threshold", c.recognition_threshold);
      c.recognition_nms = r.value("nms_threshold", c.recognition_nms);
      if (r.contains("crnet")) apply_grid(r["crnet"], c.layout.crnet, base_dir);
      if (r.contains("multitask")) {
        c.layout.multitask_input_w = r["multitask"].value("input_w", c.layout.multitask_input_w);
        c.layout.multitask_input_h = r["multitask"].value("input_h", c.layout.multitask_input_h);
      }
      if (r.contains("crnn")) {
        c.layout.crnn_input_w = r["crnn"].value("input_w", c.layout.crnn_input_w);
        c.layout.crnn_input_h = r["crnn"].value("input_h", c.layout.crnn_input_h);
        c.layout.crnn_frames = r["crnn"].value("frames", c.layout.crnn_frames);
      }
    }
    c.margin = j.value("margin", c.margin);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedLine, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string pipeline_config_to_json(const PipelineConfig& c) {
  auto det = grid_json(c.layout.detector);
  det["conf_threshold"] = c.detection_threshold;
  det["nms_threshold"] = c.detection_nms;
  json j{{"detector", det},
         {"recognizer",
          {{"kind", std::string(to_string(c.recognizer))},
           {"mode", std::string(to_string(c.mode))},
           {"threshold", c.recognition_threshold},
           {"nms_threshold", c.recognition_nms},
           {"crnet", grid_json(c.layout.crnet)},
           {"multitask", {{"input_w", c.layout.multitask_input_w}, {"input_h", c.layout.multitask_input_h}}},
           {"crnn",
            {{"input_w", c.layout.crnn_input_w},
             {"input_h", c.layout.crnn_input_h},
             {"frames", c.layout.crnn_frames}}}}},
         {"margin", c.margin}};
  return j.dump(2) + "\n";
}

}  // namespace amr
