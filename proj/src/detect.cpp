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

#include "amr/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "amr/error.hpp"
#include "amr/random.hpp"
#include "json.hpp"

namespace amr {
namespace {

constexpr int kMaxKMeansIterations = 300;

double kmeans_objective(const std::vector<Anchor>& boxes, const std::vector<Anchor>& centers,
                        const std::vector<int>& assignment) {
  double total = 0.0;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& c = centers[static_cast<std::size_t>(assignment[i])];
    total += 1.0 - iou_wh(boxes[i].pw, boxes[i].ph, c.pw, c.ph);
  }
  return total / static_cast<double>(boxes.size());
}

int nearest(const Anchor& b, const std::vector<Anchor>& centers) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < centers.size(); ++j) {
    const double d = 1.0 - iou_wh(b.pw, b.ph, centers[j].pw, centers[j].ph);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(j);
    }
  }
  return best;
}

}  // namespace

int filter_count(int num_classes, int num_anchors) {
  if (num_classes < 1 || num_anchors < 1) {
    throw Error(ErrorKind::InvalidArgument, "class and anchor counts must be positive");
  }
  return (num_classes + 5) * num_anchors;
}

int GridSpec::channels() const { return filter_count(num_classes, static_cast<int>(anchors.size())); }

void GridSpec::validate() const {
  if (grid_w < 1 || grid_h < 1 || input_w < 1 || input_h < 1 || num_classes < 1 || anchors.empty()) {
    throw Error(ErrorKind::ShapeMismatch, "grid spec needs positive grid, input, classes and anchors");
  }
  for (const auto& a : anchors) {
    if (!(a.pw > 0.0) || !(a.ph > 0.0)) throw Error(ErrorKind::ShapeMismatch, "anchor sizes must be positive");
  }
}

std::vector<DecodedBox> decode_grid(const PredictionTensor& t, const GridSpec& spec,
                                    double conf_threshold) {
  spec.validate();
  const int channels = spec.channels();
  const auto& dims = t.dims();
  if (dims.size() != 3 || dims[0] != static_cast<std::uint32_t>(spec.grid_h) ||
      dims[1] != static_cast<std::uint32_t>(spec.grid_w) ||
      dims[2] != static_cast<std::uint32_t>(channels)) {
    std::string got;
    for (auto d : dims) got += (got.empty() ? "" : "x") + std::to_string(d);
    throw Error(ErrorKind::ShapeMismatch,
                "expected " + std::to_string(spec.grid_h) + "x" + std::to_string(spec.grid_w) + "x" +
                    std::to_string(channels) + " ((C+5)*A channels), got " + got);
  }

  const int slot = spec.num_classes + 5;
  const double gw = spec.grid_w;
  const double gh = spec.grid_h;
  std::vector<DecodedBox> out;
  std::vector<double> probs(static_cast<std::size_t>(spec.num_classes));

  for (int cy = 0; cy < spec.grid_h; ++cy) {
    for (int cx = 0; cx < spec.grid_w; ++cx) {
      for (std::size_t a = 0; a < spec.anchors.size(); ++a) {
        const std::size_t base = static_cast<std::size_t>(a) * slot;
        auto v = [&](std::size_t k) { return static_cast<double>(t.at(cy, cx, base + k)); };

        const double objectness = sigmoid(v(4));
        // Softmax over class logits; the winning class is the lowest index on ties.
        double max_logit = v(5);
        int best = 0;
        for (int c = 1; c < spec.num_classes; ++c) {
          if (v(5 + c) > max_logit) {
            max_logit = v(5 + c);
            best = c;
          }
        }
        double sum = 0.0;
        for (int c = 0; c < spec.num_classes; ++c) {
          probs[c] = std::exp(v(5 + c) - max_logit);
          sum += probs[c];
        }
        const double confidence = objectness * (probs[best] / sum);
        if (confidence < conf_threshold) continue;

        const auto& anchor = spec.anchors[a];
        const double bx = (sigmoid(v(0)) + cx) / gw * spec.input_w;
        const double by = (sigmoid(v(1)) + cy) / gh * spec.input_h;
        const double bw = anchor.pw * std::exp(v(2)) / gw * spec.input_w;
        const double bh = anchor.ph * std::exp(v(3)) / gh * spec.input_h;
        const Box box = clamp_to(Box::from_center(bx, by, bw, bh), spec.input_w, spec.input_h);
        if (!(box.w > 0.0) || !(box.h > 0.0)) continue;
        out.push_back(DecodedBox{box, std::clamp(confidence, 0.0, 1.0), best});
      }
    }
  }
  return out;
}

bool ranks_before(const DecodedBox& a, const DecodedBox& b) {
  return std::make_tuple(-a.confidence, a.class_id, a.box.x, a.box.y, a.box.w, a.box.h) <
         std::make_tuple(-b.confidence, b.class_id, b.box.x, b.box.y, b.box.w, b.box.h);
}

std::vector<DecodedBox> nms(std::vector<DecodedBox> boxes, double iou_threshold) {
  std::sort(boxes.begin(), boxes.end(), ranks_before);
  std::vector<DecodedBox> kept;
  for (const auto& b : boxes) {
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const DecodedBox& k) {
      return k.class_id == b.class_id && iou(k.box, b.box) >= iou_threshold;
    });
    if (!suppressed) kept.push_back(b);
  }
  return kept;
}

std::optional<DecodedBox> select_counter(const std::vector<DecodedBox>& boxes) {
  if (boxes.empty()) return std::nullopt;
  return *std::min_element(boxes.begin(), boxes.end(), ranks_before);
}

Box scale_about_center(const Box& b, double m) {
  return Box::from_center(b.center_x(), b.center_y(), b.w * (1.0 + m), b.h * (1.0 + m));
}

Box expand_margin(const Box& b, double m, double image_w, double image_h) {
  if (m < 0.0) throw Error(ErrorKind::InvalidArgument, "margin must be non-negative");
  return clamp_to(scale_about_center(b, m), image_w, image_h);
}

KMeansResult kmeans_anchors_detailed(const std::vector<Anchor>& boxes, int k, std::uint64_t seed) {
  if (k < 1 || boxes.size() < static_cast<std::size_t>(k)) {
    throw Error(ErrorKind::InsufficientBoxes, "need at least k=" + std::to_string(k) + " boxes, got " +
                                                  std::to_string(boxes.size()));
  }
  for (const auto& b : boxes) {
    if (!(b.pw > 0.0) || !(b.ph > 0.0)) throw Error(ErrorKind::InvalidArgument, "box sizes must be positive");
  }

  // Seeding: a seeded first pick, then repeatedly the box farthest from every chosen center.
  Rng rng(seed);
  std::vector<Anchor> centers;
  centers.push_back(boxes[rng.below(boxes.size())]);
  std::vector<double> min_dist(boxes.size(), std::numeric_limits<double>::infinity());
  while (centers.size() < static_cast<std::size_t>(k)) {
    const auto& last = centers.back();
    std::size_t far = 0;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      min_dist[i] = std::min(min_dist[i], 1.0 - iou_wh(boxes[i].pw, boxes[i].ph, last.pw, last.ph));
      if (min_dist[i] > min_dist[far]) far = i;
    }
    centers.push_back(boxes[far]);
  }

  KMeansResult result;
  result.assignment.assign(boxes.size(), 0);
  for (std::size_t i = 0; i < boxes.size(); ++i) result.assignment[i] = nearest(boxes[i], centers);
  result.objective_history.push_back(kmeans_objective(boxes, centers, result.assignment));

  for (int iter = 0; iter < kMaxKMeansIterations; ++iter) {
    // Update: the member mean replaces a center only if it does not raise that
    // cluster's total distance, which keeps the objective monotone.
    for (std::size_t j = 0; j < centers.size(); ++j) {
      double sw = 0.0, sh = 0.0, old_cost = 0.0;
      std::size_t n = 0;
      for (std::size_t i = 0; i < boxes.size(); ++i) {
        if (result.assignment[i] != static_cast<int>(j)) continue;
        sw += boxes[i].pw;
        sh += boxes[i].ph;
        old_cost += 1.0 - iou_wh(boxes[i].pw, boxes[i].ph, centers[j].pw, centers[j].ph);
        ++n;
      }
      if (n == 0) continue;
      const Anchor mean{sw / static_cast<double>(n), sh / static_cast<double>(n)};
      double new_cost = 0.0;
      for (std::size_t i = 0; i < boxes.size(); ++i) {
        if (result.assignment[i] == static_cast<int>(j)) {
          new_cost += 1.0 - iou_wh(boxes[i].pw, boxes[i].ph, mean.pw, mean.ph);
        }
      }
      if (new_cost <= old_cost) centers[j] = mean;
    }

    bool changed = false;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      const int j = nearest(boxes[i], centers);
      if (j != result.assignment[i]) {
        result.assignment[i] = j;
        changed = true;
      }
    }
    result.objective_history.push_back(kmeans_objective(boxes, centers, result.assignment));
    result.iterations = iter + 1;
    if (!changed) break;
  }
  result.anchors = std::move(centers);
  return result;
}

std::vector<Anchor> kmeans_anchors(const std::vector<Anchor>& boxes, int k, std::uint64_t seed) {
  return kmeans_anchors_detailed(boxes, k, seed).anchors;
}

std::string anchors_to_json(const std::vector<Anchor>& anchors) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& a : anchors) j.push_back({a.pw, a.ph});
  return j.dump() + "\n";
}

std::vector<Anchor> anchors_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    std::vector<Anchor> out;
    for (const auto& pair : j) {
      if (!pair.is_array() || pair.size() != 2) {
        throw Error(ErrorKind::MalformedLine, "anchor entries must be [pw, ph]");
      }
      out.push_back(Anchor{pair[0].get<double>(), pair[1].get<double>()});
      if (!(out.back().pw > 0.0) || !(out.back().ph > 0.0)) {
        throw Error(ErrorKind::MalformedLine, "anchor sizes must be positive");
      }
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedLine, std::string("anchor file: ") + e.what());
  }
}

std::string decoded_box_to_jsonl(std::string_view image_id, const DecodedBox& b) {
  nlohmann::json j{{"image_id", image_id}, {"class_id", b.class_id}, {"confidence", b.confidence},
                   {"x", b.box.x}, {"y", b.box.y}, {"w", b.box.w}, {"h", b.box.h}};
  return j.dump();
}

}  // namespace amr
