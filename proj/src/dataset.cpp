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

#include "amr/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "amr/fileio.hpp"
#include "amr/random.hpp"
#include "json.hpp"

namespace amr {
namespace {

using json = nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

Box parse_box(std::string_view values, std::size_t line_no) {
  const auto parts = split_ws(values);
  if (parts.size() != 4) {
    throw Error(ErrorKind::MalformedLine,
                "line " + std::to_string(line_no) + ": expected 4 numbers, got " +
                    std::to_string(parts.size()));
  }
  std::array<double, 4> v{};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto* first = parts[i].data();
    const auto* last = first + parts[i].size();
    auto [ptr, ec] = std::from_chars(first, last, v[i]);
    if (ec != std::errc{} || ptr != last) {
      throw Error(ErrorKind::MalformedLine, "line " + std::to_string(line_no) +
                                                ": not a number '" + std::string(parts[i]) + "'");
    }
  }
  return Box{v[0], v[1], v[2], v[3]};
}

void check_box(const Box& b, std::string_view what) {
  if (!is_valid(b) || b.x < 0.0 || b.y < 0.0) {
    throw Error(ErrorKind::GeometryError,
                std::string(what) + " box must have finite non-negative origin and positive size");
  }
}

void check_reading(std::string_view reading) {
  if (reading.size() != kDigitsPerCounter ||
      !std::all_of(reading.begin(), reading.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorKind::InvalidReading,
                "reading must be exactly 5 decimal digits, got '" + std::string(reading) + "'");
  }
}

void accumulate(SizeSummary& s, const Box& b, std::size_t index) {
  if (index == 0) {
    s.min_w = s.max_w = b.w;
    s.min_h = s.max_h = b.h;
  } else {
    s.min_w = std::min(s.min_w, b.w);
    s.min_h = std::min(s.min_h, b.h);
    s.max_w = std::max(s.max_w, b.w);
    s.max_h = std::max(s.max_h, b.h);
  }
  s.mean_w += b.w;
  s.mean_h += b.h;
  s.mean_aspect += b.w / b.h;
}

void finish(SizeSummary& s, std::size_t count) {
  const auto n = static_cast<double>(count);
  s.mean_w /= n;
  s.mean_h /= n;
  s.mean_aspect /= n;
}

json size_json(const SizeSummary& s) {
  return json{{"min", {s.min_w, s.min_h}},
              {"max", {s.max_w, s.max_h}},
              {"mean", {s.mean_w, s.mean_h}},
              {"aspect_ratio", round2(s.mean_aspect)}};
}

bool is_image_ext(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".jpg" || ext == ".jpeg" || ext == ".png";
}

}  // namespace

void check_annotation(const MeterAnnotation& a) {
  check_box(a.counter, "counter");
  check_reading(a.reading);
  for (std::size_t i = 0; i < a.digits.size(); ++i) {
    const auto& d = a.digits[i];
    check_box(d, "digit");
    if (!a.counter.contains_point(d.center_x(), d.center_y())) {
      throw Error(ErrorKind::GeometryError,
                  "digit " + std::to_string(i) + " center lies outside the counter box");
    }
    if (i > 0 && !(a.digits[i - 1].center_x() < d.center_x())) {
      throw Error(ErrorKind::GeometryError, "digit boxes are not strictly left-to-right");
    }
  }
}

MeterAnnotation parse_annotation(std::string_view text, std::string image_id,
                                 std::vector<std::string>* warnings) {
  MeterAnnotation a;
  a.image_id = std::move(image_id);
  bool have_camera = false, have_counter = false, have_reading = false;
  std::vector<Box> digits;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorKind::MalformedLine, "line " + std::to_string(line_no) + ": missing ':'");
    }
    const auto key = trim(line.substr(0, colon));
    const auto value = trim(line.substr(colon + 1));
    auto duplicate = [&](bool seen) {
      if (seen) {
        throw Error(ErrorKind::MalformedLine,
                    "line " + std::to_string(line_no) + ": duplicate key '" + std::string(key) + "'");
      }
    };
    if (key == "camera") {
      duplicate(have_camera);
      a.camera = std::string(value);
      have_camera = true;
    } else if (key == "counter") {
      duplicate(have_counter);
      a.counter = parse_box(value, line_no);
      have_counter = true;
    } else if (key == "reading") {
      duplicate(have_reading);
      a.reading = std::string(value);
      have_reading = true;
    } else if (key == "digit") {
      digits.push_back(parse_box(value, line_no));
    } else {
      throw Error(ErrorKind::MalformedLine,
                  "line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
    }
  }

  if (!have_camera || !have_counter || !have_reading) {
    throw Error(ErrorKind::MalformedLine, "camera, counter and reading lines are all required");
  }
  if (digits.size() != kDigitsPerCounter) {
    throw Error(ErrorKind::CountMismatch,
                "expected 5 digit lines, got " + std::to_string(digits.size()));
  }
  check_reading(a.reading);

  const bool sorted = std::is_sorted(digits.begin(), digits.end(), [](const Box& l, const Box& r) {
    return l.center_x() < r.center_x();
  });
  if (!sorted) {
    std::stable_sort(digits.begin(), digits.end(),
                     [](const Box& l, const Box& r) { return l.center_x() < r.center_x(); });
    if (warnings) warnings->push_back("digit boxes re-sorted left-to-right");
  }
  std::copy(digits.begin(), digits.end(), a.digits.begin());
  check_annotation(a);
  return a;
}

std::string serialize_annotation(const MeterAnnotation& a) {
  auto box = [](const Box& b) {
    return format_real(b.x) + " " + format_real(b.y) + " " + format_real(b.w) + " " +
           format_real(b.h);
  };
  std::string out;
  out += "camera: " + a.camera + "\n";
  out += "counter: " + box(a.counter) + "\n";
  out += "reading: " + a.reading + "\n";
  for (const auto& d : a.digits) out += "digit: " + box(d) + "\n";
  return out;
}

int resolve_transition_digit(int lower, int upper) {
  if (lower < 0 || lower > 9 || upper < 0 || upper > 9 || upper != (lower + 1) % 10) {
    throw Error(ErrorKind::InvalidPair, "(" + std::to_string(lower) + ", " +
                                            std::to_string(upper) + ") is not an adjacent pair");
  }
  // The lower digit wins, except across the 9 -> 0 wrap where 9 is kept.
  return lower;
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios) {
  const std::array<double, 3> r{ratios.train, ratios.validation, ratios.test};
  if (std::any_of(r.begin(), r.end(), [](double v) { return !(v > 0.0); }) ||
      std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    throw Error(ErrorKind::InvalidArgument, "split ratios must be positive and sum to 1");
  }
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> frac{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double exact = r[i] * static_cast<double>(n);
    // Guard against 0.4 * 2000 = 799.9999...
    const double fl = std::floor(exact + 1e-9);
    sizes[i] = static_cast<std::size_t>(fl);
    frac[i] = exact - fl;
    assigned += sizes[i];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++sizes[order[k % 3]];
  return sizes;
}

DatasetSplit split_dataset(std::vector<std::string> ids, const SplitRatios& ratios,
                           std::uint64_t seed) {
  if (ids.empty()) throw Error(ErrorKind::EmptyDataset, "no image ids to split");
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw Error(ErrorKind::InvalidArgument, "duplicate image ids");
  }
  if (ids.size() < 3) throw Error(ErrorKind::EmptyDataset, "need at least 3 images to split");
  const auto sizes = split_sizes(ids.size(), ratios);

  Rng rng(seed);
  rng.shuffle(std::span<std::string>(ids));

  DatasetSplit split;
  split.seed = seed;
  auto it = ids.begin();
  auto take = [&](std::vector<std::string>& dst, std::size_t n) {
    dst.assign(it, it + static_cast<std::ptrdiff_t>(n));
    std::sort(dst.begin(), dst.end());
    it += static_cast<std::ptrdiff_t>(n);
  };
  take(split.train, sizes[0]);
  take(split.validation, sizes[1]);
  take(split.test, sizes[2]);
  return split;
}

std::string split_to_json(const DatasetSplit& split) {
  json j;
  j["train"] = split.train;
  j["validation"] = split.validation;
  j["test"] = split.test;
  j["seed"] = split.seed;
  return j.dump(2) + "\n";
}

DatasetSplit split_from_json(std::string_view text) {
  try {
    const auto j = json::parse(text);
    DatasetSplit s;
    s.train = j.at("train").get<std::vector<std::string>>();
    s.validation = j.at("validation").get<std::vector<std::string>>();
    s.test = j.at("test").get<std::vector<std::string>>();
    s.seed = j.at("seed").get<std::uint64_t>();
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedLine, std::string("split file: ") + e.what());
  }
}

double round2(double v) { return std::round(v * 100.0) / 100.0; }

DatasetStats compute_stats(const std::vector<MeterAnnotation>& annotations) {
  if (annotations.empty()) throw Error(ErrorKind::EmptyDataset, "no annotations");
  DatasetStats s;
  s.images = annotations.size();
  std::size_t digit_index = 0;
  for (std::size_t i = 0; i < annotations.size(); ++i) {
    const auto& a = annotations[i];
    ++s.per_camera[a.camera];
    accumulate(s.counters, a.counter, i);
    for (std::size_t p = 0; p < kDigitsPerCounter; ++p) {
      accumulate(s.digits, a.digits[p], digit_index++);
      ++s.frequency[static_cast<std::size_t>(a.reading[p] - '0')][p];
    }
  }
  finish(s.counters, annotations.size());
  finish(s.digits, digit_index);
  return s;
}

std::string stats_to_json(const DatasetStats& s) {
  json j;
  j["images"] = s.images;
  j["per_camera"] = s.per_camera;
  j["counters"] = size_json(s.counters);
  j["digits"] = size_json(s.digits);
  j["digit_frequency"] = s.frequency;
  return j.dump(2) + "\n";
}

std::filesystem::path find_image(const std::filesystem::path& root, const std::string& image_id) {
  for (const char* ext : {".jpg", ".png", ".jpeg", ".JPG", ".PNG"}) {
    auto p = root / (image_id + ext);
    if (std::filesystem::exists(p)) return p;
  }
  return {};
}

MeterAnnotation load_annotation(const std::filesystem::path& file) {
  return parse_annotation(read_file(file), file.stem().string());
}

std::vector<Violation> validate_dataset(const std::filesystem::path& root) {
  std::error_code ec;
  if (!std::filesystem::is_directory(root, ec)) {
    throw Error(ErrorKind::IoError, "not a directory: " + root.string());
  }
  std::set<std::string> images, annotations;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    const auto& p = entry.path();
    if (p.extension() == ".txt") {
      annotations.insert(p.stem().string());
    } else if (is_image_ext(p)) {
      images.insert(p.stem().string());
    }
  }

  std::vector<Violation> out;
  for (const auto& id : images) {
    if (!annotations.count(id)) {
      out.push_back({id, ErrorKind::MissingAnnotation, "no " + id + ".txt"});
    }
  }
  for (const auto& id : annotations) {
    if (!images.count(id)) {
      out.push_back({id, ErrorKind::MissingImage, "no image for " + id});
      continue;
    }
    try {
      load_annotation(root / (id + ".txt"));
    } catch (const Error& e) {
      out.push_back({id, e.kind(), e.detail()});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const Violation& a, const Violation& b) { return a.image_id < b.image_id; });
  return out;
}

std::vector<MeterAnnotation> load_annotations(const std::filesystem::path& root) {
  std::error_code ec;
  if (!std::filesystem::is_directory(root, ec)) {
    throw Error(ErrorKind::IoError, "not a directory: " + root.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<MeterAnnotation> out;
  out.reserve(files.size());
  for (const auto& f : files) {
    try {
      out.push_back(load_annotation(f));
    } catch (const Error& e) {
      throw Error(e.kind(), f.filename().string() + ": " + e.detail());
    }
  }
  return out;
}

}  // namespace amr
