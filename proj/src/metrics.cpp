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

#include "amr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

#include "amr/error.hpp"
#include "amr/fileio.hpp"
#include "amr/student_t.hpp"
#include "json.hpp"

namespace amr {
namespace {

using json = nlohmann::json;

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double pct(double fraction) { return std::round(fraction * 100.0 * 100.0) / 100.0; }

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

template <typename T>
std::vector<T> sorted_by_name(std::vector<T> v) {
  std::stable_sort(v.begin(), v.end(), [](const T& a, const T& b) { return a.name < b.name; });
  return v;
}

json summary_json(const RunSummary& s) {
  json runs = json::array();
  for (const auto& r : s.runs) runs.push_back({r.digit_accuracy, r.counter_accuracy});
  json j{{"runs", runs},
         {"mean", {s.mean.digit_accuracy, s.mean.counter_accuracy}},
         {"stddev", {s.stddev.digit_accuracy, s.stddev.counter_accuracy}},
         {"alpha", s.alpha}};
  if (s.t_test) {
    const auto& t = *s.t_test;
    j["t_test"] = {{"t", t.t},
                   {"dof", t.dof},
                   {"p_value", t.p_value},
                   {"critical", t.critical},
                   {"significant", t.significant},
                   {"degenerate", t.degenerate}};
  } else {
    j["t_test"] = nullptr;
  }
  return j;
}

}  // namespace

void finalize_counts(DetectionEval& e) {
  e.precision = ratio(e.tp, e.tp + e.fp);
  e.recall = ratio(e.tp, e.tp + e.fn);
  e.f_measure = e.precision + e.recall > 0.0 ? 2.0 * e.precision * e.recall / (e.precision + e.recall) : 0.0;
}

DetectionEval eval_detection(const std::vector<ScoredBox>& preds, const std::vector<LabeledBox>& gts,
                             double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "IoU threshold must lie in (0, 1)");
  }
  std::map<std::string, Box> truth;
  for (const auto& g : gts) {
    if (!truth.emplace(g.image_id, g.box).second) {
      throw Error(ErrorKind::DuplicateGt, "two ground-truth boxes for '" + g.image_id + "'");
    }
  }
  // Most confident prediction per image, ties broken toward the top-left box.
  std::map<std::string, const ScoredBox*> best;
  for (const auto& p : preds) {
    auto& slot = best[p.image_id];
    if (!slot || std::make_tuple(-p.confidence, p.box.x, p.box.y, p.box.w, p.box.h) <
                     std::make_tuple(-slot->confidence, slot->box.x, slot->box.y, slot->box.w, slot->box.h)) {
      slot = &p;
    }
  }

  DetectionEval e;
  e.iou_threshold = iou_threshold;
  double iou_sum = 0.0;
  std::size_t matched = 0;
  for (const auto& [id, gt] : truth) {
    auto it = best.find(id);
    if (it == best.end()) {
      ++e.fn;
      continue;
    }
    const double v = iou(it->second->box, gt);
    iou_sum += v;
    ++matched;
    if (v > iou_threshold) {
      ++e.tp;
    } else {
      ++e.fp;
      ++e.fn;
    }
  }
  for (const auto& [id, p] : best) {
    if (!truth.count(id)) ++e.fp;
  }
  e.mean_iou = matched ? iou_sum / static_cast<double>(matched) : 0.0;
  finalize_counts(e);
  return e;
}

RecognitionEval eval_recognition(const std::vector<std::pair<std::string, ReadingResult>>& results,
                                 const std::vector<std::pair<std::string, std::string>>& gts) {
  std::map<std::string, std::string> truth;
  for (const auto& [id, reading] : gts) {
    if (!truth.emplace(id, reading).second) {
      throw Error(ErrorKind::DuplicateGt, "two ground-truth readings for '" + id + "'");
    }
  }
  std::map<std::string, const ReadingResult*> by_id;
  for (const auto& [id, r] : results) {
    if (!truth.count(id)) throw Error(ErrorKind::MissingGroundTruth, "no ground truth for '" + id + "'");
    if (!by_id.emplace(id, &r).second) {
      throw Error(ErrorKind::InvalidArgument, "two results for '" + id + "'");
    }
  }

  RecognitionEval e;
  for (const auto& [id, gt] : truth) {
    RecognitionOutcome o;
    o.image_id = id;
    o.truth = gt;
    o.total_digits = gt.size();
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      o.status = "missing";
    } else {
      const auto& r = *it->second;
      o.status = std::string(to_string(r.status));
      o.predicted = r.reading;
      if (r.status == ReadingStatus::Accepted) {
        const std::size_t n = std::min(gt.size(), r.reading.size());
        for (std::size_t i = 0; i < n; ++i) o.correct_digits += gt[i] == r.reading[i] ? 1 : 0;
        o.counter_correct = r.reading == gt;
      }
    }
    e.digits_correct += o.correct_digits;
    e.digits_total += o.total_digits;
    e.counters_correct += o.counter_correct ? 1 : 0;
    ++e.counters_total;
    e.outcomes.push_back(std::move(o));
  }
  e.digit_accuracy = ratio(e.digits_correct, e.digits_total);
  e.counter_accuracy = ratio(e.counters_correct, e.counters_total);
  return e;
}

TTest paired_t_test(const std::vector<double>& a, const std::vector<double>& b, double alpha) {
  if (a.size() != b.size()) throw Error(ErrorKind::InvalidArgument, "paired runs must have equal length");
  if (a.size() < 2) throw Error(ErrorKind::InvalidArgument, "a paired t-test needs at least two runs");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidArgument, "alpha must lie in (0, 1)");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = b[i] - a[i];
  const double sd = sample_std(d);
  if (std::all_of(d.begin(), d.end(), [&](double x) { return x == d.front(); }) || sd == 0.0) {
    throw Error(ErrorKind::ZeroVariance, "all paired differences are equal");
  }
  TTest t;
  t.dof = static_cast<int>(d.size()) - 1;
  t.t = mean_of(d) / (sd / std::sqrt(static_cast<double>(d.size())));
  t.p_value = 2.0 * (1.0 - student_t_cdf(std::abs(t.t), t.dof));
  t.critical = student_t_quantile(1.0 - alpha / 2.0, t.dof);
  t.significant = std::abs(t.t) > t.critical;
  return t;
}

RunSummary summarize_runs(const std::vector<RunScores>& runs, double alpha,
                          const std::optional<std::vector<RunScores>>& baseline) {
  if (runs.empty()) throw Error(ErrorKind::InvalidArgument, "no runs to summarize");
  RunSummary s;
  s.runs = runs;
  s.alpha = alpha;
  std::vector<double> digit, counter;
  for (const auto& r : runs) {
    digit.push_back(r.digit_accuracy);
    counter.push_back(r.counter_accuracy);
  }
  s.mean = {mean_of(digit), mean_of(counter)};
  s.stddev = {sample_std(digit), sample_std(counter)};
  if (baseline) {
    std::vector<double> other;
    for (const auto& r : *baseline) other.push_back(r.counter_accuracy);
    try {
      s.t_test = paired_t_test(counter, other, alpha);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ZeroVariance) throw;
      TTest degenerate;
      degenerate.dof = static_cast<int>(runs.size()) - 1;
      degenerate.degenerate = true;
      degenerate.critical = student_t_quantile(1.0 - alpha / 2.0, degenerate.dof);
      s.t_test = degenerate;
    }
  }
  return s;
}

std::string document_to_json(const EvalDocument& doc) {
  json j;
  j["detection"] = json::array();
  for (const auto& [name, e] : sorted_by_name(doc.detection)) {
    j["detection"].push_back({{"name", name},
                              {"iou_threshold", e.iou_threshold},
                              {"tp", e.tp},
                              {"fp", e.fp},
                              {"fn", e.fn},
                              {"precision", e.precision},
                              {"recall", e.recall},
                              {"f_measure", e.f_measure},
                              {"mean_iou", e.mean_iou}});
  }
  j["recognition"] = json::array();
  for (const auto& [name, e] : sorted_by_name(doc.recognition)) {
    json outcomes = json::array();
    for (const auto& o : e.outcomes) {
      outcomes.push_back({{"image_id", o.image_id},
                          {"truth", o.truth},
                          {"predicted", o.predicted},
                          {"status", o.status},
                          {"correct_digits", o.correct_digits},
                          {"total_digits", o.total_digits},
                          {"counter_correct", o.counter_correct}});
    }
    j["recognition"].push_back({{"name", name},
                                {"digit_accuracy", e.digit_accuracy},
                                {"counter_accuracy", e.counter_accuracy},
                                {"digits_correct", e.digits_correct},
                                {"digits_total", e.digits_total},
                                {"counters_correct", e.counters_correct},
                                {"counters_total", e.counters_total},
                                {"outcomes", outcomes}});
  }
  j["summaries"] = json::array();
  for (const auto& [name, s] : sorted_by_name(doc.summaries)) {
    auto sj = summary_json(s);
    sj["name"] = name;
    j["summaries"].push_back(sj);
  }
  return j.dump(2) + "\n";
}

EvalDocument document_from_json(std::string_view text) {
  try {
    const auto j = json::parse(text);
    EvalDocument doc;
    for (const auto& d : j.value("detection", json::array())) {
      DetectionEval e;
      e.iou_threshold = d.at("iou_threshold").get<double>();
      e.tp = d.at("tp").get<std::size_t>();
      e.fp = d.at("fp").get<std::size_t>();
      e.fn = d.at("fn").get<std::size_t>();
      e.mean_iou = d.at("mean_iou").get<double>();
      finalize_counts(e);
      doc.detection.push_back({d.at("name").get<std::string>(), e});
    }
    for (const auto& r : j.value("recognition", json::array())) {
      RecognitionEval e;
      e.digits_correct = r.at("digits_correct").get<std::size_t>();
      e.digits_total = r.at("digits_total").get<std::size_t>();
      e.counters_correct = r.at("counters_correct").get<std::size_t>();
      e.counters_total = r.at("counters_total").get<std::size_t>();
      e.digit_accuracy = ratio(e.digits_correct, e.digits_total);
      e.counter_accuracy = ratio(e.counters_correct, e.counters_total);
      for (const auto& o : r.value("outcomes", json::array())) {
        RecognitionOutcome out;
        out.image_id = o.at("image_id").get<std::string>();
        out.truth = o.at("truth").get<std::string>();
        out.predicted = o.at("predicted").get<std::string>();
        out.status = o.at("status").get<std::string>();
        out.correct_digits = o.at("correct_digits").get<std::size_t>();
        out.total_digits = o.at("total_digits").get<std::size_t>();
        out.counter_correct = o.at("counter_correct").get<bool>();
        e.outcomes.push_back(std::move(out));
      }
      doc.recognition.push_back({r.at("name").get<std::string>(), std::move(e)});
    }
    for (const auto& s : j.value("summaries", json::array())) {
      RunSummary sum;
      for (const auto& r : s.at("runs")) sum.runs.push_back({r[0].get<double>(), r[1].get<double>()});
      sum.mean = {s.at("mean")[0].get<double>(), s.at("mean")[1].get<double>()};
      sum.stddev = {s.at("stddev")[0].get<double>(), s.at("stddev")[1].get<double>()};
      sum.alpha = s.at("alpha").get<double>();
      if (s.contains("t_test") && !s["t_test"].is_null()) {
        const auto& t = s["t_test"];
        sum.t_test = TTest{t.at("t").get<double>(),         t.at("dof").get<int>(),
                           t.at("p_value").get<double>(),   t.at("critical").get<double>(),
                           t.at("significant").get<bool>(), t.at("degenerate").get<bool>()};
      }
      doc.summaries.push_back({s.at("name").get<std::string>(), std::move(sum)});
    }
    return doc;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedLine, std::string("evaluation document: ") + e.what());
  }
}

ReportFormat report_format_from_string(std::string_view name) {
  if (name == "text" || name == "txt") return ReportFormat::Text;
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  throw Error(ErrorKind::InvalidArgument, "unknown report format '" + std::string(name) + "'");
}

std::string format_mean_std(double mean, double stddev) {
  return fixed2(pct(mean)) + " ± " + fixed2(pct(stddev));
}

std::string render_report(const EvalDocument& doc, ReportFormat format) {
  const auto detection = sorted_by_name(doc.detection);
  const auto recognition = sorted_by_name(doc.recognition);
  const auto summaries = sorted_by_name(doc.summaries);
  std::ostringstream out;

  if (format == ReportFormat::Json) {
    json j{{"detection", json::array()}, {"recognition", json::array()}, {"summaries", json::array()}};
    for (const auto& [name, e] : detection) {
      j["detection"].push_back({{"name", name},
                                {"iou_threshold", e.iou_threshold},
                                {"tp", e.tp},
                                {"fp", e.fp},
                                {"fn", e.fn},
                                {"precision", pct(e.precision)},
                                {"recall", pct(e.recall)},
                                {"f_measure", pct(e.f_measure)},
                                {"mean_iou", pct(e.mean_iou)}});
    }
    for (const auto& [name, e] : recognition) {
      j["recognition"].push_back({{"name", name},
                                  {"images", e.counters_total},
                                  {"digit_accuracy", pct(e.digit_accuracy)},
                                  {"counter_accuracy", pct(e.counter_accuracy)}});
    }
    for (const auto& [name, s] : summaries) {
      json sj{{"name", name},
              {"runs", s.runs.size()},
              {"digit_mean", pct(s.mean.digit_accuracy)},
              {"digit_std", pct(s.stddev.digit_accuracy)},
              {"counter_mean", pct(s.mean.counter_accuracy)},
              {"counter_std", pct(s.stddev.counter_accuracy)}};
      if (s.t_test) {
        sj["t"] = s.t_test->degenerate ? json(nullptr) : json(s.t_test->t);
        sj["dof"] = s.t_test->dof;
        sj["significant"] = s.t_test->significant;
      }
      j["summaries"].push_back(sj);
    }
    return j.dump(2) + "\n";
  }

  if (format == ReportFormat::Csv) {
    out << "kind,name,iou_threshold,tp,fp,fn,precision,recall,f_measure,mean_iou,images,digit_accuracy,"
           "counter_accuracy,runs,digit_mean,digit_std,counter_mean,counter_std,t,dof,significant\n";
    for (const auto& [name, e] : detection) {
      out << "detection," << name << "," << e.iou_threshold << "," << e.tp << "," << e.fp << "," << e.fn << ","
          << fixed2(pct(e.precision)) << "," << fixed2(pct(e.recall)) << "," << fixed2(pct(e.f_measure)) << ","
          << fixed2(pct(e.mean_iou)) << ",,,,,,,,,,,\n";
    }
    for (const auto& [name, e] : recognition) {
      out << "recognition," << name << ",,,,,,,,," << e.counters_total << "," << fixed2(pct(e.digit_accuracy))
          << "," << fixed2(pct(e.counter_accuracy)) << ",,,,,,,,\n";
    }
    for (const auto& [name, s] : summaries) {
      out << "summary," << name << ",,,,,,,,,,,," << s.runs.size() << "," << fixed2(pct(s.mean.digit_accuracy))
          << "," << fixed2(pct(s.stddev.digit_accuracy)) << "," << fixed2(pct(s.mean.counter_accuracy)) << ","
          << fixed2(pct(s.stddev.counter_accuracy)) << ",";
      if (s.t_test) {
        out << (s.t_test->degenerate ? std::string() : format_real(s.t_test->t)) << "," << s.t_test->dof << ","
            << (s.t_test->significant ? "true" : "false");
      } else {
        out << ",,";
      }
      out << "\n";
    }
    return out.str();
  }

  out << "Counter detection\n";
  if (detection.empty()) out << "  (none)\n";
  for (const auto& [name, e] : detection) {
    out << "  " << name << " (IoU > " << e.iou_threshold << "): P " << fixed2(pct(e.precision)) << "%  R "
        << fixed2(pct(e.recall)) << "%  F " << fixed2(pct(e.f_measure)) << "%  mean IoU "
        << fixed2(pct(e.mean_iou)) << "%  [tp " << e.tp << ", fp " << e.fp << ", fn " << e.fn << "]\n";
  }
  out << "Counter recognition\n";
  if (recognition.empty()) out << "  (none)\n";
  for (const auto& [name, e] : recognition) {
    out << "  " << name << ": digits " << fixed2(pct(e.digit_accuracy)) << "%  counters "
        << fixed2(pct(e.counter_accuracy)) << "%  (" << e.counters_total << " images)\n";
  }
  out << "Run summaries\n";
  if (summaries.empty()) out << "  (none)\n";
  for (const auto& [name, s] : summaries) {
    out << "  " << name << " (" << s.runs.size() << " runs): digits "
        << format_mean_std(s.mean.digit_accuracy, s.stddev.digit_accuracy) << "  counters "
        << format_mean_std(s.mean.counter_accuracy, s.stddev.counter_accuracy);
    if (s.t_test) {
      if (s.t_test->degenerate) {
        out << "  t-test: degenerate (zero variance), not significant";
      } else {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "  t = %.4f, dof %d, p = %.4f, %s at alpha %.2f", s.t_test->t,
                      s.t_test->dof, s.t_test->p_value, s.t_test->significant ? "significant" : "not significant",
                      s.alpha);
        out << buf;
      }
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace amr
