// Copyright 2026 The SynOE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "synoe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "synoe/geometry.hpp"
#include "synoe/manifest_io.hpp"

namespace synoe {

namespace {

using nlohmann::json;

constexpr int kMaxDetections = 100;
constexpr int kNumIou = 10;

bool InRange(const BBox& box, AreaRange range) {
  switch (range) {
    case AreaRange::kAll: return true;
    case AreaRange::kSmall: return SizeBucketOf(box) == SizeBucket::kSmall;
    case AreaRange::kMedium: return SizeBucketOf(box) == SizeBucket::kMedium;
    case AreaRange::kLarge: return SizeBucketOf(box) == SizeBucket::kLarge;
  }
  return true;
}

// Per (image, category, area range) matching state, top-100 detections.
struct ImageEval {
  std::vector<double> scores;
  std::vector<std::array<bool, kNumIou>> matched;
  std::vector<std::array<bool, kNumIou>> ignored;
  int num_gt = 0;  // non-ignored ground truth
};

ImageEval EvaluateImage(const std::vector<BBox>& gt_in, const std::vector<ScoredBox>& dt_in,
                        AreaRange range) {
  // Ground truth outside the range is kept (it can absorb a detection) but
  // ignored; non-ignored first.
  std::vector<BBox> gt;
  std::vector<bool> gt_ignore;
  for (int pass = 0; pass < 2; ++pass) {
    for (const BBox& g : gt_in) {
      const bool ig = !InRange(g, range);
      if (ig == (pass == 1)) {
        gt.push_back(g);
        gt_ignore.push_back(ig);
      }
    }
  }
  std::vector<std::size_t> order(dt_in.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dt_in[a].score > dt_in[b].score;
  });
  if (order.size() > static_cast<std::size_t>(kMaxDetections)) order.resize(kMaxDetections);

  ImageEval ev;
  ev.num_gt = static_cast<int>(std::count(gt_ignore.begin(), gt_ignore.end(), false));
  ev.scores.reserve(order.size());
  ev.matched.assign(order.size(), {});
  ev.ignored.assign(order.size(), {});

  std::vector<std::vector<double>> ious(order.size(), std::vector<double>(gt.size()));
  for (std::size_t d = 0; d < order.size(); ++d) {
    ev.scores.push_back(dt_in[order[d]].score);
    for (std::size_t g = 0; g < gt.size(); ++g) ious[d][g] = Iou(dt_in[order[d]].bbox, gt[g]);
  }

  const auto& thresholds = IouThresholds();
  for (int t = 0; t < kNumIou; ++t) {
    std::vector<bool> gt_taken(gt.size(), false);
    for (std::size_t d = 0; d < order.size(); ++d) {
      double best = std::min(thresholds[t], 1.0 - 1e-10);
      int m = -1;
      for (std::size_t g = 0; g < gt.size(); ++g) {
        if (gt_taken[g]) continue;
        if (m > -1 && !gt_ignore[m] && gt_ignore[g]) break;
        if (ious[d][g] < best) continue;
        best = ious[d][g];
        m = static_cast<int>(g);
      }
      if (m == -1) {
        ev.ignored[d][t] = !InRange(dt_in[order[d]].bbox, range);
        continue;
      }
      gt_taken[m] = true;
      ev.matched[d][t] = true;
      ev.ignored[d][t] = gt_ignore[m];
    }
  }
  return ev;
}

struct Accumulated {
  bool has_gt = false;
  std::array<std::array<double, 101>, kNumIou> precision{};
  std::array<double, kNumIou> recall{};
};

Accumulated Accumulate(const std::vector<const ImageEval*>& evals, int max_det) {
  Accumulated acc;
  std::vector<double> scores;
  std::vector<const std::array<bool, kNumIou>*> matched, ignored;
  int num_gt = 0;
  for (const ImageEval* e : evals) {
    const std::size_t n = std::min<std::size_t>(e->scores.size(), max_det);
    for (std::size_t d = 0; d < n; ++d) {
      scores.push_back(e->scores[d]);
      matched.push_back(&e->matched[d]);
      ignored.push_back(&e->ignored[d]);
    }
    num_gt += e->num_gt;
  }
  if (num_gt == 0) return acc;
  acc.has_gt = true;

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  const auto& rec_thr = RecallThresholds();
  const std::size_t nd = order.size();
  std::vector<double> rc(nd), pr(nd);
  for (int t = 0; t < kNumIou; ++t) {
    double tp = 0.0, fp = 0.0;
    for (std::size_t i = 0; i < nd; ++i) {
      const std::size_t k = order[i];
      const bool ig = (*ignored[k])[t];
      const bool m = (*matched[k])[t];
      if (!ig) (m ? tp : fp) += 1.0;
      rc[i] = tp / num_gt;
      pr[i] = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
    }
    acc.recall[t] = nd ? rc[nd - 1] : 0.0;
    for (std::size_t i = nd; i-- > 1;) pr[i - 1] = std::max(pr[i - 1], pr[i]);
    for (std::size_t r = 0; r < rec_thr.size(); ++r) {
      const auto it = std::lower_bound(rc.begin(), rc.end(), rec_thr[r]);
      const auto idx = static_cast<std::size_t>(it - rc.begin());
      acc.precision[t][r] = idx < nd ? pr[idx] : 0.0;
    }
  }
  return acc;
}

double MeanPrecision(const Accumulated& acc, int t_begin, int t_end) {
  if (!acc.has_gt) return kNoGroundTruth;
  double sum = 0.0;
  int n = 0;
  for (int t = t_begin; t < t_end; ++t) {
    for (double p : acc.precision[t]) {
      sum += p;
      ++n;
    }
  }
  return sum / n;
}

double MeanRecall(const Accumulated& acc) {
  if (!acc.has_gt) return kNoGroundTruth;
  double sum = 0.0;
  for (double r : acc.recall) sum += r;
  return sum / kNumIou;
}

std::string Cell(double v) {
  if (v < 0.0) return "    -";
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%5.1f", 100.0 * v);
  return buf;
}

}  // namespace

// --- dumps --------------------------------------------------------------------------

DetectionDump DetectionDumpFromJson(const json& doc, const DatasetManifest& gt) {
  if (!doc.is_array()) throw SchemaError("detection dump: expected a JSON list");
  DetectionDump dump;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& j = doc[i];
    const std::string where = "detection " + std::to_string(i) + ": ";
    DetectionEntry e;
    try {
      e.image_id = j.at("image_id").get<ImageId>();
      e.bbox = BoxFromJson(j.at("bbox"));
      e.category_index = j.at("category_id").get<int>();
      e.score = j.at("score").get<double>();
    } catch (const json::exception& ex) {
      throw SchemaError(where + ex.what());
    }
    if (!gt.registry.is_valid(e.category_index)) {
      throw CategoryMismatch(where + "category_id " + std::to_string(e.category_index) +
                             " is not in the ground-truth registry");
    }
    if (!gt.find_image(e.image_id)) {
      throw SchemaError(where + "unknown image_id " + std::to_string(e.image_id));
    }
    if (!(e.score >= 0.0 && e.score <= 1.0)) throw SchemaError(where + "score outside [0, 1]");
    const BBox& b = e.bbox;
    if (!std::isfinite(b.x) || !std::isfinite(b.y) || !std::isfinite(b.w) ||
        !std::isfinite(b.h) || b.w < 0.0 || b.h < 0.0) {
      throw SchemaError(where + "malformed bbox");
    }
    dump.entries.push_back(e);
  }
  return dump;
}

DetectionDump LoadDetectionDump(const std::filesystem::path& path, const DatasetManifest& gt) {
  return DetectionDumpFromJson(ReadJsonFile(path), gt);
}

json DetectionDumpToJson(const DetectionDump& dump) {
  json out = json::array();
  for (const auto& e : dump.entries) {
    out.push_back({{"image_id", e.image_id},
                   {"bbox", {e.bbox.x, e.bbox.y, e.bbox.w, e.bbox.h}},
                   {"category_id", e.category_index},
                   {"score", e.score}});
  }
  return out;
}

// --- primitives ---------------------------------------------------------------------

const std::array<double, 10>& IouThresholds() {
  // Same arithmetic as linspace(0.5, 0.95, 10) in the reference tooling.
  static const std::array<double, 10> thresholds = [] {
    std::array<double, 10> t{};
    const double step = (0.95 - 0.5) / 9.0;
    for (int i = 0; i < 10; ++i) t[i] = i * step + 0.5;
    t[9] = 0.95;
    return t;
  }();
  return thresholds;
}

const std::array<double, 101>& RecallThresholds() {
  static const std::array<double, 101> thresholds = [] {
    std::array<double, 101> t{};
    const double step = 1.0 / 100.0;
    for (int i = 0; i < 101; ++i) t[i] = i * step;
    t[100] = 1.0;
    return t;
  }();
  return thresholds;
}

std::vector<MatchResult> MatchDetections(std::span<const BBox> gt,
                                         std::span<const ScoredBox> dets,
                                         double iou_threshold) {
  std::vector<bool> taken(gt.size(), false);
  std::vector<MatchResult> out;
  for (std::size_t d = 0; d < dets.size(); ++d) {
    double best = std::min(iou_threshold, 1.0 - 1e-10);
    std::optional<std::size_t> m;
    for (std::size_t g = 0; g < gt.size(); ++g) {
      if (taken[g]) continue;
      const double iou = Iou(dets[d].bbox, gt[g]);
      if (iou < best) continue;
      best = iou;
      m = g;
    }
    if (m) taken[*m] = true;
    out.push_back({d, m});
  }
  return out;
}

double AveragePrecision(std::span<const RankedOutcome> outcomes, int total_gt) {
  if (total_gt <= 0) return kNoGroundTruth;
  ImageEval ev;
  ev.num_gt = total_gt;
  for (const auto& o : outcomes) {
    ev.scores.push_back(o.score);
    std::array<bool, kNumIou> m{};
    m.fill(o.true_positive);
    ev.matched.push_back(m);
    ev.ignored.push_back({});
  }
  const Accumulated acc =
      Accumulate({&ev}, static_cast<int>(std::max<std::size_t>(outcomes.size(), 1)));
  return MeanPrecision(acc, 0, 1);
}

// --- evaluation ---------------------------------------------------------------------

json CategoryMetrics::ToJson() const {
  return {{"category_id", category_index}, {"name", name},     {"AP50_95", ap50_95},
          {"AP50", ap50},                  {"AP75", ap75},     {"AP_S", ap_s},
          {"AP_M", ap_m},                  {"AP_L", ap_l},     {"AR_10", ar_10},
          {"AR_100", ar_100}};
}

json EvalReport::ToJson() const {
  json rows = json::array();
  for (const auto& c : per_category) rows.push_back(c.ToJson());
  json j = {{"per_category", std::move(rows)},
            {"overall", overall.ToJson()},
            {"mAP_id", map_id},
            {"class_agnostic", class_agnostic}};
  j["OOD_AP"] = ood_ap ? json(*ood_ap) : json(nullptr);
  return j;
}

std::string EvalReport::FormatTable() const {
  std::ostringstream out;
  char head[160];
  std::snprintf(head, sizeof(head), "%-16s %7s %5s %5s %5s %5s %5s %5s %6s\n", "category",
                "AP50:95", "AP50", "AP75", "AP_S", "AP_M", "AP_L", "AR10", "AR100");
  out << head;
  auto row = [&](const CategoryMetrics& c) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-16s   %s %s %s %s %s %s %s  %s\n",
                  c.name.substr(0, 16).c_str(), Cell(c.ap50_95).c_str(), Cell(c.ap50).c_str(),
                  Cell(c.ap75).c_str(), Cell(c.ap_s).c_str(), Cell(c.ap_m).c_str(),
                  Cell(c.ap_l).c_str(), Cell(c.ar_10).c_str(), Cell(c.ar_100).c_str());
    out << line;
  };
  for (const auto& c : per_category) row(c);
  row(overall);
  out << "mAP (ID classes): " << Cell(map_id) << "\n";
  if (ood_ap) out << "AP (OOD):         " << Cell(*ood_ap) << "\n";
  return out.str();
}

EvalReport Evaluate(const DatasetManifest& gt, const DetectionDump& dump,
                    const EvalOptions& options) {
  const CategoryRegistry& registry = gt.registry;
  EvalReport report;
  report.class_agnostic = options.class_agnostic;

  std::vector<std::pair<int, std::string>> categories;
  if (options.class_agnostic) {
    categories.emplace_back(1, "object");
  } else {
    for (int c = 1; c <= registry.total(); ++c) categories.emplace_back(c, registry.name(c));
  }
  auto category_of = [&](int index) { return options.class_agnostic ? 1 : index; };

  std::vector<ImageId> image_ids;
  for (const auto& img : gt.images) image_ids.push_back(img.id);
  std::sort(image_ids.begin(), image_ids.end());

  std::map<std::pair<ImageId, int>, std::vector<BBox>> gts;
  for (const auto& a : gt.annotations) {
    if (a.provenance == Provenance::kRemoved) continue;
    gts[{a.image_id, category_of(a.category_index)}].push_back(a.bbox);
  }
  std::map<std::pair<ImageId, int>, std::vector<ScoredBox>> dts;
  for (const auto& d : dump.entries) {
    if (!registry.is_valid(d.category_index)) {
      throw CategoryMismatch("category_id " + std::to_string(d.category_index) +
                             " is not in the ground-truth registry");
    }
    dts[{d.image_id, category_of(d.category_index)}].push_back({d.bbox, d.score});
  }

  static const std::vector<BBox> kNoBoxes;
  static const std::vector<ScoredBox> kNoDets;
  constexpr std::array<AreaRange, 4> kRanges = {AreaRange::kAll, AreaRange::kSmall,
                                                AreaRange::kMedium, AreaRange::kLarge};

  for (const auto& [cat, name] : categories) {
    std::array<std::vector<ImageEval>, 4> per_range;
    for (ImageId id : image_ids) {
      auto git = gts.find({id, cat});
      auto dit = dts.find({id, cat});
      const auto& g = git == gts.end() ? kNoBoxes : git->second;
      const auto& d = dit == dts.end() ? kNoDets : dit->second;
      if (g.empty() && d.empty()) continue;
      for (std::size_t r = 0; r < kRanges.size(); ++r) {
        per_range[r].push_back(EvaluateImage(g, d, kRanges[r]));
      }
    }
    auto pointers = [](const std::vector<ImageEval>& v) {
      std::vector<const ImageEval*> out;
      for (const auto& e : v) out.push_back(&e);
      return out;
    };
    const Accumulated all100 = Accumulate(pointers(per_range[0]), 100);
    const Accumulated all10 = Accumulate(pointers(per_range[0]), 10);

    CategoryMetrics m;
    m.category_index = cat;
    m.name = name;
    m.ap50_95 = MeanPrecision(all100, 0, kNumIou);
    m.ap50 = MeanPrecision(all100, 0, 1);
    m.ap75 = MeanPrecision(all100, 5, 6);
    m.ap_s = MeanPrecision(Accumulate(pointers(per_range[1]), 100), 0, kNumIou);
    m.ap_m = MeanPrecision(Accumulate(pointers(per_range[2]), 100), 0, kNumIou);
    m.ap_l = MeanPrecision(Accumulate(pointers(per_range[3]), 100), 0, kNumIou);
    m.ar_10 = MeanRecall(all10);
    m.ar_100 = MeanRecall(all100);
    report.per_category.push_back(std::move(m));
  }

  auto average = [&](double CategoryMetrics::*field, bool id_only) {
    double sum = 0.0;
    int n = 0;
    for (const auto& c : report.per_category) {
      if (id_only && !registry.is_id(c.category_index)) continue;
      if (c.*field < 0.0) continue;
      sum += c.*field;
      ++n;
    }
    return n ? sum / n : kNoGroundTruth;
  };
  CategoryMetrics& o = report.overall;
  o.category_index = 0;
  o.name = "all";
  for (auto field : {&CategoryMetrics::ap50_95, &CategoryMetrics::ap50, &CategoryMetrics::ap75,
                     &CategoryMetrics::ap_s, &CategoryMetrics::ap_m, &CategoryMetrics::ap_l,
                     &CategoryMetrics::ar_10, &CategoryMetrics::ar_100}) {
    o.*field = average(field, false);
  }
  if (options.class_agnostic) {
    report.map_id = report.per_category.front().ap50_95;
  } else {
    report.map_id = average(&CategoryMetrics::ap50_95, true);
    report.ood_ap = report.per_category.back().ap50_95;
  }
  return report;
}

}  // namespace synoe
