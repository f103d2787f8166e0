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

// COCO-style box evaluation: AP over IoU 0.50:0.05:0.95, AP50, AP75,
// AP by object size, and AR with 10 / 100 detections per image.
//
// Semantics follow the common reference evaluator: detections are ranked by
// score with ties kept in input order, matched greedily to the unmatched
// ground truth of highest IoU, and precision is interpolated at 101 recall
// points. A metric whose ground-truth set is empty reports -1.
//
// Size buckets are half-open, [0, 32^2), [32^2, 96^2), [96^2, inf), so a box
// belongs to exactly one bucket (the same rule the crop planner uses).

#ifndef SYNOE_METRICS_HPP_
#define SYNOE_METRICS_HPP_

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synoe/core_model.hpp"

namespace synoe {

class CategoryMismatch : public Error {
  using Error::Error;
};

inline constexpr double kNoGroundTruth = -1.0;

struct DetectionEntry {
  ImageId image_id = 0;
  BBox bbox;
  int category_index = 0;
  double score = 0.0;

  friend bool operator==(const DetectionEntry&, const DetectionEntry&) = default;
};

struct DetectionDump {
  std::vector<DetectionEntry> entries;
};

/// Parses a JSON list of {"image_id","bbox":[x,y,w,h],"category_id","score"}.
/// Throws CategoryMismatch for categories outside `gt`'s registry and
/// SchemaError for unknown images, malformed boxes or scores outside [0,1].
DetectionDump DetectionDumpFromJson(const nlohmann::json& doc, const DatasetManifest& gt);
DetectionDump LoadDetectionDump(const std::filesystem::path& path, const DatasetManifest& gt);
nlohmann::json DetectionDumpToJson(const DetectionDump& dump);

/// IoU thresholds 0.50, 0.55, ..., 0.95.
const std::array<double, 10>& IouThresholds();
/// Recall sample points 0.00, 0.01, ..., 1.00.
const std::array<double, 101>& RecallThresholds();

struct ScoredBox {
  BBox bbox;
  double score = 0.0;
};

struct MatchResult {
  std::size_t det_index = 0;
  std::optional<std::size_t> gt_index;

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

/// Greedy one-to-one matching. `dets` must already be in rank order; each
/// detection claims the unmatched ground truth of highest IoU >= threshold
/// (IoU ties go to the later ground truth).
std::vector<MatchResult> MatchDetections(std::span<const BBox> gt,
                                         std::span<const ScoredBox> dets,
                                         double iou_threshold);

struct RankedOutcome {
  double score = 0.0;
  bool true_positive = false;
};

/// 101-point interpolated AP. Outcomes are ranked by descending score (stable);
/// returns kNoGroundTruth when total_gt == 0.
double AveragePrecision(std::span<const RankedOutcome> outcomes, int total_gt);

enum class AreaRange { kAll, kSmall, kMedium, kLarge };

struct CategoryMetrics {
  int category_index = 0;
  std::string name;
  double ap50_95 = kNoGroundTruth;
  double ap50 = kNoGroundTruth;
  double ap75 = kNoGroundTruth;
  double ap_s = kNoGroundTruth;
  double ap_m = kNoGroundTruth;
  double ap_l = kNoGroundTruth;
  double ar_10 = kNoGroundTruth;
  double ar_100 = kNoGroundTruth;

  nlohmann::json ToJson() const;
};

struct EvalOptions {
  /// Collapse every category of ground truth and detections into one.
  bool class_agnostic = false;
};

struct EvalReport {
  std::vector<CategoryMetrics> per_category;
  /// Each column averaged over the categories where it is defined.
  CategoryMetrics overall;
  /// Mean AP50..95 over ID categories that have ground truth.
  double map_id = kNoGroundTruth;
  /// AP50..95 of the OOD category (absent in class-agnostic mode).
  std::optional<double> ood_ap;
  bool class_agnostic = false;

  nlohmann::json ToJson() const;
  /// Plain-text table in percent, one row per category plus the summary.
  std::string FormatTable() const;
};

/// Annotations with provenance `removed` are not ground truth.
EvalReport Evaluate(const DatasetManifest& gt, const DetectionDump& dump,
                    const EvalOptions& options = {});

}  // namespace synoe

#endif  // SYNOE_METRICS_HPP_
