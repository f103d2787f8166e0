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

// Label assignment for inpainted regions.
//
// Every inpainting ends in exactly one of three outcomes:
//
//   refined_ood  the detector finds the prompted object; its box (mapped back
//                to image coordinates) becomes a new OOD annotation.
//   id_retained  queried with "<prompt> . <id class>", the detector prefers
//                an ID class: the generator re-synthesized the ID object, so
//                the original box and class are kept.
//   removed      the detector finds nothing; the inpainting is discarded
//                together with the original box.
//
// For replaced ID objects the retention check runs first, since it decides
// whether the sample is OOD at all.

#ifndef SYNOE_LABEL_ENGINE_HPP_
#define SYNOE_LABEL_ENGINE_HPP_

#include <optional>
#include <string>
#include <vector>

#include "synoe/core_model.hpp"
#include "synoe/geometry.hpp"
#include "synoe/svc_clients.hpp"

namespace synoe {

enum class Scenario { kRefinedOod, kIdRetained, kRemoved };
std::string_view ToString(Scenario s);
std::optional<Scenario> ParseScenario(std::string_view s);

/// Mapped boxes smaller than this (px^2) are treated as detector noise.
inline constexpr double kMinMappedBoxArea = 4.0;

struct LabelDecision {
  Scenario scenario = Scenario::kRemoved;
  std::optional<BBox> final_bbox;  // image coordinates
  std::optional<int> final_category;
  /// Every record returned while deciding (retention query first), crop-local.
  std::vector<DetectionRecord> evidence;
  std::string prompt;

  friend bool operator==(const LabelDecision&, const LabelDecision&) = default;
};

struct LabelPolicy {
  bool keep_partial_id = true;
  double box_threshold = kDefaultBoxThreshold;
  double text_threshold = kDefaultTextThreshold;
};

/// One inpainted region awaiting a label.
struct DecisionInput {
  std::string request_id;
  CropRegion crop;
  ImageRecord image;
  Bytes inpainted_crop;  // PNG of the crop after inpainting
  std::string prompt;
  /// The replaced ID annotation; present iff crop.anchor is kReplacedIdObject.
  std::optional<Annotation> original;
};

/// Highest score wins; ties go to the larger IoU with `reference` (crop-local
/// original box) when given, otherwise to the larger box, then input order.
const DetectionRecord& PickTopDetection(const std::vector<DetectionRecord>& records,
                                        const std::optional<BBox>& reference);

/// Queries the detector with the prompt alone. Returns refined_ood with the
/// top box mapped to image coordinates and clipped to the crop and the image,
/// or nullopt when nothing usable was found. Records are appended to
/// `evidence`.
std::optional<LabelDecision> RefineOodBox(const DecisionInput& input, Detector& detector,
                                          const CategoryRegistry& registry,
                                          const LabelPolicy& policy,
                                          std::vector<DetectionRecord>& evidence);

/// Queries the detector with "<prompt> . <original class>". Returns
/// id_retained (original box and class) when the top label is an ID class of
/// the registry; nullopt (inconclusive) otherwise.
std::optional<LabelDecision> CheckIdRetention(const DecisionInput& input, Detector& detector,
                                              const CategoryRegistry& registry,
                                              const LabelPolicy& policy,
                                              std::vector<DetectionRecord>& evidence);

/// Full three-way decision. Service errors propagate.
LabelDecision Decide(const DecisionInput& input, Detector& detector,
                     const CategoryRegistry& registry, const LabelPolicy& policy);

}  // namespace synoe

#endif  // SYNOE_LABEL_ENGINE_HPP_
