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

#include "synoe/label_engine.hpp"

#include <stdexcept>

#include "synoe/text.hpp"

namespace synoe {

namespace {

std::optional<BBox> LocalOriginal(const DecisionInput& input) {
  if (!input.original) return std::nullopt;
  return Translated(input.original->bbox, -input.crop.bbox.x, -input.crop.bbox.y);
}

DetectRequest MakeRequest(const DecisionInput& input, std::string prompt,
                          const LabelPolicy& policy) {
  DetectRequest req;
  req.request_id = input.request_id;
  req.image_crop = input.inpainted_crop;
  req.prompt = std::move(prompt);
  req.box_threshold = policy.box_threshold;
  req.text_threshold = policy.text_threshold;
  return req;
}

}  // namespace

std::string_view ToString(Scenario s) {
  switch (s) {
    case Scenario::kRefinedOod: return "refined_ood";
    case Scenario::kIdRetained: return "id_retained";
    case Scenario::kRemoved: return "removed";
  }
  return "removed";
}

std::optional<Scenario> ParseScenario(std::string_view s) {
  for (auto v : {Scenario::kRefinedOod, Scenario::kIdRetained, Scenario::kRemoved}) {
    if (ToString(v) == s) return v;
  }
  return std::nullopt;
}

const DetectionRecord& PickTopDetection(const std::vector<DetectionRecord>& records,
                                        const std::optional<BBox>& reference) {
  if (records.empty()) throw std::invalid_argument("PickTopDetection: no records");
  auto tie_key = [&](const DetectionRecord& r) {
    return reference ? Iou(r.bbox, *reference) : r.bbox.area();
  };
  const DetectionRecord* best = &records.front();
  for (const auto& r : records) {
    if (r.score > best->score || (r.score == best->score && tie_key(r) > tie_key(*best))) {
      best = &r;
    }
  }
  return *best;
}

std::optional<LabelDecision> RefineOodBox(const DecisionInput& input, Detector& detector,
                                          const CategoryRegistry& registry,
                                          const LabelPolicy& policy,
                                          std::vector<DetectionRecord>& evidence) {
  const auto records = detector.Detect(MakeRequest(input, input.prompt, policy));
  evidence.insert(evidence.end(), records.begin(), records.end());
  if (records.empty()) return std::nullopt;

  const DetectionRecord& top = PickTopDetection(records, LocalOriginal(input));
  const BBox& crop = input.crop.bbox;
  BBox mapped = Translated(top.bbox, crop.x, crop.y);
  mapped = Translated(ClampToBounds(Translated(mapped, -crop.x, -crop.y), crop.w, crop.h),
                      crop.x, crop.y);
  mapped = Quantized(ClampToBounds(mapped, input.image.width, input.image.height));
  if (!mapped.valid() || mapped.area() < kMinMappedBoxArea) return std::nullopt;

  LabelDecision decision;
  decision.scenario = Scenario::kRefinedOod;
  decision.final_bbox = mapped;
  decision.final_category = registry.ood_index();
  decision.prompt = input.prompt;
  return decision;
}

std::optional<LabelDecision> CheckIdRetention(const DecisionInput& input, Detector& detector,
                                              const CategoryRegistry& registry,
                                              const LabelPolicy& policy,
                                              std::vector<DetectionRecord>& evidence) {
  if (!input.original) {
    throw std::invalid_argument("CheckIdRetention requires the replaced annotation");
  }
  const Annotation& original = *input.original;
  const std::string id_label = ToLower(registry.name(original.category_index));
  const std::string combined = JoinPrompt({input.prompt, id_label});

  const auto records = detector.Detect(MakeRequest(input, combined, policy));
  evidence.insert(evidence.end(), records.begin(), records.end());
  if (records.empty()) return std::nullopt;

  const DetectionRecord& top = PickTopDetection(records, LocalOriginal(input));
  if (!registry.id_index_of(top.label)) return std::nullopt;

  LabelDecision decision;
  decision.scenario = Scenario::kIdRetained;
  decision.final_bbox = original.bbox;
  decision.final_category = original.category_index;
  decision.prompt = input.prompt;
  return decision;
}

LabelDecision Decide(const DecisionInput& input, Detector& detector,
                     const CategoryRegistry& registry, const LabelPolicy& policy) {
  const bool replaced = input.crop.anchor == CropAnchor::kReplacedIdObject;
  if (replaced != input.original.has_value()) {
    throw std::invalid_argument(
        "Decide: an original annotation is required exactly for replaced-object crops");
  }
  std::vector<DetectionRecord> evidence;

  if (replaced) {
    if (auto retained = CheckIdRetention(input, detector, registry, policy, evidence)) {
      if (policy.keep_partial_id) {
        retained->evidence = std::move(evidence);
        return *retained;
      }
      LabelDecision removed;
      removed.scenario = Scenario::kRemoved;
      removed.prompt = input.prompt;
      removed.evidence = std::move(evidence);
      return removed;
    }
  }
  if (auto refined = RefineOodBox(input, detector, registry, policy, evidence)) {
    refined->evidence = std::move(evidence);
    return *refined;
  }
  LabelDecision removed;
  removed.scenario = Scenario::kRemoved;
  removed.prompt = input.prompt;
  removed.evidence = std::move(evidence);
  return removed;
}

}  // namespace synoe
