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

#include "synoe/audit.hpp"

#include <algorithm>

#include "synoe/label_engine.hpp"
#include "synoe/text.hpp"

namespace synoe {

nlohmann::json AuditReport::ToJson() const {
  return {{"total_inpaintings", total_inpaintings},
          {"matched", matched},
          {"ambiguous", ambiguous},
          {"mislabeled_as_id", mislabeled_as_id},
          {"mislabel_histogram", mislabel_histogram},
          {"missing_evidence", missing_evidence},
          {"human_resolved", human_resolved}};
}

bool LabelMatchesPrompt(std::string_view label, std::string_view prompt) {
  const auto want = Tokens(ToLower(prompt));
  const auto have = Tokens(ToLower(label));
  if (want.empty()) return false;
  return std::all_of(want.begin(), want.end(), [&](const std::string& t) {
    return std::find(have.begin(), have.end(), t) != have.end();
  });
}

const std::string& TopEvidenceLabel(const EvidenceEntry& entry) {
  if (entry.detections.empty()) {
    throw MissingEvidence("annotation " + std::to_string(entry.annotation_id) +
                          " has no stored detections");
  }
  return PickTopDetection(entry.detections, std::nullopt).label;
}

AuditResult AuditManifest(const DatasetManifest& manifest, const EvidenceStore& evidence) {
  AuditResult result{manifest, {}};
  AuditReport& report = result.report;
  const CategoryRegistry& registry = manifest.registry;

  for (Annotation& a : result.manifest.annotations) {
    if (a.provenance != Provenance::kInpaintedOod) continue;
    if (a.audit_state == AuditState::kHumanResolved) {
      ++report.human_resolved;
      continue;
    }
    auto it = evidence.find(a.id);
    if (it == evidence.end() || it->second.detections.empty() || !a.prompt_used) {
      ++report.missing_evidence;
      LogEvent("warning", "missing_evidence", {{"annotation_id", a.id}});
      continue;
    }
    const std::string& label = TopEvidenceLabel(it->second);
    ++report.total_inpaintings;
    if (LabelMatchesPrompt(label, *a.prompt_used)) {
      ++report.matched;
      a.audit_state = AuditState::kConfirmed;
      continue;
    }
    ++report.ambiguous;
    a.audit_state = AuditState::kAmbiguous;
    if (auto id = registry.id_index_of(Trim(label))) {
      ++report.mislabeled_as_id;
      ++report.mislabel_histogram[registry.name(*id)];
    }
  }
  return result;
}

}  // namespace synoe
