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

// Annotation-quality audit of generated outliers: the detector label that
// produced each OOD box is compared with the prompt that was inpainted.
// Disagreements are flagged ambiguous; those where the detector named an ID
// class are counted as likely mislabels.

#ifndef SYNOE_AUDIT_HPP_
#define SYNOE_AUDIT_HPP_

#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "synoe/augmentor.hpp"
#include "synoe/core_model.hpp"

namespace synoe {

class MissingEvidence : public Error {
  using Error::Error;
};

struct AuditReport {
  /// inpainted_ood annotations that were compared (matched + ambiguous).
  int total_inpaintings = 0;
  int matched = 0;
  int ambiguous = 0;
  int mislabeled_as_id = 0;
  /// ID class name -> ambiguous annotations the detector called that class.
  std::map<std::string, int> mislabel_histogram;
  /// inpainted_ood annotations without stored detections; left untouched.
  int missing_evidence = 0;
  /// Already resolved by a reviewer; never re-flagged.
  int human_resolved = 0;

  nlohmann::json ToJson() const;
  friend bool operator==(const AuditReport&, const AuditReport&) = default;
};

/// True when every token of the prompt occurs among the label's tokens
/// (case-insensitive, surrounding whitespace ignored).
bool LabelMatchesPrompt(std::string_view label, std::string_view prompt);

/// Label of the highest-scoring stored detection. Throws MissingEvidence.
const std::string& TopEvidenceLabel(const EvidenceEntry& entry);

struct AuditResult {
  DatasetManifest manifest;  // copy with updated audit states
  AuditReport report;
};

AuditResult AuditManifest(const DatasetManifest& manifest, const EvidenceStore& evidence);

}  // namespace synoe

#endif  // SYNOE_AUDIT_HPP_
