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

// Slow, direct reference evaluator used as a test oracle. It shares no code
// with the library evaluator: matching is restated as "best non-ignored
// candidate, else best ignored candidate", detections are truncated to the
// top k before matching, ignored detections are dropped from the ranking,
// and interpolated precision at recall r is taken literally as the maximum
// precision over all ranks whose recall reaches r.

#ifndef SYNOE_TESTS_SUPPORT_COCO_REFERENCE_HPP_
#define SYNOE_TESTS_SUPPORT_COCO_REFERENCE_HPP_

#include <vector>

#include "synoe/core_model.hpp"
#include "synoe/metrics.hpp"

namespace synoe::testing {

struct ReferenceMetrics {
  int category_index = 0;
  double ap50_95, ap50, ap75, ap_s, ap_m, ap_l, ar_10, ar_100;
};

std::vector<ReferenceMetrics> ReferenceEvaluate(const DatasetManifest& gt,
                                                const DetectionDump& dump, bool class_agnostic);

/// Exhaustive matcher for a single image: same greedy contract, evaluated by
/// trying every unmatched ground truth per detection.
std::vector<int> ReferenceMatch(const std::vector<BBox>& gt, const std::vector<BBox>& dets,
                                double threshold);

}  // namespace synoe::testing

#endif  // SYNOE_TESTS_SUPPORT_COCO_REFERENCE_HPP_
