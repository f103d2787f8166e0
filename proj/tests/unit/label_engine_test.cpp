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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "fixtures.hpp"
#include "synoe/label_engine.hpp"
#include "synoe/prompt_catalog.hpp"

namespace synoe {
namespace {

const CategoryRegistry kRegistry = CategoryRegistry::NuImagesDefault();

ImageRecord Image1600() {
  ImageRecord r;
  r.id = 1;
  r.width = 1600;
  r.height = 900;
  r.file_path = "a.png";
  return r;
}

Annotation Car() {
  Annotation a;
  a.id = 11;
  a.image_id = 1;
  a.bbox = {100, 100, 20, 20};
  a.category_index = 3;
  return a;
}

DecisionInput Replaced(std::string prompt = "penguin") {
  DecisionInput in;
  in.request_id = "c1";
  in.image = Image1600();
  in.original = Car();
  in.crop = CropForTarget(in.original->bbox, in.image);  // [46,46,128,128]
  in.prompt = std::move(prompt);
  in.inpainted_crop = EncodePng(Image(128, 128, testing::kBackground));
  return in;
}

DecisionInput Road() {
  DecisionInput in;
  in.request_id = "c2";
  in.image = Image1600();
  in.crop = RegionAround(800, 700, 128, 1600, 900, CropAnchor::kRoadFreeSpace);
  in.prompt = "penguin";
  in.inpainted_crop = EncodePng(Image(128, 128, testing::kBackground));
  return in;
}

DetectionRecord Rec(BBox b, std::string label, double score) { return {b, std::move(label), score}; }

class ThrowingDetector : public Detector {
 public:
  std::vector<DetectionRecord> Detect(const DetectRequest& r) override {
    throw ServiceError(r.request_id, "boom");
  }
};

TEST(RefineTest, MapsTopBoxToImageCoordinates) {
  ScriptedDetector det;
  det.Script("c1", "penguin", {Rec({10, 10, 50, 50}, "penguin", 0.9)});
  std::vector<DetectionRecord> evidence;
  const auto d = RefineOodBox(Replaced(), det, kRegistry, {}, evidence);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->scenario, Scenario::kRefinedOod);
  EXPECT_EQ(d->final_bbox, (BBox{56, 56, 50, 50}));
  EXPECT_EQ(d->final_category, 9);
  EXPECT_EQ(evidence.size(), 1u);
}

TEST(RefineTest, EmptyDetectionsGiveNothing) {
  ScriptedDetector det;
  std::vector<DetectionRecord> evidence;
  EXPECT_FALSE(RefineOodBox(Replaced(), det, kRegistry, {}, evidence));
}

TEST(RefineTest, HighestScoreWins) {
  ScriptedDetector det;
  det.Script("c1", "penguin",
             {Rec({0, 0, 20, 20}, "penguin", 0.7), Rec({30, 30, 40, 40}, "penguin", 0.9)});
  std::vector<DetectionRecord> evidence;
  const auto d = RefineOodBox(Replaced(), det, kRegistry, {}, evidence);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->final_bbox, (BBox{76, 76, 40, 40}));
}

TEST(RefineTest, TinyOrOutsideBoxesAreNoise) {
  ScriptedDetector det;
  det.Script("c1", "penguin", {Rec({10, 10, 1.5, 2}, "penguin", 0.9)});
  std::vector<DetectionRecord> evidence;
  EXPECT_FALSE(RefineOodBox(Replaced(), det, kRegistry, {}, evidence));
  det.Script("c1", "penguin", {Rec({300, 300, 20, 20}, "penguin", 0.9)});
  EXPECT_FALSE(RefineOodBox(Replaced(), det, kRegistry, {}, evidence));
}

TEST(RefineTest, BoxesAreClippedToCropAndImage) {
  ScriptedDetector det;
  det.Script("c1", "penguin", {Rec({100, -10, 60, 30}, "penguin", 0.9)});
  std::vector<DetectionRecord> evidence;
  const auto d = RefineOodBox(Replaced(), det, kRegistry, {}, evidence);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->final_bbox, (BBox{146, 46, 28, 20}));
}

TEST(TieBreakTest, ScoreThenIouThenOrder) {
  const BBox ref{10, 10, 20, 20};
  const std::vector<DetectionRecord> recs = {Rec({50, 50, 20, 20}, "a", 0.8),
                                             Rec({12, 12, 20, 20}, "b", 0.8),
                                             Rec({0, 0, 5, 5}, "c", 0.5)};
  EXPECT_EQ(PickTopDetection(recs, ref).label, "b");
  EXPECT_EQ(PickTopDetection(recs, std::nullopt).label, "a");  // equal area: first
  const std::vector<DetectionRecord> area = {Rec({0, 0, 5, 5}, "small", 0.8),
                                             Rec({0, 0, 50, 5}, "wide", 0.8)};
  EXPECT_EQ(PickTopDetection(area, std::nullopt).label, "wide");
}

TEST(RetentionTest, IdLabelRetainsOriginal) {
  ScriptedDetector det;
  det.Script("c1", "penguin . car", {Rec({40, 40, 30, 30}, "car", 0.8)});
  std::vector<DetectionRecord> evidence;
  const auto d = CheckIdRetention(Replaced(), det, kRegistry, {}, evidence);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->scenario, Scenario::kIdRetained);
  EXPECT_EQ(d->final_category, 3);
  EXPECT_EQ(d->final_bbox, (BBox{100, 100, 20, 20}));
}

TEST(RetentionTest, PromptLabelOrNothingIsInconclusive) {
  ScriptedDetector det;
  det.Script("c1", "penguin . car", {Rec({40, 40, 30, 30}, "penguin", 0.9)});
  std::vector<DetectionRecord> evidence;
  EXPECT_FALSE(CheckIdRetention(Replaced(), det, kRegistry, {}, evidence));
  ScriptedDetector empty;
  EXPECT_FALSE(CheckIdRetention(Replaced(), empty, kRegistry, {}, evidence));
}

TEST(DecideTest, ScenarioOneReplaced) {
  ScriptedDetector det;
  det.Script("c1", "penguin . car", {Rec({40, 40, 30, 30}, "penguin", 0.9)});
  det.Script("c1", "penguin", {Rec({10, 10, 50, 50}, "penguin", 0.9)});
  const LabelDecision d = Decide(Replaced(), det, kRegistry, {});
  EXPECT_EQ(d.scenario, Scenario::kRefinedOod);
  EXPECT_EQ(d.final_bbox, (BBox{56, 56, 50, 50}));
  EXPECT_EQ(d.final_category, 9);
  EXPECT_EQ(d.prompt, "penguin");
  ASSERT_EQ(d.evidence.size(), 2u);
  EXPECT_EQ(d.evidence[0].bbox, (BBox{40, 40, 30, 30}));  // retention query first
}

TEST(DecideTest, ScenarioOneRoad) {
  ScriptedDetector det;
  det.Script("c2", "penguin", {Rec({10, 10, 50, 50}, "penguin", 0.9)});
  const DecisionInput in = Road();
  const LabelDecision d = Decide(in, det, kRegistry, {});
  EXPECT_EQ(d.scenario, Scenario::kRefinedOod);
  EXPECT_EQ(d.final_bbox, Translated(BBox{10, 10, 50, 50}, in.crop.bbox.x, in.crop.bbox.y));
}

TEST(DecideTest, ScenarioTwoDependsOnPolicy) {
  ScriptedDetector det;
  det.Script("c1", "penguin . car", {Rec({40, 40, 30, 30}, "car", 0.8)});
  det.Script("c1", "penguin", {Rec({10, 10, 50, 50}, "penguin", 0.6)});
  LabelPolicy keep;
  keep.keep_partial_id = true;
  const LabelDecision kept = Decide(Replaced(), det, kRegistry, keep);
  EXPECT_EQ(kept.scenario, Scenario::kIdRetained);
  EXPECT_EQ(kept.final_category, 3);
  EXPECT_EQ(kept.final_bbox, (BBox{100, 100, 20, 20}));

  LabelPolicy drop;
  drop.keep_partial_id = false;
  const LabelDecision dropped = Decide(Replaced(), det, kRegistry, drop);
  EXPECT_EQ(dropped.scenario, Scenario::kRemoved);
  EXPECT_FALSE(dropped.final_bbox);
  EXPECT_FALSE(dropped.final_category);
  EXPECT_EQ(dropped.evidence.size(), 1u);
}

TEST(DecideTest, OtherIdClassAlsoRetains) {
  ScriptedDetector det;
  det.Script("c1", "penguin . car", {Rec({40, 40, 30, 30}, "truck", 0.8)});
  // "truck" is not a phrase of the query, so the vocabulary filter drops it.
  EXPECT_EQ(Decide(Replaced(), det, kRegistry, {}).scenario, Scenario::kRemoved);
  ScriptedDetector det2;
  det2.Script("c1", "penguin . car", {Rec({40, 40, 30, 30}, "Car", 0.8)});
  EXPECT_EQ(Decide(Replaced(), det2, kRegistry, {}).scenario, Scenario::kIdRetained);
}

TEST(DecideTest, ScenarioThree) {
  ScriptedDetector det;
  const LabelDecision d = Decide(Replaced(), det, kRegistry, {});
  EXPECT_EQ(d.scenario, Scenario::kRemoved);
  EXPECT_TRUE(d.evidence.empty());
  EXPECT_EQ(Decide(Road(), det, kRegistry, {}).scenario, Scenario::kRemoved);
}

TEST(DecideTest, PreconditionAndErrors) {
  ScriptedDetector det;
  DecisionInput bad = Road();
  bad.original = Car();
  EXPECT_THROW(Decide(bad, det, kRegistry, {}), std::invalid_argument);
  ThrowingDetector boom;
  EXPECT_THROW(Decide(Replaced(), boom, kRegistry, {}), ServiceError);
}

TEST(DecideTest, ExhaustiveAndDeterministicOverRandomScripts) {
  Rng rng(17);
  const std::vector<std::string> labels = {"penguin", "car", "tapir"};
  for (int trial = 0; trial < 2000; ++trial) {
    ScriptedDetector det;
    for (const std::string prompt : {"penguin . car", "penguin"}) {
      std::vector<DetectionRecord> recs;
      const int n = static_cast<int>(rng.uniform_index(4));
      for (int k = 0; k < n; ++k) {
        recs.push_back(Rec(Quantized(testing::RandomBox(rng, 1, 4000, 128, 128)),
                           labels[rng.uniform_index(labels.size())],
                           0.05 * static_cast<double>(rng.uniform_index(21))));
      }
      det.Script("c1", prompt, recs);
    }
    LabelPolicy policy;
    policy.keep_partial_id = rng.uniform_index(2) == 0;
    const DecisionInput in = Replaced();
    const LabelDecision a = Decide(in, det, kRegistry, policy);
    const LabelDecision b = Decide(in, det, kRegistry, policy);
    ASSERT_EQ(a, b);
    switch (a.scenario) {
      case Scenario::kRefinedOod:
        ASSERT_EQ(a.final_category, 9);
        ASSERT_TRUE(a.final_bbox);
        ASSERT_GE(a.final_bbox->x, in.crop.bbox.x);
        ASSERT_GE(a.final_bbox->y, in.crop.bbox.y);
        ASSERT_LE(a.final_bbox->right(), in.crop.bbox.right());
        ASSERT_LE(a.final_bbox->bottom(), in.crop.bbox.bottom());
        ASSERT_GE(a.final_bbox->area(), kMinMappedBoxArea);
        break;
      case Scenario::kIdRetained:
        ASSERT_TRUE(policy.keep_partial_id);
        ASSERT_EQ(a.final_category, 3);
        ASSERT_EQ(a.final_bbox, in.original->bbox);
        break;
      case Scenario::kRemoved:
        ASSERT_FALSE(a.final_bbox);
        ASSERT_FALSE(a.final_category);
        break;
    }
  }
}

TEST(PromptCatalogTest, SingletonAndDeterminism) {
  const PromptCatalog one({"penguin"}, {}, false);
  Rng rng(1);
  EXPECT_EQ(one.Sample(rng), "penguin");

  const auto cat = PromptCatalog::Builtin();
  Rng a(5), b(5);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(cat.Sample(a), cat.Sample(b));
}

TEST(PromptCatalogTest, DuplicatesRemovedAndExtendedSupport) {
  const auto base = PromptCatalog::Builtin(false);
  EXPECT_EQ(PromptCatalog::BuiltinBaseList().size(), 86u);
  EXPECT_EQ(base.support().size(), 81u);
  const auto ext = PromptCatalog::Builtin(true);
  const auto s = ext.support();
  EXPECT_EQ(s.size(), 90u);
  EXPECT_NE(std::find(s.begin(), s.end(), "cardboard"), s.end());
  EXPECT_NE(std::find(s.begin(), s.end(), "tire"), s.end());
  const auto b = base.support();
  EXPECT_EQ(std::find(b.begin(), b.end(), "tire"), b.end());
}

TEST(PromptCatalogTest, CollisionsAndEmptyLists) {
  const PromptCatalog c({"penguin", "Car", " car "}, {}, false, &kRegistry);
  EXPECT_EQ(c.support(), (std::vector<std::string>{"penguin"}));
  EXPECT_THROW(PromptCatalog({}, {"tire"}, true), EmptyCatalog);
  EXPECT_THROW(PromptCatalog({"car"}, {}, false, &kRegistry), EmptyCatalog);
}

TEST(PromptCatalogTest, UniformWithinThreeSigma) {
  const auto cat = PromptCatalog::Builtin(true);
  const auto support = cat.support();
  std::map<std::string, int> counts;
  Rng rng(99);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[cat.Sample(rng)];
  const double p = 1.0 / support.size();
  const double mean = draws * p;
  const double sigma = std::sqrt(draws * p * (1 - p));
  for (const auto& s : support) EXPECT_LE(std::abs(counts[s] - mean), 3.0 * sigma + 1) << s;
}

}  // namespace
}  // namespace synoe
