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

// End-to-end dataset augmentation: pick images, pick regions (replaced ID
// objects and/or road free space), inpaint, label, paste back, and assemble
// the output manifest.
//
// Output is a pure function of (input manifest, policy, catalog, services,
// seed): every image draws from its own stream Rng::Derive(seed, image_id)
// and results are reduced in manifest order, so the worker count never
// changes a byte of the output.

#ifndef SYNOE_AUGMENTOR_HPP_
#define SYNOE_AUGMENTOR_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synoe/core_model.hpp"
#include "synoe/geometry.hpp"
#include "synoe/image.hpp"
#include "synoe/label_engine.hpp"
#include "synoe/prompt_catalog.hpp"
#include "synoe/rng.hpp"
#include "synoe/svc_clients.hpp"

namespace synoe {

class UnknownVariant : public Error {
  using Error::Error;
};

struct VariantPolicy {
  Variant variant = Variant::kOriginal;
  bool replace_id_instances = false;
  bool use_lf_extended_prompts = false;
  bool road_region_inpaintings = false;
  bool keep_partial_id = false;
  std::vector<std::string> replaceable_classes = {"car", "truck", "trailer", "pedestrian"};
  /// Weight of drawing k = i + 1 regions per image; default uniform {1,2,3}.
  std::vector<double> per_image_count_weights = {1.0, 1.0, 1.0};
  double ood_image_proportion = 0.25;
  int road_crop_side = kSmallCropSide;
  double box_threshold = kDefaultBoxThreshold;
  double text_threshold = kDefaultTextThreshold;

  /// Throws InvariantError on an inconsistent policy.
  void validate() const;
  bool is_replaceable(std::string_view class_name) const;
  LabelPolicy label_policy() const {
    return {keep_partial_id, box_threshold, text_threshold};
  }
};

/// The dataset-variant table:
///
///          replace  LF prompts  road  partial ID
///    V1       x                          x
///    V2       x         x                x
///    V3                          x
///    V4       x
///    V5       x                  x       x
VariantPolicy SelectVariant(Variant variant);
/// Throws UnknownVariant for anything but V1..V5.
VariantPolicy SelectVariant(std::string_view name);

struct ScenarioCounts {
  int refined_ood = 0;
  int id_retained = 0;
  int removed = 0;

  int total() const { return refined_ood + id_retained + removed; }
  void add(Scenario s);
  ScenarioCounts& operator+=(const ScenarioCounts& o);
  friend bool operator==(const ScenarioCounts&, const ScenarioCounts&) = default;
};

struct AugmentationReport {
  int total_images = 0;
  int images_selected = 0;
  /// Selected images that went through augmentation.
  int images_processed = 0;
  /// Processed images whose annotations changed.
  int images_augmented = 0;
  ScenarioCounts counts;
  int placement_failures = 0;
  int service_errors = 0;
  /// Images that could not be selected because too few were eligible.
  int selection_shortfall = 0;

  nlohmann::json ToJson() const;
  friend bool operator==(const AugmentationReport&, const AugmentationReport&) = default;
};

/// Provenance of one label decision, kept for auditing and review.
struct EvidenceEntry {
  AnnotationId annotation_id = 0;
  ImageId image_id = 0;
  std::string request_id;
  Scenario scenario = Scenario::kRemoved;
  std::string prompt;
  std::optional<AnnotationId> original_annotation_id;
  std::optional<std::string> original_label;
  BBox crop;
  std::vector<DetectionRecord> detections;

  friend bool operator==(const EvidenceEntry&, const EvidenceEntry&) = default;
};

using EvidenceStore = std::map<AnnotationId, EvidenceEntry>;

nlohmann::json EvidenceToJson(const EvidenceStore& store);
EvidenceStore EvidenceFromJson(const nlohmann::json& doc);
EvidenceStore LoadEvidence(const std::filesystem::path& path);
void SaveEvidence(const EvidenceStore& store, const std::filesystem::path& path);

/// Uniform sample of round(p * N) image ids without replacement, returned in
/// manifest order.
std::vector<ImageId> ChooseAugmentedSubset(const DatasetManifest& manifest, double p,
                                           Rng& rng);

/// Same draw, but ineligible images are returned to the pool and the next
/// image in the random order is taken instead.
std::vector<ImageId> ChooseEligibleSubset(const DatasetManifest& manifest, double p,
                                          const std::function<bool(const ImageRecord&)>& eligible,
                                          Rng& rng);

struct ImageJob {
  ImageRecord image;
  std::filesystem::path image_path;
  std::optional<std::filesystem::path> mask_path;
  std::vector<Annotation> annotations;  // this image's annotations
};

struct ImageReport {
  int regions_planned = 0;
  ScenarioCounts counts;
  int placement_failures = 0;
  int service_errors = 0;
  bool changed = false;
};

struct Patch {
  CropRegion region;
  Bytes png;
};

struct ImageOutcome {
  /// The job's annotations (updated in place) followed by new OOD
  /// annotations whose ids are still 0.
  std::vector<Annotation> annotations;
  /// Evidence keyed by index into `annotations`.
  std::vector<std::pair<std::size_t, EvidenceEntry>> evidence;
  std::vector<Patch> patches;
  std::optional<Image> edited;
  ImageReport report;
};

ImageOutcome AugmentImage(const ImageJob& job, const VariantPolicy& policy,
                          const PromptCatalog& catalog, const CategoryRegistry& registry,
                          Inpainter& inpainter, Detector& detector, Rng& rng);

struct PipelineOptions {
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
  int workers = 1;
  /// Extra key/values echoed into the output manifest's meta block.
  nlohmann::json config_echo = nlohmann::json::object();
};

struct PipelineResult {
  DatasetManifest manifest;
  AugmentationReport report;
  EvidenceStore evidence;
};

/// Runs the full pipeline and writes manifest.json, report.json,
/// evidence.json and images/*_syn.png into options.out_dir.
PipelineResult RunPipeline(const DatasetManifest& manifest, const VariantPolicy& policy,
                           const PromptCatalog& catalog, Inpainter& inpainter,
                           Detector& detector, const PipelineOptions& options);

}  // namespace synoe

#endif  // SYNOE_AUGMENTOR_HPP_
