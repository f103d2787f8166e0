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

#include "synoe/augmentor.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <unordered_map>

#include "synoe/manifest_io.hpp"
#include "synoe/text.hpp"

namespace synoe {

namespace {

using nlohmann::json;

// Stream key for image selection; per-image streams use the image id.
constexpr std::uint64_t kSelectionStream = 0x5e1ec7ed5e1ec7edULL;

std::string AbsolutePath(const DatasetManifest& manifest, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return std::filesystem::absolute(manifest.resolve(path)).lexically_normal().string();
}

struct PlannedRegion {
  CropRegion region;
  std::optional<std::size_t> annotation_index;
};

}  // namespace

// --- VariantPolicy ----------------------------------------------------------------

void VariantPolicy::validate() const {
  std::vector<std::string> problems;
  if (variant != Variant::kOriginal && !replace_id_instances && !road_region_inpaintings) {
    problems.push_back("policy: a variant must replace ID instances or use road regions");
  }
  if (!(ood_image_proportion >= 0.0 && ood_image_proportion <= 1.0)) {
    problems.push_back("policy: proportion must lie in [0, 1]");
  }
  if (per_image_count_weights.empty() ||
      std::any_of(per_image_count_weights.begin(), per_image_count_weights.end(),
                  [](double w) { return !(w >= 0.0); }) ||
      std::all_of(per_image_count_weights.begin(), per_image_count_weights.end(),
                  [](double w) { return w == 0.0; })) {
    problems.push_back("policy: per-image count weights need positive mass");
  }
  if (road_crop_side < 1) problems.push_back("policy: road crop side must be >= 1");
  if (box_threshold < 0.0 || box_threshold > 1.0 || text_threshold < 0.0 ||
      text_threshold > 1.0) {
    problems.push_back("policy: detector thresholds must lie in [0, 1]");
  }
  if (!problems.empty()) throw InvariantError(std::move(problems));
}

bool VariantPolicy::is_replaceable(std::string_view class_name) const {
  return std::any_of(replaceable_classes.begin(), replaceable_classes.end(),
                     [&](const std::string& c) { return EqualsIgnoreCase(c, class_name); });
}

VariantPolicy SelectVariant(Variant variant) {
  VariantPolicy p;
  p.variant = variant;
  switch (variant) {
    case Variant::kV1:
      p.replace_id_instances = true;
      p.keep_partial_id = true;
      break;
    case Variant::kV2:
      p.replace_id_instances = true;
      p.use_lf_extended_prompts = true;
      p.keep_partial_id = true;
      break;
    case Variant::kV3:
      p.road_region_inpaintings = true;
      break;
    case Variant::kV4:
      p.replace_id_instances = true;
      break;
    case Variant::kV5:
      p.replace_id_instances = true;
      p.road_region_inpaintings = true;
      p.keep_partial_id = true;
      break;
    case Variant::kOriginal:
      throw UnknownVariant("'original' is not a generation variant");
  }
  return p;
}

VariantPolicy SelectVariant(std::string_view name) {
  auto v = ParseVariant(name);
  if (!v || *v == Variant::kOriginal) {
    throw UnknownVariant("unknown variant '" + std::string(name) + "' (expected V1..V5)");
  }
  return SelectVariant(*v);
}

// --- reports ----------------------------------------------------------------------

void ScenarioCounts::add(Scenario s) {
  switch (s) {
    case Scenario::kRefinedOod: ++refined_ood; break;
    case Scenario::kIdRetained: ++id_retained; break;
    case Scenario::kRemoved: ++removed; break;
  }
}

ScenarioCounts& ScenarioCounts::operator+=(const ScenarioCounts& o) {
  refined_ood += o.refined_ood;
  id_retained += o.id_retained;
  removed += o.removed;
  return *this;
}

json AugmentationReport::ToJson() const {
  return {{"total_images", total_images},
          {"images_selected", images_selected},
          {"images_processed", images_processed},
          {"images_augmented", images_augmented},
          {"counts",
           {{"refined_ood", counts.refined_ood},
            {"id_retained", counts.id_retained},
            {"removed", counts.removed}}},
          {"decisions", counts.total()},
          {"placement_failures", placement_failures},
          {"service_errors", service_errors},
          {"selection_shortfall", selection_shortfall}};
}

// --- evidence ---------------------------------------------------------------------

json EvidenceToJson(const EvidenceStore& store) {
  json entries = json::array();
  for (const auto& [id, e] : store) {
    json detections = json::array();
    for (const auto& d : e.detections) detections.push_back(ToJson(d));
    json j = {{"annotation_id", id},
              {"image_id", e.image_id},
              {"request_id", e.request_id},
              {"scenario", ToString(e.scenario)},
              {"prompt", e.prompt},
              {"crop", BoxToJson(e.crop)},
              {"detections", std::move(detections)}};
    if (e.original_annotation_id) j["original_annotation_id"] = *e.original_annotation_id;
    if (e.original_label) j["original_label"] = *e.original_label;
    entries.push_back(std::move(j));
  }
  return {{"entries", std::move(entries)}};
}

EvidenceStore EvidenceFromJson(const json& doc) {
  EvidenceStore store;
  try {
    for (const auto& j : doc.at("entries")) {
      EvidenceEntry e;
      e.annotation_id = j.at("annotation_id").get<AnnotationId>();
      e.image_id = j.value("image_id", ImageId{0});
      e.request_id = j.value("request_id", std::string());
      auto scenario = ParseScenario(j.at("scenario").get<std::string>());
      if (!scenario) throw SchemaError("evidence: unknown scenario");
      e.scenario = *scenario;
      e.prompt = j.at("prompt").get<std::string>();
      if (j.contains("crop")) e.crop = BoxFromJson(j.at("crop"));
      if (j.contains("original_annotation_id")) {
        e.original_annotation_id = j.at("original_annotation_id").get<AnnotationId>();
      }
      if (j.contains("original_label")) {
        e.original_label = j.at("original_label").get<std::string>();
      }
      for (const auto& d : j.at("detections")) e.detections.push_back(DetectionFromJson(d));
      store[e.annotation_id] = std::move(e);
    }
  } catch (const json::exception& ex) {
    throw SchemaError(std::string("evidence: ") + ex.what());
  }
  return store;
}

EvidenceStore LoadEvidence(const std::filesystem::path& path) {
  return EvidenceFromJson(ReadJsonFile(path));
}

void SaveEvidence(const EvidenceStore& store, const std::filesystem::path& path) {
  WriteTextFile(path, StableDump(EvidenceToJson(store)));
}

// --- selection --------------------------------------------------------------------

std::vector<ImageId> ChooseEligibleSubset(const DatasetManifest& manifest, double p,
                                          const std::function<bool(const ImageRecord&)>& eligible,
                                          Rng& rng) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("proportion must lie in [0, 1]");
  const std::size_t n = manifest.images.size();
  const auto target = static_cast<std::size_t>(std::llround(p * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);

  std::vector<std::size_t> picked;
  for (std::size_t i : order) {
    if (picked.size() == target) break;
    if (eligible(manifest.images[i])) picked.push_back(i);
  }
  std::sort(picked.begin(), picked.end());
  std::vector<ImageId> ids;
  for (std::size_t i : picked) ids.push_back(manifest.images[i].id);
  return ids;
}

std::vector<ImageId> ChooseAugmentedSubset(const DatasetManifest& manifest, double p,
                                           Rng& rng) {
  return ChooseEligibleSubset(manifest, p, [](const ImageRecord&) { return true; }, rng);
}

// --- per image ----------------------------------------------------------------------

ImageOutcome AugmentImage(const ImageJob& job, const VariantPolicy& policy,
                          const PromptCatalog& catalog, const CategoryRegistry& registry,
                          Inpainter& inpainter, Detector& detector, Rng& rng) {
  ImageOutcome out;
  out.annotations = job.annotations;
  ImageReport& report = out.report;
  const ImageRecord& image = job.image;

  Image edited = ReadPng(job.image_path);
  if (edited.width != image.width || edited.height != image.height) {
    throw InvariantError({"image " + std::to_string(image.id) + ": file is " +
                          std::to_string(edited.width) + "x" + std::to_string(edited.height) +
                          ", manifest says " + std::to_string(image.width) + "x" +
                          std::to_string(image.height)});
  }
  std::optional<BinaryMask> mask;
  if (policy.road_region_inpaintings && job.mask_path) mask = ReadMaskPng(*job.mask_path);

  const int k = static_cast<int>(rng.weighted_index(policy.per_image_count_weights)) + 1;
  report.regions_planned = k;

  std::vector<std::size_t> pool;
  if (policy.replace_id_instances) {
    for (std::size_t i = 0; i < out.annotations.size(); ++i) {
      const Annotation& a = out.annotations[i];
      if (a.provenance == Provenance::kOriginal && registry.is_id(a.category_index) &&
          policy.is_replaceable(registry.name(a.category_index))) {
        pool.push_back(i);
      }
    }
    rng.shuffle(pool);
  }
  std::vector<BBox> occupied;
  for (const auto& a : out.annotations) {
    if (a.provenance != Provenance::kRemoved) occupied.push_back(a.bbox);
  }

  std::vector<CropRegion> accepted;
  std::vector<PlannedRegion> plan;
  std::size_t pool_pos = 0;
  for (int slot = 0; slot < k; ++slot) {
    const bool can_replace = pool_pos < pool.size();
    const bool can_road = policy.road_region_inpaintings;
    bool use_road = can_road;
    if (can_replace && can_road) use_road = rng.uniform01() < 0.5;

    if (!use_road && policy.replace_id_instances) {
      bool placed = false;
      while (pool_pos < pool.size() && !placed) {
        const std::size_t idx = pool[pool_pos++];
        CropRegion region;
        try {
          region = CropForTarget(out.annotations[idx].bbox, image);
        } catch (const DegenerateTarget&) {
          continue;
        }
        region.source_annotation_id = out.annotations[idx].id;
        if (!MinDistanceOk(accepted, region)) continue;
        accepted.push_back(region);
        plan.push_back({region, idx});
        placed = true;
      }
      if (!placed) ++report.placement_failures;
    } else if (use_road) {
      std::optional<CropRegion> region;
      if (mask) {
        region = SampleRoadRegion(image, *mask, occupied, accepted, policy.road_crop_side, rng);
      } else {
        LogEvent("warning", "missing_road_mask", {{"image_id", image.id}});
      }
      if (region) {
        accepted.push_back(*region);
        plan.push_back({*region, std::nullopt});
      } else {
        ++report.placement_failures;
      }
    } else {
      ++report.placement_failures;
    }
  }

  bool pasted = false;
  for (std::size_t j = 0; j < plan.size(); ++j) {
    const PlannedRegion& planned = plan[j];
    const CropRegion& region = planned.region;
    const PixelRect rect = region.pixel_rect();
    const std::string prompt = catalog.Sample(rng);
    const std::string request_id =
        "img" + std::to_string(image.id) + "-r" + std::to_string(j);

    InpaintRequest req;
    req.request_id = request_id;
    req.image_crop = EncodePng(Crop(edited, rect));
    req.prompt = prompt;
    req.crop_side = std::max(rect.w, rect.h);
    if (planned.annotation_index) {
      const BBox local = Translated(out.annotations[*planned.annotation_index].bbox,
                                    -region.bbox.x, -region.bbox.y);
      const PixelRect m = ToPixelRect(local);
      req.mask_box = BBox{static_cast<double>(m.x), static_cast<double>(m.y),
                          static_cast<double>(m.w), static_cast<double>(m.h)};
    } else {
      req.mask_box = BBox{static_cast<double>(rect.w / 4), static_cast<double>(rect.h / 4),
                          static_cast<double>(rect.w / 2), static_cast<double>(rect.h / 2)};
    }

    DecisionInput input;
    input.request_id = request_id;
    input.crop = region;
    input.image = image;
    input.prompt = prompt;
    if (planned.annotation_index) input.original = out.annotations[*planned.annotation_index];

    LabelDecision decision;
    Image patch;
    try {
      input.inpainted_crop = inpainter.Inpaint(req);
      patch = DecodePng(input.inpainted_crop);
      if (patch.width != rect.w || patch.height != rect.h) {
        throw DimensionMismatch("inpaint [" + request_id + "] changed the crop size");
      }
      decision = Decide(input, detector, registry, policy.label_policy());
    } catch (const Error& e) {
      ++report.service_errors;
      LogEvent("error", "region_failed",
               {{"image_id", image.id}, {"request_id", request_id}, {"what", e.what()}});
      continue;
    }
    report.counts.add(decision.scenario);

    EvidenceEntry evidence;
    evidence.image_id = image.id;
    evidence.request_id = request_id;
    evidence.scenario = decision.scenario;
    evidence.prompt = prompt;
    evidence.crop = region.bbox;
    evidence.detections = decision.evidence;
    if (input.original) {
      evidence.original_annotation_id = input.original->id;
      evidence.original_label = registry.name(input.original->category_index);
    }

    const bool replaced = planned.annotation_index.has_value();
    if (!replaced && decision.scenario == Scenario::kRemoved) continue;  // patch discarded

    Paste(edited, patch, rect.x, rect.y);
    pasted = true;
    out.patches.push_back({region, input.inpainted_crop});
    report.changed = true;

    switch (decision.scenario) {
      case Scenario::kRefinedOod: {
        if (replaced) out.annotations[*planned.annotation_index].provenance = Provenance::kRemoved;
        Annotation ood;
        ood.id = 0;
        ood.image_id = image.id;
        ood.bbox = *decision.final_bbox;
        ood.category_index = registry.ood_index();
        ood.provenance = Provenance::kInpaintedOod;
        ood.prompt_used = prompt;
        out.annotations.push_back(ood);
        out.evidence.emplace_back(out.annotations.size() - 1, std::move(evidence));
        break;
      }
      case Scenario::kIdRetained:
        out.annotations[*planned.annotation_index].provenance = Provenance::kInpaintedIdRetained;
        out.evidence.emplace_back(*planned.annotation_index, std::move(evidence));
        break;
      case Scenario::kRemoved:
        out.annotations[*planned.annotation_index].provenance = Provenance::kRemoved;
        out.evidence.emplace_back(*planned.annotation_index, std::move(evidence));
        break;
    }
  }
  if (pasted) out.edited = std::move(edited);
  return out;
}

// --- pipeline -----------------------------------------------------------------------

PipelineResult RunPipeline(const DatasetManifest& manifest, const VariantPolicy& policy,
                           const PromptCatalog& catalog, Inpainter& inpainter,
                           Detector& detector, const PipelineOptions& options) {
  manifest.validate();
  policy.validate();
  const CategoryRegistry& registry = manifest.registry;
  const PromptCatalog active_catalog = catalog.WithExtended(policy.use_lf_extended_prompts);

  std::unordered_map<ImageId, std::vector<std::size_t>> by_image;
  for (std::size_t i = 0; i < manifest.annotations.size(); ++i) {
    by_image[manifest.annotations[i].image_id].push_back(i);
  }

  auto eligible = [&](const ImageRecord& img) {
    if (policy.road_region_inpaintings && img.road_mask_path) return true;
    if (!policy.replace_id_instances) return false;
    auto it = by_image.find(img.id);
    if (it == by_image.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(), [&](std::size_t i) {
      const Annotation& a = manifest.annotations[i];
      return a.provenance == Provenance::kOriginal && registry.is_id(a.category_index) &&
             policy.is_replaceable(registry.name(a.category_index));
    });
  };
  Rng selection_rng = Rng::Derive(options.seed, kSelectionStream);
  const std::vector<ImageId> selected =
      ChooseEligibleSubset(manifest, policy.ood_image_proportion, eligible, selection_rng);

  std::vector<ImageJob> jobs;
  for (ImageId id : selected) {
    const ImageRecord& img = *manifest.find_image(id);
    ImageJob job;
    job.image = img;
    job.image_path = manifest.resolve(img.file_path);
    if (img.road_mask_path) job.mask_path = manifest.resolve(*img.road_mask_path);
    for (std::size_t i : by_image[id]) job.annotations.push_back(manifest.annotations[i]);
    jobs.push_back(std::move(job));
  }

  // Workers pull jobs; results land in per-job slots so reduction order is
  // fixed regardless of scheduling.
  std::vector<std::optional<ImageOutcome>> outcomes(jobs.size());
  std::vector<std::string> failures(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      Rng rng = Rng::Derive(options.seed, static_cast<std::uint64_t>(jobs[i].image.id));
      try {
        outcomes[i] = AugmentImage(jobs[i], policy, active_catalog, registry, inpainter,
                                   detector, rng);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  const int workers = std::max(1, std::min<int>(options.workers, static_cast<int>(jobs.size())));
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }

  PipelineResult result;
  AugmentationReport& report = result.report;
  report.total_images = static_cast<int>(manifest.images.size());
  report.images_selected = static_cast<int>(selected.size());
  report.selection_shortfall =
      static_cast<int>(std::llround(policy.ood_image_proportion *
                                    static_cast<double>(manifest.images.size()))) -
      report.images_selected;

  DatasetManifest& out = result.manifest;
  out.registry = registry;
  out.base_dir = options.out_dir;
  out.annotations = manifest.annotations;
  std::unordered_map<AnnotationId, std::size_t> index_of;
  AnnotationId next_id = 1;
  for (std::size_t i = 0; i < out.annotations.size(); ++i) {
    index_of[out.annotations[i].id] = i;
    next_id = std::max(next_id, out.annotations[i].id + 1);
  }

  std::unordered_map<ImageId, std::size_t> job_of;
  for (std::size_t i = 0; i < jobs.size(); ++i) job_of[jobs[i].image.id] = i;

  std::vector<Annotation> appended;
  for (const ImageRecord& img : manifest.images) {
    ImageRecord rec = img;
    rec.file_path = AbsolutePath(manifest, img.file_path);
    if (img.road_mask_path) rec.road_mask_path = AbsolutePath(manifest, *img.road_mask_path);
    if (img.original_file_path) {
      rec.original_file_path = AbsolutePath(manifest, *img.original_file_path);
    }

    auto jit = job_of.find(img.id);
    if (jit != job_of.end()) {
      const std::size_t j = jit->second;
      if (!outcomes[j]) {
        ++report.service_errors;
        LogEvent("error", "image_failed", {{"image_id", img.id}, {"what", failures[j]}});
      } else {
        ImageOutcome& o = *outcomes[j];
        ++report.images_processed;
        report.counts += o.report.counts;
        report.placement_failures += o.report.placement_failures;
        report.service_errors += o.report.service_errors;
        if (o.report.changed) ++report.images_augmented;

        std::vector<AnnotationId> final_ids(o.annotations.size());
        for (std::size_t a = 0; a < o.annotations.size(); ++a) {
          Annotation ann = o.annotations[a];
          if (ann.id == 0 && ann.provenance == Provenance::kInpaintedOod) {
            ann.id = next_id++;
            appended.push_back(ann);
          } else {
            out.annotations[index_of.at(ann.id)] = ann;
          }
          final_ids[a] = ann.id;
        }
        for (auto& [a, entry] : o.evidence) {
          entry.annotation_id = final_ids[a];
          result.evidence[entry.annotation_id] = entry;
        }
        if (o.edited) {
          const std::string stem = std::filesystem::path(img.file_path).stem().string();
          const std::string rel = "images/" + std::to_string(img.id) + "_" + stem + "_syn.png";
          WritePng(options.out_dir / rel, *o.edited);
          rec.original_file_path = rec.file_path;
          rec.file_path = std::filesystem::absolute(options.out_dir / rel).lexically_normal().string();
        }
      }
    }
    out.images.push_back(std::move(rec));
  }
  out.annotations.insert(out.annotations.end(), appended.begin(), appended.end());

  out.meta = manifest.meta;
  out.meta.variant = policy.variant;
  out.meta.seed = options.seed;
  out.meta.tool_version = std::string(kToolVersion);
  json generation = options.config_echo.is_object() ? options.config_echo : json::object();
  generation["proportion"] = policy.ood_image_proportion;
  generation["box_threshold"] = policy.box_threshold;
  generation["text_threshold"] = policy.text_threshold;
  generation["per_image_count_weights"] = policy.per_image_count_weights;
  generation["replaceable_classes"] = policy.replaceable_classes;
  generation["road_crop_side"] = policy.road_crop_side;
  generation["replace_id_instances"] = policy.replace_id_instances;
  generation["use_lf_extended_prompts"] = policy.use_lf_extended_prompts;
  generation["road_region_inpaintings"] = policy.road_region_inpaintings;
  generation["keep_partial_id"] = policy.keep_partial_id;
  out.meta.extra["generation"] = std::move(generation);

  SaveManifest(out, options.out_dir / "manifest.json");
  WriteTextFile(options.out_dir / "report.json", StableDump(report.ToJson()));
  SaveEvidence(result.evidence, options.out_dir / "evidence.json");
  return result;
}

}  // namespace synoe
