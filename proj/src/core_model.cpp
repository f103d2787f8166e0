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

#include "synoe/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "synoe/text.hpp"

namespace synoe {

namespace {

constexpr double kBoundsEps = 1e-6;

std::string JoinLines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& line : lines) {
    if (!out.empty()) out += "; ";
    out += line;
  }
  return out;
}

double Round2(double v) {
  double r = std::round(v * 100.0) / 100.0;
  return r == 0.0 ? 0.0 : r;  // no negative zero on disk
}

}  // namespace

InvariantError::InvariantError(std::vector<std::string> offenders)
    : Error("invariant violation: " + JoinLines(offenders)),
      offenders_(std::move(offenders)) {}

bool BBox::valid() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) &&
         std::isfinite(h) && w > 0.0 && h > 0.0;
}

BBox Translated(const BBox& box, double dx, double dy) {
  return {box.x + dx, box.y + dy, box.w, box.h};
}

BBox ClampToBounds(const BBox& box, double width, double height) {
  double x0 = std::clamp(box.x, 0.0, width);
  double y0 = std::clamp(box.y, 0.0, height);
  double x1 = std::clamp(box.right(), 0.0, width);
  double y1 = std::clamp(box.bottom(), 0.0, height);
  return {x0, y0, std::max(0.0, x1 - x0), std::max(0.0, y1 - y0)};
}

BBox Quantized(const BBox& box) {
  return {Round2(box.x), Round2(box.y), Round2(box.w), Round2(box.h)};
}

// --- CategoryRegistry -------------------------------------------------------

CategoryRegistry::CategoryRegistry(std::vector<std::string> id_classes)
    : id_classes_(std::move(id_classes)) {
  std::vector<std::string> offenders;
  if (id_classes_.empty()) offenders.push_back("category registry: no ID classes");
  std::set<std::string> seen;
  for (auto& name : id_classes_) {
    name = Trim(name);
    if (name.empty()) {
      offenders.push_back("category registry: empty class name");
      continue;
    }
    if (EqualsIgnoreCase(name, kOodName)) {
      offenders.push_back("category registry: ID class may not be named OOD");
    }
    if (!seen.insert(ToLower(name)).second) {
      offenders.push_back("category registry: duplicate class '" + name + "'");
    }
  }
  if (!offenders.empty()) throw InvariantError(std::move(offenders));
}

CategoryRegistry CategoryRegistry::NuImagesDefault() {
  return CategoryRegistry({"Bicycle", "Bus", "Car", "Construction",
                           "Motorcycle", "Trailer", "Truck", "Pedestrian"});
}

const std::string& CategoryRegistry::name(int index) const {
  if (index == ood_index()) return ood_name_;
  if (!is_id(index)) {
    throw std::out_of_range("category index " + std::to_string(index) +
                            " outside [1, " + std::to_string(ood_index()) + "]");
  }
  return id_classes_[static_cast<std::size_t>(index - 1)];
}

std::optional<int> CategoryRegistry::index_of(std::string_view name) const {
  if (EqualsIgnoreCase(Trim(name), kOodName)) return ood_index();
  return id_index_of(name);
}

std::optional<int> CategoryRegistry::id_index_of(std::string_view name) const {
  std::string wanted = Trim(name);
  for (std::size_t i = 0; i < id_classes_.size(); ++i) {
    if (EqualsIgnoreCase(id_classes_[i], wanted)) return static_cast<int>(i) + 1;
  }
  return std::nullopt;
}

// --- enums ------------------------------------------------------------------

std::string_view ToString(Provenance p) {
  switch (p) {
    case Provenance::kOriginal: return "original";
    case Provenance::kInpaintedOod: return "inpainted_ood";
    case Provenance::kInpaintedIdRetained: return "inpainted_id_retained";
    case Provenance::kRemoved: return "removed";
  }
  return "original";
}

std::string_view ToString(AuditState s) {
  switch (s) {
    case AuditState::kUnchecked: return "unchecked";
    case AuditState::kConfirmed: return "confirmed";
    case AuditState::kAmbiguous: return "ambiguous";
    case AuditState::kHumanResolved: return "human_resolved";
  }
  return "unchecked";
}

std::string_view ToString(Variant v) {
  switch (v) {
    case Variant::kOriginal: return "original";
    case Variant::kV1: return "V1";
    case Variant::kV2: return "V2";
    case Variant::kV3: return "V3";
    case Variant::kV4: return "V4";
    case Variant::kV5: return "V5";
  }
  return "original";
}

Provenance ParseProvenance(std::string_view s) {
  for (auto p : {Provenance::kOriginal, Provenance::kInpaintedOod,
                 Provenance::kInpaintedIdRetained, Provenance::kRemoved}) {
    if (ToString(p) == s) return p;
  }
  throw SchemaError("unknown provenance '" + std::string(s) + "'");
}

AuditState ParseAuditState(std::string_view s) {
  for (auto a : {AuditState::kUnchecked, AuditState::kConfirmed,
                 AuditState::kAmbiguous, AuditState::kHumanResolved}) {
    if (ToString(a) == s) return a;
  }
  throw SchemaError("unknown audit_state '" + std::string(s) + "'");
}

std::optional<Variant> ParseVariant(std::string_view s) {
  for (auto v : {Variant::kOriginal, Variant::kV1, Variant::kV2, Variant::kV3,
                 Variant::kV4, Variant::kV5}) {
    if (EqualsIgnoreCase(ToString(v), s)) return v;
  }
  return std::nullopt;
}

// --- DatasetManifest ----------------------------------------------------------

const ImageRecord* DatasetManifest::find_image(ImageId id) const {
  auto it = std::find_if(images.begin(), images.end(),
                         [id](const ImageRecord& r) { return r.id == id; });
  return it == images.end() ? nullptr : &*it;
}

const Annotation* DatasetManifest::find_annotation(AnnotationId id) const {
  auto it = std::find_if(annotations.begin(), annotations.end(),
                         [id](const Annotation& a) { return a.id == id; });
  return it == annotations.end() ? nullptr : &*it;
}

std::filesystem::path DatasetManifest::resolve(const std::string& path) const {
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

void DatasetManifest::validate() const {
  std::vector<std::string> offenders;
  std::unordered_map<ImageId, const ImageRecord*> by_id;
  for (const auto& img : images) {
    const std::string tag = "image " + std::to_string(img.id);
    if (!by_id.emplace(img.id, &img).second) {
      offenders.push_back(tag + ": duplicate image id");
    }
    if (img.width < 1 || img.height < 1) {
      offenders.push_back(tag + ": dimensions must be >= 1");
    }
    if (img.file_path.empty()) offenders.push_back(tag + ": empty file_name");
  }

  std::unordered_set<AnnotationId> ann_ids;
  for (const auto& ann : annotations) {
    const std::string tag = "annotation " + std::to_string(ann.id);
    if (!ann_ids.insert(ann.id).second) {
      offenders.push_back(tag + ": duplicate annotation id");
    }
    if (!ann.bbox.valid()) {
      offenders.push_back(tag + ": box must have w > 0 and h > 0");
    }
    auto it = by_id.find(ann.image_id);
    if (it == by_id.end()) {
      offenders.push_back(tag + ": unknown image_id " +
                          std::to_string(ann.image_id));
    } else if (ann.bbox.valid()) {
      const ImageRecord& img = *it->second;
      if (ann.bbox.x < -kBoundsEps || ann.bbox.y < -kBoundsEps ||
          ann.bbox.right() > img.width + kBoundsEps ||
          ann.bbox.bottom() > img.height + kBoundsEps) {
        offenders.push_back(tag + ": box outside image bounds");
      }
    }
    if (!registry.is_valid(ann.category_index)) {
      offenders.push_back(tag + ": category index " +
                          std::to_string(ann.category_index) + " not in [1, " +
                          std::to_string(registry.ood_index()) + "]");
    }
    if (ann.provenance == Provenance::kInpaintedOod) {
      if (ann.category_index != registry.ood_index()) {
        offenders.push_back(tag + ": inpainted_ood must use the OOD category");
      }
      if (!ann.prompt_used || ann.prompt_used->empty()) {
        offenders.push_back(tag + ": inpainted_ood requires a prompt");
      }
    }
  }
  if (!offenders.empty()) throw InvariantError(std::move(offenders));
}

std::vector<const Annotation*> DatasetManifest::id_annotations() const {
  std::vector<const Annotation*> out;
  for (const auto& a : annotations) {
    if (a.provenance != Provenance::kRemoved && registry.is_id(a.category_index))
      out.push_back(&a);
  }
  return out;
}

std::vector<const Annotation*> DatasetManifest::ood_annotations() const {
  std::vector<const Annotation*> out;
  for (const auto& a : annotations) {
    if (a.provenance != Provenance::kRemoved &&
        a.category_index == registry.ood_index())
      out.push_back(&a);
  }
  return out;
}

}  // namespace synoe
