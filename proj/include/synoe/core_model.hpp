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

#ifndef SYNOE_CORE_MODEL_HPP_
#define SYNOE_CORE_MODEL_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace synoe {

// ---------------------------------------------------------------------------
// Errors. Every failure surfaced by the library derives from synoe::Error so
// callers (the CLI in particular) can map families of errors to exit codes.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
  using Error::Error;
};
class SchemaError : public Error {
  using Error::Error;
};
/// Raised when one or more records break a type invariant. `offenders()`
/// carries one human readable line per offending record.
class InvariantError : public Error {
 public:
  explicit InvariantError(std::vector<std::string> offenders);
  const std::vector<std::string>& offenders() const { return offenders_; }

 private:
  std::vector<std::string> offenders_;
};
class IoError : public Error {
  using Error::Error;
};

using ImageId = std::int64_t;
using AnnotationId = std::int64_t;

/// Axis-aligned box, COCO convention: top-left corner plus extent, pixels.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double area() const { return w * h; }
  double right() const { return x + w; }
  double bottom() const { return y + h; }
  double center_x() const { return x + 0.5 * w; }
  double center_y() const { return y + 0.5 * h; }
  bool valid() const;

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Box translated by (dx, dy).
BBox Translated(const BBox& box, double dx, double dy);
/// Intersection of `box` with [0,width]x[0,height]; may have zero extent.
BBox ClampToBounds(const BBox& box, double width, double height);
/// Rounds every coordinate to the 2-decimal grid used on disk.
BBox Quantized(const BBox& box);

/// The n in-distribution classes plus the OOD bucket at index n+1.
/// Category indices are 1-based, matching COCO category ids.
class CategoryRegistry {
 public:
  static constexpr std::string_view kOodName = "OOD";

  explicit CategoryRegistry(std::vector<std::string> id_classes);

  /// Bicycle, Bus, Car, Construction, Motorcycle, Trailer, Truck, Pedestrian.
  static CategoryRegistry NuImagesDefault();

  int num_id_classes() const { return static_cast<int>(id_classes_.size()); }
  int ood_index() const { return num_id_classes() + 1; }
  int total() const { return num_id_classes() + 1; }
  bool is_id(int index) const { return index >= 1 && index <= num_id_classes(); }
  bool is_valid(int index) const { return index >= 1 && index <= ood_index(); }

  /// Name for a 1-based index; "OOD" for n+1. Throws std::out_of_range.
  const std::string& name(int index) const;
  /// Case-insensitive lookup over ID classes and the OOD bucket.
  std::optional<int> index_of(std::string_view name) const;
  /// Case-insensitive lookup restricted to the ID classes.
  std::optional<int> id_index_of(std::string_view name) const;

  const std::vector<std::string>& id_classes() const { return id_classes_; }

  friend bool operator==(const CategoryRegistry&,
                         const CategoryRegistry&) = default;

 private:
  std::vector<std::string> id_classes_;
  std::string ood_name_{kOodName};
};

enum class Provenance { kOriginal, kInpaintedOod, kInpaintedIdRetained, kRemoved };
enum class AuditState { kUnchecked, kConfirmed, kAmbiguous, kHumanResolved };
enum class Variant { kOriginal, kV1, kV2, kV3, kV4, kV5 };

std::string_view ToString(Provenance p);
std::string_view ToString(AuditState s);
std::string_view ToString(Variant v);
Provenance ParseProvenance(std::string_view s);
AuditState ParseAuditState(std::string_view s);
/// Accepts "V1".."V5" (case-insensitive) and "original".
std::optional<Variant> ParseVariant(std::string_view s);

struct Annotation {
  AnnotationId id = 0;
  ImageId image_id = 0;
  BBox bbox;
  int category_index = 0;
  Provenance provenance = Provenance::kOriginal;
  std::optional<std::string> prompt_used;
  AuditState audit_state = AuditState::kUnchecked;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

struct ImageRecord {
  ImageId id = 0;
  int width = 0;
  int height = 0;
  std::string file_path;
  std::optional<std::string> road_mask_path;
  /// Set on images written by the augmentor: the unedited source image.
  std::optional<std::string> original_file_path;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct ManifestMeta {
  Variant variant = Variant::kOriginal;
  std::uint64_t seed = 0;
  std::string tool_version;
  /// Resolved run configuration and load-time choices, echoed verbatim.
  nlohmann::json extra = nlohmann::json::object();

  friend bool operator==(const ManifestMeta&, const ManifestMeta&) = default;
};

struct DatasetManifest {
  std::vector<ImageRecord> images;
  std::vector<Annotation> annotations;
  CategoryRegistry registry = CategoryRegistry::NuImagesDefault();
  ManifestMeta meta;
  /// Directory relative paths are resolved against. Not serialized.
  std::filesystem::path base_dir;

  const ImageRecord* find_image(ImageId id) const;
  const Annotation* find_annotation(AnnotationId id) const;
  /// Resolves an image-relative path (file or mask) against base_dir.
  std::filesystem::path resolve(const std::string& path) const;

  /// Throws InvariantError listing every offending record.
  void validate() const;

  /// Non-removed annotations with an ID category.
  std::vector<const Annotation*> id_annotations() const;
  /// Non-removed annotations in the OOD bucket.
  std::vector<const Annotation*> ood_annotations() const;

  friend bool operator==(const DatasetManifest& a, const DatasetManifest& b) {
    return a.images == b.images && a.annotations == b.annotations &&
           a.registry == b.registry && a.meta == b.meta;
  }
};

inline constexpr std::string_view kToolVersion = "synoe 1.0.0";

}  // namespace synoe

#endif  // SYNOE_CORE_MODEL_HPP_
