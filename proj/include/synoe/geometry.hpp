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

// Box arithmetic and crop placement for scene editing.
//
// Crops are squares of 128, 256 or 512 px chosen by the COCO size bucket of
// the target. Within one image, every pair of crop centers is at least
// kMinCenterDistance apart so edits never interfere with each other.

#ifndef SYNOE_GEOMETRY_HPP_
#define SYNOE_GEOMETRY_HPP_

#include <optional>
#include <span>
#include <vector>

#include "synoe/core_model.hpp"
#include "synoe/image.hpp"
#include "synoe/rng.hpp"

namespace synoe {

class DegenerateTarget : public Error {
  using Error::Error;
};
class MaskMismatch : public Error {
  using Error::Error;
};

inline constexpr double kSmallAreaLimit = 32.0 * 32.0;
inline constexpr double kMediumAreaLimit = 96.0 * 96.0;
inline constexpr int kSmallCropSide = 128;
inline constexpr int kMediumCropSide = 256;
inline constexpr int kLargeCropSide = 512;
inline constexpr double kMinCenterDistance = 512.0;
inline constexpr double kOversizeMargin = 1.25;
inline constexpr int kMaxPlacementAttempts = 100;

enum class SizeBucket { kSmall, kMedium, kLarge };
enum class CropAnchor { kReplacedIdObject, kRoadFreeSpace };

std::string_view ToString(SizeBucket b);

struct CropRegion {
  BBox bbox;  // integer-aligned, inside the image
  CropAnchor anchor = CropAnchor::kReplacedIdObject;
  std::optional<AnnotationId> source_annotation_id;
  /// True when the image is smaller than the requested side and the region
  /// had to be cut to the image extent.
  bool clamped = false;

  double center_x() const { return bbox.center_x(); }
  double center_y() const { return bbox.center_y(); }
  PixelRect pixel_rect() const { return ToPixelRect(bbox); }
};

/// Intersection over union; 0 for disjoint boxes.
double Iou(const BBox& a, const BBox& b);

/// small: area < 32^2, medium: area < 96^2, large otherwise.
SizeBucket SizeBucketOf(const BBox& b);

/// Crop side before border handling: 128/256/512 by bucket, grown to
/// ceil(1.25 * max(w, h)) when the target would not fit in the
/// pixel-aligned square.
int CropSideFor(const BBox& target);

/// Square crop centered on the target and slid inside the image.
/// Throws DegenerateTarget when the target does not overlap the image.
CropRegion CropForTarget(const BBox& target, const ImageRecord& image);

/// Square region of `side` centered at pixel (cx, cy), slid inside the image.
CropRegion RegionAround(int cx, int cy, int side, int image_width, int image_height,
                        CropAnchor anchor);

/// True iff the candidate center is >= 512 px from every accepted center.
bool MinDistanceOk(std::span<const CropRegion> accepted, const CropRegion& candidate);

/// Rejection-samples a free-space region: the center pixel is mask-positive,
/// the box has IoU 0 with every `existing` box, and the center respects the
/// minimum distance to `accepted`. Returns nullopt after 100 failed attempts.
/// Throws MaskMismatch if the mask and image dimensions differ.
std::optional<CropRegion> SampleRoadRegion(const ImageRecord& image,
                                           const BinaryMask& road_mask,
                                           std::span<const BBox> existing,
                                           std::span<const CropRegion> accepted,
                                           int side, Rng& rng);

}  // namespace synoe

#endif  // SYNOE_GEOMETRY_HPP_
