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

#include "synoe/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace synoe {

namespace {

// Left edge of a `side`-wide window centered on `center`, in whole pixels.
int CenteredOrigin(double center, int side) {
  return static_cast<int>(std::floor(center - side / 2.0));
}

bool FitsCentered(const BBox& t, int side) {
  const int x0 = CenteredOrigin(t.center_x(), side);
  const int y0 = CenteredOrigin(t.center_y(), side);
  return x0 <= t.x && y0 <= t.y && x0 + side >= t.right() && y0 + side >= t.bottom();
}

// Slides [origin, origin+side) into [0, extent). Returns the new origin and
// the usable length (shorter than side only if the extent is).
std::pair<int, int> SlideInto(int origin, int side, int extent) {
  if (side >= extent) return {0, extent};
  return {std::clamp(origin, 0, extent - side), side};
}

}  // namespace

std::string_view ToString(SizeBucket b) {
  switch (b) {
    case SizeBucket::kSmall: return "small";
    case SizeBucket::kMedium: return "medium";
    case SizeBucket::kLarge: return "large";
  }
  return "small";
}

double Iou(const BBox& a, const BBox& b) {
  const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
  const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

SizeBucket SizeBucketOf(const BBox& b) {
  const double area = b.area();
  if (area < kSmallAreaLimit) return SizeBucket::kSmall;
  if (area < kMediumAreaLimit) return SizeBucket::kMedium;
  return SizeBucket::kLarge;
}

int CropSideFor(const BBox& target) {
  int side = kSmallCropSide;
  switch (SizeBucketOf(target)) {
    case SizeBucket::kSmall: side = kSmallCropSide; break;
    case SizeBucket::kMedium: side = kMediumCropSide; break;
    case SizeBucket::kLarge: side = kLargeCropSide; break;
  }
  if (FitsCentered(target, side)) return side;
  side = static_cast<int>(std::ceil(kOversizeMargin * std::max(target.w, target.h)));
  while (!FitsCentered(target, side)) ++side;  // only for sub-pixel slop
  return side;
}

CropRegion CropForTarget(const BBox& target, const ImageRecord& image) {
  const BBox inside = target.valid() ? ClampToBounds(target, image.width, image.height)
                                     : BBox{};
  if (!inside.valid()) {
    throw DegenerateTarget("target box does not overlap image " + std::to_string(image.id));
  }
  const int side = CropSideFor(inside);
  auto [x0, w] = SlideInto(CenteredOrigin(inside.center_x(), side), side, image.width);
  auto [y0, h] = SlideInto(CenteredOrigin(inside.center_y(), side), side, image.height);

  CropRegion region;
  region.bbox = {static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(w),
                 static_cast<double>(h)};
  region.anchor = CropAnchor::kReplacedIdObject;
  region.clamped = w < side || h < side;
  return region;
}

CropRegion RegionAround(int cx, int cy, int side, int image_width, int image_height,
                        CropAnchor anchor) {
  auto [x0, w] = SlideInto(cx - side / 2, side, image_width);
  auto [y0, h] = SlideInto(cy - side / 2, side, image_height);
  CropRegion region;
  region.bbox = {static_cast<double>(x0), static_cast<double>(y0), static_cast<double>(w),
                 static_cast<double>(h)};
  region.anchor = anchor;
  region.clamped = w < side || h < side;
  return region;
}

bool MinDistanceOk(std::span<const CropRegion> accepted, const CropRegion& candidate) {
  return std::all_of(accepted.begin(), accepted.end(), [&](const CropRegion& r) {
    const double dx = r.center_x() - candidate.center_x();
    const double dy = r.center_y() - candidate.center_y();
    return std::hypot(dx, dy) >= kMinCenterDistance;
  });
}

std::optional<CropRegion> SampleRoadRegion(const ImageRecord& image,
                                           const BinaryMask& road_mask,
                                           std::span<const BBox> existing,
                                           std::span<const CropRegion> accepted,
                                           int side, Rng& rng) {
  if (road_mask.width != image.width || road_mask.height != image.height) {
    throw MaskMismatch("road mask is " + std::to_string(road_mask.width) + "x" +
                       std::to_string(road_mask.height) + " but image " +
                       std::to_string(image.id) + " is " + std::to_string(image.width) +
                       "x" + std::to_string(image.height));
  }
  std::vector<std::uint32_t> positives;
  for (std::size_t i = 0; i < road_mask.bits.size(); ++i) {
    if (road_mask.bits[i]) positives.push_back(static_cast<std::uint32_t>(i));
  }
  if (positives.empty()) return std::nullopt;

  for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
    const std::uint32_t pick = positives[rng.uniform_index(positives.size())];
    const int px = static_cast<int>(pick % static_cast<std::uint32_t>(image.width));
    const int py = static_cast<int>(pick / static_cast<std::uint32_t>(image.width));
    CropRegion region =
        RegionAround(px, py, side, image.width, image.height, CropAnchor::kRoadFreeSpace);

    // Sliding may move the center off the sampled pixel; re-check it.
    const int cx = std::min(image.width - 1, static_cast<int>(std::floor(region.center_x())));
    const int cy = std::min(image.height - 1, static_cast<int>(std::floor(region.center_y())));
    if (!road_mask.at(cx, cy)) continue;
    const bool overlaps = std::any_of(existing.begin(), existing.end(), [&](const BBox& b) {
      return Iou(b, region.bbox) > 0.0;
    });
    if (overlaps) continue;
    if (!MinDistanceOk(accepted, region)) continue;
    return region;
  }
  return std::nullopt;
}

}  // namespace synoe
