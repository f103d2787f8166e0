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

// Synthetic scenes for tests. Objects are painted in LabelColor(class) on a
// gray background, which is exactly what the color-keyed mock detector looks
// for, so the mock pipeline exercises every labeling outcome.

#ifndef SYNOE_TESTS_SUPPORT_FIXTURES_HPP_
#define SYNOE_TESTS_SUPPORT_FIXTURES_HPP_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "synoe/augmentor.hpp"
#include "synoe/core_model.hpp"
#include "synoe/image.hpp"
#include "synoe/rng.hpp"

namespace synoe::testing {

inline constexpr Rgb kBackground = {128, 128, 128};

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

struct SceneObject {
  std::string class_name;
  BBox bbox;
};

struct Scene {
  int width = 1600;
  int height = 900;
  std::vector<SceneObject> objects;
  /// Rows at or below this fraction of the height are road; < 0 for no mask.
  double road_from = 0.55;
};

/// Writes images/NNN.png, masks/NNN.png and manifest.json under `dir` and
/// returns the manifest as loaded back from disk.
DatasetManifest WriteScenes(const std::filesystem::path& dir, const std::vector<Scene>& scenes,
                            const CategoryRegistry& registry = CategoryRegistry::NuImagesDefault());

struct SceneOptions {
  int width = 1600;
  int height = 900;
  int min_objects = 1;
  int max_objects = 4;
  double road_from = 0.55;
  std::vector<std::string> classes = {"Car", "Truck", "Pedestrian", "Trailer", "Bus"};
};

/// Non-overlapping objects of mixed sizes (all three size buckets).
std::vector<Scene> RandomScenes(int count, std::uint64_t seed, const SceneOptions& options = {});

/// In-memory manifest with random boxes; no files behind it.
DatasetManifest RandomManifest(Rng& rng, int images, int max_boxes_per_image,
                               const CategoryRegistry& registry);

/// Random box with the given area range and aspect ratio in [0.5, 2].
BBox RandomBox(Rng& rng, double min_area, double max_area, double width, double height);
double Uniform(Rng& rng, double lo, double hi);

/// Pairwise center distances of the OOD boxes' generating crops are not
/// stored, so this checks the evidence crops per image.
bool CropCentersSatisfyMinDistance(const EvidenceStore& evidence);

std::string ReadText(const std::filesystem::path& path);

}  // namespace synoe::testing

#endif  // SYNOE_TESTS_SUPPORT_FIXTURES_HPP_
