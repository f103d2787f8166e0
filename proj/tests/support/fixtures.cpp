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

#include "fixtures.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "synoe/geometry.hpp"
#include "synoe/manifest_io.hpp"
#include "synoe/svc_clients.hpp"

namespace synoe::testing {

TempDir::TempDir() {
  std::string tmpl = (std::filesystem::temp_directory_path() / "synoe-test-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw IoError("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

double Uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform01(); }

BBox RandomBox(Rng& rng, double min_area, double max_area, double width, double height) {
  const double area = Uniform(rng, min_area, max_area);
  const double aspect = std::exp(Uniform(rng, std::log(0.5), std::log(2.0)));
  double w = std::sqrt(area * aspect);
  double h = area / w;
  w = std::min(w, width - 1.0);
  h = std::min(h, height - 1.0);
  const double x = Uniform(rng, 0.0, width - w);
  const double y = Uniform(rng, 0.0, height - h);
  return {x, y, w, h};
}

DatasetManifest WriteScenes(const std::filesystem::path& dir, const std::vector<Scene>& scenes,
                            const CategoryRegistry& registry) {
  DatasetManifest m;
  m.registry = registry;
  m.meta.tool_version = "fixture";
  AnnotationId next_ann = 1;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const Scene& s = scenes[i];
    char stem[32];
    std::snprintf(stem, sizeof(stem), "%03zu", i + 1);
    Image img(s.width, s.height, kBackground);
    ImageRecord rec;
    rec.id = static_cast<ImageId>(i + 1);
    rec.width = s.width;
    rec.height = s.height;
    rec.file_path = std::string("images/") + stem + ".png";
    for (const auto& o : s.objects) {
      const PixelRect r = ToPixelRect(o.bbox);
      img.fill_rect(r.x, r.y, r.w, r.h, LabelColor(o.class_name));
      Annotation a;
      a.id = next_ann++;
      a.image_id = rec.id;
      a.bbox = Quantized(o.bbox);
      a.category_index = *registry.index_of(o.class_name);
      m.annotations.push_back(a);
    }
    WritePng(dir / rec.file_path, img);
    if (s.road_from >= 0.0) {
      BinaryMask mask(s.width, s.height, false);
      const int from = static_cast<int>(s.road_from * s.height);
      for (int y = from; y < s.height; ++y) {
        for (int x = 0; x < s.width; ++x) mask.set(x, y, true);
      }
      rec.road_mask_path = std::string("masks/") + stem + ".png";
      WriteMaskPng(dir / *rec.road_mask_path, mask);
    }
    m.images.push_back(rec);
  }
  SaveManifest(m, dir / "manifest.json");
  return LoadManifest(dir / "manifest.json");
}

std::vector<Scene> RandomScenes(int count, std::uint64_t seed, const SceneOptions& options) {
  Rng rng(seed);
  std::vector<Scene> scenes;
  for (int i = 0; i < count; ++i) {
    Scene s;
    s.width = options.width;
    s.height = options.height;
    s.road_from = options.road_from;
    const int n = options.min_objects +
                  static_cast<int>(rng.uniform_index(options.max_objects - options.min_objects + 1));
    for (int k = 0; k < n; ++k) {
      for (int attempt = 0; attempt < 50; ++attempt) {
        // Mix of small, medium and large objects.
        static constexpr double kAreas[3][2] = {{200, 1000}, {1100, 9000}, {9500, 40000}};
        const auto bucket = rng.uniform_index(3);
        BBox b = RandomBox(rng, kAreas[bucket][0], kAreas[bucket][1], s.width, s.height);
        b = Quantized(BBox{std::floor(b.x), std::floor(b.y), std::ceil(b.w), std::ceil(b.h)});
        if (b.right() > s.width || b.bottom() > s.height) continue;
        bool free = true;
        for (const auto& o : s.objects) {
          // Keep a margin so painted objects never touch.
          const BBox grown{o.bbox.x - 4, o.bbox.y - 4, o.bbox.w + 8, o.bbox.h + 8};
          if (Iou(grown, b) > 0.0) free = false;
        }
        if (!free) continue;
        const auto& cls = options.classes[rng.uniform_index(options.classes.size())];
        s.objects.push_back({cls, b});
        break;
      }
    }
    scenes.push_back(std::move(s));
  }
  return scenes;
}

DatasetManifest RandomManifest(Rng& rng, int images, int max_boxes_per_image,
                               const CategoryRegistry& registry) {
  DatasetManifest m;
  m.registry = registry;
  AnnotationId next = 1;
  for (int i = 0; i < images; ++i) {
    ImageRecord rec;
    rec.id = i + 1;
    rec.width = 400;
    rec.height = 300;
    rec.file_path = "img" + std::to_string(i + 1) + ".png";
    m.images.push_back(rec);
    const int n = static_cast<int>(rng.uniform_index(max_boxes_per_image + 1));
    for (int k = 0; k < n; ++k) {
      Annotation a;
      a.id = next++;
      a.image_id = rec.id;
      a.bbox = Quantized(RandomBox(rng, 100.0, 20000.0, rec.width, rec.height));
      a.category_index = 1 + static_cast<int>(rng.uniform_index(registry.total()));
      m.annotations.push_back(a);
    }
  }
  return m;
}

bool CropCentersSatisfyMinDistance(const EvidenceStore& evidence) {
  std::map<ImageId, std::vector<BBox>> crops;
  for (const auto& [id, e] : evidence) crops[e.image_id].push_back(e.crop);
  for (const auto& [img, boxes] : crops) {
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      for (std::size_t j = i + 1; j < boxes.size(); ++j) {
        const double dx = boxes[i].center_x() - boxes[j].center_x();
        const double dy = boxes[i].center_y() - boxes[j].center_y();
        if (std::sqrt(dx * dx + dy * dy) < kMinCenterDistance) return false;
      }
    }
  }
  return true;
}

std::string ReadText(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace synoe::testing
