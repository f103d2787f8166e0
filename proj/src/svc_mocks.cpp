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

#include <algorithm>
#include <climits>

#include "synoe/manifest_io.hpp"
#include "synoe/rng.hpp"
#include "synoe/svc_clients.hpp"
#include "synoe/text.hpp"

namespace synoe {

namespace {

using nlohmann::json;

constexpr Rgb kEraseColor = {128, 128, 128};

std::string_view AsText(const Bytes& bytes) {
  return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

}  // namespace

json ToJson(const DetectionRecord& r) {
  return {{"bbox", BoxToJson(r.bbox)}, {"label", r.label}, {"score", r.score}};
}

DetectionRecord DetectionFromJson(const json& j) {
  DetectionRecord r;
  try {
    r.bbox = BoxFromJson(j.at("bbox"));
    r.label = j.at("label").get<std::string>();
    r.score = j.at("score").get<double>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("detection record: ") + e.what());
  }
  return r;
}

std::vector<DetectionRecord> FinalizeDetections(std::vector<DetectionRecord> records,
                                                const DetectRequest& request) {
  std::vector<std::string> phrases;
  for (const auto& p : SplitPrompt(request.prompt)) phrases.push_back(Normalize(p));
  std::erase_if(records, [&](const DetectionRecord& r) {
    if (!(r.score >= request.box_threshold)) return true;
    const std::string label = Normalize(r.label);
    if (label.empty()) return true;
    return std::none_of(phrases.begin(), phrases.end(), [&](const std::string& p) {
      return p.find(label) != std::string::npos;
    });
  });
  std::stable_sort(records.begin(), records.end(),
                   [](const DetectionRecord& a, const DetectionRecord& b) {
                     return a.score > b.score;
                   });
  return records;
}

Rgb LabelColor(std::string_view label) {
  const std::uint64_t h = Mix64(Fnv1a64(Normalize(label)));
  Rgb c = {static_cast<std::uint8_t>(32 + (h & 0xff) % 192),
           static_cast<std::uint8_t>(32 + ((h >> 8) & 0xff) % 192),
           static_cast<std::uint8_t>(32 + ((h >> 16) & 0xff) % 192)};
  if (c[0] == c[1] && c[1] == c[2]) c[2] = static_cast<std::uint8_t>(c[2] ^ 0x40);
  return c;
}

Bytes MockInpainter::Inpaint(const InpaintRequest& request) {
  if (Trim(request.prompt).empty()) {
    throw ServiceError(request.request_id, "prompt must be non-empty");
  }
  Image crop = DecodePng(request.image_crop);

  PixelRect rect = request.mask_box
                       ? ToPixelRect(*request.mask_box)
                       : PixelRect{crop.width / 4, crop.height / 4, crop.width / 2,
                                   crop.height / 2};

  std::uint64_t key = Fnv1a64(AsText(request.image_crop)) ^ Mix64(Fnv1a64(request.prompt));
  key = Mix64(key ^ Mix64(seed_ + 0x5bd1e995ULL));
  if (request.mask_box) {
    key = Mix64(key ^ Fnv1a64(BoxToJson(*request.mask_box).dump()));
  }
  const double u = static_cast<double>(key >> 11) * 0x1.0p-53;

  if (u < options_.keep_rate) {
    // Unchanged crop: the generator "failed" and the ID object survives.
  } else if (u < options_.keep_rate + options_.erase_rate) {
    crop.fill_rect(rect.x, rect.y, rect.w, rect.h, kEraseColor);
  } else {
    crop.fill_rect(rect.x, rect.y, rect.w, rect.h, LabelColor(request.prompt));
  }
  return EncodePng(crop);
}

std::vector<DetectionRecord> ColorDetector::Detect(const DetectRequest& request) {
  const Image crop = DecodePng(request.image_crop);
  std::vector<DetectionRecord> records;
  for (const auto& phrase : SplitPrompt(request.prompt)) {
    const Rgb color = LabelColor(phrase);
    int min_x = INT_MAX, min_y = INT_MAX, max_x = -1, max_y = -1;
    long count = 0;
    for (int y = 0; y < crop.height; ++y) {
      for (int x = 0; x < crop.width; ++x) {
        if (crop.at(x, y) != color) continue;
        ++count;
        min_x = std::min(min_x, x);
        min_y = std::min(min_y, y);
        max_x = std::max(max_x, x);
        max_y = std::max(max_y, y);
      }
    }
    if (count == 0) continue;
    const BBox box{static_cast<double>(min_x), static_cast<double>(min_y),
                   static_cast<double>(max_x - min_x + 1),
                   static_cast<double>(max_y - min_y + 1)};
    const double fill = static_cast<double>(count) / box.area();
    records.push_back({box, phrase, 0.5 + 0.45 * fill});
  }
  return FinalizeDetections(std::move(records), request);
}

void ScriptedDetector::Script(std::string request_id, std::string prompt,
                              std::vector<DetectionRecord> records) {
  script_[{std::move(request_id), Normalize(prompt)}] = std::move(records);
}

ScriptedDetector ScriptedDetector::FromJson(const json& fixture,
                                            std::shared_ptr<Detector> fallback) {
  if (!fixture.is_array()) throw SchemaError("detector fixture must be a JSON array");
  ScriptedDetector detector(std::move(fallback));
  for (const auto& entry : fixture) {
    std::vector<DetectionRecord> records;
    for (const auto& d : entry.at("detections")) records.push_back(DetectionFromJson(d));
    detector.Script(entry.value("request_id", std::string("*")),
                    entry.at("prompt").get<std::string>(), std::move(records));
  }
  return detector;
}

std::vector<DetectionRecord> ScriptedDetector::Detect(const DetectRequest& request) {
  const std::string prompt = Normalize(request.prompt);
  auto it = script_.find({request.request_id, prompt});
  if (it == script_.end()) it = script_.find({"*", prompt});
  if (it != script_.end()) return FinalizeDetections(it->second, request);
  if (fallback_) return fallback_->Detect(request);
  return {};
}

}  // namespace synoe
