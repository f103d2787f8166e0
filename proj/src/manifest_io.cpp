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

#include "synoe/manifest_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "synoe/text.hpp"

namespace synoe {

namespace {

using nlohmann::json;

constexpr const char* kReservedMeta[] = {"variant", "seed", "tool_version"};

const json& Require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw SchemaError(where + ": missing field '" + key + "'");
  }
  return obj.at(key);
}

template <typename T>
T RequireAs(const json& obj, const char* key, const std::string& where) {
  const json& v = Require(obj, key, where);
  try {
    return v.get<T>();
  } catch (const json::exception&) {
    throw SchemaError(where + ": field '" + key + "' has the wrong type");
  }
}

std::optional<std::string> OptionalString(const json& obj, const char* key,
                                          const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  if (!obj.at(key).is_string()) {
    throw SchemaError(where + ": field '" + key + "' must be a string");
  }
  return obj.at(key).get<std::string>();
}

// Clamps to the image, snapping corners to the on-disk 2-decimal grid.
BBox ClampAndQuantize(const BBox& box, int width, int height) {
  auto r2 = [](double v) { return std::round(v * 100.0) / 100.0; };
  double x0 = std::clamp(r2(box.x), 0.0, static_cast<double>(width));
  double y0 = std::clamp(r2(box.y), 0.0, static_cast<double>(height));
  double x1 = std::clamp(r2(box.right()), 0.0, static_cast<double>(width));
  double y1 = std::clamp(r2(box.bottom()), 0.0, static_cast<double>(height));
  return Quantized({x0, y0, std::max(0.0, x1 - x0), std::max(0.0, y1 - y0)});
}

void DumpValue(const json& j, std::string& out, int indent, bool fixed2);

void AppendNumberFixed2(const json& j, std::string& out) {
  char buf[64];
  double v = j.get<double>();
  if (v == 0.0) v = 0.0;
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  if (std::string_view(buf) == "-0.00") {
    out += "0.00";
  } else {
    out += buf;
  }
}

bool IsScalar(const json& j) { return !j.is_structured(); }

void DumpValue(const json& j, std::string& out, int indent, bool fixed2) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  const std::string inner(static_cast<std::size_t>(indent + 2), ' ');
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{\n";
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) out += ",\n";
      first = false;
      out += inner;
      out += json(it.key()).dump();
      out += ": ";
      DumpValue(it.value(), out, indent + 2, it.key() == "bbox");
    }
    out += "\n" + pad + "}";
  } else if (j.is_array()) {
    if (j.empty()) {
      out += "[]";
      return;
    }
    if (std::all_of(j.begin(), j.end(), IsScalar)) {
      out += "[";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i > 0) out += ", ";
        DumpValue(j[i], out, indent, fixed2);
      }
      out += "]";
      return;
    }
    out += "[\n";
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i > 0) out += ",\n";
      out += inner;
      DumpValue(j[i], out, indent + 2, false);
    }
    out += "\n" + pad + "]";
  } else if (fixed2 && j.is_number()) {
    AppendNumberFixed2(j, out);
  } else {
    out += j.dump();
  }
}

}  // namespace

json BoxToJson(const BBox& box) { return json::array({box.x, box.y, box.w, box.h}); }

BBox BoxFromJson(const json& j) {
  if (!j.is_array() || j.size() != 4 ||
      !std::all_of(j.begin(), j.end(), [](const json& v) { return v.is_number(); })) {
    throw SchemaError("bbox must be an array of 4 numbers");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
          j[3].get<double>()};
}

std::string StableDump(const json& doc) {
  std::string out;
  DumpValue(doc, out, 0, false);
  out += "\n";
  return out;
}

json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void WriteTextFile(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

DatasetManifest ManifestFromJson(const json& doc, const LoadOptions& options) {
  if (!doc.is_object()) throw SchemaError("manifest: top level must be an object");
  const json& images = Require(doc, "images", "manifest");
  const json& annotations = Require(doc, "annotations", "manifest");
  const json& categories = Require(doc, "categories", "manifest");
  if (!images.is_array() || !annotations.is_array() || !categories.is_array()) {
    throw SchemaError("manifest: images, annotations and categories must be arrays");
  }

  // File categories, ordered by id.
  std::map<int, std::string> file_categories;
  for (const auto& c : categories) {
    const int id = RequireAs<int>(c, "id", "category");
    const auto name = RequireAs<std::string>(c, "name", "category " + std::to_string(id));
    if (!file_categories.emplace(id, name).second) {
      throw InvariantError({"category " + std::to_string(id) + ": duplicate id"});
    }
  }

  std::vector<std::string> id_names;
  if (options.id_classes) {
    id_names = *options.id_classes;
  } else {
    for (const auto& [id, name] : file_categories) {
      if (!EqualsIgnoreCase(Trim(name), CategoryRegistry::kOodName)) id_names.push_back(name);
    }
  }
  DatasetManifest manifest;
  manifest.registry = id_names.empty() ? CategoryRegistry::NuImagesDefault()
                                       : CategoryRegistry(id_names);
  const CategoryRegistry& registry = manifest.registry;

  // file category id -> registry index; nullopt marks an unlisted category.
  std::map<int, std::optional<int>> category_map;
  for (const auto& [id, name] : file_categories) {
    category_map[id] = registry.index_of(name);
  }

  std::vector<std::string> offenders;
  for (const auto& j : images) {
    ImageRecord img;
    img.id = RequireAs<ImageId>(j, "id", "image");
    const std::string where = "image " + std::to_string(img.id);
    img.width = RequireAs<int>(j, "width", where);
    img.height = RequireAs<int>(j, "height", where);
    img.file_path = RequireAs<std::string>(j, "file_name", where);
    img.road_mask_path = OptionalString(j, "road_mask", where);
    img.original_file_path = OptionalString(j, "original_file_name", where);
    manifest.images.push_back(std::move(img));
  }

  std::set<std::string> dropped;
  for (const auto& j : annotations) {
    Annotation ann;
    ann.id = RequireAs<AnnotationId>(j, "id", "annotation");
    const std::string where = "annotation " + std::to_string(ann.id);
    ann.image_id = RequireAs<ImageId>(j, "image_id", where);
    const int file_category = RequireAs<int>(j, "category_id", where);
    try {
      ann.bbox = BoxFromJson(Require(j, "bbox", where));
    } catch (const SchemaError& e) {
      throw SchemaError(where + ": " + e.what());
    }
    if (j.contains("provenance")) {
      ann.provenance = ParseProvenance(RequireAs<std::string>(j, "provenance", where));
    }
    if (j.contains("audit_state")) {
      ann.audit_state = ParseAuditState(RequireAs<std::string>(j, "audit_state", where));
    }
    ann.prompt_used = OptionalString(j, "prompt", where);

    auto mapped = category_map.find(file_category);
    if (mapped == category_map.end()) {
      offenders.push_back(where + ": unknown category_id " + std::to_string(file_category));
      continue;
    }
    if (!mapped->second) {
      if (options.drop_unlisted_categories) {
        dropped.insert(file_categories.at(file_category));
        continue;
      }
      offenders.push_back(where + ": category '" + file_categories.at(file_category) +
                          "' is not in the ID registry");
      continue;
    }
    ann.category_index = *mapped->second;

    if (!ann.bbox.valid()) {
      offenders.push_back(where + ": zero-area or non-finite box");
      continue;
    }
    if (const ImageRecord* img = manifest.find_image(ann.image_id)) {
      BBox clamped = ClampAndQuantize(ann.bbox, img->width, img->height);
      if (!clamped.valid()) {
        offenders.push_back(where + ": box does not overlap image " +
                            std::to_string(ann.image_id));
        continue;
      }
      ann.bbox = clamped;
    }
    manifest.annotations.push_back(std::move(ann));
  }

  if (doc.contains("meta")) {
    const json& meta = doc.at("meta");
    if (!meta.is_object()) throw SchemaError("meta must be an object");
    if (meta.contains("variant")) {
      auto name = RequireAs<std::string>(meta, "variant", "meta");
      auto v = ParseVariant(name);
      if (!v) throw SchemaError("meta: unknown variant '" + name + "'");
      manifest.meta.variant = *v;
    }
    if (meta.contains("seed")) manifest.meta.seed = RequireAs<std::uint64_t>(meta, "seed", "meta");
    if (meta.contains("tool_version")) {
      manifest.meta.tool_version = RequireAs<std::string>(meta, "tool_version", "meta");
    }
    for (auto it = meta.begin(); it != meta.end(); ++it) {
      if (std::find(std::begin(kReservedMeta), std::end(kReservedMeta), it.key()) ==
          std::end(kReservedMeta)) {
        manifest.meta.extra[it.key()] = it.value();
      }
    }
  }
  if (!dropped.empty()) {
    json names = json::array();
    if (manifest.meta.extra.contains("dropped_categories")) {
      for (const auto& n : manifest.meta.extra["dropped_categories"]) {
        dropped.insert(n.get<std::string>());
      }
    }
    for (const auto& n : dropped) names.push_back(n);
    manifest.meta.extra["dropped_categories"] = names;
  }

  if (!offenders.empty()) throw InvariantError(std::move(offenders));
  manifest.validate();
  return manifest;
}

DatasetManifest LoadManifest(const std::filesystem::path& path,
                             const LoadOptions& options) {
  DatasetManifest manifest = ManifestFromJson(ReadJsonFile(path), options);
  manifest.base_dir = path.has_parent_path() ? path.parent_path()
                                             : std::filesystem::path(".");
  return manifest;
}

json AnnotationToJson(const Annotation& ann) {
  json j = {{"id", ann.id},
            {"image_id", ann.image_id},
            {"bbox", BoxToJson(Quantized(ann.bbox))},
            {"category_id", ann.category_index},
            {"provenance", ToString(ann.provenance)},
            {"audit_state", ToString(ann.audit_state)}};
  if (ann.prompt_used) j["prompt"] = *ann.prompt_used;
  return j;
}

json ManifestToJson(const DatasetManifest& manifest) {
  json doc = json::object();
  json images = json::array();
  for (const auto& img : manifest.images) {
    json j = {{"id", img.id},
              {"width", img.width},
              {"height", img.height},
              {"file_name", img.file_path}};
    if (img.road_mask_path) j["road_mask"] = *img.road_mask_path;
    if (img.original_file_path) j["original_file_name"] = *img.original_file_path;
    images.push_back(std::move(j));
  }
  json annotations = json::array();
  for (const auto& ann : manifest.annotations) annotations.push_back(AnnotationToJson(ann));
  json categories = json::array();
  for (int i = 1; i <= manifest.registry.total(); ++i) {
    categories.push_back({{"id", i}, {"name", manifest.registry.name(i)}});
  }
  json meta = manifest.meta.extra.is_object() ? manifest.meta.extra : json::object();
  meta["variant"] = ToString(manifest.meta.variant);
  meta["seed"] = manifest.meta.seed;
  meta["tool_version"] = manifest.meta.tool_version;

  doc["images"] = std::move(images);
  doc["annotations"] = std::move(annotations);
  doc["categories"] = std::move(categories);
  doc["meta"] = std::move(meta);
  return doc;
}

std::string SerializeManifest(const DatasetManifest& manifest) {
  manifest.validate();
  return StableDump(ManifestToJson(manifest));
}

void SaveManifest(const DatasetManifest& manifest,
                  const std::filesystem::path& path) {
  WriteTextFile(path, SerializeManifest(manifest));
}

}  // namespace synoe
