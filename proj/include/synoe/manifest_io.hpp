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

// Reading and writing dataset manifests. The on-disk format is documented in
// docs/manifest_schema.md; plain COCO detection files are accepted as input.

#ifndef SYNOE_MANIFEST_IO_HPP_
#define SYNOE_MANIFEST_IO_HPP_

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synoe/core_model.hpp"

namespace synoe {

struct LoadOptions {
  /// Restricts the ID label set. When unset the file's own categories are
  /// used, or the NuImages default when the file lists none.
  std::optional<std::vector<std::string>> id_classes;
  /// Annotations whose category is not in `id_classes` are dropped (and the
  /// dropped names recorded in meta.extra["dropped_categories"]) instead of
  /// failing the load.
  bool drop_unlisted_categories = true;
};

DatasetManifest LoadManifest(const std::filesystem::path& path,
                             const LoadOptions& options = {});
DatasetManifest ManifestFromJson(const nlohmann::json& doc,
                                 const LoadOptions& options = {});

/// Validates, then writes byte-stable JSON (sorted keys, 2-decimal boxes).
void SaveManifest(const DatasetManifest& manifest,
                  const std::filesystem::path& path);
std::string SerializeManifest(const DatasetManifest& manifest);
nlohmann::json ManifestToJson(const DatasetManifest& manifest);
nlohmann::json AnnotationToJson(const Annotation& annotation);

/// Pretty-prints `doc` with sorted keys. Arrays stored under a "bbox" key are
/// written with exactly two decimals; other numbers use the shortest
/// round-trip form. Output ends with a newline.
std::string StableDump(const nlohmann::json& doc);

nlohmann::json BoxToJson(const BBox& box);
BBox BoxFromJson(const nlohmann::json& j);

nlohmann::json ReadJsonFile(const std::filesystem::path& path);
void WriteTextFile(const std::filesystem::path& path, const std::string& text);

}  // namespace synoe

#endif  // SYNOE_MANIFEST_IO_HPP_
