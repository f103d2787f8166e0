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

#ifndef SYNOE_PROMPT_CATALOG_HPP_
#define SYNOE_PROMPT_CATALOG_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "synoe/core_model.hpp"
#include "synoe/rng.hpp"

namespace synoe {

class EmptyCatalog : public Error {
  using Error::Error;
};

/// Unusual-object categories used as inpainting prompts.
class PromptCatalog {
 public:
  /// Entries are trimmed and deduplicated case-insensitively (first spelling
  /// wins). Entries equal to an ID class of `registry` are dropped with a
  /// warning. Throws EmptyCatalog if the base list ends up empty.
  PromptCatalog(std::vector<std::string> base_list,
                std::vector<std::string> extended_list = {},
                bool use_extended = false,
                const CategoryRegistry* registry = nullptr);

  /// The street-scene list shipped in data/prompts/base.txt (compiled in).
  static const std::vector<std::string>& BuiltinBaseList();
  /// LostAndFound classes shipped in data/prompts/lostandfound_ext.txt.
  static const std::vector<std::string>& BuiltinExtendedList();
  static PromptCatalog Builtin(bool use_extended = false,
                               const CategoryRegistry* registry = nullptr);

  /// One prompt per line; blank lines and '#' comments ignored.
  static std::vector<std::string> ReadList(const std::filesystem::path& path);

  const std::vector<std::string>& base_list() const { return base_; }
  const std::vector<std::string>& extended_list() const { return extended_; }
  bool uses_extended() const { return use_extended_; }
  PromptCatalog WithExtended(bool use_extended) const;

  /// The sampling support: base, plus extended entries when enabled.
  std::vector<std::string> support() const;
  /// Uniform draw over support().
  std::string Sample(Rng& rng) const;

 private:
  std::vector<std::string> base_;
  std::vector<std::string> extended_;
  bool use_extended_ = false;
};

}  // namespace synoe

#endif  // SYNOE_PROMPT_CATALOG_HPP_
