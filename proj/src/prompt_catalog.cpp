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

#include "synoe/prompt_catalog.hpp"

#include <fstream>
#include <set>

#include "synoe/text.hpp"

namespace synoe {

namespace {

// Verbatim, duplicates included; deduplicated on construction.
const std::vector<std::string> kBaseList = {
    "robot", "helicopter", "monster", "skateboard",
    "dog", "cat", "monkey", "horse", "elephant", "lion",
    "tiger", "bear", "deer", "rabbit", "squirrel", "wolf",
    "fox", "sheep", "goat", "chicken", "crocodile", "alligator", "hamster", "gerbil", "mouse",
    "rat", "guinea pig", "ferret", "rabbit", "cavy", "tapir",
    "hedgehog", "kangaroo", "koala", "panda", "zebra",
    "giraffe", "hippopotamus", "rhinoceros", "sloth", "antelope", "bison", "buffalo", "ostrich",
    "emu", "penguin", "seal", "walrus", "manatee", "platypus", "okapi", "armadillo", "badger",
    "mole", "opossum", "raccoon", "porcupine", "weasel", "lemur", "gorilla", "chimpanzee",
    "orangutan", "tamarin", "sloth bear", "sea lion", "tortoise", "flamingo", "robot",
    "helicopter", "monster", "skateboard", "Sofa", "Coffee table", "Bookshelf", "Lamps",
    "Cutting board", "Pots pans", "Dishes", "Glasses",
    "Desk", "Chair", "Printer",
    "Vacuum cleaner", "Fan", "Clock", "Shoes"};

const std::vector<std::string> kExtendedList = {
    "cardboard", "crate small", "crate", "pylon large", "pylon small",
    "pylon", "tire", "bloated plastic bag", "styrofoam"};

std::vector<std::string> Dedup(const std::vector<std::string>& items,
                               std::set<std::string>& seen,
                               const CategoryRegistry* registry) {
  std::vector<std::string> out;
  for (const auto& raw : items) {
    std::string entry = Trim(raw);
    if (entry.empty()) continue;
    if (registry && registry->id_index_of(entry)) {
      LogEvent("warning", "prompt_collides_with_id_class", {{"prompt", entry}});
      continue;
    }
    if (seen.insert(ToLower(entry)).second) out.push_back(std::move(entry));
  }
  return out;
}

}  // namespace

PromptCatalog::PromptCatalog(std::vector<std::string> base_list,
                             std::vector<std::string> extended_list, bool use_extended,
                             const CategoryRegistry* registry)
    : use_extended_(use_extended) {
  std::set<std::string> seen;
  base_ = Dedup(base_list, seen, registry);
  extended_ = Dedup(extended_list, seen, registry);
  if (base_.empty()) throw EmptyCatalog("prompt catalog has no usable base entries");
}

const std::vector<std::string>& PromptCatalog::BuiltinBaseList() { return kBaseList; }
const std::vector<std::string>& PromptCatalog::BuiltinExtendedList() { return kExtendedList; }

PromptCatalog PromptCatalog::Builtin(bool use_extended, const CategoryRegistry* registry) {
  return PromptCatalog(kBaseList, kExtendedList, use_extended, registry);
}

std::vector<std::string> PromptCatalog::ReadList(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open prompt list " + path.string());
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    std::string entry = Trim(line);
    if (entry.empty() || entry.front() == '#') continue;
    out.push_back(std::move(entry));
  }
  return out;
}

PromptCatalog PromptCatalog::WithExtended(bool use_extended) const {
  PromptCatalog copy = *this;
  copy.use_extended_ = use_extended;
  return copy;
}

std::vector<std::string> PromptCatalog::support() const {
  std::vector<std::string> out = base_;
  if (use_extended_) out.insert(out.end(), extended_.begin(), extended_.end());
  return out;
}

std::string PromptCatalog::Sample(Rng& rng) const {
  const std::size_t n = base_.size() + (use_extended_ ? extended_.size() : 0);
  if (n == 0) throw EmptyCatalog("prompt catalog is empty");
  const std::size_t i = static_cast<std::size_t>(rng.uniform_index(n));
  return i < base_.size() ? base_[i] : extended_[i - base_.size()];
}

}  // namespace synoe
