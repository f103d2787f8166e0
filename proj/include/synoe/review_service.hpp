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

// Human triage of annotations the audit flagged as ambiguous.
//
// Decisions go to an append-only newline-delimited JSON journal; the journal
// line is the commit point. The reviewed manifest is always the audited base
// manifest with the last decision per annotation applied, so replaying the
// journal over the base reproduces any export exactly.

#ifndef SYNOE_REVIEW_SERVICE_HPP_
#define SYNOE_REVIEW_SERVICE_HPP_

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "synoe/augmentor.hpp"
#include "synoe/core_model.hpp"

namespace synoe {

class UnknownAnnotation : public Error {
  using Error::Error;
};
class InvalidClass : public Error {
  using Error::Error;
};
/// The annotation exists but was never flagged for review.
class NotReviewable : public Error {
  using Error::Error;
};

enum class Verdict { kAcceptOod, kReassignId, kDiscard };
std::string_view ToString(Verdict v);
std::optional<Verdict> ParseVerdict(std::string_view s);

struct ReviewDecision {
  AnnotationId annotation_id = 0;
  Verdict verdict = Verdict::kAcceptOod;
  /// Target ID class for kReassignId.
  std::optional<std::string> id_class;
  std::string reviewer;
  std::string timestamp;  // ISO-8601 UTC

  nlohmann::json ToJson() const;
  static ReviewDecision FromJson(const nlohmann::json& j);
  friend bool operator==(const ReviewDecision&, const ReviewDecision&) = default;
};

/// Result of applying `d` to the annotation as it was before any review.
/// Throws InvalidClass when a reassignment names no ID class.
Annotation ApplyDecision(const Annotation& base, const ReviewDecision& d,
                         const CategoryRegistry& registry);

/// Pure replay: base manifest plus the last decision per annotation.
DatasetManifest ReplayJournal(const DatasetManifest& base,
                              const std::vector<ReviewDecision>& journal);

/// Reads a journal; a torn final line (no trailing newline) is skipped.
std::vector<ReviewDecision> ReadJournal(const std::filesystem::path& path);

struct FlaggedItem {
  Annotation annotation;
  std::string original_image_path;
  std::string edited_image_path;
  std::string prompt;
  std::optional<EvidenceEntry> evidence;
  std::optional<std::string> original_label;

  nlohmann::json ToJson() const;
};

struct FlaggedPage {
  std::vector<FlaggedItem> items;
  int page = 0;  // zero-based
  int size = 0;
  int total = 0;

  nlohmann::json ToJson() const;
};

std::string CurrentTimestamp();

class ReviewStore {
 public:
  /// Opens (creating if needed) `journal_path` and replays it over `audited`.
  ReviewStore(DatasetManifest audited, EvidenceStore evidence,
              std::filesystem::path journal_path);

  /// audit_state=ambiguous annotations of the current state, ordered by id.
  FlaggedPage list_flagged(int page, int size) const;
  /// Any annotation that was flagged in the base manifest, reviewed or not.
  FlaggedItem item(AnnotationId id) const;
  /// Validates, appends to the journal, then applies. Returns the annotation
  /// as it now stands. Empty timestamps are filled with the current time.
  Annotation submit(ReviewDecision d);
  std::vector<ReviewDecision> history() const;
  DatasetManifest exported() const;
  /// Writes exported() to `path`.
  void export_to(const std::filesystem::path& path) const;

  const DatasetManifest& base() const { return base_; }

 private:
  const Annotation& base_annotation(AnnotationId id) const;
  FlaggedItem make_item(const Annotation& current) const;

  DatasetManifest base_;
  DatasetManifest current_;
  EvidenceStore evidence_;
  std::map<AnnotationId, std::size_t> index_;
  std::vector<ReviewDecision> journal_;
  std::filesystem::path journal_path_;
  std::ofstream journal_out_;
  mutable std::shared_mutex mutex_;
};

/// HTTP JSON API over a ReviewStore:
///   GET  /review/flagged?page=&size=
///   GET  /review/item/{id}            item JSON with image URLs
///   GET  /review/item/{id}/original   PNG bytes
///   GET  /review/item/{id}/edited     PNG bytes
///   POST /review/decision             ReviewDecision JSON
///   POST /review/export               {"path": optional}; returns manifest
class ReviewServer {
 public:
  explicit ReviewServer(ReviewStore& store);
  ~ReviewServer();

  /// Serves on a background thread; port 0 picks a free port. Returns it.
  int Start(const std::string& host = "127.0.0.1", int port = 0);
  void Listen(const std::string& host, int port);
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace synoe

#endif  // SYNOE_REVIEW_SERVICE_HPP_
