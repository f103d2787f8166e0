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

#include "synoe/review_service.hpp"

#include <chrono>
#include <ctime>
#include <mutex>
#include <unordered_map>

#include "synoe/manifest_io.hpp"
#include "synoe/text.hpp"

namespace synoe {

namespace {

using nlohmann::json;

bool Reviewable(const Annotation& a) {
  return a.audit_state == AuditState::kAmbiguous || a.audit_state == AuditState::kHumanResolved;
}

}  // namespace

std::string_view ToString(Verdict v) {
  switch (v) {
    case Verdict::kAcceptOod: return "accept_ood";
    case Verdict::kReassignId: return "reassign_id";
    case Verdict::kDiscard: return "discard";
  }
  return "accept_ood";
}

std::optional<Verdict> ParseVerdict(std::string_view s) {
  for (auto v : {Verdict::kAcceptOod, Verdict::kReassignId, Verdict::kDiscard}) {
    if (ToString(v) == s) return v;
  }
  return std::nullopt;
}

json ReviewDecision::ToJson() const {
  json j = {{"annotation_id", annotation_id},
            {"verdict", ToString(verdict)},
            {"reviewer", reviewer},
            {"timestamp", timestamp}};
  if (id_class) j["class"] = *id_class;
  return j;
}

ReviewDecision ReviewDecision::FromJson(const json& j) {
  ReviewDecision d;
  try {
    d.annotation_id = j.at("annotation_id").get<AnnotationId>();
    const auto verdict = ParseVerdict(j.at("verdict").get<std::string>());
    if (!verdict) throw SchemaError("decision: unknown verdict " + j.at("verdict").dump());
    d.verdict = *verdict;
    if (j.contains("class") && !j.at("class").is_null()) d.id_class = j.at("class").get<std::string>();
    d.reviewer = j.value("reviewer", std::string());
    d.timestamp = j.value("timestamp", std::string());
  } catch (const json::exception& e) {
    throw SchemaError(std::string("decision: ") + e.what());
  }
  return d;
}

Annotation ApplyDecision(const Annotation& base, const ReviewDecision& d,
                         const CategoryRegistry& registry) {
  Annotation out = base;
  out.audit_state = AuditState::kHumanResolved;
  switch (d.verdict) {
    case Verdict::kAcceptOod:
      out.category_index = registry.ood_index();
      out.provenance = Provenance::kInpaintedOod;
      break;
    case Verdict::kReassignId: {
      const auto index = d.id_class ? registry.id_index_of(Trim(*d.id_class)) : std::nullopt;
      if (!index) {
        throw InvalidClass("'" + d.id_class.value_or("") + "' is not an ID class");
      }
      out.category_index = *index;
      out.provenance = Provenance::kInpaintedIdRetained;
      break;
    }
    case Verdict::kDiscard:
      out.provenance = Provenance::kRemoved;
      break;
  }
  return out;
}

DatasetManifest ReplayJournal(const DatasetManifest& base,
                              const std::vector<ReviewDecision>& journal) {
  std::unordered_map<AnnotationId, const ReviewDecision*> last;
  for (const auto& d : journal) last[d.annotation_id] = &d;
  DatasetManifest out = base;
  for (Annotation& a : out.annotations) {
    auto it = last.find(a.id);
    if (it != last.end()) a = ApplyDecision(a, *it->second, base.registry);
  }
  return out;
}

std::vector<ReviewDecision> ReadJournal(const std::filesystem::path& path) {
  std::vector<ReviewDecision> out;
  std::ifstream in(path, std::ios::binary);
  if (!in) return out;
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    const std::size_t end = text.find('\n', pos);
    ++line_no;
    if (end == std::string::npos) {
      LogEvent("warning", "journal_torn_tail", {{"path", path.string()}, {"line", line_no}});
      break;
    }
    const std::string line = Trim(std::string_view(text).substr(pos, end - pos));
    pos = end + 1;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": malformed journal line");
    }
    out.push_back(ReviewDecision::FromJson(j));
  }
  return out;
}

std::string CurrentTimestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json FlaggedItem::ToJson() const {
  json j = {{"annotation", AnnotationToJson(annotation)},
            {"original_image", original_image_path},
            {"edited_image", edited_image_path},
            {"prompt", prompt}};
  j["original_label"] = original_label ? json(*original_label) : json(nullptr);
  if (evidence) {
    json dets = json::array();
    for (const auto& d : evidence->detections) dets.push_back(synoe::ToJson(d));
    j["evidence"] = {{"scenario", synoe::ToString(evidence->scenario)},
                     {"request_id", evidence->request_id},
                     {"crop", BoxToJson(evidence->crop)},
                     {"detections", std::move(dets)}};
  } else {
    j["evidence"] = nullptr;
  }
  return j;
}

json FlaggedPage::ToJson() const {
  json items_json = json::array();
  for (const auto& i : items) items_json.push_back(i.ToJson());
  return {{"items", std::move(items_json)}, {"page", page}, {"size", size}, {"total", total}};
}

// --- store ------------------------------------------------------------------------

ReviewStore::ReviewStore(DatasetManifest audited, EvidenceStore evidence,
                         std::filesystem::path journal_path)
    : base_(std::move(audited)),
      evidence_(std::move(evidence)),
      journal_path_(std::move(journal_path)) {
  for (std::size_t i = 0; i < base_.annotations.size(); ++i) index_[base_.annotations[i].id] = i;
  journal_ = ReadJournal(journal_path_);
  for (const auto& d : journal_) {
    const Annotation& a = base_annotation(d.annotation_id);
    if (!Reviewable(a)) {
      throw NotReviewable("journal decision for annotation " + std::to_string(d.annotation_id) +
                          " which was not flagged");
    }
  }
  current_ = ReplayJournal(base_, journal_);
  if (!journal_path_.parent_path().empty()) {
    std::filesystem::create_directories(journal_path_.parent_path());
  }
  // Truncate a torn tail so the next append starts on a fresh line.
  {
    std::string clean;
    for (const auto& d : journal_) clean += d.ToJson().dump() + "\n";
    std::ofstream rewrite(journal_path_, std::ios::binary | std::ios::trunc);
    rewrite << clean;
    if (!rewrite) throw IoError("cannot write journal " + journal_path_.string());
  }
  journal_out_.open(journal_path_, std::ios::binary | std::ios::app);
  if (!journal_out_) throw IoError("cannot open journal " + journal_path_.string());
}

const Annotation& ReviewStore::base_annotation(AnnotationId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw UnknownAnnotation("no annotation with id " + std::to_string(id));
  return base_.annotations[it->second];
}

FlaggedItem ReviewStore::make_item(const Annotation& current) const {
  FlaggedItem item;
  item.annotation = current;
  item.prompt = current.prompt_used.value_or("");
  if (const ImageRecord* img = current_.find_image(current.image_id)) {
    item.edited_image_path = current_.resolve(img->file_path).string();
    item.original_image_path =
        current_.resolve(img->original_file_path.value_or(img->file_path)).string();
  }
  auto it = evidence_.find(current.id);
  if (it != evidence_.end()) {
    item.evidence = it->second;
    item.original_label = it->second.original_label;
  }
  return item;
}

FlaggedPage ReviewStore::list_flagged(int page, int size) const {
  if (page < 0 || size < 1) throw std::invalid_argument("page must be >= 0 and size >= 1");
  std::shared_lock lock(mutex_);
  std::vector<const Annotation*> flagged;
  for (const auto& a : current_.annotations) {
    if (a.audit_state == AuditState::kAmbiguous) flagged.push_back(&a);
  }
  std::sort(flagged.begin(), flagged.end(),
            [](const Annotation* x, const Annotation* y) { return x->id < y->id; });
  FlaggedPage out;
  out.page = page;
  out.size = size;
  out.total = static_cast<int>(flagged.size());
  const std::size_t begin = static_cast<std::size_t>(page) * size;
  for (std::size_t i = begin; i < flagged.size() && i < begin + size; ++i) {
    out.items.push_back(make_item(*flagged[i]));
  }
  return out;
}

FlaggedItem ReviewStore::item(AnnotationId id) const {
  std::shared_lock lock(mutex_);
  const Annotation& base = base_annotation(id);
  if (!Reviewable(base)) {
    throw NotReviewable("annotation " + std::to_string(id) + " was not flagged for review");
  }
  return make_item(current_.annotations[index_.at(id)]);
}

Annotation ReviewStore::submit(ReviewDecision d) {
  std::unique_lock lock(mutex_);
  const Annotation& base = base_annotation(d.annotation_id);
  if (!Reviewable(base)) {
    throw NotReviewable("annotation " + std::to_string(d.annotation_id) +
                        " was not flagged for review");
  }
  const Annotation updated = ApplyDecision(base, d, base_.registry);
  if (d.timestamp.empty()) d.timestamp = CurrentTimestamp();

  journal_out_ << d.ToJson().dump() << '\n';
  journal_out_.flush();
  if (!journal_out_) throw IoError("journal append failed: " + journal_path_.string());

  journal_.push_back(d);
  current_.annotations[index_.at(d.annotation_id)] = updated;
  LogEvent("info", "review_decision",
           {{"annotation_id", d.annotation_id}, {"verdict", ToString(d.verdict)}});
  return updated;
}

std::vector<ReviewDecision> ReviewStore::history() const {
  std::shared_lock lock(mutex_);
  return journal_;
}

DatasetManifest ReviewStore::exported() const {
  std::shared_lock lock(mutex_);
  return current_;
}

void ReviewStore::export_to(const std::filesystem::path& path) const {
  SaveManifest(exported(), path);
}

}  // namespace synoe
