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

// Clients for the two model services the pipeline depends on:
//
//   * an inpainter that regenerates a square crop conditioned on a prompt,
//   * an open-vocabulary detector that returns scored boxes for the phrases
//     of a prompt ("penguin . car").
//
// Both speak JSON over HTTP (docs/service_protocol.md). Deterministic mocks
// implement the same interfaces so the whole pipeline runs offline.

#ifndef SYNOE_SVC_CLIENTS_HPP_
#define SYNOE_SVC_CLIENTS_HPP_

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "synoe/core_model.hpp"
#include "synoe/image.hpp"

namespace synoe {

/// Endpoint unreachable or connection dropped; retried with backoff.
class TransportError : public Error {
  using Error::Error;
};
/// The service answered with an error; never retried.
class ServiceError : public Error {
 public:
  ServiceError(std::string request_id, const std::string& message)
      : Error("service error [" + request_id + "]: " + message),
        request_id_(std::move(request_id)) {}
  const std::string& request_id() const { return request_id_; }

 private:
  std::string request_id_;
};
class DimensionMismatch : public Error {
  using Error::Error;
};

inline constexpr double kDefaultBoxThreshold = 0.35;
inline constexpr double kDefaultTextThreshold = 0.25;

struct InpaintRequest {
  std::string request_id;
  Bytes image_crop;  // PNG
  std::string prompt;
  int crop_side = 0;
  /// Crop-local region to regenerate; the whole crop center when unset.
  std::optional<BBox> mask_box;
};

struct DetectRequest {
  std::string request_id;
  Bytes image_crop;  // PNG
  std::string prompt;
  double box_threshold = kDefaultBoxThreshold;
  double text_threshold = kDefaultTextThreshold;
};

struct DetectionRecord {
  BBox bbox;  // crop-local
  std::string label;
  double score = 0.0;

  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

nlohmann::json ToJson(const DetectionRecord& r);
DetectionRecord DetectionFromJson(const nlohmann::json& j);

class Inpainter {
 public:
  virtual ~Inpainter() = default;
  /// Returns a PNG with the same dimensions as the request crop.
  virtual Bytes Inpaint(const InpaintRequest& request) = 0;
};

class Detector {
 public:
  virtual ~Detector() = default;
  /// Records sorted by descending score, each at or above the box threshold.
  virtual std::vector<DetectionRecord> Detect(const DetectRequest& request) = 0;
};

/// Drops records below the box threshold or whose label is not a phrase (or
/// sub-phrase) of the prompt, then stable-sorts by descending score.
std::vector<DetectionRecord> FinalizeDetections(std::vector<DetectionRecord> records,
                                                const DetectRequest& request);

// --- HTTP clients -------------------------------------------------------------

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{200};
  double multiplier = 2.0;
  std::chrono::milliseconds timeout{60000};
};

class HttpInpainter : public Inpainter {
 public:
  HttpInpainter(std::string base_url, RetryPolicy retry = {}, int max_in_flight = 4);
  ~HttpInpainter() override;
  Bytes Inpaint(const InpaintRequest& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class HttpDetector : public Detector {
 public:
  HttpDetector(std::string base_url, RetryPolicy retry = {}, int max_in_flight = 4);
  ~HttpDetector() override;
  std::vector<DetectionRecord> Detect(const DetectRequest& request) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

nlohmann::json InpaintRequestToJson(const InpaintRequest& r);
InpaintRequest InpaintRequestFromJson(const nlohmann::json& j);
nlohmann::json DetectRequestToJson(const DetectRequest& r);
DetectRequest DetectRequestFromJson(const nlohmann::json& j);

// --- deterministic mocks ------------------------------------------------------

/// Fill color the mocks associate with a label (case-insensitive). Never a
/// neutral gray, so it cannot collide with gray backgrounds.
Rgb LabelColor(std::string_view label);

struct MockInpaintOptions {
  /// Fraction of requests returned unchanged (the ID object "survives").
  double keep_rate = 0.0;
  /// Fraction of requests whose region is blanked to neutral gray.
  double erase_rate = 0.0;
};

/// Stamps a rectangle filled with LabelColor(prompt) over the mask box (or
/// the center half of the crop). The outcome is a pure function of
/// (crop bytes, prompt, mask box, seed).
class MockInpainter : public Inpainter {
 public:
  explicit MockInpainter(std::uint64_t seed = 0, MockInpaintOptions options = {})
      : seed_(seed), options_(options) {}
  Bytes Inpaint(const InpaintRequest& request) override;

 private:
  std::uint64_t seed_;
  MockInpaintOptions options_;
};

/// Finds pixels painted with LabelColor(phrase) for each prompt phrase and
/// reports their bounding box; score grows with how solid the fill is.
class ColorDetector : public Detector {
 public:
  std::vector<DetectionRecord> Detect(const DetectRequest& request) override;
};

/// Plays back scripted responses keyed by (request id, prompt). Unscripted
/// requests go to `fallback` when set, else return no detections.
class ScriptedDetector : public Detector {
 public:
  explicit ScriptedDetector(std::shared_ptr<Detector> fallback = nullptr)
      : fallback_(std::move(fallback)) {}

  void Script(std::string request_id, std::string prompt,
              std::vector<DetectionRecord> records);
  /// Fixture file: [{"request_id", "prompt", "detections": [...]}, ...].
  /// A "*" request id matches any request with that prompt.
  static ScriptedDetector FromJson(const nlohmann::json& fixture,
                                   std::shared_ptr<Detector> fallback = nullptr);

  std::vector<DetectionRecord> Detect(const DetectRequest& request) override;

 private:
  std::map<std::pair<std::string, std::string>, std::vector<DetectionRecord>> script_;
  std::shared_ptr<Detector> fallback_;
};

// --- mock service host ----------------------------------------------------------

/// Serves POST /v1/inpaint and POST /v1/detect from in-process backends.
class ServiceHost {
 public:
  ServiceHost(std::shared_ptr<Inpainter> inpainter, std::shared_ptr<Detector> detector);
  ~ServiceHost();

  /// Binds and serves on a background thread; port 0 picks a free port.
  /// Returns the bound port.
  int Start(const std::string& host = "127.0.0.1", int port = 0);
  /// Blocks serving on the calling thread.
  void Listen(const std::string& host, int port);
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace synoe

#endif  // SYNOE_SVC_CLIENTS_HPP_
