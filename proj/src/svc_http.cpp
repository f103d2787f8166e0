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

#include <httplib.h>

#include <cmath>
#include <semaphore>
#include <thread>

#include "synoe/manifest_io.hpp"
#include "synoe/svc_clients.hpp"
#include "synoe/text.hpp"

namespace synoe {

namespace {

using nlohmann::json;

constexpr std::ptrdiff_t kMaxInFlightCap = 1024;

template <typename T>
T Field(const json& j, const char* key) {
  if (!j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError(std::string("field '") + key + "' has the wrong type");
  }
}

// Shared transport: bounded in-flight requests plus retry on transport
// failures only.
class JsonPoster {
 public:
  JsonPoster(std::string base_url, RetryPolicy retry, int max_in_flight)
      : base_url_(std::move(base_url)),
        retry_(retry),
        slots_(std::clamp<std::ptrdiff_t>(max_in_flight, 1, kMaxInFlightCap)) {}

  json Post(const std::string& path, const json& body, const std::string& request_id) {
    slots_.acquire();
    struct Release {
      std::counting_semaphore<kMaxInFlightCap>& s;
      ~Release() { s.release(); }
    } release{slots_};

    const std::string payload = body.dump();
    auto backoff = retry_.initial_backoff;
    for (int attempt = 0;; ++attempt) {
      httplib::Client client(base_url_);
      const auto secs = std::chrono::duration_cast<std::chrono::seconds>(retry_.timeout);
      client.set_connection_timeout(std::max<time_t>(1, secs.count()), 0);
      client.set_read_timeout(std::max<time_t>(1, secs.count()), 0);
      httplib::Result res = client.is_valid() ? client.Post(path, payload, "application/json")
                                              : httplib::Result{};
      if (!res) {
        if (attempt >= retry_.max_retries) {
          throw TransportError("POST " + base_url_ + path + " [" + request_id + "] failed after " +
                               std::to_string(retry_.max_retries) +
                               " retries: " + httplib::to_string(res.error()));
        }
        std::this_thread::sleep_for(backoff);
        backoff = std::chrono::milliseconds(
            static_cast<long long>(std::llround(backoff.count() * retry_.multiplier)));
        continue;
      }
      if (res->status != 200) {
        std::string message = "HTTP " + std::to_string(res->status);
        try {
          message += ": " + json::parse(res->body).value("error", res->body);
        } catch (const json::exception&) {
          message += ": " + res->body;
        }
        throw ServiceError(request_id, message);
      }
      try {
        return json::parse(res->body);
      } catch (const json::parse_error&) {
        throw ServiceError(request_id, "malformed JSON response");
      }
    }
  }

 private:
  std::string base_url_;
  RetryPolicy retry_;
  std::counting_semaphore<kMaxInFlightCap> slots_;
};

void ReplyError(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", message}}.dump(), "application/json");
}

template <typename Handler>
void Guarded(httplib::Response& res, Handler&& handler) {
  try {
    handler();
  } catch (const ServiceError& e) {
    ReplyError(res, 422, e.what());
  } catch (const SchemaError& e) {
    ReplyError(res, 400, e.what());
  } catch (const ParseError& e) {
    ReplyError(res, 400, e.what());
  } catch (const json::exception& e) {
    ReplyError(res, 400, e.what());
  } catch (const std::exception& e) {
    ReplyError(res, 500, e.what());
  }
}

}  // namespace

json InpaintRequestToJson(const InpaintRequest& r) {
  json j = {{"request_id", r.request_id},
            {"image", Base64Encode(r.image_crop)},
            {"prompt", r.prompt},
            {"crop_side", r.crop_side}};
  if (r.mask_box) j["mask_box"] = BoxToJson(*r.mask_box);
  return j;
}

InpaintRequest InpaintRequestFromJson(const json& j) {
  InpaintRequest r;
  r.request_id = j.value("request_id", std::string());
  r.image_crop = Base64Decode(Field<std::string>(j, "image"));
  r.prompt = Field<std::string>(j, "prompt");
  r.crop_side = Field<int>(j, "crop_side");
  if (j.contains("mask_box") && !j.at("mask_box").is_null()) {
    r.mask_box = BoxFromJson(j.at("mask_box"));
  }
  return r;
}

json DetectRequestToJson(const DetectRequest& r) {
  return {{"request_id", r.request_id},
          {"image", Base64Encode(r.image_crop)},
          {"prompt", r.prompt},
          {"box_threshold", r.box_threshold},
          {"text_threshold", r.text_threshold}};
}

DetectRequest DetectRequestFromJson(const json& j) {
  DetectRequest r;
  r.request_id = j.value("request_id", std::string());
  r.image_crop = Base64Decode(Field<std::string>(j, "image"));
  r.prompt = Field<std::string>(j, "prompt");
  r.box_threshold = j.value("box_threshold", kDefaultBoxThreshold);
  r.text_threshold = j.value("text_threshold", kDefaultTextThreshold);
  if (r.box_threshold < 0.0 || r.box_threshold > 1.0 || r.text_threshold < 0.0 ||
      r.text_threshold > 1.0) {
    throw SchemaError("thresholds must lie in [0, 1]");
  }
  return r;
}

// --- HttpInpainter ----------------------------------------------------------------

struct HttpInpainter::Impl {
  Impl(std::string base_url, RetryPolicy retry, int max_in_flight)
      : poster(std::move(base_url), retry, max_in_flight) {}
  JsonPoster poster;
};

HttpInpainter::HttpInpainter(std::string base_url, RetryPolicy retry, int max_in_flight)
    : impl_(std::make_unique<Impl>(std::move(base_url), retry, max_in_flight)) {}

HttpInpainter::~HttpInpainter() = default;

Bytes HttpInpainter::Inpaint(const InpaintRequest& request) {
  const Image input = DecodePng(request.image_crop);
  const json reply = impl_->poster.Post("/v1/inpaint", InpaintRequestToJson(request),
                                        request.request_id);
  Bytes png;
  Image output;
  try {
    png = Base64Decode(Field<std::string>(reply, "image"));
    output = DecodePng(png);
  } catch (const Error& e) {
    throw ServiceError(request.request_id, std::string("bad inpaint response: ") + e.what());
  }
  if (output.width != input.width || output.height != input.height) {
    throw DimensionMismatch("inpaint [" + request.request_id + "] returned " +
                            std::to_string(output.width) + "x" +
                            std::to_string(output.height) + " for a " +
                            std::to_string(input.width) + "x" +
                            std::to_string(input.height) + " crop");
  }
  return png;
}

// --- HttpDetector -----------------------------------------------------------------

struct HttpDetector::Impl {
  Impl(std::string base_url, RetryPolicy retry, int max_in_flight)
      : poster(std::move(base_url), retry, max_in_flight) {}
  JsonPoster poster;
};

HttpDetector::HttpDetector(std::string base_url, RetryPolicy retry, int max_in_flight)
    : impl_(std::make_unique<Impl>(std::move(base_url), retry, max_in_flight)) {}

HttpDetector::~HttpDetector() = default;

std::vector<DetectionRecord> HttpDetector::Detect(const DetectRequest& request) {
  const json reply = impl_->poster.Post("/v1/detect", DetectRequestToJson(request),
                                        request.request_id);
  std::vector<DetectionRecord> records;
  try {
    for (const auto& d : reply.at("detections")) records.push_back(DetectionFromJson(d));
  } catch (const std::exception& e) {
    throw ServiceError(request.request_id, std::string("bad detect response: ") + e.what());
  }
  return FinalizeDetections(std::move(records), request);
}

// --- ServiceHost ------------------------------------------------------------------

struct ServiceHost::Impl {
  std::shared_ptr<Inpainter> inpainter;
  std::shared_ptr<Detector> detector;
  httplib::Server server;
  std::thread thread;

  void Route() {
    server.Post("/v1/inpaint", [this](const httplib::Request& req, httplib::Response& res) {
      Guarded(res, [&] {
        const InpaintRequest request = InpaintRequestFromJson(json::parse(req.body));
        const Bytes png = inpainter->Inpaint(request);
        res.set_content(
            json{{"request_id", request.request_id}, {"image", Base64Encode(png)}}.dump(),
            "application/json");
      });
    });
    server.Post("/v1/detect", [this](const httplib::Request& req, httplib::Response& res) {
      Guarded(res, [&] {
        const DetectRequest request = DetectRequestFromJson(json::parse(req.body));
        json detections = json::array();
        for (const auto& r : detector->Detect(request)) detections.push_back(ToJson(r));
        res.set_content(json{{"request_id", request.request_id},
                             {"detections", std::move(detections)}}
                            .dump(),
                        "application/json");
      });
    });
  }
};

ServiceHost::ServiceHost(std::shared_ptr<Inpainter> inpainter,
                         std::shared_ptr<Detector> detector)
    : impl_(std::make_unique<Impl>()) {
  impl_->inpainter = std::move(inpainter);
  impl_->detector = std::move(detector);
  impl_->Route();
}

ServiceHost::~ServiceHost() { Stop(); }

int ServiceHost::Start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void ServiceHost::Listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw IoError("cannot listen on " + host + ":" + std::to_string(port));
  }
}

void ServiceHost::Stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace synoe
