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

#include <thread>

#include <httplib.h>

#include "synoe/image.hpp"
#include "synoe/manifest_io.hpp"
#include "synoe/review_service.hpp"

namespace synoe {

namespace {

using nlohmann::json;

void Reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

template <typename Handler>
void Guarded(httplib::Response& res, Handler&& handler) {
  try {
    handler();
  } catch (const UnknownAnnotation& e) {
    Reply(res, 404, {{"error", e.what()}});
  } catch (const InvalidClass& e) {
    Reply(res, 422, {{"error", e.what()}});
  } catch (const NotReviewable& e) {
    Reply(res, 409, {{"error", e.what()}});
  } catch (const SchemaError& e) {
    Reply(res, 400, {{"error", e.what()}});
  } catch (const json::exception& e) {
    Reply(res, 400, {{"error", e.what()}});
  } catch (const std::invalid_argument& e) {
    Reply(res, 400, {{"error", e.what()}});
  } catch (const std::exception& e) {
    Reply(res, 500, {{"error", e.what()}});
  }
}

int IntParam(const httplib::Request& req, const char* key, int fallback) {
  if (!req.has_param(key)) return fallback;
  try {
    return std::stoi(req.get_param_value(key));
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("query parameter '") + key + "' must be an integer");
  }
}

}  // namespace

struct ReviewServer::Impl {
  ReviewStore& store;
  httplib::Server server;
  std::thread thread;

  explicit Impl(ReviewStore& s) : store(s) {}

  void Route() {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.Options(R"(/review/.*)",
                   [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Get("/review/flagged", [this](const httplib::Request& req, httplib::Response& res) {
      Guarded(res, [&] {
        Reply(res, 200, store.list_flagged(IntParam(req, "page", 0), IntParam(req, "size", 20)).ToJson());
      });
    });
    server.Get(R"(/review/item/(-?\d+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 Guarded(res, [&] {
                   const AnnotationId id = std::stoll(req.matches[1]);
                   json j = store.item(id).ToJson();
                   const std::string base = "/review/item/" + std::to_string(id);
                   j["images"] = {{"original", base + "/original"}, {"edited", base + "/edited"}};
                   Reply(res, 200, j);
                 });
               });
    server.Get(R"(/review/item/(-?\d+)/(original|edited))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 Guarded(res, [&] {
                   const FlaggedItem item = store.item(std::stoll(req.matches[1]));
                   const std::string& path = req.matches[2] == "original"
                                                 ? item.original_image_path
                                                 : item.edited_image_path;
                   const Bytes bytes = ReadFileBytes(path);
                   res.set_content(std::string(bytes.begin(), bytes.end()), "image/png");
                 });
               });
    server.Post("/review/decision", [this](const httplib::Request& req, httplib::Response& res) {
      Guarded(res, [&] {
        const Annotation updated = store.submit(ReviewDecision::FromJson(json::parse(req.body)));
        Reply(res, 200, {{"annotation", AnnotationToJson(updated)}});
      });
    });
    server.Post("/review/export", [this](const httplib::Request& req, httplib::Response& res) {
      Guarded(res, [&] {
        const json body = req.body.empty() ? json::object() : json::parse(req.body);
        if (body.contains("path")) store.export_to(body.at("path").get<std::string>());
        Reply(res, 200, ManifestToJson(store.exported()));
      });
    });
  }
};

ReviewServer::ReviewServer(ReviewStore& store) : impl_(std::make_unique<Impl>(store)) {
  impl_->Route();
}

ReviewServer::~ReviewServer() { Stop(); }

int ReviewServer::Start(const std::string& host, int port) {
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

void ReviewServer::Listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw IoError("cannot listen on " + host + ":" + std::to_string(port));
  }
}

void ReviewServer::Stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace synoe
