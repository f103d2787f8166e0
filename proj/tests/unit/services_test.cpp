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

#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <thread>

#include "fixtures.hpp"
#include "synoe/prompt_catalog.hpp"
#include "synoe/svc_clients.hpp"
#include "synoe/text.hpp"

namespace synoe {
namespace {

using nlohmann::json;

Bytes GrayCrop(int side = 128) { return EncodePng(Image(side, side, testing::kBackground)); }

DetectRequest Req(std::string id, std::string prompt, Bytes crop = GrayCrop()) {
  DetectRequest r;
  r.request_id = std::move(id);
  r.prompt = std::move(prompt);
  r.image_crop = std::move(crop);
  return r;
}

TEST(FinalizeTest, FiltersThresholdAndVocabularyAndSorts) {
  const auto out = FinalizeDetections(
      {{{0, 0, 5, 5}, "car", 0.5},
       {{0, 0, 5, 5}, "penguin", 0.9},
       {{0, 0, 5, 5}, "giraffe", 0.95},
       {{0, 0, 5, 5}, "penguin", 0.2}},
      Req("r", "penguin . car"));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].label, "penguin");
  EXPECT_EQ(out[1].label, "car");
}

TEST(MockInpainterTest, StampsPromptColorAtCenter) {
  MockInpainter inpainter(7);
  InpaintRequest req;
  req.request_id = "x";
  req.image_crop = GrayCrop();
  req.prompt = "penguin";
  req.crop_side = 128;
  const Bytes out = inpainter.Inpaint(req);
  const Image img = DecodePng(out);
  EXPECT_EQ(img.width, 128);
  EXPECT_EQ(img.at(64, 64), LabelColor("penguin"));
  EXPECT_EQ(img.at(5, 5), testing::kBackground);
  EXPECT_EQ(inpainter.Inpaint(req), out);
  EXPECT_EQ(MockInpainter(7).Inpaint(req), out);

  req.mask_box = BBox{10, 20, 30, 40};
  const Image masked = DecodePng(inpainter.Inpaint(req));
  EXPECT_EQ(masked.at(10, 20), LabelColor("penguin"));
  EXPECT_EQ(masked.at(64 + 30, 64), testing::kBackground);

  req.prompt = "  ";
  EXPECT_THROW(inpainter.Inpaint(req), ServiceError);
}

TEST(MockInpainterTest, RatesSelectOutcomes) {
  InpaintRequest req;
  req.image_crop = GrayCrop();
  req.prompt = "penguin";
  const Image keep = DecodePng(MockInpainter(1, {1.0, 0.0}).Inpaint(req));
  EXPECT_EQ(keep.at(64, 64), testing::kBackground);
  Image colored(128, 128, {10, 200, 30});
  req.image_crop = EncodePng(colored);
  const Image erased = DecodePng(MockInpainter(1, {0.0, 1.0}).Inpaint(req));
  EXPECT_EQ(erased.at(64, 64), testing::kBackground);
  EXPECT_EQ(erased.at(1, 1), (Rgb{10, 200, 30}));
}

TEST(LabelColorTest, NeverGrayAndCaseInsensitive) {
  for (const auto& p : PromptCatalog::BuiltinBaseList()) {
    const Rgb c = LabelColor(p);
    EXPECT_FALSE(c[0] == c[1] && c[1] == c[2]) << p;
    EXPECT_EQ(c, LabelColor(ToLower(p)));
  }
}

TEST(ColorDetectorTest, FindsPaintedPhrases) {
  Image img(128, 128, testing::kBackground);
  img.fill_rect(10, 10, 50, 50, LabelColor("penguin"));
  img.fill_rect(80, 80, 20, 10, LabelColor("car"));
  ColorDetector det;
  const auto out = det.Detect(Req("a", "penguin . car", EncodePng(img)));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].bbox, (BBox{10, 10, 50, 50}));
  EXPECT_DOUBLE_EQ(out[0].score, 0.95);
  EXPECT_TRUE(det.Detect(Req("a", "giraffe", EncodePng(img))).empty());
}

TEST(ScriptedDetectorTest, PlaysBackFixtures) {
  const json fixture = json::parse(R"([
    {"request_id": "7", "prompt": "penguin",
     "detections": [{"bbox": [10, 10, 50, 50], "label": "penguin", "score": 0.9}]},
    {"request_id": "8", "prompt": "penguin", "detections": []},
    {"request_id": "*", "prompt": "penguin . car",
     "detections": [{"bbox": [1, 1, 5, 5], "label": "car", "score": 0.8}]}
  ])");
  ScriptedDetector det = ScriptedDetector::FromJson(fixture);
  const auto a = det.Detect(Req("7", "penguin"));
  ASSERT_EQ(a.size(), 1u);
  EXPECT_EQ(a[0], (DetectionRecord{{10, 10, 50, 50}, "penguin", 0.9}));
  EXPECT_TRUE(det.Detect(Req("8", "penguin")).empty());
  const auto c = det.Detect(Req("anything", "Penguin . Car"));
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].label, "car");
  EXPECT_DOUBLE_EQ(c[0].score, 0.8);
  EXPECT_TRUE(det.Detect(Req("9", "giraffe")).empty());
}

TEST(WireFormatTest, RequestsRoundTrip) {
  InpaintRequest in;
  in.request_id = "img1-r0";
  in.image_crop = GrayCrop(16);
  in.prompt = "tapir";
  in.crop_side = 16;
  in.mask_box = BBox{1, 2, 3, 4};
  const InpaintRequest back = InpaintRequestFromJson(InpaintRequestToJson(in));
  EXPECT_EQ(back.image_crop, in.image_crop);
  EXPECT_EQ(back.mask_box, in.mask_box);
  EXPECT_EQ(back.prompt, "tapir");

  DetectRequest d = Req("q", "tapir . car", GrayCrop(16));
  d.box_threshold = 0.4;
  const DetectRequest dback = DetectRequestFromJson(DetectRequestToJson(d));
  EXPECT_EQ(dback.prompt, d.prompt);
  EXPECT_DOUBLE_EQ(dback.box_threshold, 0.4);
  json bad = DetectRequestToJson(d);
  bad["box_threshold"] = 1.5;
  EXPECT_THROW(DetectRequestFromJson(bad), SchemaError);
}

class ShrinkingInpainter : public Inpainter {
 public:
  Bytes Inpaint(const InpaintRequest&) override { return EncodePng(Image(8, 8)); }
};

TEST(HttpClientTest, RoundTripThroughServiceHost) {
  auto mock = std::make_shared<MockInpainter>(3);
  ServiceHost host(mock, std::make_shared<ColorDetector>());
  const int port = host.Start();
  const std::string url = "http://127.0.0.1:" + std::to_string(port);
  HttpInpainter inpainter(url);
  HttpDetector detector(url);

  InpaintRequest req;
  req.request_id = "r1";
  req.image_crop = GrayCrop();
  req.prompt = "penguin";
  req.crop_side = 128;
  const Bytes remote = inpainter.Inpaint(req);
  EXPECT_EQ(remote, mock->Inpaint(req));

  const auto dets = detector.Detect(Req("r1", "penguin . car", remote));
  ASSERT_EQ(dets.size(), 1u);
  EXPECT_EQ(dets[0].label, "penguin");

  req.prompt = "";
  try {
    inpainter.Inpaint(req);
    FAIL() << "expected ServiceError";
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.request_id(), "r1");
  }
  host.Stop();
}

TEST(HttpClientTest, RejectsResizedInpaintings) {
  ServiceHost host(std::make_shared<ShrinkingInpainter>(), std::make_shared<ColorDetector>());
  const int port = host.Start();
  HttpInpainter inpainter("http://127.0.0.1:" + std::to_string(port));
  InpaintRequest req;
  req.image_crop = GrayCrop();
  req.prompt = "penguin";
  EXPECT_THROW(inpainter.Inpaint(req), DimensionMismatch);
}

TEST(HttpClientTest, UnreachableEndpointFailsAfterRetries) {
  int port;
  {
    ServiceHost probe(std::make_shared<MockInpainter>(), std::make_shared<ColorDetector>());
    port = probe.Start();
  }
  RetryPolicy retry;
  retry.initial_backoff = std::chrono::milliseconds(5);
  retry.timeout = std::chrono::milliseconds(1000);
  HttpDetector detector("http://127.0.0.1:" + std::to_string(port), retry);
  const auto start = std::chrono::steady_clock::now();
  try {
    detector.Detect(Req("dead", "penguin"));
    FAIL() << "expected TransportError";
  } catch (const TransportError& e) {
    EXPECT_NE(std::string(e.what()).find("3 retries"), std::string::npos);
  }
  // Backoff 5 + 10 + 20 ms.
  EXPECT_GE(std::chrono::steady_clock::now() - start, std::chrono::milliseconds(35));
}

class CountingDetector : public Detector {
 public:
  std::vector<DetectionRecord> Detect(const DetectRequest&) override {
    const int now = ++active;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
    --active;
    return {};
  }
  std::atomic<int> active{0};
  std::atomic<int> peak{0};
};

TEST(HttpClientTest, InFlightRequestsAreBounded) {
  auto counting = std::make_shared<CountingDetector>();
  ServiceHost host(std::make_shared<MockInpainter>(), counting);
  const int port = host.Start();
  HttpDetector detector("http://127.0.0.1:" + std::to_string(port), RetryPolicy{}, 2);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] { detector.Detect(Req("c", "penguin", GrayCrop(8))); });
  }
  for (auto& t : threads) t.join();
  EXPECT_LE(counting->peak.load(), 2);
  EXPECT_GE(counting->peak.load(), 1);
}

}  // namespace
}  // namespace synoe
