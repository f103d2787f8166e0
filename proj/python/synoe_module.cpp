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

// Python bindings: geometry helpers plus the file-level generate / audit /
// eval entry points. JSON documents cross the boundary as plain dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "synoe/audit.hpp"
#include "synoe/augmentor.hpp"
#include "synoe/geometry.hpp"
#include "synoe/manifest_io.hpp"
#include "synoe/metrics.hpp"
#include "synoe/text.hpp"

namespace py = pybind11;

namespace synoe {
namespace {

py::object ToPython(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

ImageRecord Frame(int width, int height) {
  ImageRecord r;
  r.id = 1;
  r.width = width;
  r.height = height;
  return r;
}

py::object Generate(const std::string& input, const std::string& out, const std::string& variant,
                    double proportion, std::uint64_t seed, int workers, double keep_rate,
                    double erase_rate) {
  VariantPolicy policy = SelectVariant(variant);
  policy.ood_image_proportion = proportion;
  const DatasetManifest manifest = LoadManifest(input);
  MockInpainter inpainter(seed, {keep_rate, erase_rate});
  ColorDetector detector;
  PipelineOptions options;
  options.seed = seed;
  options.out_dir = out;
  options.workers = workers;
  options.config_echo = {{"variant", variant},
                         {"input", input},
                         {"services", {{"mode", "mock"}}}};
  PipelineResult result;
  {
    py::gil_scoped_release release;
    result = RunPipeline(manifest, policy, PromptCatalog::Builtin(false, &manifest.registry),
                         inpainter, detector, options);
  }
  return ToPython(result.report.ToJson());
}

py::object Audit(const std::string& manifest, const std::string& evidence,
                 const std::string& out) {
  const AuditResult r = AuditManifest(LoadManifest(manifest), LoadEvidence(evidence));
  SaveManifest(r.manifest, out);
  return ToPython(r.report.ToJson());
}

py::object Eval(const std::string& gt_path, const std::string& dets_path, bool class_agnostic) {
  const DatasetManifest gt = LoadManifest(gt_path);
  return ToPython(Evaluate(gt, LoadDetectionDump(dets_path, gt), {class_agnostic}).ToJson());
}

}  // namespace
}  // namespace synoe

PYBIND11_MODULE(synoe, m) {
  using namespace synoe;
  m.doc() = "Synthetic outlier generation, audit and COCO-style evaluation";
  m.attr("__version__") = std::string(kToolVersion.substr(kToolVersion.find(' ') + 1));

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<UnknownVariant>(m, "UnknownVariant", PyExc_ValueError);
  py::register_exception<InvariantError>(m, "InvariantError", PyExc_ValueError);
  py::register_exception<SchemaError>(m, "SchemaError", PyExc_ValueError);
  py::register_exception<CategoryMismatch>(m, "CategoryMismatch", PyExc_ValueError);

  py::class_<BBox>(m, "BBox")
      .def(py::init<>())
      .def(py::init([](double x, double y, double w, double h) { return BBox{x, y, w, h}; }),
           py::arg("x"), py::arg("y"), py::arg("w"), py::arg("h"))
      .def_readwrite("x", &BBox::x)
      .def_readwrite("y", &BBox::y)
      .def_readwrite("w", &BBox::w)
      .def_readwrite("h", &BBox::h)
      .def_property_readonly("area", &BBox::area)
      .def("valid", &BBox::valid)
      .def("__eq__", [](const BBox& a, const BBox& b) { return a == b; })
      .def("__iter__", [](const BBox& b) {
        return py::iter(py::make_tuple(b.x, b.y, b.w, b.h));
      })
      .def("__repr__", [](const BBox& b) {
        return "BBox(" + std::to_string(b.x) + ", " + std::to_string(b.y) + ", " +
               std::to_string(b.w) + ", " + std::to_string(b.h) + ")";
      });

  m.def("iou", &Iou, py::arg("a"), py::arg("b"));
  m.def("size_bucket", [](const BBox& b) { return std::string(ToString(SizeBucketOf(b))); });
  m.def("crop_side_for", &CropSideFor, py::arg("target"));
  m.def(
      "crop_for_target",
      [](const BBox& target, int width, int height) {
        return CropForTarget(target, Frame(width, height)).bbox;
      },
      py::arg("target"), py::arg("width"), py::arg("height"));
  m.def(
      "min_distance_ok",
      [](const std::vector<BBox>& accepted, const BBox& candidate) {
        std::vector<CropRegion> regions;
        for (const auto& b : accepted) regions.push_back({b, CropAnchor::kReplacedIdObject});
        return MinDistanceOk(regions, {candidate, CropAnchor::kReplacedIdObject});
      },
      py::arg("accepted"), py::arg("candidate"));

  m.def(
      "select_variant",
      [](const std::string& name) {
        const VariantPolicy p = SelectVariant(name);
        py::dict d;
        d["variant"] = std::string(ToString(p.variant));
        d["replace_id_instances"] = p.replace_id_instances;
        d["use_lf_extended_prompts"] = p.use_lf_extended_prompts;
        d["road_region_inpaintings"] = p.road_region_inpaintings;
        d["keep_partial_id"] = p.keep_partial_id;
        return d;
      },
      py::arg("name"));

  m.def(
      "load_manifest",
      [](const std::string& path) { return ToPython(ManifestToJson(LoadManifest(path))); },
      py::arg("path"));
  m.def(
      "validate_manifest",
      [](const std::string& path) {
        const DatasetManifest manifest = LoadManifest(path);
        manifest.validate();
        return py::make_tuple(manifest.images.size(), manifest.annotations.size());
      },
      py::arg("path"));
  m.def("generate", &Generate, py::arg("input"), py::arg("out"), py::arg("variant"),
        py::arg("proportion") = 0.25, py::arg("seed") = 0, py::arg("workers") = 1,
        py::arg("mock_keep_rate") = 0.0, py::arg("mock_erase_rate") = 0.0,
        "Runs the pipeline with the built-in mock services; returns the report.");
  m.def("audit", &Audit, py::arg("manifest"), py::arg("evidence"), py::arg("out"));
  m.def("evaluate", &Eval, py::arg("gt"), py::arg("dets"), py::arg("class_agnostic") = false);
  m.def("set_logging", &SetLoggingEnabled, py::arg("enabled"));
}
