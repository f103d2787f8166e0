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

#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <thread>

#include <CLI11.hpp>

#include "synoe/audit.hpp"
#include "synoe/augmentor.hpp"
#include "synoe/manifest_io.hpp"
#include "synoe/metrics.hpp"
#include "synoe/review_service.hpp"
#include "synoe/svc_clients.hpp"
#include "synoe/text.hpp"

namespace synoe::cli {

namespace {

using nlohmann::json;

using Config = std::map<std::string, std::string>;

class UsageError : public Error {
  using Error::Error;
};

double ToDouble(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw UsageError(key + ": expected a number, got '" + v + "'");
  }
}

std::int64_t ToInt(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw UsageError(key + ": expected an integer, got '" + v + "'");
  }
}

bool ToBool(const std::string& key, const std::string& v) {
  const std::string s = ToLower(Trim(v));
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  throw UsageError(key + ": expected a boolean, got '" + v + "'");
}

std::optional<std::string> Flag(const CLI::Option* opt, const std::string& value) {
  if (opt->count() == 0) return std::nullopt;
  return value;
}

Config LoadConfig(const CLI::Option* flag, const std::string& path) {
  if (flag->count() > 0) return ReadConfigFile(path);
  if (const char* env = std::getenv("SYNOE_CONFIG"); env && *env) return ReadConfigFile(env);
  return {};
}

// --- generate -----------------------------------------------------------------------

struct GenerateArgs {
  std::string input, variant, out, prompts, prompts_ext, inpaint_url, detect_url, config;
  std::string proportion, seed, workers, box_threshold, text_threshold, road_side;
  std::string mock_keep_rate, mock_erase_rate, max_in_flight;
  bool mock = false;
  CLI::Option *o_variant, *o_proportion, *o_seed, *o_workers, *o_box, *o_text, *o_prompts,
      *o_prompts_ext, *o_inpaint, *o_detect, *o_mock, *o_config, *o_road, *o_keep, *o_erase,
      *o_in_flight;
};

void AddGenerate(CLI::App& app, GenerateArgs& a) {
  auto* sub = app.add_subcommand("generate", "Augment a dataset with synthetic outliers");
  sub->add_option("--input", a.input, "Input manifest (or plain COCO detection file)")
      ->required();
  sub->add_option("--out", a.out, "Output directory")->required();
  a.o_variant = sub->add_option("--variant", a.variant, "Dataset variant V1..V5");
  a.o_proportion = sub->add_option("--proportion", a.proportion, "Fraction of images to augment");
  a.o_seed = sub->add_option("--seed", a.seed, "Run seed");
  a.o_workers = sub->add_option("--workers", a.workers, "Worker threads");
  a.o_box = sub->add_option("--box-threshold", a.box_threshold, "Detector box threshold");
  a.o_text = sub->add_option("--text-threshold", a.text_threshold, "Detector text threshold");
  a.o_prompts = sub->add_option("--prompts", a.prompts, "Base prompt list, one per line");
  a.o_prompts_ext = sub->add_option("--prompts-ext", a.prompts_ext, "Extended prompt list");
  a.o_inpaint = sub->add_option("--inpaint-url", a.inpaint_url, "Inpainting service base URL");
  a.o_detect = sub->add_option("--detect-url", a.detect_url, "Detector service base URL");
  a.o_mock = sub->add_flag("--mock", a.mock, "Use the built-in deterministic mock services");
  a.o_config = sub->add_option("--config", a.config, "key = value configuration file");
  a.o_road = sub->add_option("--road-crop-side", a.road_side, "Crop side for road placements");
  a.o_keep = sub->add_option("--mock-keep-rate", a.mock_keep_rate,
                             "Mock inpainter: fraction of crops left unchanged");
  a.o_erase = sub->add_option("--mock-erase-rate", a.mock_erase_rate,
                              "Mock inpainter: fraction of crops blanked");
  a.o_in_flight = sub->add_option("--max-in-flight", a.max_in_flight,
                                  "Concurrent requests per remote service");
}

int RunGenerate(const GenerateArgs& a, std::ostream& out) {
  const Config config = LoadConfig(a.o_config, a.config);
  auto get = [&](const CLI::Option* o, const std::string& v, const char* env,
                 const std::string& key) { return Resolve(Flag(o, v), env, config, key); };

  const auto variant_name = get(a.o_variant, a.variant, nullptr, "variant");
  if (!variant_name) throw UsageError("--variant is required (V1..V5)");
  VariantPolicy policy = SelectVariant(*variant_name);

  if (auto v = get(a.o_proportion, a.proportion, nullptr, "proportion")) {
    policy.ood_image_proportion = ToDouble("proportion", *v);
  }
  if (auto v = get(a.o_box, a.box_threshold, nullptr, "box_threshold")) {
    policy.box_threshold = ToDouble("box_threshold", *v);
  }
  if (auto v = get(a.o_text, a.text_threshold, nullptr, "text_threshold")) {
    policy.text_threshold = ToDouble("text_threshold", *v);
  }
  if (auto v = get(a.o_road, a.road_side, nullptr, "road_crop_side")) {
    policy.road_crop_side = static_cast<int>(ToInt("road_crop_side", *v));
  }
  if (auto it = config.find("per_image_count_weights"); it != config.end()) {
    policy.per_image_count_weights.clear();
    for (const auto& w : Tokens(std::string(it->second))) {
      policy.per_image_count_weights.push_back(ToDouble("per_image_count_weights", w));
    }
  }
  if (auto it = config.find("replaceable_classes"); it != config.end()) {
    policy.replaceable_classes.clear();
    for (const auto& c : SplitPrompt(it->second)) policy.replaceable_classes.push_back(c);
  }
  policy.validate();

  PipelineOptions options;
  options.out_dir = a.out;
  options.seed = static_cast<std::uint64_t>(
      ToInt("seed", get(a.o_seed, a.seed, nullptr, "seed").value_or("0")));
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  options.workers = static_cast<int>(
      ToInt("workers", get(a.o_workers, a.workers, nullptr, "workers").value_or(std::to_string(hw))));
  if (options.workers < 1) throw UsageError("workers must be >= 1");

  const bool mock =
      a.mock || (config.count("mock") && ToBool("mock", config.at("mock")));
  const auto inpaint_url = get(a.o_inpaint, a.inpaint_url, "INPAINT_URL", "inpaint_url");
  const auto detect_url = get(a.o_detect, a.detect_url, "DETECT_URL", "detect_url");
  const int in_flight = static_cast<int>(
      ToInt("max_in_flight", get(a.o_in_flight, a.max_in_flight, nullptr, "max_in_flight").value_or("4")));

  std::unique_ptr<Inpainter> inpainter;
  std::unique_ptr<Detector> detector;
  json services;
  if (mock) {
    MockInpaintOptions mo;
    if (auto v = get(a.o_keep, a.mock_keep_rate, nullptr, "mock_keep_rate")) {
      mo.keep_rate = ToDouble("mock_keep_rate", *v);
    }
    if (auto v = get(a.o_erase, a.mock_erase_rate, nullptr, "mock_erase_rate")) {
      mo.erase_rate = ToDouble("mock_erase_rate", *v);
    }
    inpainter = std::make_unique<MockInpainter>(options.seed, mo);
    detector = std::make_unique<ColorDetector>();
    services = {{"mode", "mock"}, {"mock_keep_rate", mo.keep_rate}, {"mock_erase_rate", mo.erase_rate}};
  } else {
    if (!inpaint_url || !detect_url) {
      throw UsageError("service URLs missing: pass --mock or --inpaint-url and --detect-url");
    }
    inpainter = std::make_unique<HttpInpainter>(*inpaint_url, RetryPolicy{}, in_flight);
    detector = std::make_unique<HttpDetector>(*detect_url, RetryPolicy{}, in_flight);
    services = {{"mode", "http"}, {"inpaint_url", *inpaint_url}, {"detect_url", *detect_url}};
  }

  const DatasetManifest input = LoadManifest(a.input);
  const auto prompts = get(a.o_prompts, a.prompts, nullptr, "prompts");
  const auto prompts_ext = get(a.o_prompts_ext, a.prompts_ext, nullptr, "prompts_ext");
  const PromptCatalog catalog(
      prompts ? PromptCatalog::ReadList(*prompts) : PromptCatalog::BuiltinBaseList(),
      prompts_ext ? PromptCatalog::ReadList(*prompts_ext) : PromptCatalog::BuiltinExtendedList(),
      policy.use_lf_extended_prompts, &input.registry);

  options.config_echo = {{"variant", *variant_name},
                         {"input", a.input},
                         {"services", services},
                         {"prompts", prompts.value_or("builtin")},
                         {"prompts_ext", prompts_ext.value_or("builtin")}};

  LogEvent("info", "generate_start",
           {{"input", a.input}, {"variant", *variant_name}, {"seed", options.seed},
            {"proportion", policy.ood_image_proportion}, {"workers", options.workers}});
  const PipelineResult result =
      RunPipeline(input, policy, catalog, *inpainter, *detector, options);
  out << StableDump(result.report.ToJson());
  LogEvent("info", "generate_done", result.report.ToJson());
  return kExitOk;
}

// --- audit ----------------------------------------------------------------------------

struct AuditArgs {
  std::string manifest, evidence, out, report;
};

void AddAudit(CLI::App& app, AuditArgs& a) {
  auto* sub = app.add_subcommand("audit", "Compare detector labels with inpainting prompts");
  sub->add_option("--manifest", a.manifest, "Generated manifest")->required();
  sub->add_option("--evidence", a.evidence, "Evidence file written by generate")->required();
  sub->add_option("--out", a.out, "Audited manifest output")->required();
  sub->add_option("--report", a.report, "Audit report output");
}

int RunAudit(const AuditArgs& a, std::ostream& out) {
  const DatasetManifest manifest = LoadManifest(a.manifest);
  const EvidenceStore evidence = LoadEvidence(a.evidence);
  const AuditResult result = AuditManifest(manifest, evidence);
  SaveManifest(result.manifest, a.out);
  const std::string report = StableDump(result.report.ToJson());
  if (!a.report.empty()) WriteTextFile(a.report, report);
  out << report;
  return kExitOk;
}

// --- review ---------------------------------------------------------------------------

struct ReviewArgs {
  std::string manifest, evidence, journal, host = "127.0.0.1";
  int port = 8080;
};

void AddReview(CLI::App& app, ReviewArgs& a) {
  auto* sub = app.add_subcommand("review", "Serve the review API over an audited manifest");
  sub->add_option("--manifest", a.manifest, "Audited manifest")->required();
  sub->add_option("--journal", a.journal, "Decision journal (NDJSON, append-only)")->required();
  sub->add_option("--evidence", a.evidence,
                  "Evidence file (default: evidence.json beside the manifest)");
  sub->add_option("--port", a.port, "Port")->capture_default_str();
  sub->add_option("--host", a.host, "Bind address")->capture_default_str();
}

int RunReview(const ReviewArgs& a, std::ostream& out) {
  DatasetManifest manifest = LoadManifest(a.manifest);
  std::filesystem::path evidence_path = a.evidence;
  if (evidence_path.empty()) {
    evidence_path = std::filesystem::path(a.manifest).parent_path() / "evidence.json";
  }
  EvidenceStore evidence;
  if (std::filesystem::exists(evidence_path)) evidence = LoadEvidence(evidence_path);
  ReviewStore store(std::move(manifest), std::move(evidence), a.journal);
  ReviewServer server(store);
  out << "review API on http://" << a.host << ":" << a.port << "/review/flagged" << std::endl;
  server.Listen(a.host, a.port);
  return kExitOk;
}

// --- eval -----------------------------------------------------------------------------

struct EvalArgs {
  std::string gt, dets, out;
  bool class_agnostic = false;
};

void AddEval(CLI::App& app, EvalArgs& a) {
  auto* sub = app.add_subcommand("eval", "COCO-style evaluation of a detection dump");
  sub->add_option("--gt", a.gt, "Ground-truth manifest")->required();
  sub->add_option("--dets", a.dets, "Detection dump (JSON list)")->required();
  sub->add_flag("--class-agnostic", a.class_agnostic, "Collapse all categories into one");
  sub->add_option("--out", a.out, "Report output (JSON)");
}

int RunEval(const EvalArgs& a, std::ostream& out) {
  const DatasetManifest gt = LoadManifest(a.gt);
  const DetectionDump dump = LoadDetectionDump(a.dets, gt);
  const EvalReport report = Evaluate(gt, dump, {a.class_agnostic});
  if (!a.out.empty()) WriteTextFile(a.out, StableDump(report.ToJson()));
  out << report.FormatTable();
  return kExitOk;
}

// --- mock-services --------------------------------------------------------------------

struct MockArgs {
  std::string fixtures, host = "127.0.0.1";
  int port = 8081;
  std::uint64_t seed = 0;
};

void AddMock(CLI::App& app, MockArgs& a) {
  auto* sub = app.add_subcommand("mock-services", "Serve mock inpainting and detection APIs");
  sub->add_option("--port", a.port, "Port")->capture_default_str();
  sub->add_option("--host", a.host, "Bind address")->capture_default_str();
  sub->add_option("--fixtures", a.fixtures, "Scripted detector responses (JSON)");
  sub->add_option("--seed", a.seed, "Mock inpainter seed")->capture_default_str();
}

int RunMock(const MockArgs& a, std::ostream& out) {
  auto inpainter = std::make_shared<MockInpainter>(a.seed);
  std::shared_ptr<Detector> detector = std::make_shared<ColorDetector>();
  if (!a.fixtures.empty()) {
    detector = std::make_shared<ScriptedDetector>(
        ScriptedDetector::FromJson(ReadJsonFile(a.fixtures), detector));
  }
  ServiceHost host(inpainter, detector);
  out << "mock services on http://" << a.host << ":" << a.port << std::endl;
  host.Listen(a.host, a.port);
  return kExitOk;
}

// --- validate -------------------------------------------------------------------------

struct ValidateArgs {
  std::string manifest;
  bool check_files = false;
};

void AddValidate(CLI::App& app, ValidateArgs& a) {
  auto* sub = app.add_subcommand("validate", "Check a manifest against the schema invariants");
  sub->add_option("--manifest", a.manifest, "Manifest to check")->required();
  sub->add_flag("--check-files", a.check_files, "Also require image and mask files to exist");
}

int RunValidate(const ValidateArgs& a, std::ostream& out) {
  const DatasetManifest m = LoadManifest(a.manifest);
  m.validate();
  if (a.check_files) {
    std::vector<std::string> missing;
    for (const auto& img : m.images) {
      if (!std::filesystem::exists(m.resolve(img.file_path))) {
        missing.push_back("image " + std::to_string(img.id) + ": missing " + img.file_path);
      }
      if (img.road_mask_path && !std::filesystem::exists(m.resolve(*img.road_mask_path))) {
        missing.push_back("image " + std::to_string(img.id) + ": missing " + *img.road_mask_path);
      }
    }
    if (!missing.empty()) throw InvariantError(std::move(missing));
  }
  out << "ok: " << m.images.size() << " images, " << m.annotations.size() << " annotations\n";
  return kExitOk;
}

}  // namespace

Config ReadConfigFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  Config config;
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string trimmed = Trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
    }
    std::string value = Trim(std::string_view(trimmed).substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    config[Trim(std::string_view(trimmed).substr(0, eq))] = value;
  }
  return config;
}

std::optional<std::string> Resolve(const std::optional<std::string>& flag, const char* env_var,
                                   const Config& config, const std::string& key) {
  if (flag) return flag;
  if (env_var) {
    if (const char* v = std::getenv(env_var); v && *v) return std::string(v);
  }
  if (auto it = config.find(key); it != config.end()) return it->second;
  return std::nullopt;
}

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"synoe: synthetic outlier generation, audit, review and evaluation", "synoe"};
  app.require_subcommand(1);
  GenerateArgs gen;
  AuditArgs aud;
  ReviewArgs rev;
  EvalArgs ev;
  MockArgs mock;
  ValidateArgs val;
  AddGenerate(app, gen);
  AddAudit(app, aud);
  AddReview(app, rev);
  AddEval(app, ev);
  AddMock(app, mock);
  AddValidate(app, val);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitInvalid;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "generate") return RunGenerate(gen, out);
    if (name == "audit") return RunAudit(aud, out);
    if (name == "review") return RunReview(rev, out);
    if (name == "eval") return RunEval(ev, out);
    if (name == "mock-services") return RunMock(mock, out);
    if (name == "validate") return RunValidate(val, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << app.get_subcommand(name)->help();
    return kExitInvalid;
  } catch (const UnknownVariant& e) {
    err << "error: " << e.what() << "\n\n" << app.get_subcommand(name)->help();
    return kExitInvalid;
  } catch (const InvariantError& e) {
    LogEvent("error", "validation_failed", {{"command", name}, {"offenders", e.offenders()}});
    err << "invalid: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const SchemaError& e) {
    LogEvent("error", "validation_failed", {{"command", name}, {"what", e.what()}});
    err << "invalid: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const ParseError& e) {
    LogEvent("error", "validation_failed", {{"command", name}, {"what", e.what()}});
    err << "invalid: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const CategoryMismatch& e) {
    LogEvent("error", "validation_failed", {{"command", name}, {"what", e.what()}});
    err << "invalid: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    LogEvent("error", "runtime_error", {{"command", name}, {"what", e.what()}});
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitInvalid;
}

}  // namespace synoe::cli
