// Copyright 2026 The taskreso Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "taskreso/cli.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "taskreso/complexity.hpp"
#include "taskreso/errors.hpp"
#include "taskreso/inference.hpp"
#include "taskreso/json_io.hpp"
#include "taskreso/manifest.hpp"
#include "taskreso/peinterp.hpp"
#include "taskreso/selector.hpp"
#include "taskreso/uncertainty.hpp"

#ifndef TASKRESO_VERSION
#define TASKRESO_VERSION "0.0.0"
#endif

namespace taskreso {

std::string tool_version() { return TASKRESO_VERSION; }

namespace {

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string output;
  unsigned threads = 1;
};

struct FormulaOptions {
  double k = 34.0;
  std::uint32_t reso0 = 336;
  std::vector<std::uint32_t> ladder{224, 336, 448, 560, 672};

  void add_to(CLI::App* cmd) {
    cmd->add_option("--k", k, "Formula hyperparameter k")->capture_default_str();
    cmd->add_option("--reso0", reso0, "Base resolution")->capture_default_str();
    cmd->add_option("--ladder", ladder, "Supported resolutions, comma separated")
        ->delimiter(',')
        ->capture_default_str();
  }
  Ladder make_ladder() const {
    Ladder l{ladder};
    l.validate();
    return l;
  }
};

Json header(const GlobalOptions& g) {
  Json j = {{"tool_version", tool_version()}};
  j["seed"] = g.seed;
  return j;
}

void emit(const Json& j, const GlobalOptions& g, std::ostream& out) {
  if (g.output.empty()) {
    out << j.dump(2) << '\n';
  } else {
    write_json_file(j, g.output);
  }
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::string ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

// --- complexity -------------------------------------------------------------

struct ComplexityCommand {
  std::string manifest;
  std::string bounds_file;
  std::string reference_dir;
  std::string write_bounds;
  ComplexityConfig cfg;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--manifest", manifest, "Task manifest JSON")->required();
    cmd->add_option("--bounds", bounds_file, "Reference bounds JSON");
    cmd->add_option("--reference-dir", reference_dir,
                    "Directory of reference images to derive bounds from");
    cmd->add_option("--write-bounds", write_bounds, "Save derived bounds to this file");
    cmd->add_option("--max-clusters", cfg.max_clusters)->capture_default_str();
    cmd->add_option("--subsample", cfg.subsample_rate)->capture_default_str();
    cmd->add_option("--work-size", cfg.work_size)->capture_default_str();
    cmd->add_option("--levels", cfg.levels)->capture_default_str();
    cmd->add_option("--patch", cfg.level2_patch, "Level-2 patch side")->capture_default_str();
  }

  Json run(const GlobalOptions& g) {
    cfg.seed = g.seed;
    try {
      cfg.validate();
    } catch (const InvalidArg& e) {
      throw ManifestError(e.what());
    }
    const TaskManifest m = load_manifest(manifest);
    const auto samples = load_samples(m);

    ReferenceBounds bounds;
    if (!bounds_file.empty()) {
      bounds = bounds_from_json(read_json_file(bounds_file));
    } else if (!reference_dir.empty()) {
      std::vector<Image> refs;
      for (const auto& f : list_images(reference_dir)) refs.push_back(load_image(f));
      if (refs.size() < 2) {
        throw ManifestError("--reference-dir needs at least 2 images, found " +
                            std::to_string(refs.size()));
      }
      bounds = reference_bounds(refs, cfg, g.threads);
      if (!write_bounds.empty()) write_json_file(bounds_to_json(bounds), write_bounds);
    } else {
      throw ManifestError("complexity needs --bounds or --reference-dir");
    }

    std::vector<Image> images;
    images.reserve(samples.size());
    for (const auto& s : samples) images.push_back(s.image);
    const TaskComplexity tc = task_complexity(images, cfg, bounds, g.threads);

    Json j = header(g);
    j["task"] = m.task;
    j["C"] = tc.c;
    j["bounds"] = bounds_to_json(bounds);
    Json per = Json::array();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      per.push_back({{"id", samples[i].id},
                     {"raw", tc.per_sample[i].raw},
                     {"normalized", tc.per_sample[i].normalized}});
    }
    j["per_sample"] = std::move(per);
    return j;
  }
};

// --- uncertainty ------------------------------------------------------------

struct UncertaintyCommand {
  std::string manifest;
  std::string backend = "toy";
  std::string dump;
  std::string endpoint;
  double timeout = 30.0;
  std::uint32_t max_inflight = 4;
  std::uint32_t retries = 3;
  std::uint32_t toy_vocab = 16;
  std::uint32_t toy_tokens = 8;
  std::vector<std::string> toy_sharpness;
  std::uint32_t aug_ops = 3;
  std::uint32_t aug_magnitude = 10;
  std::uint64_t aug_seed = 0;
  std::uint32_t replicates = 3;
  std::vector<std::uint64_t> replicate_seeds;
  std::optional<std::uint32_t> base_res;
  std::optional<std::uint32_t> ext_res;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--manifest", manifest, "Task manifest JSON")->required();
    cmd->add_option("--backend", backend, "toy | file | http")
        ->check(CLI::IsMember({"toy", "file", "http"}))
        ->capture_default_str();
    cmd->add_option("--dump", dump, "JSONL distribution dump (file backend)");
    cmd->add_option("--endpoint", endpoint, "Base URL (http backend)");
    cmd->add_option("--timeout", timeout, "Per-request timeout, seconds")->capture_default_str();
    cmd->add_option("--max-inflight", max_inflight)->capture_default_str();
    cmd->add_option("--retries", retries)->capture_default_str();
    cmd->add_option("--toy-vocab", toy_vocab)->capture_default_str();
    cmd->add_option("--toy-tokens", toy_tokens)->capture_default_str();
    cmd->add_option("--toy-sharpness", toy_sharpness,
                    "Per-resolution sharpness, e.g. 336:2,448:2.5")
        ->delimiter(',');
    cmd->add_option("--aug-ops", aug_ops)->capture_default_str();
    cmd->add_option("--aug-magnitude", aug_magnitude)->capture_default_str();
    cmd->add_option("--aug-seed", aug_seed, "First replicate seed")->capture_default_str();
    cmd->add_option("--replicates", replicates, "Replicates seeded aug-seed, aug-seed+1, ...")
        ->capture_default_str();
    cmd->add_option("--replicate-seeds", replicate_seeds, "Explicit replicate seeds")
        ->delimiter(',');
    cmd->add_option("--base-res", base_res, "Override the manifest base resolution");
    cmd->add_option("--ext-res", ext_res, "Override the manifest extended resolution");
  }

  std::unique_ptr<DistributionSource> make_backend(const TaskManifest& m) const {
    if (backend == "file") {
      if (dump.empty()) throw ManifestError("--backend file needs --dump");
      return FileBackend::open(dump);
    }
    if (backend == "http") {
      if (endpoint.empty()) throw ManifestError("--backend http needs --endpoint");
      HttpBackendOptions o;
      o.endpoint = endpoint;
      o.timeout = std::chrono::duration<double>(timeout);
      o.max_inflight = max_inflight;
      o.retries = retries;
      try {
        return std::make_unique<HttpBackend>(o);
      } catch (const InvalidArg& e) {
        throw ManifestError(e.what());
      }
    }
    ToyBackendOptions o;
    o.vocab = toy_vocab;
    o.tokens = toy_tokens;
    for (const auto& entry : toy_sharpness) {
      const auto colon = entry.find(':');
      try {
        if (colon == std::string::npos) throw std::invalid_argument(entry);
        o.sharpness_per_res[static_cast<std::uint32_t>(std::stoul(entry.substr(0, colon)))] =
            std::stod(entry.substr(colon + 1));
      } catch (const std::exception&) {
        throw ManifestError("bad --toy-sharpness entry '" + entry + "', expected RES:VALUE");
      }
    }
    if (o.sharpness_per_res.empty()) {
      o.sharpness_per_res = {{m.base_res, 1.0}, {m.ext_res, 1.0}};
    }
    for (std::uint32_t res : {m.base_res, m.ext_res}) {
      if (!o.sharpness_per_res.contains(res)) {
        throw ManifestError("--toy-sharpness has no entry for resolution " + std::to_string(res));
      }
    }
    try {
      return std::make_unique<ToyBackend>(o);
    } catch (const InvalidArg& e) {
      throw ManifestError(e.what());
    }
  }

  Json run(const GlobalOptions& g) {
    TaskManifest m = load_manifest(manifest);
    if (base_res) m.base_res = *base_res;
    if (ext_res) m.ext_res = *ext_res;
    const auto samples = load_samples(m);
    const auto source = make_backend(m);

    AugmentConfig aug;
    aug.n_ops = aug_ops;
    aug.magnitude = aug_magnitude;
    try {
      aug.validate();
    } catch (const InvalidArg& e) {
      throw ManifestError(e.what());
    }
    std::vector<std::uint64_t> seeds = replicate_seeds;
    if (seeds.empty()) {
      if (replicates == 0) throw ManifestError("--replicates must be >= 1");
      for (std::uint32_t i = 0; i < replicates; ++i) seeds.push_back(aug_seed + i);
    }

    const VarianceResult r =
        measure_variance(*source, samples, m.base_res, m.ext_res, seeds, aug, g.threads);

    Json j = header(g);
    j["task"] = m.task;
    j["base_res"] = m.base_res;
    j["ext_res"] = m.ext_res;
    j["V"] = r.v;
    j["replicates"] = r.per_replicate;
    j["replicate_seeds"] = seeds;
    j["U1"] = r.u1;
    j["U2"] = r.u2;
    Json per = Json::array();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      per.push_back({{"id", samples[i].id}, {"U1", r.per_sample_u1[i]}, {"U2", r.per_sample_u2[i]}});
    }
    j["per_sample"] = std::move(per);
    return j;
  }
};

// --- select / calibrate / robustness / stats --------------------------------

struct SelectCommand {
  std::string stats;
  FormulaOptions formula;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--stats", stats, "Task stats JSON")->required();
    formula.add_to(cmd);
  }

  Json run(const GlobalOptions& g) {
    const auto tasks = read_task_stats(stats);
    const Ladder ladder = formula.make_ladder();
    FormulaParams params{formula.k, formula.reso0};
    params.validate();
    Json sel = Json::array();
    for (const auto& t : tasks) {
      sel.push_back({{"task", t.task},
                     {"k", params.k},
                     {"reso0", params.reso0},
                     {"raw_reso", raw_resolution(t.c, t.v, params)},
                     {"selected", predict_resolution(t, params, ladder)}});
    }
    Json j = header(g);
    j["selections"] = std::move(sel);
    return j;
  }
};

Json interval_json(const KInterval& in) {
  if (in.empty) return {{"empty", true}};
  auto bound = [](double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); };
  return {{"empty", false},
          {"lo", bound(in.lo)},
          {"hi", bound(in.hi)},
          {"lo_closed", in.lo_closed},
          {"hi_closed", in.hi_closed}};
}

struct CalibrateCommand {
  std::string refs;
  std::string policy = "midpoint";
  FormulaOptions formula;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--refs", refs, "Reference tasks JSON")->required();
    cmd->add_option("--policy", policy, "midpoint | smallest | explicit")
        ->check(CLI::IsMember({"midpoint", "smallest", "explicit"}))
        ->capture_default_str();
    formula.add_to(cmd);
  }

  Json run(const GlobalOptions& g) {
    const auto references = read_references(refs);
    const Ladder ladder = formula.make_ladder();
    const CalibrationPolicy p = policy == "explicit" ? CalibrationPolicy::kExplicit
                                : policy == "smallest" ? CalibrationPolicy::kSmallest
                                                       : CalibrationPolicy::kMidpoint;
    const Calibration cal = calibrate_k(references, formula.reso0, ladder, p, formula.k);

    Json j = header(g);
    j["status"] = "ok";
    j["policy"] = policy;
    j["k"] = cal.params.k;
    j["reso0"] = cal.params.reso0;
    j["interval"] = interval_json(cal.feasibility.interval);
    Json per = Json::array();
    for (std::size_t i = 0; i < references.size(); ++i) {
      const auto& c = cal.feasibility.per_reference[i];
      per.push_back({{"task", c.task},
                     {"target", c.target},
                     {"cv", c.cv},
                     {"interval", interval_json(c.interval)},
                     {"predicted", predict_resolution(references[i].stats, cal.params, ladder)}});
    }
    j["references"] = std::move(per);
    return j;
  }
};

struct RobustnessCommand {
  std::string stats;
  std::vector<double> ratios{0.1, 0.2, 0.3, 0.4, 0.5};
  std::uint32_t repeats = 10;
  FormulaOptions formula;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--stats", stats, "Task stats JSON with per-sample lists")->required();
    cmd->add_option("--ratios", ratios)->delimiter(',')->capture_default_str();
    cmd->add_option("--repeats", repeats)->capture_default_str();
    formula.add_to(cmd);
  }

  Json run(const GlobalOptions& g) {
    const auto tasks = read_task_stats(stats);
    const FormulaParams params{formula.k, formula.reso0};
    const auto results = robustness_experiment(tasks, ratios, repeats, g.seed, params,
                                               formula.make_ladder(), g.threads);
    Json j = header(g);
    j["k"] = params.k;
    j["reso0"] = params.reso0;
    Json rows = Json::array();
    for (const auto& r : results) {
      rows.push_back({{"ratio", r.ratio},
                      {"successes", r.successes},
                      {"repeats", r.repeats},
                      {"success_rate", r.success_rate}});
    }
    j["results"] = std::move(rows);
    return j;
  }
};

Json dispersion_json(const std::vector<double>& values) {
  if (values.empty()) return nullptr;
  const Dispersion d = dispersion_stats(values, false);
  Json j = {{"n", values.size()}, {"mean", d.mean}, {"sd", d.sd}, {"ratio", nullptr}};
  try {
    j["ratio"] = *dispersion_stats(values, true).ratio;
  } catch (const DegenerateMean&) {
    // ratio stays null
  }
  return j;
}

struct StatsCommand {
  std::string stats;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--stats", stats, "Task stats JSON with per-sample lists")->required();
  }

  Json run(const GlobalOptions& g) {
    const auto tasks = read_task_stats(stats);
    Json rows = Json::array();
    for (const auto& t : tasks) {
      rows.push_back({{"task", t.task},
                      {"C", dispersion_json(t.per_sample_c)},
                      {"V", dispersion_json(t.per_sample_v)}});
    }
    Json j = header(g);
    j["tasks"] = std::move(rows);
    return j;
  }
};

// --- interp-pe --------------------------------------------------------------

struct InterpCommand {
  std::string in;
  std::string out;
  std::optional<std::uint32_t> target_res;
  std::optional<std::uint32_t> target_p;
  std::uint32_t patch = 14;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--in", in, "Source PEGRID file")->required();
    cmd->add_option("--out", out, "Destination PEGRID file")->required();
    auto* res = cmd->add_option("--target-res", target_res, "Target input resolution (pixels)");
    auto* tp = cmd->add_option("--target-p", target_p, "Target patches per side");
    res->excludes(tp);
    cmd->add_option("--patch", patch, "Patch size in pixels")->capture_default_str();
  }

  Json run(const GlobalOptions& g) {
    if (!target_res && !target_p) throw ManifestError("interp-pe needs --target-res or --target-p");
    const std::uint32_t p = target_p ? *target_p : patch_count(*target_res, patch);
    const EmbeddingGrid src = read_pegrid(in);
    const EmbeddingGrid dst = interpolate_grid(src, p, g.threads);
    write_pegrid(dst, out);
    Json j = header(g);
    j["in"] = in;
    j["out"] = out;
    j["src_p"] = src.p;
    j["target_p"] = dst.p;
    j["d"] = dst.d;
    j["n_prefix"] = dst.n_prefix;
    return j;
  }
};

int exit_code_for(ErrorClass cls) {
  switch (cls) {
    case ErrorClass::kConfiguration: return kExitConfig;
    case ErrorClass::kBackend: return kExitBackend;
    case ErrorClass::kComputation: break;
  }
  return kExitComputation;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Task-level input resolution selection for vision-language models", "taskreso"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Seed for every stochastic step")->capture_default_str();
  app.add_option("--output", g.output, "Write JSON here instead of stdout");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->capture_default_str();

  ComplexityCommand complexity;
  UncertaintyCommand uncertainty;
  SelectCommand select;
  CalibrateCommand calibrate;
  RobustnessCommand robustness;
  InterpCommand interp;
  StatsCommand stats;
  complexity.add_to(app.add_subcommand("complexity", "Image complexity C(T) of a task"));
  uncertainty.add_to(app.add_subcommand("uncertainty", "Uncertainty variance V(T) of a task"));
  select.add_to(app.add_subcommand("select", "Pick a resolution per task"));
  calibrate.add_to(app.add_subcommand("calibrate", "Fit k from reference tasks"));
  robustness.add_to(app.add_subcommand("robustness", "Sampling-ratio robustness experiment"));
  interp.add_to(app.add_subcommand("interp-pe", "Resample a position-embedding grid"));
  stats.add_to(app.add_subcommand("stats", "Dispersion of per-sample C and V"));

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    Json result;
    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "complexity") result = complexity.run(g);
    else if (name == "uncertainty") result = uncertainty.run(g);
    else if (name == "select") result = select.run(g);
    else if (name == "calibrate") result = calibrate.run(g);
    else if (name == "robustness") result = robustness.run(g);
    else if (name == "interp-pe") result = interp.run(g);
    else result = stats.run(g);
    emit(result, g, out);
    return kExitOk;
  } catch (const Error& e) {
    err << "taskreso: " << e.what() << '\n';
    return exit_code_for(e.error_class());
  } catch (const Json::exception& e) {
    err << "taskreso: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "taskreso: " << e.what() << '\n';
    return kExitComputation;
  }
}

}  // namespace taskreso
