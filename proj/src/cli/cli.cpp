// Copyright 2026 The Roofgen Authors.
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

#include "roofgen/cli/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "roofgen/baselines/baselines.hpp"
#include "roofgen/error.hpp"
#include "roofgen/geom/io.hpp"
#include "roofgen/geom/raster.hpp"
#include "roofgen/metrics/metrics.hpp"
#include "roofgen/model/sampler.hpp"
#include "roofgen/model/train.hpp"
#include "roofgen/synthroof/synthroof.hpp"

namespace roofgen::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

// Binds flags to keys of a resolved JSON configuration. Values start from
// defaults, then a --config file, then flags given on the command line.
class Options {
 public:
  explicit Options(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_, "JSON file with option values (flags win)");
  }

  template <typename T>
  void add(const std::string& key, T fallback, const std::string& help) {
    auto slot = std::make_shared<T>(fallback);
    CLI::Option* opt = app_->add_option("--" + key, *slot, help);
    defaults_[key] = fallback;
    binds_.push_back([opt, slot, key](json& j) {
      if (opt->count() > 0) j[key] = *slot;
    });
  }

  void flag(const std::string& key, const std::string& help) {
    auto slot = std::make_shared<bool>(false);
    CLI::Option* opt = app_->add_flag("--" + key, *slot, help);
    defaults_[key] = false;
    binds_.push_back([opt, slot, key](json& j) {
      if (opt->count() > 0) j[key] = *slot;
    });
  }

  void list(const std::string& key, std::vector<std::string> fallback, const std::string& help) {
    auto slot = std::make_shared<std::vector<std::string>>();
    CLI::Option* opt = app_->add_option("--" + key, *slot, help)->delimiter(',');
    defaults_[key] = fallback;
    binds_.push_back([opt, slot, key](json& j) {
      if (opt->count() > 0) j[key] = *slot;
    });
  }

  json resolve() const {
    json j = defaults_;
    if (!config_path_.empty()) {
      json file;
      try {
        file = json::parse(geom::read_file(config_path_));
      } catch (const json::exception& ex) {
        throw ParseError("config " + config_path_ + ": " + ex.what(), 0);
      }
      if (!file.is_object()) throw ParseError("config " + config_path_ + " is not a JSON object", 0);
      for (auto& [k, v] : file.items()) {
        if (k != "subcommand") j[k] = v;
      }
    }
    for (const auto& b : binds_) b(j);
    if (!j.contains("seed") || j["seed"].is_null()) {
      std::uint64_t seed = 0;
      if (const char* env = std::getenv("ROOFGEN_SEED"); env != nullptr && *env != '\0') {
        const std::string_view s(env);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
        if (ec != std::errc() || ptr != s.data() + s.size()) throw UsageError("ROOFGEN_SEED must be an integer");
      }
      j["seed"] = seed;
    }
    return j;
  }

 private:
  CLI::App* app_;
  std::string config_path_;
  json defaults_ = json::object();
  std::vector<std::function<void(json&)>> binds_;
};

void add_seed(CLI::App* app, std::shared_ptr<std::optional<std::uint64_t>>& seed) {
  seed = std::make_shared<std::optional<std::uint64_t>>();
  app->add_option("--seed", *seed, "Global seed (falls back to ROOFGEN_SEED, then 0)");
}

void write_run_json(const fs::path& out, const std::string& subcommand, json resolved) {
  fs::create_directories(out);
  resolved["subcommand"] = subcommand;
  geom::write_file(out / "run.json", resolved.dump(2) + "\n");
}

std::vector<synthroof::RoofKind> parse_kinds(const json& list) {
  std::vector<synthroof::RoofKind> kinds;
  for (const auto& k : list) kinds.push_back(synthroof::parse_roof_kind(k.get<std::string>()));
  if (kinds.empty()) throw UsageError("--kinds must name at least one roof kind");
  return kinds;
}

model::Preset resolve_preset(const json& r) {
  model::Preset p = model::preset(r.at("preset").get<std::string>());
  if (r.contains("model") && r["model"].is_object()) p.model = model::merge_model_config(p.model, r["model"]);
  if (r.contains("train") && r["train"].is_object()) p.train = model::merge_train_config(p.train, r["train"]);
  if (r.value("epochs", 0) > 0) p.train.max_epochs = r["epochs"].get<std::size_t>();
  p.train.seed = r.at("seed").get<std::uint64_t>();
  return p;
}

std::string example_id(const model::Example& ex) { return "ex" + std::to_string(ex.index); }

double check_p(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw UsageError("--p must lie in (0, 1]");
  return p;
}

model::SamplerConfig sampler_from(const json& r) {
  model::SamplerConfig sc;
  sc.nucleus_p = check_p(r.at("p").get<double>());
  sc.grammar_mask = !r.at("no-grammar-mask").get<bool>();
  sc.seed = r.at("seed").get<std::uint64_t>();
  return sc;
}

// Stream key for sample k of dataset example `index`.
std::uint64_t sample_stream(std::size_t index, std::size_t k) { return mix64(index) + k; }

struct TrainOutcome {
  model::TrainResult result;
  model::NllStats val_true;
  model::NllStats val_shuffled;
};

TrainOutcome train_to(const synthroof::DatasetManifest& manifest, model::Preset p, const fs::path& out,
                      bool verbose) {
  p.model.image_resolution = manifest.image_resolution;
  const auto train = model::load_augmented_examples(manifest, synthroof::Split::train, p.train.symmetries);
  const auto val = model::load_examples(manifest, synthroof::Split::val);
  fs::create_directories(out);
  std::ofstream log(out / "train_log.csv", std::ios::trunc);
  if (!log) throw IoError("cannot write " + (out / "train_log.csv").string());
  log << model::training_log_header();
  auto result = model::train_model(train, val, p.model, p.train, [&](const model::EpochRecord& r) {
    log << model::training_log_row(r) << std::flush;
    if (verbose) {
      std::cerr << "epoch " << r.epoch << ": train " << r.train_nll_vertex << " / " << r.train_nll_face << ", val "
                << r.val_nll_vertex << " / " << r.val_nll_face << "\n";
    }
  });
  const auto perm = model::derangement(val.size(), p.train.seed);
  TrainOutcome o{std::move(result), {}, {}};
  o.val_true = model::evaluate_nll(o.result.model, val);
  o.val_shuffled = model::evaluate_nll(o.result.model, val, &perm);
  json extra{{"train", model::to_json(p.train)},
             {"best_epoch", o.result.best_epoch},
             {"best_face_epoch", o.result.best_face_epoch},
             {"epochs_run", o.result.log.size()},
             {"steps", o.result.steps}};
  o.result.model.save(out / "model.ckpt", extra);
  json nll{{"val_true", {{"vertex", o.val_true.vertex}, {"face", o.val_true.face}}},
           {"val_shuffled_images", {{"vertex", o.val_shuffled.vertex}, {"face", o.val_shuffled.face}}},
           {"best_epoch", o.result.best_epoch}};
  geom::write_file(out / "nll.json", nll.dump(2) + "\n");
  return o;
}

std::vector<geom::Mesh> sample_split(const model::MeshModel& m, const std::vector<model::Example>& examples,
                                     const model::SamplerConfig& sc, std::size_t* degenerate) {
  std::vector<geom::Mesh> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    Rng rng(sc.seed, sample_stream(ex.index, 0));
    auto s = model::sample_mesh(m, ex.image, sc, rng);
    if (s.degenerate && degenerate) ++*degenerate;
    out.push_back(std::move(s.mesh));
  }
  return out;
}

// Overlay of two footprints: 255 where both cover, 170 truth only, 85
// prediction only.
geom::ImageGrid overlay(const geom::Mesh& predicted, const geom::Mesh& truth, int size) {
  double lo_x = 1e300, lo_y = 1e300, hi_x = -1e300, hi_y = -1e300;
  for (const geom::Mesh* m : {&predicted, &truth}) {
    for (const auto& v : m->vertices) {
      lo_x = std::min(lo_x, v.x);
      hi_x = std::max(hi_x, v.x);
      lo_y = std::min(lo_y, v.y);
      hi_y = std::max(hi_y, v.y);
    }
  }
  geom::ImageGrid img(size, size);
  if (!(hi_x > lo_x) || !(hi_y > lo_y)) return img;
  const double side = std::max(hi_x - lo_x, hi_y - lo_y) * 1.1;
  const double cx = 0.5 * (lo_x + hi_x);
  const double cy = 0.5 * (lo_y + hi_y);
  geom::RasterFrame frame{cx - side / 2, cy + side / 2, side / size, side / size, size, size};
  const auto a = metrics::rasterize_footprint(predicted, frame);
  const auto b = metrics::rasterize_footprint(truth, frame);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    img.pixels[i] = (a[i] && b[i]) ? 1.0 : b[i] ? 170.0 / 255.0 : a[i] ? 85.0 / 255.0 : 0.0;
  }
  return img;
}

// ---------------------------------------------------------------- gen-data

void gen_data(const json& r) {
  synthroof::GenerateOptions g;
  g.n = r.at("n").get<std::size_t>();
  g.seed = r.at("seed").get<std::uint64_t>();
  g.render.resolution = r.at("resolution").get<int>();
  g.kinds = parse_kinds(r.at("kinds"));
  g.watertight = r.at("watertight").get<bool>();
  const fs::path out = r.at("out").get<std::string>();
  synthroof::generate_dataset(g, out);
  write_run_json(out, "gen-data", r);
  std::cout << (out / "manifest.json").string() << "\n";
}

// ------------------------------------------------------------------- train

void train(json r) {
  model::Preset p = resolve_preset(r);
  const bool dry_run = r.at("dry-run").get<bool>();
  std::optional<synthroof::DatasetManifest> manifest;
  if (!dry_run) {
    manifest = synthroof::load_manifest(r.at("manifest").get<std::string>());
    p.model.image_resolution = manifest->image_resolution;
  }
  r["model"] = model::to_json(p.model);
  r["train"] = model::to_json(p.train);
  const fs::path out = r.at("out").get<std::string>();
  write_run_json(out, "train", r);
  if (dry_run) {
    std::cout << r.dump(2) << "\n";
    return;
  }
  train_to(*manifest, p, out, !r.at("quiet").get<bool>());
  std::cout << (out / "model.ckpt").string() << "\n";
}

// ------------------------------------------------------------------ sample

void sample(const json& r) {
  const auto sc = sampler_from(r);
  const auto n = r.at("n-samples").get<std::size_t>();
  if (n == 0) throw UsageError("--n-samples must be positive");
  const fs::path out = r.at("out").get<std::string>();
  const auto m = model::MeshModel::load(r.at("checkpoint").get<std::string>());
  write_run_json(out, "sample", r);

  std::vector<std::pair<std::string, geom::ImageGrid>> inputs;
  std::vector<std::size_t> streams;
  const std::string image = r.at("image").get<std::string>();
  if (!image.empty()) {
    inputs.emplace_back("sample", geom::read_pgm(image));
    streams.push_back(0);
  } else {
    const std::string mpath = r.at("manifest").get<std::string>();
    if (mpath.empty()) throw UsageError("sample needs --image or --manifest");
    const auto manifest = synthroof::load_manifest(mpath);
    for (const auto& e : manifest.split(synthroof::parse_split(r.at("split").get<std::string>()))) {
      inputs.emplace_back("ex" + std::to_string(e.index), geom::read_pgm(manifest.image_path(e)));
      streams.push_back(e.index);
    }
  }
  json summary = json::array();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    for (std::size_t k = 0; k < n; ++k) {
      Rng rng(sc.seed, sample_stream(streams[i], k));
      const auto s = model::sample_mesh(m, inputs[i].second, sc, rng);
      const std::string name = inputs[i].first + "_s" + std::to_string(k) + ".obj";
      geom::write_obj(s.mesh, out / name);
      json entry{{"file", name}, {"vertices", s.mesh.vertices.size()}, {"faces", s.mesh.faces.size()}};
      if (s.degenerate) {
        entry["degenerate"] = *s.degenerate;
        std::cerr << name << ": degenerate sample (" << *s.degenerate << ")\n";
      }
      summary.push_back(entry);
    }
  }
  geom::write_file(out / "samples.json", summary.dump(2) + "\n");
}

// -------------------------------------------------------------------- eval

struct MethodReport {
  std::string name;
  metrics::MetricsReport report;
  std::vector<metrics::MeshPair> pairs;
};

void eval(const json& r) {
  check_p(r.at("p").get<double>());
  const auto manifest = synthroof::load_manifest(r.at("manifest").get<std::string>());
  const auto split = synthroof::parse_split(r.at("split").get<std::string>());
  const auto test = model::load_examples(manifest, split);
  const fs::path out = r.at("out").get<std::string>();
  const std::uint64_t seed = r.at("seed").get<std::uint64_t>();
  metrics::EvalOptions eo;
  eo.iou_resolution = r.at("iou-resolution").get<int>();
  eo.polis_3d_vertices = r.at("polis-3d-vertices").get<bool>();

  const std::string ckpt = r.at("checkpoint").get<std::string>();
  const std::string preds = r.at("predictions").get<std::string>();
  const bool self_check = r.at("ground-truth").get<bool>();
  std::optional<model::MeshModel> m;
  if (!ckpt.empty()) m = model::MeshModel::load(ckpt);
  write_run_json(out, "eval", r);

  std::vector<MethodReport> reports;
  std::vector<std::string> ids;
  for (const auto& ex : test) ids.push_back(example_id(ex));

  if (self_check) {
    std::vector<metrics::MeshPair> pairs;
    for (const auto& ex : test) pairs.emplace_back(ex.truth, ex.truth);
    reports.push_back({"ground_truth", metrics::evaluate_batch(pairs, eo), pairs});
  }
  if (!preds.empty()) {
    std::vector<metrics::MeshPair> pairs;
    for (const auto& ex : test) pairs.emplace_back(geom::read_obj(fs::path(preds) / (example_id(ex) + "_s0.obj")), ex.truth);
    reports.push_back({"model", metrics::evaluate_batch(pairs, eo), pairs});
  } else if (m) {
    const auto sc = sampler_from(r);
    std::size_t degenerate = 0;
    const auto meshes = sample_split(*m, test, sc, &degenerate);
    if (degenerate > 0) std::cerr << degenerate << " degenerate samples\n";
    std::vector<metrics::MeshPair> pairs;
    for (std::size_t i = 0; i < test.size(); ++i) pairs.emplace_back(meshes[i], test[i].truth);
    reports.push_back({"model", metrics::evaluate_batch(pairs, eo), pairs});
  }

  std::vector<model::Example> train_set;
  for (const auto& b : r.at("baseline")) {
    const auto kind = baselines::parse_baseline_kind(b.get<std::string>());
    if (train_set.empty()) train_set = model::load_examples(manifest, synthroof::Split::train);
    std::vector<baselines::Retrieval> picks;
    if (kind == baselines::BaselineKind::random) {
      picks = baselines::random_baseline(test, train_set, seed);
    } else {
      const bool raw = r.at("raw-pixels").get<bool>() || !m;
      if (r.at("raw-pixels").get<bool>() == false && !m) {
        std::cerr << "knn: no checkpoint given, using raw pixel features\n";
      }
      picks = baselines::feature_knn_baseline(test, train_set, raw ? nullptr : &*m, r.at("k").get<std::size_t>());
    }
    const auto pairs = baselines::to_pairs(picks, test, train_set);
    reports.push_back({kind == baselines::BaselineKind::random ? "random" : "knn", metrics::evaluate_batch(pairs, eo),
                       pairs});
  }
  if (reports.empty()) throw UsageError("eval needs --checkpoint, --predictions, --ground-truth or --baseline");

  std::string csv = metrics::report_csv_header();
  json all = json::array();
  for (const auto& mr : reports) {
    csv += metrics::report_csv_rows(mr.name, mr.report, ids);
    all.push_back(json::parse(metrics::report_json(mr.name, mr.report, ids)));
  }
  geom::write_file(out / "report.csv", csv);
  geom::write_file(out / "report.json", json{{"split", synthroof::to_string(split)}, {"methods", all}}.dump(2) + "\n");

  std::cout << "method,polis,polis_sdm,angular_deg,angular_deg_sdm,iou,iou_sdm\n";
  for (const auto& mr : reports) {
    const auto& a = mr.report;
    std::cout << mr.name << ',' << a.polis.mean << ',' << a.polis.sdm << ',' << a.angular.mean << ','
              << a.angular.sdm << ',' << a.iou.mean << ',' << a.iou.sdm << "\n";
  }

  if (r.at("overlays").get<bool>()) {
    const fs::path dir = out / "overlays";
    fs::create_directories(dir);
    for (const auto& mr : reports) {
      for (std::size_t i = 0; i < mr.pairs.size(); ++i) {
        geom::write_pgm(overlay(mr.pairs[i].first, mr.pairs[i].second, 128), dir / (mr.name + "_" + ids[i] + ".pgm"));
      }
    }
  }
}

// -------------------------------------------------------- resolution-sweep

void resolution_sweep(json r) {
  const auto source = synthroof::load_manifest(r.at("manifest").get<std::string>());
  const fs::path out = r.at("out").get<std::string>();
  std::vector<int> resolutions;
  for (const auto& s : r.at("resolutions")) {
    const std::string text = s.is_string() ? s.get<std::string>() : std::to_string(s.get<int>());
    int v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || v < 8) {
      throw UsageError("resolutions must be integers of at least 8, got '" + text + "'");
    }
    resolutions.push_back(v);
  }
  if (resolutions.empty()) throw UsageError("--resolutions must not be empty");
  model::Preset p = resolve_preset(r);
  r["model"] = model::to_json(p.model);
  r["train"] = model::to_json(p.train);
  write_run_json(out, "resolution-sweep", r);
  const auto sc = sampler_from(r);

  struct Row {
    int resolution;
    metrics::MetricsReport report;
  };
  std::vector<Row> rows;
  for (int res : resolutions) {
    const fs::path dir = out / ("res" + std::to_string(res));
    const auto manifest = synthroof::rerender_dataset(source, res, dir / "data");
    const auto o = train_to(manifest, p, dir, !r.at("quiet").get<bool>());
    const auto test = model::load_examples(manifest, synthroof::Split::test);
    const auto meshes = sample_split(o.result.model, test, sc, nullptr);
    std::vector<metrics::MeshPair> pairs;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < test.size(); ++i) {
      pairs.emplace_back(meshes[i], test[i].truth);
      ids.push_back(example_id(test[i]));
    }
    auto report = metrics::evaluate_batch(pairs);
    geom::write_file(dir / "report.csv", metrics::report_csv_header() + metrics::report_csv_rows("model", report, ids));
    rows.push_back({res, std::move(report)});
    std::cerr << "resolution " << res << " done\n";
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].report.polis.mean < rows[best].report.polis.mean) best = i;
  }
  std::string csv =
      "resolution,polis_mean,polis_sdm,angular_deg_mean,angular_deg_sdm,iou_mean,iou_sdm,best_polis\n";
  auto num = [](double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, ptr);
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& a = rows[i].report;
    csv += std::to_string(rows[i].resolution) + ',' + num(a.polis.mean) + ',' + num(a.polis.sdm) + ',' +
           num(a.angular.mean) + ',' + num(a.angular.sdm) + ',' + num(a.iou.mean) + ',' + num(a.iou.sdm) + ',' +
           (i == best ? "1" : "0") + '\n';
  }
  geom::write_file(out / "sweep.csv", csv);
  std::cout << (out / "sweep.csv").string() << "\n";
}

void add_preset_options(Options& o) {
  o.add<std::string>("preset", "toy", "Model preset: tiny, toy or paper");
  o.add<std::size_t>("epochs", 0, "Override the preset's epoch cap (0 keeps it)");
  o.flag("quiet", "Suppress per-epoch progress on standard error");
}

void add_sampler_options(Options& o) {
  o.add<double>("p", 0.95, "Nucleus probability mass in (0, 1]");
  o.flag("no-grammar-mask", "Sample without the grammar mask");
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"roofgen: synthetic roofs, mesh generation and evaluation"};
  app.require_subcommand(1);
  std::vector<std::pair<CLI::App*, std::unique_ptr<Options>>> subs;
  std::vector<std::shared_ptr<std::optional<std::uint64_t>>> seeds;
  auto make = [&](const std::string& name, const std::string& help) -> Options& {
    CLI::App* sub = app.add_subcommand(name, help);
    subs.emplace_back(sub, std::make_unique<Options>(sub));
    seeds.emplace_back();
    add_seed(sub, seeds.back());
    return *subs.back().second;
  };

  {
    Options& o = make("gen-data", "Generate a synthetic roof dataset");
    o.add<std::size_t>("n", 1000, "Number of examples (at least 10)");
    o.add<int>("resolution", 32, "Image side in pixels");
    o.list("kinds", {"flat", "shed", "gable", "hip", "pyramid"}, "Roof kinds, comma separated");
    o.flag("watertight", "Add walls and floor to every mesh");
    o.add<std::string>("out", "data", "Output directory");
  }
  {
    Options& o = make("train", "Train the vertex and face models");
    o.add<std::string>("manifest", "data/manifest.json", "Dataset manifest");
    add_preset_options(o);
    o.flag("dry-run", "Write run.json and print the resolved configuration without training");
    o.add<std::string>("out", "run", "Output directory");
  }
  {
    Options& o = make("sample", "Sample meshes from a checkpoint");
    o.add<std::string>("checkpoint", "run/model.ckpt", "Model checkpoint");
    o.add<std::string>("image", "", "Single PGM image to condition on");
    o.add<std::string>("manifest", "", "Dataset manifest (used when --image is absent)");
    o.add<std::string>("split", "test", "Manifest split to sample");
    o.add<std::size_t>("n-samples", 1, "Samples per image");
    add_sampler_options(o);
    o.add<std::string>("out", "samples", "Output directory");
  }
  {
    Options& o = make("eval", "Score predictions and baselines");
    o.add<std::string>("manifest", "data/manifest.json", "Dataset manifest");
    o.add<std::string>("split", "test", "Split to evaluate");
    o.add<std::string>("checkpoint", "", "Model checkpoint to sample from (also the knn encoder)");
    o.add<std::string>("predictions", "", "Directory of <id>_s0.obj predictions");
    o.flag("ground-truth", "Also score ground truth against itself");
    o.list("baseline", {}, "Baselines to score: random, knn");
    o.flag("raw-pixels", "knn on 8x8 averaged pixels instead of encoder features");
    o.add<std::size_t>("k", 1, "knn neighbours");
    o.add<int>("iou-resolution", 256, "IoU raster side");
    o.flag("polis-3d-vertices", "Use the 3-D vertex variant of PoLiS");
    o.flag("overlays", "Write footprint overlay PGMs");
    add_sampler_options(o);
    o.add<std::string>("out", "eval", "Output directory");
  }
  {
    Options& o = make("resolution-sweep", "Train and evaluate at several image resolutions");
    o.add<std::string>("manifest", "data/manifest.json", "Source dataset manifest");
    o.list("resolutions", {"8", "16", "32"}, "Image resolutions, comma separated");
    add_preset_options(o);
    add_sampler_options(o);
    o.add<std::string>("out", "sweep", "Output directory");
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, std::cout, std::cerr);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, std::cout, std::cerr);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cout, std::cerr);
    return kExitUsage;
  }

  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      CLI::App* sub = subs[i].first;
      if (!sub->parsed()) continue;
      json r = subs[i].second->resolve();
      if (*seeds[i]) r["seed"] = **seeds[i];
      const std::string name = sub->get_name();
      if (name == "gen-data") gen_data(r);
      else if (name == "train") train(r);
      else if (name == "sample") sample(r);
      else if (name == "eval") eval(r);
      else resolution_sweep(r);
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitOk;
}

}  // namespace roofgen::cli
