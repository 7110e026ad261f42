#include "taillight/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "taillight/digest.hpp"
#include "taillight/parallel.hpp"
#include "taillight/rng.hpp"

namespace taillight::pipeline {

namespace fs = std::filesystem;

namespace {

class StageClock {
 public:
  explicit StageClock(std::vector<StageTiming>& sink) : sink_(sink) {}
  template <typename Fn>
  auto run(const std::string& name, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        record(name, start);
      } else {
        auto out = fn();
        record(name, start);
        return out;
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const DataError& e) {
      throw DataError("stage " + name + ": " + e.what());
    } catch (const NumericError& e) {
      throw NumericError("stage " + name + ": " + e.what());
    }
  }

 private:
  void record(const std::string& name,
              std::chrono::steady_clock::time_point start) {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    sink_.push_back({name, ms});
  }
  std::vector<StageTiming>& sink_;
};

std::vector<std::string> split_csv(const std::string& csv) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    const auto b = item.find_last_not_of(" \t");
    out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

std::vector<corrupt::Kind> resolve_kinds(const std::string& kinds) {
  if (kinds == "train")
    return corrupt::corruption_partition(corrupt::Partition::train);
  if (kinds == "test")
    return corrupt::corruption_partition(corrupt::Partition::test);
  std::vector<corrupt::Kind> out;
  for (const auto& name : split_csv(kinds))
    out.push_back(corrupt::kind_from_name(name));
  return out;
}

std::vector<corrupt::Severity> resolve_severities(const std::string& sev) {
  if (sev == "all")
    return {corrupt::Severity::mild, corrupt::Severity::moderate,
            corrupt::Severity::severe};
  std::vector<corrupt::Severity> out;
  for (const auto& name : split_csv(sev))
    out.push_back(corrupt::severity_from_name(name));
  return out;
}

struct FeatureContext {
  const PipelineConfig* cfg = nullptr;
  net::NetworkSpec spec;
  net::NetworkWeights weights;
  attention::MaskGeometry geometry;
};

FeatureContext make_feature_context(const PipelineConfig& cfg) {
  FeatureContext ctx;
  ctx.cfg = &cfg;
  ctx.spec = net::vgg16_spec();
  if (!cfg.mask_geometry_file.empty())
    ctx.geometry = attention::load_mask_geometry(cfg.mask_geometry_file);
  if (cfg.feature_weights.rfind("random:", 0) == 0) {
    std::uint64_t seed = 0;
    try {
      seed = std::stoull(cfg.feature_weights.substr(7));
    } catch (...) {
      throw ConfigError("config: features.weights random seed is not a "
                        "number: " + cfg.feature_weights);
    }
    ctx.weights = net::build_weights(ctx.spec, seed);
  } else {
    ctx.weights = net::load_weights(cfg.feature_weights, ctx.spec);
  }
  return ctx;
}

/// Full frame -> (optional conspicuity merge) -> ROI crop -> (optional
/// mask fusion) -> 224x224 tensor.
net::Tensor frame_to_input(const data::AnnotatedFrame& frame,
                           const FeatureContext& ctx) {
  const PipelineConfig& cfg = *ctx.cfg;
  data::AnnotatedFrame working = frame;
  if (cfg.conspicuity_enabled) {
    const auto stack = attention::filter_bank_maps(
        to_gray(working.image), attention::default_filter_bank());
    const auto cmap = attention::conspicuity_from_stack(stack);
    working.image = attention::merge_with_raw(working.image, cmap,
                                              cfg.conspicuity_alpha);
  }
  RoiImage roi = data::crop_roi(working);
  if (cfg.maskfuse_enabled) {
    const auto mask = attention::build_weighted_mask(
        roi.image.width, roi.image.height, ctx.geometry, cfg.mask_omega,
        cfg.mask_omega_prime, cfg.mask_w_high);
    roi.image = attention::fuse_mask(roi.image, mask);
  }
  return net::resize_to_input(roi.image, ctx.spec.input_size);
}

struct LabeledFeatures {
  pca::FeatureMatrix x;
  std::vector<int> labels;
};

/// Two phases: the convolution stacks map over images in parallel, then
/// one batched FC evaluation produces the taps (FC-1 bandwidth
/// amortizes over the whole set).
LabeledFeatures extract_features(const std::vector<data::AnnotatedFrame>& frames,
                                 const FeatureContext& ctx) {
  LabeledFeatures out;
  out.x.n = frames.size();
  out.x.d = 4096;
  out.labels.resize(frames.size());
  out.x.row_ids.resize(frames.size());
  if (frames.empty()) return out;
  out.x.data.resize(frames.size() * out.x.d);

  const net::Forwarder forwarder(ctx.spec, ctx.weights);
  const std::size_t flat_dim = ctx.spec.flatten_dim();
  const bool want_fc2 = ctx.cfg->feature_tap == "fc2";

  constexpr std::size_t kBatch = 512;
  std::vector<double> pooled(std::min(frames.size(), kBatch) * flat_dim);
  for (std::size_t begin = 0; begin < frames.size(); begin += kBatch) {
    const std::size_t count = std::min(kBatch, frames.size() - begin);
    parallel_for(count, [&](std::size_t i) {
      const auto flat =
          forwarder.conv_features(frame_to_input(frames[begin + i], ctx));
      std::copy(flat.begin(), flat.end(), pooled.begin() + i * flat_dim);
      out.labels[begin + i] = static_cast<int>(frames[begin + i].label);
      out.x.row_ids[begin + i] = frames[begin + i].source_id;
    });
    const auto taps = forwarder.fc_taps(
        std::span<const double>(pooled.data(), count * flat_dim), count);
    const auto& rows = want_fc2 ? taps.fc2 : taps.fc1;
    std::copy(rows.begin(), rows.end(), out.x.data.begin() + begin * out.x.d);
  }
  return out;
}

double validation_accuracy(const svm::SvmModel& model,
                           const pca::FeatureMatrix& x,
                           const std::vector<int>& labels) {
  if (x.n == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < x.n; ++i)
    if (svm::predict(model, x.row(i)) == labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(x.n);
}

std::vector<std::string> behavior_class_names() {
  std::vector<std::string> names;
  for (int c = 0; c < data::kClassCount; ++c)
    names.push_back(data::class_name(data::class_from_id(c)));
  return names;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

}  // namespace

RunManifest run_pipeline(const PipelineConfig& cfg) {
  validate_config(cfg);
  const fs::path out_dir(cfg.output_dir);
  fs::create_directories(out_dir);

  RunManifest manifest;
  manifest.config_text = format_config(cfg);
  StageClock clock(manifest.stages);

  // Ingest: toy generator or directory pair, then the seeded split.
  auto split = clock.run("ingest", [&] {
    std::vector<data::AnnotatedFrame> frames;
    if (cfg.toy_enabled) {
      frames = generate_toy_dataset({cfg.toy_canvas, cfg.toy_jitter},
                                    cfg.toy_per_class, cfg.toy_seed);
    } else {
      frames = data::load_dataset_dir(cfg.dataset_images, cfg.dataset_labels);
    }
    std::map<std::string, data::SplitName> overrides;
    if (!cfg.dataset_manifest.empty())
      overrides = data::load_split_overrides(cfg.dataset_manifest);
    return data::split_dataset(std::move(frames), cfg.split_ratios,
                               cfg.split_seed, overrides);
  });

  if (cfg.export_test)
    clock.run("export_test",
              [&] { data::save_dataset_dir(out_dir / "test_set", split.test); });

  const std::size_t clean_train = split.train.size();

  // Night synthesis augments the training originals; the originals stay.
  if (cfg.night_enabled) {
    clock.run("night", [&] {
      const night::NightParamPair params =
          cfg.night_params_file.empty()
              ? night::default_night_params()
              : night::load_params_file(cfg.night_params_file);
      std::vector<data::AnnotatedFrame> synth(clean_train);
      parallel_for(clean_train, [&](std::size_t i) {
        const auto& src = split.train[i];
        const auto mask = night::mask_from_box(src.box, src.image.width,
                                               src.image.height);
        synth[i] = src;
        synth[i].image = night::day_to_night(src.image, mask, params);
        synth[i].source_id = src.source_id + "__night";
      });
      for (auto& f : synth) split.train.push_back(std::move(f));
    });
  }

  // Corruption augments the training originals with train-partition
  // masks only (validate_config already enforced the partition).
  if (cfg.corrupt_enabled) {
    clock.run("corrupt", [&] {
      const auto kinds = resolve_kinds(cfg.corrupt_kinds);
      const auto severities = resolve_severities(cfg.corrupt_severities);
      struct Job {
        std::size_t frame;
        corrupt::Kind kind;
        corrupt::Severity severity;
      };
      std::vector<Job> jobs;
      for (std::size_t i = 0; i < clean_train; ++i)
        for (auto kind : kinds)
          for (auto sev : severities) jobs.push_back({i, kind, sev});
      std::vector<data::AnnotatedFrame> corrupted(jobs.size());
      parallel_for(jobs.size(), [&](std::size_t j) {
        const auto& job = jobs[j];
        const auto& src = split.train[job.frame];
        const auto spec = corrupt::make_spec(
            job.kind, job.severity,
            mix_keys(cfg.corrupt_seed, job.frame,
                     static_cast<std::uint64_t>(job.kind)));
        auto result = corrupt::apply_corruption(src.image, spec);
        corrupted[j] = src;
        corrupted[j].image = std::move(result.image);
        corrupted[j].source_id =
            corrupt::provenance_stem(src.source_id, spec);
      });
      for (auto& f : corrupted) split.train.push_back(std::move(f));

      // Hygiene assertion over the whole run: no held-out benchmark
      // mask may appear in any training provenance.
      for (const auto& frame : split.train)
        for (auto kind : corrupt::corruption_partition(corrupt::Partition::test))
          if (frame.source_id.find(std::string("__") +
                                   corrupt::kind_name(kind) + "__") !=
              std::string::npos)
            throw DataError("test-partition corruption leaked into training: " +
                            frame.source_id);
    });
  }

  // Attention + network features for every split.
  const FeatureContext ctx =
      clock.run("weights", [&] { return make_feature_context(cfg); });
  auto train = clock.run("features_train",
                         [&] { return extract_features(split.train, ctx); });
  auto val = clock.run("features_validation",
                       [&] { return extract_features(split.validation, ctx); });
  auto test = clock.run("features_test",
                        [&] { return extract_features(split.test, ctx); });

  // PCA reduction (train-only statistics unless configured otherwise).
  if (cfg.pca_enabled) {
    const pca::PcaModel model = clock.run("pca", [&] {
      const pca::FeatureMatrix* fit_on = &train.x;
      pca::FeatureMatrix combined;
      if (cfg.pca_fit_on == "all") {
        combined = train.x;
        for (const auto* part : {&val.x, &test.x}) {
          combined.data.insert(combined.data.end(), part->data.begin(),
                               part->data.end());
          combined.row_ids.insert(combined.row_ids.end(),
                                  part->row_ids.begin(), part->row_ids.end());
          combined.n += part->n;
        }
        fit_on = &combined;
      }
      auto m = pca::fit(*fit_on, static_cast<std::size_t>(cfg.pca_k));
      train.x = pca::transform_matrix(m, train.x);
      if (val.x.n) val.x = pca::transform_matrix(m, val.x);
      if (test.x.n) test.x = pca::transform_matrix(m, test.x);
      return m;
    });
    pca::save_model(out_dir / "pca.tlpc", model);
  }

  // SVM fit, with the validation split driving c when c = auto.
  const svm::SvmModel model = clock.run("svm", [&] {
    svm::TrainSet ts;
    ts.d = train.x.d;
    ts.k = data::kClassCount;
    ts.x = train.x.data;
    ts.y = train.labels;

    svm::FitOptions opts;
    opts.epochs = cfg.svm_epochs;
    opts.seed = cfg.svm_seed;
    opts.margin_scale = cfg.svm_margin_scale;

    if (cfg.svm_c == "auto" && val.x.n > 0) {
      const double grid[] = {0.01, 0.1, 1.0, 10.0, 100.0};
      double best_acc = -1.0;
      svm::SvmModel best;
      for (double c : grid) {
        opts.c = c;
        svm::SvmModel candidate = svm::fit(ts, opts);
        const double acc = validation_accuracy(candidate, val.x, val.labels);
        if (acc > best_acc) {
          best_acc = acc;
          best = std::move(candidate);
        }
      }
      return best;
    }
    opts.c = cfg.svm_c == "auto" ? 1.0 : std::stod(cfg.svm_c);
    return svm::fit(ts, opts);
  });
  svm::save_model(out_dir / "svm.tlsv", model);

  // Held-out evaluation.
  clock.run("eval", [&] {
    if (test.x.n == 0) throw DataError("test split is empty");
    std::vector<int> preds(test.x.n);
    for (std::size_t i = 0; i < test.x.n; ++i)
      preds[i] = svm::predict(model, test.x.row(i));
    manifest.confusion =
        metrics::confusion_matrix(preds, test.labels, data::kClassCount);
    manifest.report = metrics::overall_report(manifest.confusion);
  });

  const auto names = behavior_class_names();
  manifest.report_text =
      metrics::format_report(manifest.report, &manifest.confusion, names);
  write_text(out_dir / "report.txt", manifest.report_text);
  write_text(out_dir / "report.csv",
             metrics::format_report_csv(manifest.report, names));

  auto add_artifact = [&](const std::string& name, const std::string& file) {
    manifest.artifacts.push_back({name, file, sha256_file(out_dir / file)});
  };
  if (cfg.pca_enabled) add_artifact("pca_model", "pca.tlpc");
  add_artifact("svm_model", "svm.tlsv");
  add_artifact("report", "report.txt");
  add_artifact("report_csv", "report.csv");

  save_manifest(out_dir / "manifest.txt", manifest);
  return manifest;
}

void save_manifest(const fs::path& path, const RunManifest& m) {
  std::ostringstream out;
  out << "# taillight run manifest v1\n";
  out << "== config ==\n" << m.config_text;
  out << "== stages ==\n";
  for (const auto& s : m.stages) out << s.name << "_ms = " << s.millis << "\n";
  out << "== artifacts ==\n";
  for (const auto& a : m.artifacts)
    out << a.name << "\t" << a.filename << "\t" << a.sha256 << "\n";
  out << "== metrics ==\n" << m.report_text;
  write_text(path, out.str());
}

RunManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path.string());
  RunManifest m;
  std::string line, section;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) continue;
    if (line.rfind("== ", 0) == 0 && line.find(" ==") != std::string::npos) {
      section = line.substr(3, line.find(" ==") - 3);
      continue;
    }
    if (section == "config") {
      m.config_text += line + "\n";
    } else if (section == "stages") {
      const auto eq = line.find(" = ");
      if (eq == std::string::npos) continue;
      StageTiming t;
      t.name = line.substr(0, eq);
      if (t.name.size() > 3 && t.name.ends_with("_ms"))
        t.name.resize(t.name.size() - 3);
      t.millis = std::stoll(line.substr(eq + 3));
      m.stages.push_back(t);
    } else if (section == "artifacts") {
      const auto t1 = line.find('\t');
      const auto t2 = line.rfind('\t');
      if (t1 == std::string::npos || t2 == t1) continue;
      m.artifacts.push_back({line.substr(0, t1),
                             line.substr(t1 + 1, t2 - t1 - 1),
                             line.substr(t2 + 1)});
    } else if (section == "metrics") {
      m.report_text += line + "\n";
    }
  }
  // Tamper check: stored digests must match the files on disk.
  const fs::path dir = path.parent_path();
  for (const auto& a : m.artifacts) {
    const std::string actual = sha256_file(dir / a.filename);
    if (actual != a.sha256)
      throw DataError("manifest digest mismatch for " + a.filename +
                      " (file changed since the run)");
  }
  return m;
}

metrics::MetricsReport evaluate_domain_shift(const fs::path& manifest_path,
                                             const fs::path& data_dir) {
  const RunManifest manifest = load_manifest(manifest_path);
  const PipelineConfig cfg =
      parse_config_text(manifest.config_text, manifest_path.string());
  const fs::path run_dir = manifest_path.parent_path();

  const bool has_pca = std::any_of(
      manifest.artifacts.begin(), manifest.artifacts.end(),
      [](const ArtifactDigest& a) { return a.name == "pca_model"; });

  pca::PcaModel pca_model;
  if (has_pca) pca_model = pca::load_model(run_dir / "pca.tlpc");
  const svm::SvmModel model = svm::load_model(run_dir / "svm.tlsv");

  auto frames =
      data::load_dataset_dir(data_dir / "images", data_dir / "labels");
  const FeatureContext ctx = make_feature_context(cfg);
  auto feats = extract_features(frames, ctx);
  if (has_pca) feats.x = pca::transform_matrix(pca_model, feats.x);

  std::vector<int> preds(feats.x.n);
  for (std::size_t i = 0; i < feats.x.n; ++i)
    preds[i] = svm::predict(model, feats.x.row(i));
  const auto cm =
      metrics::confusion_matrix(preds, feats.labels, data::kClassCount);
  return metrics::overall_report(cm);
}

AblationAxis ablation_axis_from_name(const std::string& name) {
  if (name == "corruption_off") return AblationAxis::corruption_off;
  if (name == "tap_fc2") return AblationAxis::tap_fc2;
  if (name == "pca_off") return AblationAxis::pca_off;
  throw ConfigError("unknown ablation axis: '" + name + "'");
}

AblationResult ablate(const PipelineConfig& config, AblationAxis axis) {
  PipelineConfig base = config;
  base.output_dir = (fs::path(config.output_dir) / "base").string();

  PipelineConfig ablated = config;
  std::string axis_name;
  switch (axis) {
    case AblationAxis::corruption_off:
      ablated.corrupt_enabled = false;
      axis_name = "corruption_off";
      break;
    case AblationAxis::tap_fc2:
      ablated.feature_tap = "fc2";
      axis_name = "tap_fc2";
      break;
    case AblationAxis::pca_off:
      ablated.pca_enabled = false;
      axis_name = "pca_off";
      break;
  }
  ablated.output_dir = (fs::path(config.output_dir) / axis_name).string();

  AblationResult result;
  result.base = run_pipeline(base);
  result.ablated = run_pipeline(ablated);
  result.drop = metrics::robustness_drop(result.base.report,
                                         result.ablated.report);

  std::ostringstream out;
  out << "axis: " << axis_name << "\n"
      << "== base ==\n" << result.base.report_text
      << "== ablated ==\n" << result.ablated.report_text
      << "== robustness drop (base - ablated) ==\n"
      << metrics::format_deltas(result.drop);
  write_text(fs::path(config.output_dir) / ("ablate_" + axis_name + ".txt"),
             out.str());
  return result;
}

}  // namespace taillight::pipeline
