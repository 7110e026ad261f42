// Command-line front end for the taillight behavior-classification
// toolkit. Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 numeric failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "taillight/attention.hpp"
#include "taillight/corruption.hpp"
#include "taillight/dataset.hpp"
#include "taillight/image_io.hpp"
#include "taillight/metrics.hpp"
#include "taillight/net.hpp"
#include "taillight/night.hpp"
#include "taillight/parallel.hpp"
#include "taillight/pca.hpp"
#include "taillight/pipeline.hpp"
#include "taillight/rng.hpp"
#include "taillight/svm.hpp"

namespace fs = std::filesystem;
using namespace taillight;

namespace {

std::vector<fs::path> list_images(const fs::path& dir) {
  if (!fs::is_directory(dir))
    throw DataError("not a directory: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg")
      out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw DataError("no images in " + dir.string());
  return out;
}

std::vector<int> load_label_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open labels: " + path.string());
  std::vector<int> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tok, last;
    while (ls >> tok) last = tok;
    if (last.empty()) continue;
    try {
      out.push_back(std::stoi(last));
    } catch (...) {
      throw DataError(path.string() + ": bad class id '" + last + "'");
    }
  }
  if (out.empty()) throw DataError(path.string() + ": no labels");
  return out;
}

net::NetworkWeights resolve_weights(const std::string& arg,
                                    const net::NetworkSpec& spec) {
  if (arg.rfind("random:", 0) == 0) {
    std::uint64_t seed = 0;
    try {
      seed = std::stoull(arg.substr(7));
    } catch (...) {
      throw ConfigError("bad weight seed in '" + arg + "'");
    }
    return net::build_weights(spec, seed);
  }
  return net::load_weights(arg, spec);
}

std::vector<std::string> class_names() {
  std::vector<std::string> names;
  for (int c = 0; c < data::kClassCount; ++c)
    names.push_back(data::class_name(data::class_from_id(c)));
  return names;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"taillight signal behavior classification toolkit"};
  app.require_subcommand(1);

  // ---- ingest ----
  std::string in_images, in_labels, in_manifest;
  auto* ingest = app.add_subcommand("ingest", "validate a dataset directory");
  ingest->add_option("--images", in_images)->required();
  ingest->add_option("--labels", in_labels)->required();
  ingest->add_option("--manifest", in_manifest);
  ingest->callback([&] {
    auto frames = data::load_dataset_dir(in_images, in_labels);
    if (!in_manifest.empty()) data::load_split_overrides(in_manifest);
    std::array<int, data::kClassCount> counts{};
    for (const auto& f : frames) ++counts[static_cast<int>(f.label)];
    std::cout << "frames: " << frames.size() << "\n";
    for (int c = 0; c < data::kClassCount; ++c)
      std::cout << data::class_name(data::class_from_id(c)) << ": "
                << counts[c] << "\n";
  });

  // ---- day2night ----
  std::string d2n_in, d2n_labels, d2n_out, d2n_params;
  auto* d2n = app.add_subcommand("day2night",
                                 "pixel-wise day-to-night translation");
  d2n->add_option("--input", d2n_in)->required();
  d2n->add_option("--labels", d2n_labels)->required();
  d2n->add_option("--output", d2n_out)->required();
  d2n->add_option("--params", d2n_params);
  d2n->callback([&] {
    const auto params = d2n_params.empty()
                            ? night::default_night_params()
                            : night::load_params_file(d2n_params);
    auto frames = data::load_dataset_dir(d2n_in, d2n_labels);
    fs::create_directories(d2n_out);
    parallel_for(frames.size(), [&](std::size_t i) {
      const auto& f = frames[i];
      const auto mask =
          night::mask_from_box(f.box, f.image.width, f.image.height);
      save_image(fs::path(d2n_out) / (f.source_id + ".png"),
                 night::day_to_night(f.image, mask, params));
    });
    std::cout << "translated " << frames.size() << " images\n";
  });

  // ---- corrupt ----
  std::string cor_in, cor_out, cor_kinds = "train", cor_sev = "all";
  std::uint64_t cor_seed = 0;
  auto* cor = app.add_subcommand("corrupt", "apply corruption masks");
  cor->add_option("--input", cor_in)->required();
  cor->add_option("--output", cor_out)->required();
  cor->add_option("--kinds", cor_kinds, "comma list, or train|test");
  cor->add_option("--severity", cor_sev, "mild|moderate|severe|all");
  cor->add_option("--seed", cor_seed);
  cor->callback([&] {
    std::vector<corrupt::Kind> kinds;
    if (cor_kinds == "train")
      kinds = corrupt::corruption_partition(corrupt::Partition::train);
    else if (cor_kinds == "test")
      kinds = corrupt::corruption_partition(corrupt::Partition::test);
    else {
      std::istringstream ks(cor_kinds);
      std::string name;
      while (std::getline(ks, name, ','))
        if (!name.empty()) kinds.push_back(corrupt::kind_from_name(name));
    }
    std::vector<corrupt::Severity> severities;
    if (cor_sev == "all")
      severities = {corrupt::Severity::mild, corrupt::Severity::moderate,
                    corrupt::Severity::severe};
    else
      severities = {corrupt::severity_from_name(cor_sev)};

    const auto paths = list_images(cor_in);
    fs::create_directories(cor_out);
    struct Job {
      std::size_t image;
      corrupt::Kind kind;
      corrupt::Severity severity;
    };
    std::vector<Job> jobs;
    for (std::size_t i = 0; i < paths.size(); ++i)
      for (auto k : kinds)
        for (auto s : severities) jobs.push_back({i, k, s});
    parallel_for(jobs.size(), [&](std::size_t j) {
      const auto& job = jobs[j];
      const Image8 img = load_image(paths[job.image]);
      const auto spec = corrupt::make_spec(job.kind, job.severity, cor_seed);
      const auto result = corrupt::apply_corruption(img, spec);
      const std::string stem = paths[job.image].stem().string();
      save_image(fs::path(cor_out) /
                     (corrupt::provenance_stem(stem, spec) + ".png"),
                 result.image);
    });
    std::cout << "wrote " << jobs.size() << " corrupted images\n";
  });

  // ---- conspicuity ----
  std::string con_in;
  double con_alpha = -1.0;
  auto* con = app.add_subcommand(
      "conspicuity", "emit rarity-fusion conspicuity maps beside inputs");
  con->add_option("--input", con_in)->required();
  con->add_option("--alpha", con_alpha,
                  "also write the merged image at this blend weight");
  con->callback([&] {
    const auto paths = list_images(con_in);
    parallel_for(paths.size(), [&](std::size_t i) {
      const Image8 img = load_image(paths[i]);
      const auto stack = attention::filter_bank_maps(
          to_gray(img), attention::default_filter_bank());
      const auto cmap = attention::conspicuity_from_stack(stack);
      Image8 gray(cmap.width, cmap.height);
      for (int y = 0; y < cmap.height; ++y)
        for (int x = 0; x < cmap.width; ++x)
          for (int c = 0; c < 3; ++c)
            gray.at(x, y, c) = quantize01(cmap.at(x, y));
      const fs::path base = paths[i].parent_path() / paths[i].stem();
      save_image(base.string() + "__conspicuity.png", gray);
      if (con_alpha >= 0.0)
        save_image(base.string() + "__merged.png",
                   attention::merge_with_raw(img, cmap, con_alpha));
    });
    std::cout << "wrote " << paths.size() << " conspicuity maps\n";
  });

  // ---- maskfuse ----
  std::string mf_in, mf_out, mf_geometry, mf_weights;
  auto* mf = app.add_subcommand("maskfuse",
                                "fuse ROIs with the weighted mask");
  mf->add_option("--input", mf_in)->required();
  mf->add_option("--output", mf_out)->required();
  mf->add_option("--geometry", mf_geometry, "tier-fraction key=value file");
  mf->add_option("--weights", mf_weights, "omega,omega_prime,w_high");
  mf->callback([&] {
    attention::MaskGeometry geometry;
    if (!mf_geometry.empty())
      geometry = attention::load_mask_geometry(mf_geometry);
    double omega = 0.12, omega_prime = 0.14, w_high = 1.0;
    if (!mf_weights.empty()) {
      std::istringstream ws(mf_weights);
      char comma;
      if (!(ws >> omega >> comma >> omega_prime >> comma >> w_high))
        throw ConfigError("bad --weights, expected omega,omega_prime,w_high");
    }
    const auto paths = list_images(mf_in);
    fs::create_directories(mf_out);
    parallel_for(paths.size(), [&](std::size_t i) {
      const Image8 img = load_image(paths[i]);
      const auto mask = attention::build_weighted_mask(
          img.width, img.height, geometry, omega, omega_prime, w_high);
      save_image(fs::path(mf_out) / paths[i].filename(),
                 attention::fuse_mask(img, mask));
    });
    std::cout << "fused " << paths.size() << " ROIs\n";
  });

  // ---- extract ----
  std::string ex_images, ex_labels, ex_tap = "fc1", ex_weights = "random:42",
              ex_out, ex_labels_out;
  auto* ex = app.add_subcommand("extract", "network feature extraction");
  ex->add_option("--images", ex_images)->required();
  ex->add_option("--labels", ex_labels,
                 "label dir; when set, ROIs are cropped first");
  ex->add_option("--tap", ex_tap, "fc1|fc2");
  ex->add_option("--weights", ex_weights, "weight file or random:SEED");
  ex->add_option("--out", ex_out)->required();
  ex->add_option("--labels-out", ex_labels_out);
  ex->callback([&] {
    if (ex_tap != "fc1" && ex_tap != "fc2")
      throw ConfigError("--tap must be fc1 or fc2");
    const auto spec = net::vgg16_spec();
    const auto weights = resolve_weights(ex_weights, spec);

    std::vector<Image8> rois;
    std::vector<std::string> ids;
    std::vector<int> labels;
    if (!ex_labels.empty()) {
      auto frames = data::load_dataset_dir(ex_images, ex_labels);
      for (auto& f : frames) {
        rois.push_back(data::crop_roi(f).image);
        ids.push_back(f.source_id);
        labels.push_back(static_cast<int>(f.label));
      }
    } else {
      for (const auto& p : list_images(ex_images)) {
        rois.push_back(load_image(p));
        ids.push_back(p.stem().string());
      }
    }
    pca::FeatureMatrix x;
    x.n = rois.size();
    x.d = 4096;
    x.row_ids = ids;
    x.data.resize(x.n * x.d);
    const net::Forwarder forwarder(spec, weights);
    const std::size_t flat_dim = spec.flatten_dim();
    std::vector<double> pooled(rois.size() * flat_dim);
    parallel_for(rois.size(), [&](std::size_t i) {
      const auto flat = forwarder.conv_features(net::resize_to_input(rois[i]));
      std::copy(flat.begin(), flat.end(), pooled.begin() + i * flat_dim);
    });
    const auto taps = forwarder.fc_taps(pooled, rois.size());
    const auto& rows = ex_tap == "fc2" ? taps.fc2 : taps.fc1;
    std::copy(rows.begin(), rows.end(), x.data.begin());
    pca::save_features(ex_out, x);
    if (!ex_labels_out.empty()) {
      if (labels.empty())
        throw ConfigError("--labels-out requires --labels");
      std::ofstream out(ex_labels_out);
      for (std::size_t i = 0; i < labels.size(); ++i)
        out << ids[i] << " " << labels[i] << "\n";
    }
    std::cout << "extracted " << x.n << " x " << x.d << " features\n";
  });

  // ---- fit-pca ----
  std::string fp_features, fp_out;
  int fp_k = 250;
  auto* fp = app.add_subcommand("fit-pca", "fit the PCA reduction");
  fp->add_option("--features", fp_features)->required();
  fp->add_option("--k", fp_k);
  fp->add_option("--out", fp_out)->required();
  fp->callback([&] {
    const auto x = pca::load_features(fp_features);
    const auto model = pca::fit(x, static_cast<std::size_t>(fp_k));
    pca::save_model(fp_out, model);
    double kept = 0.0;
    for (double r : pca::explained_variance_ratio(model)) kept += r;
    std::cout << "fit " << x.n << " samples " << x.d << " -> " << fp_k
              << " dims, explained variance " << kept << "\n";
  });

  // ---- fit-svm ----
  std::string fv_features, fv_labels, fv_out;
  double fv_c = 1.0, fv_margin = 100.0;
  int fv_epochs = 100;
  std::uint64_t fv_seed = 0;
  auto* fv = app.add_subcommand("fit-svm", "fit the multiclass SVM");
  fv->add_option("--features", fv_features)->required();
  fv->add_option("--labels", fv_labels)->required();
  fv->add_option("--c", fv_c);
  fv->add_option("--epochs", fv_epochs);
  fv->add_option("--seed", fv_seed);
  fv->add_option("--margin-scale", fv_margin);
  fv->add_option("--out", fv_out)->required();
  fv->callback([&] {
    const auto x = pca::load_features(fv_features);
    const auto labels = load_label_lines(fv_labels);
    if (labels.size() != x.n)
      throw DataError("label count does not match feature rows");
    svm::TrainSet ts;
    ts.d = x.d;
    ts.k = data::kClassCount;
    ts.x = x.data;
    ts.y = labels;
    svm::FitOptions opts;
    opts.c = fv_c;
    opts.epochs = fv_epochs;
    opts.seed = fv_seed;
    opts.margin_scale = fv_margin;
    const auto model = svm::fit(ts, opts);
    svm::save_model(fv_out, model);
    std::cout << "objective: " << svm::objective(model, ts) << "\n";
  });

  // ---- predict ----
  std::string pr_features, pr_pca, pr_svm, pr_out;
  auto* pr = app.add_subcommand("predict", "classify feature rows");
  pr->add_option("--features", pr_features)->required();
  pr->add_option("--pca", pr_pca);
  pr->add_option("--svm", pr_svm)->required();
  pr->add_option("--out", pr_out)->required();
  pr->callback([&] {
    auto x = pca::load_features(pr_features);
    if (!pr_pca.empty())
      x = pca::transform_matrix(pca::load_model(pr_pca), x);
    const auto model = svm::load_model(pr_svm);
    std::ofstream out(pr_out);
    if (!out) throw DataError("cannot write " + pr_out);
    for (std::size_t i = 0; i < x.n; ++i)
      out << x.row_ids[i] << " " << svm::predict(model, x.row(i)) << "\n";
    std::cout << "predicted " << x.n << " rows\n";
  });

  // ---- eval ----
  std::string ev_pred, ev_labels, ev_out;
  bool ev_csv = false;
  auto* ev = app.add_subcommand("eval", "metric report from predictions");
  ev->add_option("--pred", ev_pred)->required();
  ev->add_option("--labels", ev_labels)->required();
  ev->add_flag("--csv", ev_csv, "comma-separated output");
  ev->add_option("--out", ev_out, "also write the report to a file");
  ev->callback([&] {
    const auto preds = load_label_lines(ev_pred);
    const auto labels = load_label_lines(ev_labels);
    if (preds.size() != labels.size())
      throw DataError("prediction/label count mismatch");
    const auto cm =
        metrics::confusion_matrix(preds, labels, data::kClassCount);
    const auto report = metrics::overall_report(cm);
    const auto names = class_names();
    const std::string text =
        ev_csv ? metrics::format_report_csv(report, names)
               : metrics::format_report(report, &cm, names);
    std::cout << text;
    if (!ev_out.empty()) {
      std::ofstream out(ev_out);
      out << text;
    }
  });

  // ---- run ----
  std::string run_config;
  bool run_print = false;
  auto* run = app.add_subcommand("run", "end-to-end pipeline");
  run->add_option("--config", run_config)->required();
  run->add_flag("--print-config", run_print,
                "print the resolved config and exit");
  run->callback([&] {
    const auto cfg = pipeline::load_config(run_config);
    if (run_print) {
      pipeline::validate_config(cfg);
      std::cout << pipeline::format_config(cfg);
      return;
    }
    const auto manifest = pipeline::run_pipeline(cfg);
    std::cout << manifest.report_text;
    std::cout << "artifacts in " << cfg.output_dir << "\n";
  });

  // ---- ablate ----
  std::string ab_config, ab_axis;
  auto* ab = app.add_subcommand("ablate", "paired base/ablated runs");
  ab->add_option("--config", ab_config)->required();
  ab->add_option("--axis", ab_axis, "corruption_off|tap_fc2|pca_off")
      ->required();
  ab->callback([&] {
    const auto cfg = pipeline::load_config(ab_config);
    const auto result =
        pipeline::ablate(cfg, pipeline::ablation_axis_from_name(ab_axis));
    std::cout << metrics::format_deltas(result.drop);
  });

  // ---- toygen ----
  std::string toy_out;
  int toy_per_class = 200, toy_canvas = 64;
  double toy_jitter = 1.0;
  std::uint64_t toy_seed = 7;
  auto* toy = app.add_subcommand("toygen", "synthetic ROI dataset");
  toy->add_option("--out", toy_out)->required();
  toy->add_option("--per-class", toy_per_class);
  toy->add_option("--canvas", toy_canvas);
  toy->add_option("--jitter", toy_jitter);
  toy->add_option("--seed", toy_seed);
  toy->callback([&] {
    const auto frames = pipeline::generate_toy_dataset(
        {toy_canvas, toy_jitter}, toy_per_class, toy_seed);
    data::save_dataset_dir(toy_out, frames);
    std::cout << "wrote " << frames.size() << " frames to " << toy_out << "\n";
  });

  // ---- shift-eval ----
  std::string se_manifest, se_data;
  auto* se = app.add_subcommand(
      "shift-eval", "evaluate persisted models on an external dataset");
  se->add_option("--manifest", se_manifest)->required();
  se->add_option("--data", se_data)->required();
  se->callback([&] {
    const auto report = pipeline::evaluate_domain_shift(se_manifest, se_data);
    std::cout << metrics::format_report(report, nullptr, class_names());
  });

  CLI11_PARSE(app, argc, argv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
