// Acceptance suite: one pass/fail line per criterion. Exits nonzero if
// any criterion fails. argv[1] is the tests/ source directory (golden
// corpus location).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "night_oracle.hpp"
#include "reference_images.hpp"
#include "reference_matrices.hpp"
#include "taillight/attention.hpp"
#include "taillight/corruption.hpp"
#include "taillight/image_io.hpp"
#include "taillight/metrics.hpp"
#include "taillight/night.hpp"
#include "taillight/pca.hpp"
#include "taillight/pipeline.hpp"
#include "taillight/rng.hpp"
#include "taillight/svm.hpp"

using namespace taillight;
namespace fs = std::filesystem;

namespace {

class Runner {
 public:
  void criterion(int number, const std::string& name,
                 const std::function<void()>& body) {
    failures_.clear();
    const auto start = std::chrono::steady_clock::now();
    try {
      body();
    } catch (const std::exception& e) {
      failures_.push_back(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (failures_.empty()) {
      std::printf("PASS criterion %2d: %s (%.2fs)\n", number, name.c_str(),
                  secs);
    } else {
      ++failed_;
      std::printf("FAIL criterion %2d: %s (%.2fs)\n", number, name.c_str(),
                  secs);
      for (const auto& f : failures_) std::printf("      - %s\n", f.c_str());
    }
  }

  void expect(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }

  template <typename T>
  void expect_near(T got, T want, T tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      std::ostringstream msg;
      msg << what << ": got " << got << ", want " << want << " +/- " << tol;
      failures_.push_back(msg.str());
    }
  }

  int failed() const { return failed_; }

 private:
  std::vector<std::string> failures_;
  int failed_ = 0;
};

std::vector<char> file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// ---- criterion bodies ----------------------------------------------

void table3_oracle(Runner& r) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto fc1 = metrics::overall_report(fig8_fc1());
  const auto fc2 = metrics::overall_report(fig8_fc2());

  const double fc1_class[4][5] = {
      {96.68, 92.31, 97.26, 95.01, 93.64},
      {96.34, 92.03, 97.23, 93.73, 92.87},
      {95.21, 90.83, 97.10, 89.30, 90.06},
      {96.05, 93.40, 97.92, 90.31, 91.83},
  };
  const double fc2_class[4][5] = {
      {96.05, 91.42, 96.97, 93.42, 92.41},
      {96.18, 90.41, 96.56, 95.08, 92.69},
      {96.02, 92.20, 97.52, 91.37, 91.78},
      {94.77, 92.20, 97.63, 85.97, 88.98},
  };
  auto check_class = [&](const metrics::ClassMetrics& m, const double* want,
                         const std::string& tag) {
    r.expect_near(m.acc * 100, want[0], 0.01, tag + " acc");
    r.expect_near(m.pre * 100, want[1], 0.01, tag + " pre");
    r.expect_near(m.spe * 100, want[2], 0.01, tag + " spe");
    r.expect_near(m.sen * 100, want[3], 0.01, tag + " sen");
    r.expect_near(m.f1 * 100, want[4], 0.01, tag + " f1");
  };
  for (int c = 0; c < 4; ++c) {
    check_class(fc1.per_class[c], fc1_class[c],
                "fc1 class " + std::to_string(c));
    check_class(fc2.per_class[c], fc2_class[c],
                "fc2 class " + std::to_string(c));
  }
  r.expect_near(fc1.overall.acc * 100, 92.14, 0.01, "fc1 overall acc");
  r.expect_near(fc1.overall.pre * 100, 92.14, 0.01, "fc1 overall pre");
  r.expect_near(fc1.overall.spe * 100, 97.38, 0.01, "fc1 overall spe");
  r.expect_near(fc1.overall.sen * 100, 92.09, 0.01, "fc1 overall sen");
  r.expect_near(fc1.overall.f1 * 100, 92.10, 0.01, "fc1 overall f1");
  r.expect_near(fc2.overall.acc * 100, 91.52, 0.01, "fc2 overall acc");
  r.expect_near(fc2.overall.sen * 100, 91.46, 0.01, "fc2 overall sen");
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  r.expect(secs < 1.0, "metric oracle must complete in under one second");
}

void kappa_oracle(Runner& r) {
  r.expect_near(metrics::cohen_kappa(fig8_fc1()), 0.895, 0.001, "fc1 kappa");
  r.expect_near(metrics::cohen_kappa(fig8_fc2()), 0.887, 0.001, "fc2 kappa");
  // The published per-class kappa column (0.490 for braking) matches no
  // standard definition; the binary one-vs-rest kappa we report is a
  // different, documented quantity.
  const auto braking =
      metrics::class_metrics(metrics::per_class_counts(fig8_fc1(), 0));
  r.expect(std::abs(braking.kappa - 0.490) > 0.05,
           "per-class binary kappa intentionally differs from the published "
           "column");
  r.expect(braking.kappa >= -1.0 && braking.kappa <= 1.0,
           "per-class kappa in range");
}

void robustness_drop_oracle(Runner& r) {
  auto base = metrics::overall_report(fig8_fc1());
  auto corrupted_off = base;
  base.overall.acc = 0.9214;
  base.overall.kappa = 0.895;
  corrupted_off.overall.acc = 0.6656;
  corrupted_off.overall.kappa = 0.554;
  const auto d1 = metrics::robustness_drop(base, corrupted_off);
  r.expect_near(d1.acc, 25.58, 1e-9, "fc1 accuracy drop");
  r.expect_near(d1.kappa, 0.341, 1e-9, "fc1 kappa drop");

  auto base2 = metrics::overall_report(fig8_fc2());
  auto off2 = base2;
  base2.overall.acc = 0.9152;
  base2.overall.kappa = 0.887;
  off2.overall.acc = 0.6525;
  off2.overall.kappa = 0.536;
  const auto d2 = metrics::robustness_drop(base2, off2);
  r.expect_near(d2.acc, 26.27, 1e-9, "fc2 accuracy drop");
  r.expect_near(d2.kappa, 0.351, 1e-9, "fc2 kappa drop");
}

pipeline::PipelineConfig toy_config(const fs::path& out_dir) {
  pipeline::PipelineConfig cfg;
  cfg.toy_enabled = true;
  cfg.toy_per_class = 200;
  cfg.toy_canvas = 64;
  cfg.toy_jitter = 1.0;
  cfg.toy_seed = 7;
  cfg.split_seed = 17;
  cfg.pca_k = 50;
  cfg.svm_c = "auto";
  cfg.svm_epochs = 30;
  cfg.svm_seed = 3;
  cfg.output_dir = out_dir.string();
  cfg.export_test = true;
  return cfg;
}

void toy_end_to_end(Runner& r, const fs::path& work_dir) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = toy_config(work_dir / "toy_run");
  const auto manifest = pipeline::run_pipeline(cfg);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::printf("      toy pipeline: accuracy %.4f in %.1fs\n",
              manifest.report.overall.acc, secs);
  r.expect(manifest.report.overall.acc >= 0.90,
           "toy test accuracy must reach 0.90, got " +
               std::to_string(manifest.report.overall.acc));
  r.expect(secs < 300.0, "toy pipeline must finish inside five minutes");

  // Domain-shift path: the exported held-out set reproduces the run's
  // own test report and leaves every artifact untouched.
  const auto report = pipeline::evaluate_domain_shift(
      work_dir / "toy_run" / "manifest.txt", work_dir / "toy_run" / "test_set");
  r.expect(metrics::format_report(report, nullptr) ==
               metrics::format_report(manifest.report, nullptr),
           "shift evaluation must reproduce the run's test report");
  try {
    pipeline::load_manifest(work_dir / "toy_run" / "manifest.txt");
  } catch (const std::exception& e) {
    r.expect(false, std::string("artifact digests changed: ") + e.what());
  }
}

void day_to_night_oracle(Runner& r) {
  const auto defaults = night::default_night_params();
  CounterRng rng(0xacce5517);
  int worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::array<std::uint8_t, 3> px{
        static_cast<std::uint8_t>(rng.next_below(256)),
        static_cast<std::uint8_t>(rng.next_below(256)),
        static_cast<std::uint8_t>(rng.next_below(256))};
    for (const auto* params : {&defaults.foreground, &defaults.background}) {
      const auto got = night::apply_adjustments(px, *params);
      const auto want = night_oracle::apply(px, *params);
      for (int c = 0; c < 3; ++c)
        worst = std::max(worst, std::abs(int(got[c]) - int(want[c])));
    }
  }
  r.expect(worst <= 1, "oracle disagreement of " + std::to_string(worst) +
                           " counts (allowed: 1)");

  const night::AdjustmentParams identity;
  int identity_misses = 0;
  for (int i = 0; i < 4096; ++i) {
    const std::array<std::uint8_t, 3> px{
        static_cast<std::uint8_t>((i * 7) % 256),
        static_cast<std::uint8_t>((i * 13 + 5) % 256),
        static_cast<std::uint8_t>((i * 31 + 11) % 256)};
    if (night::apply_adjustments(px, identity) != px) ++identity_misses;
  }
  r.expect(identity_misses == 0,
           "zero-parameter identity must hold exactly on the 4096-pixel sweep");
}

inline constexpr std::uint64_t kGoldenSeed = 1234;

void corruption_suite(Runner& r, const fs::path& tests_dir) {
  // Golden corpus: bit-exact pixels for all kinds x severities on the 3
  // committed inputs.
  const fs::path input_dir = tests_dir / "data" / "ref_inputs";
  const fs::path golden_dir = tests_dir / "golden";
  int compared = 0;
  for (int i = 0; i < 3; ++i) {
    const std::string stem = "ref" + std::to_string(i);
    const fs::path input_path = input_dir / (stem + ".png");
    if (!fs::exists(input_path)) {
      r.expect(false, "missing golden input " + input_path.string());
      continue;
    }
    const Image8 img = load_image(input_path);
    {
      const Image8 want = reference_image(i);
      r.expect(img.pixels == want.pixels,
               "committed input " + stem + " drifted from its generator");
    }
    for (int k = 0; k < corrupt::kKindCount; ++k)
      for (int s = 0; s < 3; ++s) {
        const auto spec = corrupt::make_spec(
            static_cast<corrupt::Kind>(k), static_cast<corrupt::Severity>(s),
            kGoldenSeed);
        const fs::path golden_path =
            golden_dir / (corrupt::provenance_stem(stem, spec) + ".png");
        if (!fs::exists(golden_path)) {
          r.expect(false, "missing golden image " + golden_path.string());
          continue;
        }
        const auto got = corrupt::apply_corruption(img, spec);
        const auto want = load_image(golden_path);
        if (got.image.pixels != want.pixels)
          r.expect(false, "golden mismatch: " + golden_path.string());
        ++compared;
      }
  }
  r.expect(compared == 3 * 39, "expected 117 golden comparisons, ran " +
                                   std::to_string(compared));

  // Severity monotonicity over the frozen 20-image set.
  const auto refs = reference_set(20);
  for (int k = 0; k < corrupt::kKindCount; ++k) {
    double mean_d[3] = {0, 0, 0};
    for (int s = 0; s < 3; ++s) {
      for (const auto& img : refs) {
        const auto out = corrupt::apply_corruption(
            img, corrupt::make_spec(static_cast<corrupt::Kind>(k),
                                    static_cast<corrupt::Severity>(s), 5));
        double acc = 0.0;
        for (std::size_t t = 0; t < img.pixels.size(); ++t) {
          const double d = double(img.pixels[t]) - double(out.image.pixels[t]);
          acc += d * d;
        }
        mean_d[s] += std::sqrt(acc);
      }
      mean_d[s] /= refs.size();
    }
    const std::string name = corrupt::kind_name(static_cast<corrupt::Kind>(k));
    r.expect(mean_d[0] < mean_d[1] && mean_d[1] < mean_d[2],
             "severity monotonicity violated for " + name);
  }

  // Partition check, verbatim.
  const auto train = corrupt::corruption_partition(corrupt::Partition::train);
  const auto test = corrupt::corruption_partition(corrupt::Partition::test);
  r.expect(train.size() == 7, "train partition must hold 7 kinds");
  r.expect(test.size() == 6, "test partition must hold 6 kinds");
  const char* train_names[] = {"rain_blur", "snow", "fog", "alpha_blend",
                               "frosted_glass_blur", "lens_defect", "jpeg"};
  const char* test_names[] = {"zoom_blur", "frost", "contrast",
                              "rain_drop", "shot_noise", "pixelate"};
  for (std::size_t i = 0; i < train.size(); ++i)
    r.expect(std::string(corrupt::kind_name(train[i])) == train_names[i],
             "train partition order/name mismatch");
  for (std::size_t i = 0; i < test.size(); ++i)
    r.expect(std::string(corrupt::kind_name(test[i])) == test_names[i],
             "test partition order/name mismatch");
}

void pca_properties(Runner& r) {
  // Orthonormality and Eckart-Young on a random 50x200 matrix.
  pca::FeatureMatrix x;
  x.n = 50;
  x.d = 200;
  x.data.resize(x.n * x.d);
  x.row_ids.resize(x.n);
  CounterRng rng(0xeca1);
  for (auto& v : x.data) v = rng.next_gaussian();

  const std::size_t full = 49;
  const auto complete = pca::fit(x, full);
  double ortho = 0.0;
  for (std::size_t i = 0; i < complete.k; ++i)
    for (std::size_t j = 0; j < complete.k; ++j) {
      double dot = 0.0;
      for (std::size_t t = 0; t < complete.d; ++t)
        dot += complete.components[i * complete.d + t] *
               complete.components[j * complete.d + t];
      ortho = std::max(ortho, std::abs(dot - (i == j ? 1.0 : 0.0)));
    }
  r.expect(ortho <= 1e-8,
           "orthonormality error " + std::to_string(ortho) + " > 1e-8");

  for (std::size_t k : {10u, 30u}) {
    const auto model = pca::fit(x, k);
    double err = 0.0;
    for (std::size_t i = 0; i < x.n; ++i) {
      const auto back =
          pca::inverse_transform(model, pca::transform(model, x.row(i)));
      for (std::size_t j = 0; j < x.d; ++j) {
        const double d = back[j] - x.data[i * x.d + j];
        err += d * d;
      }
    }
    err /= static_cast<double>(x.n - 1);
    double discarded = 0.0;
    for (std::size_t i = k; i < full; ++i) discarded += complete.eigenvalues[i];
    r.expect(std::abs(err - discarded) <= 1e-6 * std::max(1.0, discarded),
             "Eckart-Young identity violated at k=" + std::to_string(k));
  }

  // Exact subspace recovery.
  pca::FeatureMatrix planar;
  planar.n = 30;
  planar.d = 9;
  planar.data.assign(planar.n * planar.d, 0.0);
  planar.row_ids.resize(planar.n);
  for (std::size_t i = 0; i < planar.n; ++i) {
    const double a = rng.next_gaussian(), b = rng.next_gaussian();
    for (std::size_t j = 0; j < planar.d; ++j)
      planar.data[i * planar.d + j] =
          a * (j + 1) + b * ((j * j) % 7) + 3.0;
  }
  const auto model = pca::fit(planar, 2);
  double worst = 0.0;
  for (std::size_t i = 0; i < planar.n; ++i) {
    const auto back =
        pca::inverse_transform(model, pca::transform(model, planar.row(i)));
    for (std::size_t j = 0; j < planar.d; ++j)
      worst = std::max(worst,
                       std::abs(back[j] - planar.data[i * planar.d + j]));
  }
  r.expect(worst <= 1e-9,
           "exact-subspace reconstruction error " + std::to_string(worst));
}

// Compact coarse-to-fine grid minimizer over the k*d weight box.
double svm_grid_oracle(const svm::TrainSet& s, double c, double margin_scale) {
  const std::size_t params = static_cast<std::size_t>(s.k) * s.d;
  std::vector<double> center(params, 0.0);
  double radius = 4.0, best = 0.0;
  svm::SvmModel probe;
  probe.k = s.k;
  probe.d = s.d;
  probe.c = c;
  probe.margin_scale = margin_scale;
  for (int round = 0; round < 8; ++round) {
    std::vector<int> idx(params, 0);
    double round_best = std::numeric_limits<double>::infinity();
    std::vector<double> round_arg(params, 0.0);
    for (;;) {
      std::vector<double> w(params);
      for (std::size_t p = 0; p < params; ++p)
        w[p] = center[p] + (idx[p] - 2) * radius / 2.0;
      probe.w = w;
      const double val = svm::objective(probe, s);
      if (val < round_best) {
        round_best = val;
        round_arg = w;
      }
      std::size_t p = 0;
      while (p < params && ++idx[p] == 5) idx[p++] = 0;
      if (p == params) break;
    }
    center = round_arg;
    best = round_best;
    radius *= 0.4;
  }
  return best;
}

void svm_properties(Runner& r) {
  // Separable toy instance: zero training error.
  svm::TrainSet sep;
  sep.d = 2;
  sep.k = 2;
  for (int i = 0; i < 10; ++i) {
    sep.x.insert(sep.x.end(), {1.0, 0.0});
    sep.y.push_back(0);
    sep.x.insert(sep.x.end(), {-1.0, 0.0});
    sep.y.push_back(1);
  }
  svm::FitOptions opts;
  opts.c = 1.0;
  opts.epochs = 3000;
  opts.standardize = false;
  const auto model = svm::fit(sep, opts);
  int errors = 0;
  for (std::size_t i = 0; i < sep.n(); ++i)
    if (svm::predict(model, sep.sample(i)) != sep.y[i]) ++errors;
  r.expect(errors == 0, "separable instance training errors: " +
                            std::to_string(errors));

  // Grid-oracle agreement over small instances (n<=6, d<=2, k<=3).
  CounterRng rng(0x5fa11);
  struct Shape {
    std::size_t n, d;
    int k;
  } shapes[] = {{4, 1, 2}, {6, 2, 2}, {5, 2, 3}, {6, 1, 3}, {6, 2, 3}};
  int instance = 0;
  for (const auto& shape : shapes) {
    svm::TrainSet s;
    s.d = shape.d;
    s.k = shape.k;
    for (std::size_t i = 0; i < shape.n; ++i) {
      for (std::size_t j = 0; j < shape.d; ++j)
        s.x.push_back(rng.next_gaussian());
      s.y.push_back(i < static_cast<std::size_t>(shape.k)
                        ? static_cast<int>(i)
                        : static_cast<int>(rng.next_below(shape.k)));
    }
    svm::FitOptions small_opts;
    small_opts.c = 0.5;
    small_opts.epochs = 4000;
    small_opts.seed = 11;
    small_opts.standardize = false;
    const auto fitted = svm::fit(s, small_opts);
    const double got = svm::objective(fitted, s);
    const double oracle = svm_grid_oracle(s, small_opts.c,
                                          small_opts.margin_scale);
    if (!(std::abs(got - oracle) <= 0.05 * oracle)) {
      std::ostringstream msg;
      msg << "grid-oracle disagreement on instance " << instance << ": got "
          << got << ", oracle " << oracle;
      r.expect(false, msg.str());
    }
    ++instance;
  }

  // Argmax invariance under positive scaling, 1000 probes.
  svm::SvmModel m;
  m.k = 4;
  m.d = 5;
  m.w.resize(20);
  for (auto& v : m.w) v = rng.next_gaussian();
  auto scaled = m;
  int mismatches = 0;
  for (int probe = 0; probe < 1000; ++probe) {
    const double a = 0.01 + 10.0 * rng.next_double();
    for (std::size_t i = 0; i < m.w.size(); ++i) scaled.w[i] = a * m.w[i];
    std::vector<double> x(5);
    for (auto& v : x) v = rng.next_gaussian();
    if (svm::predict(scaled, x) != svm::predict(m, x)) ++mismatches;
  }
  r.expect(mismatches == 0, "argmax changed under positive scaling " +
                                std::to_string(mismatches) + " times");
}

void attention_properties(Runner& r) {
  // Constant map -> all-zero rarity.
  const ImageF flat(12, 12, 0.7);
  bool all_zero = true;
  for (double v : attention::rarity_map(flat).v) all_zero &= v == 0.0;
  r.expect(all_zero, "rarity of a constant map must be all-zero");

  // 1-outlier-in-256 raw rarity is exactly 8.
  ImageF outlier(16, 16, 0.0);
  outlier.at(3, 4) = 1.0;
  r.expect(attention::rarity_map_raw(outlier, 16).at(3, 4) == 8.0,
           "outlier raw rarity must be exactly 8");

  // All-ones mask fusion is an identity.
  Image8 img(9, 9);
  for (std::size_t i = 0; i < img.pixels.size(); ++i)
    img.pixels[i] = static_cast<std::uint8_t>((i * 37) % 256);
  attention::WeightedMask ones;
  ones.width = 9;
  ones.height = 9;
  ones.omega = 0.12;
  ones.omega_prime = 0.14;
  ones.w_high = 1.0;
  ones.weights.assign(81, 1.0);
  r.expect(attention::fuse_mask(img, ones).pixels == img.pixels,
           "all-ones mask must be an identity");

  // Published tier weights applied to the value 200.
  const Image8 flat200(20, 20, 200);
  const auto mask = attention::build_weighted_mask(20, 20);
  const auto fused = attention::fuse_mask(flat200, mask);
  bool ok_omega = true, ok_prime = true;
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 20; ++x) {
      if (mask.at(x, y) == 0.12) ok_omega &= fused.at(x, y, 0) == 24;
      if (mask.at(x, y) == 0.14) ok_prime &= fused.at(x, y, 0) == 28;
    }
  r.expect(ok_omega, "omega tier must scale 200 to 24 exactly");
  r.expect(ok_prime, "omega' tier must scale 200 to 28 exactly");
}

void determinism(Runner& r, const fs::path& work_dir) {
  pipeline::PipelineConfig cfg;
  cfg.toy_enabled = true;
  cfg.toy_per_class = 10;
  cfg.toy_canvas = 48;
  cfg.toy_seed = 11;
  cfg.split_seed = 23;
  cfg.pca_k = 8;
  cfg.svm_c = "1.0";
  cfg.svm_epochs = 10;

  cfg.output_dir = (work_dir / "det_a").string();
  pipeline::run_pipeline(cfg);
  cfg.output_dir = (work_dir / "det_b").string();
  pipeline::run_pipeline(cfg);

  for (const char* name : {"pca.tlpc", "svm.tlsv", "report.txt"}) {
    const auto a = file_bytes(work_dir / "det_a" / name);
    const auto b = file_bytes(work_dir / "det_b" / name);
    r.expect(a == b, std::string(name) + " differs between identical runs");
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: acceptance <tests-dir>\n";
    return 2;
  }
  const fs::path tests_dir = argv[1];
  const fs::path work_dir =
      fs::temp_directory_path() / "taillight_acceptance";
  fs::remove_all(work_dir);
  fs::create_directories(work_dir);

  Runner r;
  r.criterion(1, "published per-class and overall metric oracle",
              [&] { table3_oracle(r); });
  r.criterion(2, "multiclass Cohen's kappa oracle", [&] { kappa_oracle(r); });
  r.criterion(3, "robustness-drop arithmetic",
              [&] { robustness_drop_oracle(r); });
  r.criterion(4, "end-to-end toy pipeline (accuracy and runtime)",
              [&] { toy_end_to_end(r, work_dir); });
  r.criterion(5, "day-to-night single-pixel oracle and exact identity",
              [&] { day_to_night_oracle(r); });
  r.criterion(6, "corruption goldens, severity monotonicity, 7/6 partition",
              [&] { corruption_suite(r, tests_dir); });
  r.criterion(7, "PCA orthonormality, Eckart-Young, exact subspace",
              [&] { pca_properties(r); });
  r.criterion(8, "SVM training error, grid oracle, argmax invariance",
              [&] { svm_properties(r); });
  r.criterion(9, "attention rarity and mask-fusion identities",
              [&] { attention_properties(r); });
  r.criterion(10, "byte-identical artifacts across repeated runs",
              [&] { determinism(r, work_dir); });

  fs::remove_all(work_dir);
  if (r.failed() == 0) {
    std::printf("all %d criteria passed\n", 10);
    return 0;
  }
  std::printf("%d criteria FAILED\n", r.failed());
  return 1;
}
