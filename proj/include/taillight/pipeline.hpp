#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "taillight/attention.hpp"
#include "taillight/corruption.hpp"
#include "taillight/dataset.hpp"
#include "taillight/metrics.hpp"
#include "taillight/net.hpp"
#include "taillight/night.hpp"
#include "taillight/pca.hpp"
#include "taillight/svm.hpp"

namespace taillight::pipeline {

/// Fully resolved run configuration; every key has a default. The
/// key-value config file uses section.key names matching the comments.
struct PipelineConfig {
  // [dataset]
  std::string dataset_images;
  std::string dataset_labels;
  std::string dataset_manifest;
  // [toy]
  bool toy_enabled = false;
  int toy_per_class = 200;
  int toy_canvas = 64;
  double toy_jitter = 1.0;
  std::uint64_t toy_seed = 7;
  // [split]
  data::SplitRatios split_ratios;
  std::uint64_t split_seed = 17;
  // [night]
  bool night_enabled = false;
  std::string night_params_file;
  // [corrupt]
  bool corrupt_enabled = false;
  std::string corrupt_kinds = "train";  // csv of kinds, or train|test
  std::string corrupt_severities = "all";
  std::uint64_t corrupt_seed = 99;
  // [attention]
  bool conspicuity_enabled = false;
  double conspicuity_alpha = 0.35;
  bool maskfuse_enabled = true;
  double mask_omega = 0.12;
  double mask_omega_prime = 0.14;
  double mask_w_high = 1.0;
  std::string mask_geometry_file;
  // [features]
  std::string feature_tap = "fc1";          // fc1 | fc2
  std::string feature_weights = "random:42";  // random:SEED or a file
  // [pca]
  bool pca_enabled = true;
  int pca_k = 250;
  std::string pca_fit_on = "train";  // train | all
  // [svm]
  std::string svm_c = "auto";  // auto or a positive real
  int svm_epochs = 30;
  std::uint64_t svm_seed = 3;
  double svm_margin_scale = 100.0;
  // [output]
  std::string output_dir = "out";
  bool export_test = false;
};

PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config_text(const std::string& text,
                                 const std::string& where);
/// The resolved config as config-file text (stable key order).
std::string format_config(const PipelineConfig& config);
/// Structural checks (tap names, ratio sums, corruption partition
/// hygiene). Throws ConfigError.
void validate_config(const PipelineConfig& config);

struct StageTiming {
  std::string name;
  long long millis = 0;
};

struct ArtifactDigest {
  std::string name;      // manifest key
  std::string filename;  // relative to the output directory
  std::string sha256;
};

struct RunManifest {
  std::string config_text;
  std::vector<StageTiming> stages;
  std::vector<ArtifactDigest> artifacts;
  std::string report_text;
  // Filled by run_pipeline; load_manifest carries metrics as text only.
  metrics::MetricsReport report;
  metrics::ConfusionMatrix confusion;
};

void save_manifest(const std::filesystem::path& path, const RunManifest& m);
/// Loads a manifest and recomputes every artifact digest against the
/// files next to it, throwing DataError on any mismatch (tamper check).
RunManifest load_manifest(const std::filesystem::path& path);

/// Synthetic acceptance-scale ROI generator. The four classes carry
/// linearly separable mean-color signatures at zero jitter.
struct ToyRoiSpec {
  int canvas = 64;
  double jitter = 1.0;
};

std::vector<data::AnnotatedFrame> generate_toy_dataset(const ToyRoiSpec& spec,
                                                       int n_per_class,
                                                       std::uint64_t seed);

/// Runs ingest -> synthesis/corruption -> attention -> features -> PCA
/// -> SVM -> eval and writes models, report and manifest into
/// output.dir. Fully reproducible from (config, seeds).
RunManifest run_pipeline(const PipelineConfig& config);

/// Evaluation-only path over an external dataset directory; never
/// refits or rewrites models.
metrics::MetricsReport evaluate_domain_shift(
    const std::filesystem::path& manifest_path,
    const std::filesystem::path& data_dir);

enum class AblationAxis { corruption_off, tap_fc2, pca_off };
AblationAxis ablation_axis_from_name(const std::string& name);

struct AblationResult {
  RunManifest base;
  RunManifest ablated;
  metrics::MetricDeltas drop;
};

/// Runs the base and ablated configurations with shared seeds and
/// reports the per-metric deltas.
AblationResult ablate(const PipelineConfig& config, AblationAxis axis);

}  // namespace taillight::pipeline
