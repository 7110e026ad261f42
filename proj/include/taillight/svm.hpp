#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "taillight/common.hpp"

namespace taillight::svm {

struct TrainSet {
  std::size_t d = 0;
  int k = 0;                      // class count
  std::vector<double> x;          // n x d row-major
  std::vector<int> y;             // n labels in 0..k-1

  std::size_t n() const { return y.size(); }
  std::span<const double> sample(std::size_t i) const {
    return {x.data() + i * d, d};
  }
};

/// Joint multiclass linear model: one weight row per class. When
/// `standardized` is set the model z-scores inputs with the stored
/// train statistics before scoring.
struct SvmModel {
  int k = 0;
  std::size_t d = 0;
  double c = 1.0;
  double margin_scale = 100.0;
  std::vector<double> w;  // k x d
  bool standardized = false;
  bool bias_feature = false;          // last feature is a constant 1
  std::vector<double> feature_mean;   // when standardized
  std::vector<double> feature_scale;  // when standardized

  std::span<const double> row(int cls) const {
    return {w.data() + static_cast<std::size_t>(cls) * d, d};
  }
};

struct FitOptions {
  double c = 1.0;
  double margin_scale = 100.0;
  int epochs = 100;
  std::uint64_t seed = 0;
  bool standardize = true;
  bool append_bias_feature = false;  // appends a constant-1 feature
};

/// Objective values of the reported model after each epoch
/// (non-increasing: the best averaged iterate seen so far is kept).
struct FitTrace {
  std::vector<double> epoch_objectives;
};

/// Projected subgradient descent on the regularized multiclass hinge
/// with step 1/(lambda t), lambda = 1/c, seeded shuffling, and the
/// best-objective averaged iterate as the result.
SvmModel fit(const TrainSet& train, const FitOptions& options,
             FitTrace* trace = nullptr);

/// score_i = x . w_i (after standardization when enabled).
std::vector<double> decision_scores(const SvmModel& model,
                                    std::span<const double> x);

/// argmax of decision_scores; ties break toward the lowest class id.
int predict(const SvmModel& model, std::span<const double> x);

/// (1/2) sum_i w_i . w_i + (c/n) sum_m xi_m with
/// xi_m = max_y (margin_scale * delta(y_m, y) + x_m.w_y - x_m.w_{y_m}).
double objective(const SvmModel& model, const TrainSet& set);

// Model file (magic TLSV): version u16, k u32, d u32, margin_scale f64,
// c f64, W row-major f64, standardized flag u8, then the
// standardization mean/scale vectors when the flag is set.
void save_model(const std::filesystem::path& path, const SvmModel& model);
SvmModel load_model(const std::filesystem::path& path);

}  // namespace taillight::svm
