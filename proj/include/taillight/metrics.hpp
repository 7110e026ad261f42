#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "taillight/common.hpp"

namespace taillight::metrics {

/// k x k prediction counts. Rows index the predicted class, columns the
/// actual class.
struct ConfusionMatrix {
  int k = 0;
  std::vector<long long> counts;

  ConfusionMatrix() = default;
  explicit ConfusionMatrix(int classes)
      : k(classes), counts(static_cast<std::size_t>(classes) * classes, 0) {}

  long long& at(int pred, int actual) {
    return counts[static_cast<std::size_t>(pred) * k + actual];
  }
  long long at(int pred, int actual) const {
    return counts[static_cast<std::size_t>(pred) * k + actual];
  }
  long long total() const;
  long long row_sum(int pred) const;
  long long col_sum(int actual) const;
  long long trace() const;
};

ConfusionMatrix confusion_matrix(std::span<const int> preds,
                                 std::span<const int> labels, int k);

/// One-vs-rest counts for a single class.
struct ClassCounts {
  long long tp = 0, tn = 0, fp = 0, fn = 0;
  long long total() const { return tp + tn + fp + fn; }
};

ClassCounts per_class_counts(const ConfusionMatrix& cm, int class_id);

/// Degenerate-rate markers: a flag is set when the corresponding rate
/// had a 0/0 denominator and was defined as 0.
struct RateFlags {
  bool acc = false, pre = false, spe = false, sen = false, f1 = false;
  bool any() const { return acc || pre || spe || sen || f1; }
};

struct ClassMetrics {
  double acc = 0, pre = 0, spe = 0, sen = 0, f1 = 0;
  // Binary (one-vs-rest) Cohen's kappa. Reported for completeness; it is
  // a different quantity from the per-class kappa column some summaries
  // print, which matches no standard definition we could identify.
  double kappa = 0;
  RateFlags degenerate;
};

ClassMetrics class_metrics(const ClassCounts& counts);

/// Multiclass Cohen's kappa: P_o = trace/total, P_e from the marginal
/// products. Throws NumericError when P_e == 1 (single-cell matrix).
double cohen_kappa(const ConfusionMatrix& cm);

struct OverallMetrics {
  double acc = 0;   // micro: trace / total
  double pre = 0;   // unweighted macro mean
  double spe = 0;
  double sen = 0;
  double f1 = 0;
  double kappa = 0; // multiclass Cohen's kappa
};

struct MetricsReport {
  int k = 0;
  std::vector<ClassMetrics> per_class;
  OverallMetrics overall;
};

MetricsReport overall_report(const ConfusionMatrix& cm);

/// Per-metric deltas a - b: percentage points for the rates, raw
/// difference for kappa.
struct MetricDeltas {
  double acc = 0, pre = 0, spe = 0, sen = 0, f1 = 0, kappa = 0;
};

MetricDeltas robustness_drop(const MetricsReport& a, const MetricsReport& b);

/// "key: value" lines in a stable order, plus the confusion matrix as
/// aligned integer columns when one is supplied.
std::string format_report(const MetricsReport& report,
                          const ConfusionMatrix* cm = nullptr,
                          std::span<const std::string> class_names = {});

/// Comma-separated variant for spreadsheets.
std::string format_report_csv(const MetricsReport& report,
                              std::span<const std::string> class_names = {});

std::string format_deltas(const MetricDeltas& d);

}  // namespace taillight::metrics
