#include "taillight/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace taillight::metrics {

long long ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0LL);
}

long long ConfusionMatrix::row_sum(int pred) const {
  long long s = 0;
  for (int a = 0; a < k; ++a) s += at(pred, a);
  return s;
}

long long ConfusionMatrix::col_sum(int actual) const {
  long long s = 0;
  for (int p = 0; p < k; ++p) s += at(p, actual);
  return s;
}

long long ConfusionMatrix::trace() const {
  long long s = 0;
  for (int i = 0; i < k; ++i) s += at(i, i);
  return s;
}

ConfusionMatrix confusion_matrix(std::span<const int> preds,
                                 std::span<const int> labels, int k) {
  if (preds.size() != labels.size())
    throw DataError("confusion_matrix: prediction/label length mismatch");
  if (preds.empty()) throw DataError("confusion_matrix: empty input");
  if (k < 1) throw DataError("confusion_matrix: k must be positive");
  ConfusionMatrix cm(k);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    int p = preds[i], a = labels[i];
    if (p < 0 || p >= k || a < 0 || a >= k)
      throw DataError("confusion_matrix: class id out of range at sample " +
                      std::to_string(i));
    ++cm.at(p, a);
  }
  return cm;
}

ClassCounts per_class_counts(const ConfusionMatrix& cm, int class_id) {
  if (class_id < 0 || class_id >= cm.k)
    throw DataError("per_class_counts: class id out of range");
  ClassCounts c;
  c.tp = cm.at(class_id, class_id);
  c.fp = cm.row_sum(class_id) - c.tp;
  c.fn = cm.col_sum(class_id) - c.tp;
  c.tn = cm.total() - c.tp - c.fp - c.fn;
  return c;
}

namespace {

double rate(long long num, long long den, bool* degenerate) {
  if (den == 0) {
    *degenerate = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ClassMetrics class_metrics(const ClassCounts& c) {
  if (c.total() <= 0) throw DataError("class_metrics: empty counts");
  ClassMetrics m;
  m.acc = rate(c.tp + c.tn, c.total(), &m.degenerate.acc);
  m.pre = rate(c.tp, c.tp + c.fp, &m.degenerate.pre);
  m.spe = rate(c.tn, c.tn + c.fp, &m.degenerate.spe);
  m.sen = rate(c.tp, c.tp + c.fn, &m.degenerate.sen);
  if (m.pre + m.sen == 0.0) {
    m.degenerate.f1 = true;
    m.f1 = 0.0;
  } else {
    m.f1 = 2.0 * m.pre * m.sen / (m.pre + m.sen);
  }
  // Binary Cohen's kappa on the one-vs-rest 2x2 table.
  const double n = static_cast<double>(c.total());
  const double po = (c.tp + c.tn) / n;
  const double pe =
      ((c.tp + c.fp) * (c.tp + c.fn) + (c.fn + c.tn) * (c.fp + c.tn)) / (n * n);
  m.kappa = pe >= 1.0 ? 0.0 : (po - pe) / (1.0 - pe);
  return m;
}

double cohen_kappa(const ConfusionMatrix& cm) {
  const long long total = cm.total();
  if (total <= 0) throw DataError("cohen_kappa: empty matrix");
  const double n = static_cast<double>(total);
  const double po = static_cast<double>(cm.trace()) / n;
  double pe = 0.0;
  for (int c = 0; c < cm.k; ++c)
    pe += static_cast<double>(cm.row_sum(c)) * static_cast<double>(cm.col_sum(c));
  pe /= n * n;
  if (pe >= 1.0)
    throw NumericError("cohen_kappa: degenerate matrix with P_e = 1");
  return (po - pe) / (1.0 - pe);
}

MetricsReport overall_report(const ConfusionMatrix& cm) {
  if (cm.total() <= 0) throw DataError("overall_report: empty matrix");
  MetricsReport report;
  report.k = cm.k;
  report.per_class.reserve(cm.k);
  for (int c = 0; c < cm.k; ++c)
    report.per_class.push_back(class_metrics(per_class_counts(cm, c)));

  // Overall accuracy is micro (trace/total); the other rates are
  // unweighted macro means of the per-class values. This is the only
  // aggregation that reproduces the reference tables from their own
  // confusion matrices.
  report.overall.acc =
      static_cast<double>(cm.trace()) / static_cast<double>(cm.total());
  for (const auto& m : report.per_class) {
    report.overall.pre += m.pre;
    report.overall.spe += m.spe;
    report.overall.sen += m.sen;
    report.overall.f1 += m.f1;
  }
  report.overall.pre /= cm.k;
  report.overall.spe /= cm.k;
  report.overall.sen /= cm.k;
  report.overall.f1 /= cm.k;
  report.overall.kappa = cohen_kappa(cm);
  return report;
}

MetricDeltas robustness_drop(const MetricsReport& a, const MetricsReport& b) {
  if (a.k != b.k)
    throw DataError("robustness_drop: reports have different class counts");
  MetricDeltas d;
  d.acc = (a.overall.acc - b.overall.acc) * 100.0;
  d.pre = (a.overall.pre - b.overall.pre) * 100.0;
  d.spe = (a.overall.spe - b.overall.spe) * 100.0;
  d.sen = (a.overall.sen - b.overall.sen) * 100.0;
  d.f1 = (a.overall.f1 - b.overall.f1) * 100.0;
  d.kappa = a.overall.kappa - b.overall.kappa;
  return d;
}

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v * 100.0);
  return buf;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

std::string class_label(std::span<const std::string> names, int c) {
  if (c < static_cast<int>(names.size())) return names[c];
  return "class" + std::to_string(c);
}

}  // namespace

std::string format_report(const MetricsReport& report,
                          const ConfusionMatrix* cm,
                          std::span<const std::string> class_names) {
  std::ostringstream out;
  for (int c = 0; c < report.k; ++c) {
    const auto& m = report.per_class[c];
    const std::string label = class_label(class_names, c);
    out << label << ".acc: " << pct(m.acc) << "\n";
    out << label << ".pre: " << pct(m.pre) << "\n";
    out << label << ".spe: " << pct(m.spe) << "\n";
    out << label << ".sen: " << pct(m.sen) << "\n";
    out << label << ".f1: " << pct(m.f1) << "\n";
    out << label << ".kappa_binary: " << fixed3(m.kappa) << "\n";
    if (m.degenerate.any()) out << label << ".degenerate: true\n";
  }
  out << "overall.acc: " << pct(report.overall.acc) << "\n";
  out << "overall.pre: " << pct(report.overall.pre) << "\n";
  out << "overall.spe: " << pct(report.overall.spe) << "\n";
  out << "overall.sen: " << pct(report.overall.sen) << "\n";
  out << "overall.f1: " << pct(report.overall.f1) << "\n";
  out << "overall.kappa: " << fixed3(report.overall.kappa) << "\n";
  if (cm) {
    out << "confusion_matrix: predicted x actual\n";
    int width = 1;
    for (long long v : cm->counts)
      width = std::max(width, static_cast<int>(std::to_string(v).size()));
    for (int p = 0; p < cm->k; ++p) {
      for (int a = 0; a < cm->k; ++a) {
        std::string v = std::to_string(cm->at(p, a));
        out << std::string(width - v.size() + (a ? 2 : 0), ' ') << v;
      }
      out << "\n";
    }
  }
  return out.str();
}

std::string format_report_csv(const MetricsReport& report,
                              std::span<const std::string> class_names) {
  std::ostringstream out;
  out << "class,acc,pre,spe,sen,f1,kappa\n";
  for (int c = 0; c < report.k; ++c) {
    const auto& m = report.per_class[c];
    out << class_label(class_names, c) << "," << pct(m.acc) << "," << pct(m.pre)
        << "," << pct(m.spe) << "," << pct(m.sen) << "," << pct(m.f1) << ","
        << fixed3(m.kappa) << "\n";
  }
  out << "overall," << pct(report.overall.acc) << "," << pct(report.overall.pre)
      << "," << pct(report.overall.spe) << "," << pct(report.overall.sen) << ","
      << pct(report.overall.f1) << "," << fixed3(report.overall.kappa) << "\n";
  return out.str();
}

std::string format_deltas(const MetricDeltas& d) {
  std::ostringstream out;
  char buf[32];
  auto pp = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };
  out << "drop.acc_pp: " << pp(d.acc) << "\n";
  out << "drop.pre_pp: " << pp(d.pre) << "\n";
  out << "drop.spe_pp: " << pp(d.spe) << "\n";
  out << "drop.sen_pp: " << pp(d.sen) << "\n";
  out << "drop.f1_pp: " << pp(d.f1) << "\n";
  out << "drop.kappa: " << fixed3(d.kappa) << "\n";
  return out.str();
}

}  // namespace taillight::metrics
