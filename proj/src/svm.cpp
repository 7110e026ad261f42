#include "taillight/svm.hpp"

#include <algorithm>
#include <cmath>

#include "taillight/binio.hpp"
#include "taillight/rng.hpp"

namespace taillight::svm {

namespace {

void check_set(const TrainSet& set) {
  if (set.n() == 0) throw DataError("svm: empty training set");
  if (set.d == 0) throw DataError("svm: zero-width features");
  if (set.k < 2) throw DataError("svm: need at least two classes");
  if (set.x.size() != set.n() * set.d)
    throw DataError("svm: feature matrix size mismatch");
  std::vector<bool> seen(set.k, false);
  for (int label : set.y) {
    if (label < 0 || label >= set.k)
      throw DataError("svm: label out of range");
    seen[label] = true;
  }
  for (int c = 0; c < set.k; ++c)
    if (!seen[c])
      throw DataError("svm: class " + std::to_string(c) +
                      " missing from training set");
  for (double v : set.x)
    if (!std::isfinite(v)) throw NumericError("svm: non-finite feature");
}

// Maps a raw sample into the model's feature space: z-scoring when the
// model standardizes, plus the constant-1 feature when one was appended
// at fit time.
std::vector<double> model_space(const SvmModel& model,
                                std::span<const double> x) {
  const std::size_t expected = model.bias_feature ? model.d - 1 : model.d;
  if (x.size() != expected)
    throw DataError("svm: feature length mismatch, expected " +
                    std::to_string(expected) + " got " +
                    std::to_string(x.size()));
  std::vector<double> z(x.begin(), x.end());
  if (model.standardized)
    for (std::size_t j = 0; j < z.size(); ++j)
      z[j] = (z[j] - model.feature_mean[j]) / model.feature_scale[j];
  if (model.bias_feature) z.push_back(1.0);
  return z;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// Objective of an arbitrary weight matrix over pre-standardized samples.
double objective_raw(const std::vector<double>& w, int k, std::size_t d,
                     double c, double margin_scale,
                     const std::vector<double>& x, const std::vector<int>& y) {
  const std::size_t n = y.size();
  double reg = 0.0;
  for (double v : w) reg += v * v;
  double slack_sum = 0.0;
  std::vector<double> scores(k);
  for (std::size_t m = 0; m < n; ++m) {
    const double* xm = x.data() + m * d;
    for (int cls = 0; cls < k; ++cls) {
      const double* wc = w.data() + static_cast<std::size_t>(cls) * d;
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += xm[j] * wc[j];
      scores[cls] = s;
    }
    double worst = 0.0;  // y = y_m contributes 0
    for (int cls = 0; cls < k; ++cls) {
      if (cls == y[m]) continue;
      worst = std::max(worst, margin_scale + scores[cls] - scores[y[m]]);
    }
    slack_sum += worst;
  }
  return 0.5 * reg + c / static_cast<double>(n) * slack_sum;
}

}  // namespace

SvmModel fit(const TrainSet& train, const FitOptions& options,
             FitTrace* trace) {
  check_set(train);
  if (options.c <= 0.0) throw DataError("svm: c must be positive");
  if (options.epochs < 1) throw DataError("svm: epochs must be at least 1");
  if (options.margin_scale <= 0.0)
    throw DataError("svm: margin scale must be positive");

  const std::size_t n = train.n();
  const int k = train.k;

  SvmModel model;
  model.k = k;
  model.c = options.c;
  model.margin_scale = options.margin_scale;

  // Working copy of the features: standardized and/or bias-extended.
  std::size_t d = train.d;
  std::vector<double> x = train.x;
  if (options.standardize) {
    model.standardized = true;
    model.feature_mean.assign(d, 0.0);
    model.feature_scale.assign(d, 1.0);
    for (std::size_t m = 0; m < n; ++m)
      for (std::size_t j = 0; j < d; ++j)
        model.feature_mean[j] += x[m * d + j];
    for (double& v : model.feature_mean) v /= static_cast<double>(n);
    std::vector<double> var(d, 0.0);
    for (std::size_t m = 0; m < n; ++m)
      for (std::size_t j = 0; j < d; ++j) {
        const double dlt = x[m * d + j] - model.feature_mean[j];
        var[j] += dlt * dlt;
      }
    for (std::size_t j = 0; j < d; ++j) {
      const double sd = std::sqrt(var[j] / static_cast<double>(n));
      model.feature_scale[j] = sd > 1e-12 ? sd : 1.0;
    }
    for (std::size_t m = 0; m < n; ++m)
      for (std::size_t j = 0; j < d; ++j)
        x[m * d + j] = (x[m * d + j] - model.feature_mean[j]) /
                       model.feature_scale[j];
  }
  if (options.append_bias_feature) {
    model.bias_feature = true;
    std::vector<double> ext(n * (d + 1));
    for (std::size_t m = 0; m < n; ++m) {
      std::copy(x.begin() + m * d, x.begin() + (m + 1) * d,
                ext.begin() + m * (d + 1));
      ext[m * (d + 1) + d] = 1.0;
    }
    x = std::move(ext);
    ++d;
  }
  model.d = d;

  // Pegasos-style iteration on F/c: lambda = 1/c, step 1/(lambda t).
  // The optimum satisfies 0.5 |W|^2 <= F(0) = margin_scale * c, which
  // bounds the projection ball.
  const double lambda = 1.0 / options.c;
  const double radius = std::sqrt(2.0 * options.margin_scale * options.c);

  std::vector<double> w(static_cast<std::size_t>(k) * d, 0.0);
  std::vector<double> w_avg(w.size(), 0.0);
  std::vector<double> best_w;
  double best_objective = 0.0;
  bool have_best = false;

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  CounterRng shuffle_rng(mix_keys(options.seed, 0x57a7ULL));

  std::vector<double> scores(k);
  long long t = 0;
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);

    for (std::size_t idx : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double* xm = x.data() + idx * d;
      const int ym = train.y[idx];

      for (int cls = 0; cls < k; ++cls) {
        const double* wc = w.data() + static_cast<std::size_t>(cls) * d;
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += xm[j] * wc[j];
        scores[cls] = s;
      }
      int worst = ym;
      double worst_val = scores[ym];  // delta(ym, ym) = 0
      for (int cls = 0; cls < k; ++cls) {
        if (cls == ym) continue;
        const double v = options.margin_scale + scores[cls];
        if (v > worst_val) {
          worst_val = v;
          worst = cls;
        }
      }

      const double shrink = 1.0 - eta * lambda;  // = 1 - 1/t
      for (double& v : w) v *= shrink;
      if (worst != ym) {
        double* w_true = w.data() + static_cast<std::size_t>(ym) * d;
        double* w_bad = w.data() + static_cast<std::size_t>(worst) * d;
        for (std::size_t j = 0; j < d; ++j) {
          w_true[j] += eta * xm[j];
          w_bad[j] -= eta * xm[j];
        }
      }
      double norm2 = 0.0;
      for (double v : w) norm2 += v * v;
      if (norm2 > radius * radius) {
        const double scale = radius / std::sqrt(norm2);
        for (double& v : w) v *= scale;
      }
      // Running mean of the iterates.
      const double inv_t = 1.0 / static_cast<double>(t);
      for (std::size_t j = 0; j < w.size(); ++j)
        w_avg[j] += (w[j] - w_avg[j]) * inv_t;
    }

    const double obj = objective_raw(w_avg, k, d, options.c,
                                     options.margin_scale, x, train.y);
    if (!have_best || obj < best_objective) {
      best_objective = obj;
      best_w = w_avg;
      have_best = true;
    }
    if (trace) trace->epoch_objectives.push_back(best_objective);
  }

  model.w = std::move(best_w);
  return model;
}

std::vector<double> decision_scores(const SvmModel& model,
                                    std::span<const double> x) {
  const std::vector<double> z = model_space(model, x);
  std::vector<double> scores(model.k);
  for (int cls = 0; cls < model.k; ++cls) scores[cls] = dot(model.row(cls), z);
  return scores;
}

int predict(const SvmModel& model, std::span<const double> x) {
  const auto scores = decision_scores(model, x);
  int best = 0;
  for (int cls = 1; cls < model.k; ++cls)
    if (scores[cls] > scores[best]) best = cls;  // ties keep the lowest id
  return best;
}

double objective(const SvmModel& model, const TrainSet& set) {
  std::vector<double> x;
  x.reserve(set.n() * model.d);
  for (std::size_t m = 0; m < set.n(); ++m) {
    const auto z = model_space(model, set.sample(m));
    x.insert(x.end(), z.begin(), z.end());
  }
  return objective_raw(model.w, model.k, model.d, model.c, model.margin_scale,
                       x, set.y);
}

void save_model(const std::filesystem::path& path, const SvmModel& model) {
  BinWriter w(path);
  w.magic("TLSV");
  w.u16(1);
  w.u32(static_cast<std::uint32_t>(model.k));
  w.u32(static_cast<std::uint32_t>(model.d));
  w.f64(model.margin_scale);
  w.f64(model.c);
  for (double v : model.w) w.f64(v);
  w.u8(model.standardized ? 1 : 0);
  w.u8(model.bias_feature ? 1 : 0);
  if (model.standardized) {
    for (double v : model.feature_mean) w.f64(v);
    for (double v : model.feature_scale) w.f64(v);
  }
}

SvmModel load_model(const std::filesystem::path& path) {
  BinReader r(path);
  r.expect_magic("TLSV", "SVM model");
  if (r.u16() != 1) throw DataError("unsupported SVM model version");
  SvmModel model;
  model.k = static_cast<int>(r.u32());
  model.d = r.u32();
  if (model.k < 2 || model.d == 0)
    throw DataError("SVM model has invalid dimensions");
  model.margin_scale = r.f64();
  model.c = r.f64();
  model.w.resize(static_cast<std::size_t>(model.k) * model.d);
  for (double& v : model.w) v = r.f64();
  model.standardized = r.u8() != 0;
  model.bias_feature = r.u8() != 0;
  const std::size_t raw_d = model.bias_feature ? model.d - 1 : model.d;
  if (model.standardized) {
    model.feature_mean.resize(raw_d);
    for (double& v : model.feature_mean) v = r.f64();
    model.feature_scale.resize(raw_d);
    for (double& v : model.feature_scale) v = r.f64();
  }
  for (double v : model.w)
    if (!std::isfinite(v)) throw DataError("SVM model has non-finite weights");
  return model;
}

}  // namespace taillight::svm
