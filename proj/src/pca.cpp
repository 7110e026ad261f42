#include "taillight/pca.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "taillight/binio.hpp"

namespace taillight::pca {

namespace {

void check_finite(const FeatureMatrix& x) {
  for (double v : x.data)
    if (!std::isfinite(v)) throw NumericError("pca: non-finite feature value");
}

// Largest-magnitude coordinate positive; lowest index breaks ties.
void fix_sign(std::span<double> component) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < component.size(); ++i)
    if (std::abs(component[i]) > std::abs(component[best])) best = i;
  if (component[best] < 0.0)
    for (double& v : component) v = -v;
}

// Deterministic orthonormal completion for rank-deficient data: run
// Gram-Schmidt over the standard basis against the rows already placed.
void complete_basis(std::vector<double>& components, std::size_t filled,
                    std::size_t k, std::size_t d) {
  std::size_t next_axis = 0;
  for (std::size_t row = filled; row < k; ++row) {
    std::vector<double> cand(d, 0.0);
    for (; next_axis < d; ++next_axis) {
      std::fill(cand.begin(), cand.end(), 0.0);
      cand[next_axis] = 1.0;
      for (std::size_t r = 0; r < row; ++r) {
        const double* prev = components.data() + r * d;
        double dot = 0.0;
        for (std::size_t j = 0; j < d; ++j) dot += cand[j] * prev[j];
        for (std::size_t j = 0; j < d; ++j) cand[j] -= dot * prev[j];
      }
      double norm = 0.0;
      for (double v : cand) norm += v * v;
      norm = std::sqrt(norm);
      if (norm > 1e-6) {
        for (double& v : cand) v /= norm;
        break;
      }
    }
    if (next_axis == d)
      throw NumericError("pca: failed to complete orthonormal basis");
    ++next_axis;
    std::copy(cand.begin(), cand.end(), components.begin() + row * d);
    fix_sign({components.data() + row * d, d});
  }
}

}  // namespace

PcaModel fit(const FeatureMatrix& x, std::size_t k) {
  if (x.n < 2) throw DataError("pca: need at least 2 samples to fit");
  if (k < 1 || k > std::min(x.n - 1, x.d))
    throw DataError("pca: k outside 1..min(n-1, d)");
  check_finite(x);

  PcaModel model;
  model.d = x.d;
  model.k = k;
  model.mean.assign(x.d, 0.0);
  for (std::size_t i = 0; i < x.n; ++i)
    for (std::size_t j = 0; j < x.d; ++j) model.mean[j] += x.data[i * x.d + j];
  for (double& m : model.mean) m /= static_cast<double>(x.n);

  Eigen::MatrixXd centered(x.n, x.d);
  for (std::size_t i = 0; i < x.n; ++i)
    for (std::size_t j = 0; j < x.d; ++j)
      centered(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          x.data[i * x.d + j] - model.mean[j];

  const double divisor = static_cast<double>(x.n - 1);
  model.total_variance = centered.squaredNorm() / divisor;

  // Eigenvalues and the directions they map back to. For n <= d the
  // n x n Gram matrix is decomposed instead of the d x d covariance.
  std::vector<std::pair<double, Eigen::VectorXd>> eig;  // (eigenvalue, dir)
  if (x.n <= x.d) {
    Eigen::MatrixXd gram = centered * centered.transpose() / divisor;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success)
      throw NumericError("pca: eigendecomposition failed");
    const auto& vals = solver.eigenvalues();
    const auto& vecs = solver.eigenvectors();
    for (Eigen::Index i = vals.size() - 1; i >= 0; --i) {
      const double lambda = std::max(0.0, vals(i));
      if (lambda <= 1e-12 * std::max(1.0, model.total_variance)) continue;
      Eigen::VectorXd dir = centered.transpose() * vecs.col(i);
      dir /= std::sqrt(lambda * divisor);
      eig.emplace_back(lambda, std::move(dir));
    }
  } else {
    Eigen::MatrixXd cov = centered.transpose() * centered / divisor;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success)
      throw NumericError("pca: eigendecomposition failed");
    const auto& vals = solver.eigenvalues();
    const auto& vecs = solver.eigenvectors();
    for (Eigen::Index i = vals.size() - 1; i >= 0; --i) {
      const double lambda = std::max(0.0, vals(i));
      if (lambda <= 1e-12 * std::max(1.0, model.total_variance)) continue;
      eig.emplace_back(lambda, vecs.col(i));
    }
  }
  // Equal eigenvalues keep their decomposition order (stable sort by
  // descending value only).
  std::stable_sort(eig.begin(), eig.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;
  });

  model.components.assign(k * x.d, 0.0);
  model.eigenvalues.assign(k, 0.0);
  const std::size_t available = std::min<std::size_t>(k, eig.size());
  for (std::size_t i = 0; i < available; ++i) {
    model.eigenvalues[i] = eig[i].first;
    Eigen::VectorXd dir = eig[i].second;
    dir.normalize();
    for (std::size_t j = 0; j < x.d; ++j)
      model.components[i * x.d + j] = dir(static_cast<Eigen::Index>(j));
    fix_sign({model.components.data() + i * x.d, x.d});
  }
  // Rank deficiency beyond the retained spectrum: zero-padded
  // eigenvalues with an orthonormal completion.
  if (available < k) complete_basis(model.components, available, k, x.d);
  return model;
}

std::vector<double> transform(const PcaModel& model,
                              std::span<const double> x) {
  if (x.size() != model.d) throw DataError("pca transform: length mismatch");
  for (double v : x)
    if (!std::isfinite(v)) throw NumericError("pca transform: non-finite input");
  std::vector<double> z(model.k, 0.0);
  for (std::size_t i = 0; i < model.k; ++i) {
    const double* comp = model.components.data() + i * model.d;
    double acc = 0.0;
    for (std::size_t j = 0; j < model.d; ++j)
      acc += comp[j] * (x[j] - model.mean[j]);
    z[i] = acc;
  }
  return z;
}

std::vector<double> inverse_transform(const PcaModel& model,
                                      std::span<const double> z) {
  if (z.size() != model.k)
    throw DataError("pca inverse_transform: length mismatch");
  std::vector<double> x = model.mean;
  for (std::size_t i = 0; i < model.k; ++i) {
    const double* comp = model.components.data() + i * model.d;
    for (std::size_t j = 0; j < model.d; ++j) x[j] += z[i] * comp[j];
  }
  return x;
}

std::vector<double> explained_variance_ratio(const PcaModel& model) {
  if (model.total_variance <= 0.0)
    throw NumericError("pca: model has no stored total variance");
  std::vector<double> out(model.k);
  for (std::size_t i = 0; i < model.k; ++i)
    out[i] = model.eigenvalues[i] / model.total_variance;
  return out;
}

FeatureMatrix transform_matrix(const PcaModel& model, const FeatureMatrix& x) {
  if (x.d != model.d) throw DataError("pca transform: width mismatch");
  FeatureMatrix out;
  out.n = x.n;
  out.d = model.k;
  out.row_ids = x.row_ids;
  out.data.resize(x.n * model.k);
  for (std::size_t i = 0; i < x.n; ++i) {
    const auto z = transform(model, x.row(i));
    std::copy(z.begin(), z.end(), out.data.begin() + i * model.k);
  }
  return out;
}

void save_model(const std::filesystem::path& path, const PcaModel& model) {
  BinWriter w(path);
  w.magic("TLPC");
  w.u16(1);
  w.u32(static_cast<std::uint32_t>(model.d));
  w.u32(static_cast<std::uint32_t>(model.k));
  for (double v : model.mean) w.f64(v);
  for (double v : model.components) w.f64(v);
  for (double v : model.eigenvalues) w.f64(v);
  w.f64(model.total_variance);
}

PcaModel load_model(const std::filesystem::path& path) {
  BinReader r(path);
  r.expect_magic("TLPC", "PCA model");
  if (r.u16() != 1) throw DataError("unsupported PCA model version");
  PcaModel model;
  model.d = r.u32();
  model.k = r.u32();
  if (model.d == 0 || model.k == 0 || model.k > model.d)
    throw DataError("PCA model has invalid dimensions");
  model.mean.resize(model.d);
  for (double& v : model.mean) v = r.f64();
  model.components.resize(model.k * model.d);
  for (double& v : model.components) v = r.f64();
  model.eigenvalues.resize(model.k);
  for (double& v : model.eigenvalues) v = r.f64();
  model.total_variance = r.f64();
  for (double v : model.mean)
    if (!std::isfinite(v)) throw DataError("PCA model has non-finite values");
  for (double v : model.components)
    if (!std::isfinite(v)) throw DataError("PCA model has non-finite values");
  return model;
}

void save_features(const std::filesystem::path& path, const FeatureMatrix& x) {
  if (x.row_ids.size() != x.n)
    throw DataError("save_features: row id count mismatch");
  BinWriter w(path);
  w.magic("TLFM");
  w.u32(static_cast<std::uint32_t>(x.n));
  w.u32(static_cast<std::uint32_t>(x.d));
  for (const auto& id : x.row_ids) w.str(id);
  for (double v : x.data) w.f64(v);
}

FeatureMatrix load_features(const std::filesystem::path& path) {
  BinReader r(path);
  r.expect_magic("TLFM", "feature matrix");
  FeatureMatrix x;
  x.n = r.u32();
  x.d = r.u32();
  x.row_ids.resize(x.n);
  for (auto& id : x.row_ids) id = r.str();
  x.data.resize(x.n * x.d);
  for (double& v : x.data) v = r.f64();
  return x;
}

}  // namespace taillight::pca
