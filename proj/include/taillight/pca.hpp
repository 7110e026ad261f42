#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "taillight/common.hpp"

namespace taillight::pca {

/// n x d row-major sample matrix with per-row identifiers.
struct FeatureMatrix {
  std::size_t n = 0, d = 0;
  std::vector<double> data;
  std::vector<std::string> row_ids;

  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * d, d};
  }
  std::span<double> row(std::size_t i) { return {data.data() + i * d, d}; }
};

struct PcaModel {
  std::size_t d = 0, k = 0;
  std::vector<double> mean;         // d
  std::vector<double> components;   // k x d, orthonormal rows
  std::vector<double> eigenvalues;  // k, non-increasing, >= 0
  double total_variance = 0;        // trace of the sample covariance

  std::span<const double> component(std::size_t i) const {
    return {components.data() + i * d, d};
  }
};

/// Top-k principal components of the sample covariance (divisor n-1) of
/// the mean-centered rows. Sign convention: each component's
/// largest-magnitude coordinate is positive (lowest index on ties).
/// When the data has rank < k the remaining components are an
/// orthonormal completion with zero eigenvalues.
PcaModel fit(const FeatureMatrix& x, std::size_t k);

/// components * (x - mean)
std::vector<double> transform(const PcaModel& model, std::span<const double> x);

/// mean + components^T * z
std::vector<double> inverse_transform(const PcaModel& model,
                                      std::span<const double> z);

/// eigenvalue_i / total variance.
std::vector<double> explained_variance_ratio(const PcaModel& model);

/// Applies transform to every row.
FeatureMatrix transform_matrix(const PcaModel& model, const FeatureMatrix& x);

// Model file (magic TLPC): version u16, then d, k as u32, then mean,
// components, eigenvalues as row-major 64-bit little-endian floats,
// then the stored total variance (one f64).
void save_model(const std::filesystem::path& path, const PcaModel& model);
PcaModel load_model(const std::filesystem::path& path);

// Feature matrix file (magic TLFM): n, d as u32, row ids as
// length-prefixed text, then row-major 64-bit little-endian floats.
void save_features(const std::filesystem::path& path, const FeatureMatrix& x);
FeatureMatrix load_features(const std::filesystem::path& path);

}  // namespace taillight::pca
