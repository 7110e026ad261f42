#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "taillight/pca.hpp"
#include "taillight/rng.hpp"

using namespace taillight;
using namespace taillight::pca;

namespace {

FeatureMatrix random_matrix(std::size_t n, std::size_t d, std::uint64_t key) {
  FeatureMatrix x;
  x.n = n;
  x.d = d;
  x.data.resize(n * d);
  x.row_ids.resize(n);
  CounterRng rng(key);
  for (auto& v : x.data) v = rng.next_gaussian();
  for (std::size_t i = 0; i < n; ++i) x.row_ids[i] = "r" + std::to_string(i);
  return x;
}

double max_abs_offdiag_error(const PcaModel& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.k; ++i)
    for (std::size_t j = 0; j < m.k; ++j) {
      double dot = 0.0;
      for (std::size_t t = 0; t < m.d; ++t)
        dot += m.components[i * m.d + t] * m.components[j * m.d + t];
      worst = std::max(worst, std::abs(dot - (i == j ? 1.0 : 0.0)));
    }
  return worst;
}

}  // namespace

TEST_CASE("exact k-dimensional subspace reconstructs with zero error") {
  // 40 samples spanned by 3 fixed directions plus an offset.
  const std::size_t n = 40, d = 12, rank = 3;
  CounterRng rng(0x5135);
  std::vector<std::vector<double>> basis(rank, std::vector<double>(d));
  for (auto& b : basis)
    for (auto& v : b) v = rng.next_gaussian();
  FeatureMatrix x;
  x.n = n;
  x.d = d;
  x.data.assign(n * d, 0.0);
  x.row_ids.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < rank; ++r) {
      const double coef = rng.next_gaussian();
      for (std::size_t j = 0; j < d; ++j)
        x.data[i * d + j] += coef * basis[r][j];
    }
    for (std::size_t j = 0; j < d; ++j) x.data[i * d + j] += 0.5 * j;  // offset
  }

  const auto model = fit(x, rank);
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto z = transform(model, x.row(i));
    const auto back = inverse_transform(model, z);
    for (std::size_t j = 0; j < d; ++j)
      worst = std::max(worst, std::abs(back[j] - x.data[i * d + j]));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("2-D cloud along (1,1)/sqrt(2) recovers the closed-form direction") {
  FeatureMatrix x;
  x.n = 200;
  x.d = 2;
  x.data.resize(400);
  x.row_ids.resize(200);
  CounterRng rng(0x2d);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < 200; ++i) {
    const double along = rng.next_gaussian() * 5.0;
    const double across = rng.next_gaussian() * 0.01;
    x.data[i * 2 + 0] = along * inv_sqrt2 - across * inv_sqrt2;
    x.data[i * 2 + 1] = along * inv_sqrt2 + across * inv_sqrt2;
  }
  const auto model = fit(x, 1);

  // Closed-form eigenvector of the 2x2 sample covariance.
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.n; ++i) {
    mx += x.data[i * 2];
    my += x.data[i * 2 + 1];
  }
  mx /= x.n;
  my /= x.n;
  double a = 0, b = 0, c = 0;
  for (std::size_t i = 0; i < x.n; ++i) {
    const double dx = x.data[i * 2] - mx, dy = x.data[i * 2 + 1] - my;
    a += dx * dx;
    b += dx * dy;
    c += dy * dy;
  }
  a /= x.n - 1;
  b /= x.n - 1;
  c /= x.n - 1;
  const double lambda = 0.5 * (a + c + std::sqrt((a - c) * (a - c) + 4 * b * b));
  double vx = b, vy = lambda - a;
  const double norm = std::sqrt(vx * vx + vy * vy);
  vx /= norm;
  vy /= norm;
  if ((std::abs(vx) >= std::abs(vy) && vx < 0) ||
      (std::abs(vy) > std::abs(vx) && vy < 0)) {
    vx = -vx;
    vy = -vy;  // same sign convention
  }
  CHECK(std::abs(model.components[0] - vx) <= 1e-6);
  CHECK(std::abs(model.components[1] - vy) <= 1e-6);
  // and the jitter is small enough that the axis is essentially (1,1)/sqrt(2)
  CHECK(std::abs(model.components[0] - inv_sqrt2) <= 1e-3);
  CHECK(std::abs(model.components[1] - inv_sqrt2) <= 1e-3);
}

TEST_CASE("component matrix shape at full scale") {
  const auto x = random_matrix(260, 4096, 0xb16);
  const auto model = fit(x, 250);
  CHECK(model.k == 250);
  CHECK(model.d == 4096);
  CHECK(model.components.size() == 250u * 4096u);
  CHECK(model.eigenvalues.size() == 250);
  for (std::size_t i = 1; i < model.k; ++i)
    CHECK(model.eigenvalues[i] <= model.eigenvalues[i - 1]);
  CHECK(max_abs_offdiag_error(model) <= 1e-8);
}

TEST_CASE("transform behavior") {
  const auto x = random_matrix(30, 10, 0x7ea);
  const auto model = fit(x, 4);

  SUBCASE("the mean maps to zero") {
    const auto z = transform(model, model.mean);
    for (double v : z) CHECK(std::abs(v) <= 1e-12);
  }
  SUBCASE("mean plus a component row maps to a basis vector") {
    std::vector<double> probe = model.mean;
    for (std::size_t j = 0; j < model.d; ++j)
      probe[j] += model.components[0 * model.d + j];
    const auto z = transform(model, probe);
    CHECK(std::abs(z[0] - 1.0) <= 1e-10);
    for (std::size_t i = 1; i < model.k; ++i) CHECK(std::abs(z[i]) <= 1e-10);
  }
  SUBCASE("agrees with a naive multiply") {
    CounterRng rng(0xfee1);
    std::vector<double> probe(model.d);
    for (auto& v : probe) v = rng.next_gaussian();
    const auto z = transform(model, probe);
    for (std::size_t i = 0; i < model.k; ++i) {
      double want = 0.0;
      for (std::size_t j = 0; j < model.d; ++j)
        want += model.components[i * model.d + j] * (probe[j] - model.mean[j]);
      CHECK(std::abs(z[i] - want) <= 1e-10);
    }
  }
  SUBCASE("length mismatch is rejected") {
    const std::vector<double> bad(3, 0.0);
    CHECK_THROWS_AS(transform(model, bad), DataError);
  }
}

TEST_CASE("Eckart-Young: reconstruction error equals the discarded spectrum") {
  const auto x = random_matrix(50, 200, 0xec4a);
  const std::size_t full = 49;  // min(n-1, d)
  const auto complete = fit(x, full);
  for (std::size_t k : {5u, 20u, 40u}) {
    const auto model = fit(x, k);
    double err = 0.0;
    for (std::size_t i = 0; i < x.n; ++i) {
      const auto back = inverse_transform(model, transform(model, x.row(i)));
      for (std::size_t j = 0; j < x.d; ++j) {
        const double dd = back[j] - x.data[i * x.d + j];
        err += dd * dd;
      }
    }
    err /= static_cast<double>(x.n - 1);
    double discarded = 0.0;
    for (std::size_t i = k; i < full; ++i) discarded += complete.eigenvalues[i];
    CHECK(std::abs(err - discarded) <= 1e-6 * std::max(1.0, discarded));
  }
}

TEST_CASE("projection idempotence") {
  const auto x = random_matrix(25, 12, 0x1de);
  const auto model = fit(x, 6);
  CounterRng rng(0x99);
  std::vector<double> z(6);
  for (auto& v : z) v = rng.next_gaussian();
  const auto z2 = transform(model, inverse_transform(model, z));
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(z2[i] - z[i]) <= 1e-9);
}

TEST_CASE("fit is deterministic") {
  const auto x = random_matrix(40, 16, 0xd37);
  const auto a = fit(x, 8);
  const auto b = fit(x, 8);
  CHECK(a.components == b.components);
  CHECK(a.eigenvalues == b.eigenvalues);
  CHECK(a.mean == b.mean);
}

TEST_CASE("explained variance ratio") {
  const auto x = random_matrix(30, 10, 0xeee);
  const auto model = fit(x, 9);
  const auto evr = explained_variance_ratio(model);
  double sum = 0.0;
  for (std::size_t i = 0; i < evr.size(); ++i) {
    CHECK(evr[i] >= 0.0);
    if (i) CHECK(evr[i] <= evr[i - 1] + 1e-12);
    sum += evr[i];
  }
  CHECK(sum <= 1.0 + 1e-9);
}

TEST_CASE("k out of range is rejected") {
  const auto x = random_matrix(10, 6, 0xbad);
  CHECK_THROWS_AS(fit(x, 0), DataError);
  CHECK_THROWS_AS(fit(x, 7), DataError);   // > d
  CHECK_THROWS_AS(fit(x, 10), DataError);  // > n-1
}

TEST_CASE("rank-deficient data zero-pads eigenvalues, stays orthonormal") {
  // Rank 2 data in 6 dims; ask for 4 components.
  FeatureMatrix x;
  x.n = 20;
  x.d = 6;
  x.data.assign(120, 0.0);
  x.row_ids.resize(20);
  CounterRng rng(0x88);
  for (std::size_t i = 0; i < 20; ++i) {
    const double a = rng.next_gaussian(), b = rng.next_gaussian();
    x.data[i * 6 + 0] = a;
    x.data[i * 6 + 1] = b;
    x.data[i * 6 + 2] = a + b;
  }
  const auto model = fit(x, 4);
  CHECK(model.eigenvalues[2] == 0.0);
  CHECK(model.eigenvalues[3] == 0.0);
  CHECK(max_abs_offdiag_error(model) <= 1e-8);
}

TEST_CASE("model and feature files round trip") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path();
  const auto x = random_matrix(12, 7, 0xf11e);
  const auto model = fit(x, 3);

  const auto model_path = dir / "taillight_test.tlpc";
  save_model(model_path, model);
  const auto loaded = load_model(model_path);
  CHECK(loaded.mean == model.mean);
  CHECK(loaded.components == model.components);
  CHECK(loaded.eigenvalues == model.eigenvalues);
  CHECK(loaded.total_variance == model.total_variance);
  fs::remove(model_path);

  const auto feat_path = dir / "taillight_test.tlfm";
  save_features(feat_path, x);
  const auto back = load_features(feat_path);
  CHECK(back.data == x.data);
  CHECK(back.row_ids == x.row_ids);
  fs::remove(feat_path);

  SUBCASE("bad magic is rejected") {
    const auto bad = dir / "taillight_bad.tlpc";
    std::ofstream(bad) << "NOPEgarbage";
    CHECK_THROWS_AS(load_model(bad), DataError);
    fs::remove(bad);
  }
}
