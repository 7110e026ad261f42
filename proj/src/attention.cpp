#include "taillight/attention.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

namespace taillight::attention {

namespace {

struct MinMax {
  double lo, hi;
};

MinMax min_max(const std::vector<double>& v) {
  MinMax m{v[0], v[0]};
  for (double x : v) {
    m.lo = std::min(m.lo, x);
    m.hi = std::max(m.hi, x);
  }
  return m;
}

// Min-max normalization to [0,1]; an all-equal raster maps to all-zero.
void normalize_unit(ImageF& map) {
  const MinMax m = min_max(map.v);
  const double range = m.hi - m.lo;
  if (range <= 0.0) {
    std::fill(map.v.begin(), map.v.end(), 0.0);
    return;
  }
  for (double& x : map.v) x = (x - m.lo) / range;
}

}  // namespace

ImageF rarity_map_raw(const ImageF& map, int bins) {
  if (map.empty()) throw DataError("rarity_map: empty map");
  if (bins < 2) throw DataError("rarity_map: need at least 2 bins");
  for (double x : map.v)
    if (!std::isfinite(x)) throw DataError("rarity_map: non-finite value");

  ImageF out(map.width, map.height);
  const MinMax m = min_max(map.v);
  if (m.hi - m.lo <= 0.0) return out;  // single occupied bin, p = 1

  const double scale = bins / (m.hi - m.lo);
  auto bin_of = [&](double v) {
    int b = static_cast<int>((v - m.lo) * scale);
    return std::min(b, bins - 1);
  };
  std::vector<std::size_t> hist(static_cast<std::size_t>(bins), 0);
  for (double v : map.v) ++hist[bin_of(v)];

  const double n = static_cast<double>(map.v.size());
  for (std::size_t i = 0; i < map.v.size(); ++i)
    out.v[i] = -std::log2(hist[bin_of(map.v[i])] / n);
  return out;
}

ImageF rarity_map(const ImageF& map, int bins) {
  ImageF out = rarity_map_raw(map, bins);
  normalize_unit(out);
  return out;
}

ImageF conspicuity_from_stack(const FeatureMapStack& stack,
                              std::span<const double> fusion_weights) {
  if (stack.maps.empty()) throw DataError("conspicuity: empty stack");
  if (fusion_weights.size() != stack.maps.size())
    throw DataError("conspicuity: weight count does not match map count");
  if (stack.level == 1 && stack.maps.size() != 64)
    throw DataError("conspicuity: a level-1 stack must hold 64 maps");
  double weight_sum = 0.0;
  for (double w : fusion_weights) {
    if (w < 0.0) throw DataError("conspicuity: negative fusion weight");
    weight_sum += w;
  }
  if (weight_sum <= 0.0)
    throw DataError("conspicuity: fusion weights sum to zero");

  const int w = stack.maps[0].width, h = stack.maps[0].height;
  ImageF acc(w, h);
  for (std::size_t m = 0; m < stack.maps.size(); ++m) {
    const ImageF& map = stack.maps[m];
    if (map.width != w || map.height != h)
      throw DataError("conspicuity: stack maps differ in size");
    const ImageF r = rarity_map(map);
    const double wm = fusion_weights[m] / weight_sum;
    for (std::size_t i = 0; i < acc.v.size(); ++i) acc.v[i] += wm * r.v[i];
  }
  normalize_unit(acc);
  return acc;
}

ImageF conspicuity_from_stack(const FeatureMapStack& stack) {
  std::vector<double> uniform(stack.maps.size(), 1.0);
  return conspicuity_from_stack(stack, uniform);
}

ImageF conspicuity_from_stacks(std::span<const FeatureMapStack> stacks,
                               std::span<const double> stack_weights) {
  if (stacks.empty()) throw DataError("conspicuity: no stacks");
  std::vector<double> weights(stack_weights.begin(), stack_weights.end());
  if (weights.empty()) weights.assign(stacks.size(), 1.0);
  if (weights.size() != stacks.size())
    throw DataError("conspicuity: stack weight count mismatch");
  double weight_sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw DataError("conspicuity: negative stack weight");
    weight_sum += w;
  }
  if (weight_sum <= 0.0)
    throw DataError("conspicuity: stack weights sum to zero");

  const int w = stacks[0].maps.at(0).width, h = stacks[0].maps.at(0).height;
  ImageF acc(w, h);
  for (std::size_t s = 0; s < stacks.size(); ++s) {
    const ImageF c = conspicuity_from_stack(stacks[s]);
    if (c.width != w || c.height != h)
      throw DataError("conspicuity: stacks differ in size");
    const double ws = weights[s] / weight_sum;
    for (std::size_t i = 0; i < acc.v.size(); ++i) acc.v[i] += ws * c.v[i];
  }
  normalize_unit(acc);
  return acc;
}

namespace {

Kernel3 zero_mean(Kernel3 k) {
  double mean = 0.0;
  for (double v : k) mean += v;
  mean /= 9.0;
  for (double& v : k) v -= mean;
  return k;
}

std::vector<Kernel3> build_bank() {
  std::vector<Kernel3> bank;
  bank.reserve(64);
  const double kPi = 3.14159265358979323846;

  // 16 oriented first-derivative (edge) kernels.
  for (int i = 0; i < 16; ++i) {
    const double th = i * kPi / 16.0;
    Kernel3 k{};
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        k[(dy + 1) * 3 + (dx + 1)] = (dx * std::cos(th) + dy * std::sin(th)) *
                                     std::exp(-(dx * dx + dy * dy) / 2.0);
    bank.push_back(k);  // antisymmetric, already zero-mean
  }
  // 16 oriented second-derivative (bar) kernels.
  for (int i = 0; i < 16; ++i) {
    const double th = i * kPi / 16.0;
    Kernel3 k{};
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const double t = dx * std::cos(th) + dy * std::sin(th);
        k[(dy + 1) * 3 + (dx + 1)] =
            (1.0 - 2.0 * t * t) * std::exp(-(dx * dx + dy * dy) / 2.0);
      }
    bank.push_back(zero_mean(k));
  }
  // 8 center-surround kernels: 4 strengths x 2 polarities.
  for (int s = 0; s < 4; ++s) {
    const double g = 1.0 - 0.2 * s;
    Kernel3 k{};
    for (int i = 0; i < 9; ++i) k[i] = -g / 8.0;
    k[4] = g;
    bank.push_back(k);
    for (double& v : k) v = -v;
    bank.push_back(k);
  }
  // 8 corner (quadrant contrast) kernels.
  for (int q = 0; q < 4; ++q) {
    const int sx = (q & 1) ? 1 : -1;
    const int sy = (q & 2) ? 1 : -1;
    Kernel3 k{};
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        k[(dy + 1) * 3 + (dx + 1)] = (dx * sx > 0 && dy * sy > 0) ? 1.0 : 0.0;
    k = zero_mean(k);
    bank.push_back(k);
    for (double& v : k) v = -v;
    bank.push_back(k);
  }
  // 16 center-minus-neighbor kernels: 8 directions x 2 polarities.
  const int dirs[8][2] = {{1, 0},  {1, 1},  {0, 1},  {-1, 1},
                          {-1, 0}, {-1, -1}, {0, -1}, {1, -1}};
  for (const auto& d : dirs) {
    Kernel3 k{};
    k[4] = 1.0;
    k[(d[1] + 1) * 3 + (d[0] + 1)] = -1.0;
    bank.push_back(k);
    for (double& v : k) v = -v;
    bank.push_back(k);
  }
  return bank;
}

}  // namespace

const std::vector<Kernel3>& default_filter_bank() {
  static const std::vector<Kernel3> bank = build_bank();
  return bank;
}

FeatureMapStack filter_bank_maps(const ImageF& gray,
                                 std::span<const Kernel3> bank) {
  if (gray.empty()) throw DataError("filter_bank_maps: empty image");
  if (bank.empty()) throw DataError("filter_bank_maps: empty bank");
  FeatureMapStack stack;
  stack.level = 1;
  stack.maps.reserve(bank.size());
  const int w = gray.width, h = gray.height;
  for (const Kernel3& k : bank) {
    ImageF map(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
          const int sy = std::clamp(y + dy, 0, h - 1);
          for (int dx = -1; dx <= 1; ++dx) {
            const int sx = std::clamp(x + dx, 0, w - 1);
            acc += k[(dy + 1) * 3 + (dx + 1)] * gray.at(sx, sy);
          }
        }
        map.at(x, y) = acc;
      }
    }
    stack.maps.push_back(std::move(map));
  }
  return stack;
}

Image8 merge_with_raw(const Image8& image, const ImageF& conspicuity,
                      double alpha) {
  if (image.empty() || conspicuity.empty())
    throw DataError("merge_with_raw: empty input");
  if (alpha < 0.0 || alpha > 1.0)
    throw DataError("merge_with_raw: alpha outside [0,1]");
  const ImageF c =
      (conspicuity.width == image.width && conspicuity.height == image.height)
          ? conspicuity
          : bilinear_resize(conspicuity, image.width, image.height);
  Image8 out(image.width, image.height);
  for (int y = 0; y < image.height; ++y)
    for (int x = 0; x < image.width; ++x) {
      const double cv = clamp01(c.at(x, y)) * 255.0;
      for (int ch = 0; ch < 3; ++ch)
        out.at(x, y, ch) =
            quantize255((1.0 - alpha) * image.at(x, y, ch) + alpha * cv);
    }
  return out;
}

namespace {

struct Box {
  int x0, y0, x1, y1;  // half-open
  bool contains(int x, int y) const {
    return x >= x0 && x < x1 && y >= y0 && y < y1;
  }
  Box expanded(int rx, int ry, int w, int h) const {
    return {std::max(0, x0 - rx), std::max(0, y0 - ry),
            std::min(w, x1 + rx), std::min(h, y1 + ry)};
  }
};

int frac_len(double frac, int extent) {
  return std::clamp(static_cast<int>(std::llround(frac * extent)), 1, extent);
}

}  // namespace

MaskGeometry load_mask_geometry(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open geometry file: " + path.string());
  MaskGeometry g;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto a = line.find_first_not_of(" \t\r\n");
    if (a == std::string::npos || line[a] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected key = value");
    auto trim = [](std::string s) {
      const auto x = s.find_first_not_of(" \t\r\n");
      if (x == std::string::npos) return std::string();
      const auto y = s.find_last_not_of(" \t\r\n");
      return s.substr(x, y - x + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    double value = 0;
    try {
      value = std::stod(trim(line.substr(eq + 1)));
    } catch (...) {
      throw ConfigError(where + ": bad number");
    }
    if (key == "corner_w") g.corner_w = value;
    else if (key == "corner_h") g.corner_h = value;
    else if (key == "band_w") g.band_w = value;
    else if (key == "band_h") g.band_h = value;
    else if (key == "ring") g.ring = value;
    else throw ConfigError(where + ": unknown geometry key '" + key + "'");
  }
  return g;
}

WeightedMask build_weighted_mask(int roi_w, int roi_h,
                                 const MaskGeometry& geometry, double omega,
                                 double omega_prime, double w_high) {
  if (roi_w < 1 || roi_h < 1)
    throw DataError("build_weighted_mask: degenerate ROI");
  for (double f : {geometry.corner_w, geometry.corner_h, geometry.band_w,
                   geometry.band_h})
    if (f <= 0.0 || f > 1.0)
      throw DataError("build_weighted_mask: tier fraction outside (0,1]");
  if (geometry.ring < 0.0 || geometry.ring > 1.0)
    throw DataError("build_weighted_mask: ring fraction outside [0,1]");
  if (!(omega < omega_prime && omega_prime < w_high))
    throw DataError("build_weighted_mask: weights must satisfy w < w' < high");

  const int bw = frac_len(geometry.corner_w, roi_w);
  const int bh = frac_len(geometry.corner_h, roi_h);
  const int band_w = frac_len(geometry.band_w, roi_w);
  const int band_h = frac_len(geometry.band_h, roi_h);
  const int band_x0 = (roi_w - band_w) / 2;
  const Box high[3] = {
      {0, roi_h - bh, bw, roi_h},                  // left taillight corner
      {roi_w - bw, roi_h - bh, roi_w, roi_h},      // right taillight corner
      {band_x0, 0, band_x0 + band_w, band_h},      // brake-light band
  };
  const int rx = static_cast<int>(std::llround(geometry.ring * roi_w));
  const int ry = static_cast<int>(std::llround(geometry.ring * roi_h));

  WeightedMask mask;
  mask.width = roi_w;
  mask.height = roi_h;
  mask.omega = omega;
  mask.omega_prime = omega_prime;
  mask.w_high = w_high;
  mask.weights.resize(static_cast<std::size_t>(roi_w) * roi_h);

  std::size_t high_count = 0;
  for (int y = 0; y < roi_h; ++y)
    for (int x = 0; x < roi_w; ++x) {
      double w = omega;
      for (const Box& b : high) {
        if (b.contains(x, y)) {
          w = w_high;
          ++high_count;
          break;
        }
        if (w == omega && b.expanded(rx, ry, roi_w, roi_h).contains(x, y))
          w = omega_prime;
      }
      mask.weights[static_cast<std::size_t>(y) * roi_w + x] = w;
    }
  if (high_count == 0)
    throw DataError("build_weighted_mask: empty high-weight tier");
  return mask;
}

std::array<std::size_t, 3> tier_pixel_counts(const WeightedMask& mask) {
  std::array<std::size_t, 3> counts{0, 0, 0};
  for (double w : mask.weights) {
    if (w == mask.w_high) ++counts[2];
    else if (w == mask.omega_prime) ++counts[1];
    else ++counts[0];
  }
  return counts;
}

Image8 fuse_mask(const Image8& roi, const WeightedMask& mask) {
  if (roi.width != mask.width || roi.height != mask.height)
    throw DataError("fuse_mask: dimension mismatch");
  Image8 out(roi.width, roi.height);
  for (int y = 0; y < roi.height; ++y)
    for (int x = 0; x < roi.width; ++x) {
      const double w = mask.at(x, y);
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) = quantize255(w * roi.at(x, y, c));
    }
  return out;
}

}  // namespace taillight::attention
