#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace taillight {

// Error taxonomy maps onto the CLI exit codes: ConfigError -> 2,
// DataError -> 3, NumericError -> 4.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// 8-bit RGB raster, interleaved, row-major, origin at the top-left.
struct Image8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  Image8() = default;
  Image8(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, fill) {}

  std::uint8_t& at(int x, int y, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  std::uint8_t at(int x, int y, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  bool empty() const { return width <= 0 || height <= 0; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * height;
  }
};

/// Single-channel real-valued raster.
struct ImageF {
  int width = 0;
  int height = 0;
  std::vector<double> v;

  ImageF() = default;
  ImageF(int w, int h, double fill = 0.0)
      : width(w), height(h), v(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) { return v[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const {
    return v[static_cast<std::size_t>(y) * width + x];
  }
  bool empty() const { return width <= 0 || height <= 0; }
};

/// Where a processed image came from. `origin` is one of
/// "clean", "night-synth", "corrupt"; the remaining fields are only
/// meaningful for corrupted images.
struct Provenance {
  std::string origin = "clean";
  std::string corruption;
  std::string severity;
  std::uint64_t seed = 0;
};

struct RoiImage {
  Image8 image;
  Provenance prov;
};

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

/// Quantize a [0,1] intensity to 8 bits; rounds half away from zero.
inline std::uint8_t quantize01(double v) {
  long long r = std::llround(v * 255.0);
  if (r < 0) r = 0;
  if (r > 255) r = 255;
  return static_cast<std::uint8_t>(r);
}

/// Quantize a [0,255] intensity to 8 bits; rounds half away from zero.
inline std::uint8_t quantize255(double v) {
  long long r = std::llround(v);
  if (r < 0) r = 0;
  if (r > 255) r = 255;
  return static_cast<std::uint8_t>(r);
}

// Rec. 709 luma weights, shared by every stage that needs a scalar
// brightness (grayscale conversion, luminance-windowed gains).
inline constexpr double kLumaR = 0.2126;
inline constexpr double kLumaG = 0.7152;
inline constexpr double kLumaB = 0.0722;

inline double luma01(double r, double g, double b) {
  return kLumaR * r + kLumaG * g + kLumaB * b;
}

/// Grayscale [0,1] raster from an 8-bit RGB image.
ImageF to_gray(const Image8& img);

/// Bilinear resampling with half-pixel centers and clamped borders.
/// Same-size calls are exact identities.
Image8 bilinear_resize(const Image8& src, int out_w, int out_h);
ImageF bilinear_resize(const ImageF& src, int out_w, int out_h);

/// Mean luma of an image, in [0,1].
double mean_luma(const Image8& img);

}  // namespace taillight
