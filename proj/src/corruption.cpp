#include "taillight/corruption.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "taillight/image_io.hpp"
#include "taillight/rng.hpp"

namespace taillight::corrupt {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct KindInfo {
  Kind kind;
  const char* name;
  Partition partition;
};

constexpr std::array<KindInfo, kKindCount> kKinds = {{
    {Kind::rain_blur, "rain_blur", Partition::train},
    {Kind::snow, "snow", Partition::train},
    {Kind::fog, "fog", Partition::train},
    {Kind::alpha_blend, "alpha_blend", Partition::train},
    {Kind::frosted_glass_blur, "frosted_glass_blur", Partition::train},
    {Kind::lens_defect, "lens_defect", Partition::train},
    {Kind::jpeg, "jpeg", Partition::train},
    {Kind::zoom_blur, "zoom_blur", Partition::test},
    {Kind::frost, "frost", Partition::test},
    {Kind::contrast, "contrast", Partition::test},
    {Kind::rain_drop, "rain_drop", Partition::test},
    {Kind::shot_noise, "shot_noise", Partition::test},
    {Kind::pixelate, "pixelate", Partition::test},
}};

}  // namespace

const char* kind_name(Kind kind) { return kKinds[static_cast<int>(kind)].name; }

Kind kind_from_name(std::string_view name) {
  for (const auto& info : kKinds)
    if (name == info.name) return info.kind;
  throw DataError("unknown corruption kind: '" + std::string(name) + "'");
}

const char* severity_name(Severity level) {
  switch (level) {
    case Severity::mild: return "mild";
    case Severity::moderate: return "moderate";
    case Severity::severe: return "severe";
  }
  throw DataError("invalid severity");
}

Severity severity_from_name(std::string_view name) {
  if (name == "mild") return Severity::mild;
  if (name == "moderate") return Severity::moderate;
  if (name == "severe") return Severity::severe;
  throw DataError("unknown severity: '" + std::string(name) + "'");
}

Partition kind_partition(Kind kind) {
  return kKinds[static_cast<int>(kind)].partition;
}

std::vector<Kind> corruption_partition(Partition partition) {
  std::vector<Kind> out;
  for (const auto& info : kKinds)
    if (info.partition == partition) out.push_back(info.kind);
  return out;
}

namespace {

// Frozen severity tables, indexed mild/moderate/severe.
template <typename T>
T pick(Severity s, T mild, T moderate, T severe) {
  switch (s) {
    case Severity::mild: return mild;
    case Severity::moderate: return moderate;
    case Severity::severe: return severe;
  }
  throw DataError("invalid severity");
}

}  // namespace

ParamTable severity_params(Kind kind, Severity s) {
  switch (kind) {
    case Kind::rain_blur:
      return {{"kernel_len", pick(s, 7.0, 13.0, 21.0)},
              {"lift", pick(s, 0.03, 0.05, 0.08)}};
    case Kind::snow:
      return {{"density", pick(s, 0.015, 0.04, 0.08)},
              {"blur_len", pick(s, 7.0, 11.0, 15.0)},
              {"strength", pick(s, 0.45, 0.55, 0.65)},
              {"lift", pick(s, 0.02, 0.04, 0.06)}};
    case Kind::fog:
      return {{"strength", pick(s, 0.35, 0.50, 0.65)}};
    case Kind::alpha_blend:
      return {{"alpha", pick(s, 0.15, 0.30, 0.45)}};
    case Kind::frosted_glass_blur:
      return {{"delta", pick(s, 1.0, 2.0, 3.0)},
              {"iterations", pick(s, 1.0, 2.0, 3.0)}};
    case Kind::lens_defect:
      return {{"blobs", pick(s, 3.0, 5.0, 8.0)},
              {"scratches", pick(s, 1.0, 2.0, 3.0)},
              {"alpha", pick(s, 0.45, 0.60, 0.75)}};
    case Kind::jpeg:
      return {{"quality", pick(s, 25.0, 15.0, 7.0)}};
    case Kind::zoom_blur:
      return {{"max_scale", pick(s, 1.06, 1.12, 1.20)}, {"step", 0.02}};
    case Kind::frost:
      return {{"image_weight", pick(s, 0.78, 0.65, 0.55)},
              {"frost_weight", pick(s, 0.25, 0.40, 0.55)}};
    case Kind::contrast:
      return {{"factor", pick(s, 0.55, 0.35, 0.20)}};
    case Kind::rain_drop:
      return {{"count", pick(s, 6.0, 12.0, 20.0)},
              {"radius", pick(s, 0.055, 0.075, 0.095)}};
    case Kind::shot_noise:
      return {{"lambda", pick(s, 60.0, 25.0, 12.0)}};
    case Kind::pixelate:
      return {{"block_size", pick(s, 4.0, 8.0, 16.0)}};
  }
  throw DataError("invalid corruption kind");
}

CorruptionSpec make_spec(Kind kind, Severity level, std::uint64_t seed) {
  return {kind, level, seed, severity_params(kind, level)};
}

std::string provenance_stem(const std::string& stem,
                            const CorruptionSpec& spec) {
  return stem + "__" + kind_name(spec.kind) + "__" +
         severity_name(spec.severity) + "__" + std::to_string(spec.seed);
}

// -------------------------------------------------------------------
// Real-valued working raster and shared helpers.
// -------------------------------------------------------------------

namespace {

struct RasterD {
  int w = 0, h = 0;
  std::vector<double> v;  // RGB interleaved, [0,1]

  RasterD(int width, int height)
      : w(width), h(height), v(static_cast<std::size_t>(width) * height * 3) {}
  double& at(int x, int y, int c) {
    return v[(static_cast<std::size_t>(y) * w + x) * 3 + c];
  }
  double at(int x, int y, int c) const {
    return v[(static_cast<std::size_t>(y) * w + x) * 3 + c];
  }
};

RasterD to_real(const Image8& img) {
  RasterD out(img.width, img.height);
  for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] = img.pixels[i] / 255.0;
  return out;
}

Image8 quantize(const RasterD& r) {
  Image8 out(r.w, r.h);
  for (std::size_t i = 0; i < r.v.size(); ++i)
    out.pixels[i] = quantize01(r.v[i]);
  return out;
}

double param(const ParamTable& t, const char* name) {
  auto it = t.find(name);
  if (it == t.end())
    throw DataError(std::string("missing corruption parameter: ") + name);
  return it->second;
}

struct KernelD {
  int size = 0;  // size x size, odd
  std::vector<double> v;
  double at(int x, int y) const {
    return v[static_cast<std::size_t>(y) * size + x];
  }
};

/// Normalized motion-blur kernel: a line of the given length through
/// the kernel center at the given angle, bilinearly rasterized.
KernelD line_kernel(int length, double angle) {
  const int size = length | 1;
  KernelD k;
  k.size = size;
  k.v.assign(static_cast<std::size_t>(size) * size, 0.0);
  const double c = (size - 1) / 2.0;
  const double dx = std::cos(angle), dy = std::sin(angle);
  for (int i = 0; i < length; ++i) {
    const double t = i - (length - 1) / 2.0;
    const double x = c + t * dx, y = c + t * dy;
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0, fy = y - y0;
    for (int sy = 0; sy <= 1; ++sy)
      for (int sx = 0; sx <= 1; ++sx) {
        const int px = x0 + sx, py = y0 + sy;
        if (px < 0 || px >= size || py < 0 || py >= size) continue;
        k.v[static_cast<std::size_t>(py) * size + px] +=
            (sx ? fx : 1.0 - fx) * (sy ? fy : 1.0 - fy);
      }
  }
  double sum = 0.0;
  for (double w : k.v) sum += w;
  for (double& w : k.v) w /= sum;
  return k;
}

RasterD convolve(const RasterD& img, const KernelD& k) {
  RasterD out(img.w, img.h);
  const int r = k.size / 2;
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int ky = 0; ky < k.size; ++ky) {
          const int sy = std::clamp(y + ky - r, 0, img.h - 1);
          for (int kx = 0; kx < k.size; ++kx) {
            const int sx = std::clamp(x + kx - r, 0, img.w - 1);
            acc += k.at(kx, ky) * img.at(sx, sy, c);
          }
        }
        out.at(x, y, c) = acc;
      }
  return out;
}

ImageF convolve(const ImageF& img, const KernelD& k) {
  ImageF out(img.width, img.height);
  const int r = k.size / 2;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int ky = 0; ky < k.size; ++ky) {
        const int sy = std::clamp(y + ky - r, 0, img.height - 1);
        for (int kx = 0; kx < k.size; ++kx) {
          const int sx = std::clamp(x + kx - r, 0, img.width - 1);
          acc += k.at(kx, ky) * img.at(sx, sy);
        }
      }
      out.at(x, y) = acc;
    }
  return out;
}

RasterD box_blur3(const RasterD& img) {
  RasterD out(img.w, img.h);
  for (int y = 0; y < img.h; ++y)
    for (int x = 0; x < img.w; ++x)
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx)
            acc += img.at(std::clamp(x + dx, 0, img.w - 1),
                          std::clamp(y + dy, 0, img.h - 1), c);
        out.at(x, y, c) = acc / 9.0;
      }
  return out;
}

double sample_bilinear(const RasterD& img, double x, double y, int c) {
  x = std::clamp(x, 0.0, img.w - 1.0);
  y = std::clamp(y, 0.0, img.h - 1.0);
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, img.w - 1);
  const int y1 = std::min(y0 + 1, img.h - 1);
  const double fx = x - x0, fy = y - y0;
  const double top = (1 - fx) * img.at(x0, y0, c) + fx * img.at(x1, y0, c);
  const double bot = (1 - fx) * img.at(x0, y1, c) + fx * img.at(x1, y1, c);
  return (1 - fy) * top + fy * bot;
}

/// Diamond-square plasma field, min-max normalized to [0,1].
ImageF plasma(int w, int h, std::uint64_t key, double roughness) {
  int g = 1;
  while (g < std::max(w, h)) g <<= 1;
  const int n = g + 1;
  std::vector<double> grid(static_cast<std::size_t>(n) * n, 0.0);
  auto cell = [&](int x, int y) -> double& {
    return grid[static_cast<std::size_t>(y) * n + x];
  };
  CounterRng rng(key);
  cell(0, 0) = rng.next_double();
  cell(g, 0) = rng.next_double();
  cell(0, g) = rng.next_double();
  cell(g, g) = rng.next_double();
  double amp = 0.5;
  for (int step = g; step > 1; step /= 2) {
    const int half = step / 2;
    for (int y = half; y < n; y += step)
      for (int x = half; x < n; x += step) {
        const double avg = (cell(x - half, y - half) + cell(x + half, y - half) +
                            cell(x - half, y + half) + cell(x + half, y + half)) /
                           4.0;
        cell(x, y) = avg + (rng.next_double() - 0.5) * amp;
      }
    for (int y = 0; y < n; y += half)
      for (int x = (y / half) % 2 == 0 ? half : 0; x < n; x += step) {
        double sum = 0.0;
        int cnt = 0;
        if (x - half >= 0) { sum += cell(x - half, y); ++cnt; }
        if (x + half < n) { sum += cell(x + half, y); ++cnt; }
        if (y - half >= 0) { sum += cell(x, y - half); ++cnt; }
        if (y + half < n) { sum += cell(x, y + half); ++cnt; }
        cell(x, y) = sum / cnt + (rng.next_double() - 0.5) * amp;
      }
    amp *= roughness;
  }
  double lo = grid[0], hi = grid[0];
  for (double v : grid) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double range = hi - lo > 0 ? hi - lo : 1.0;
  ImageF out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = (cell(x, y) - lo) / range;
  return out;
}

// Sub-stream tags so distinct draws never collide.
enum : std::uint64_t {
  kTagGeometry = 0x67656f6dULL,
  kTagPixel = 0x70697865ULL,
  kTagFrost = 0x66726f73ULL,
};

// ---- the 13 masks -------------------------------------------------

Image8 do_rain_blur(const Image8& img, const CorruptionSpec& spec) {
  const int len = static_cast<int>(param(spec.params, "kernel_len"));
  const double lift = param(spec.params, "lift");
  CounterRng rng(mix_keys(spec.seed, kTagGeometry, 1));
  const double angle = kPi / 2.0 + (rng.next_double() - 0.5) * (kPi / 4.5);
  RasterD out = convolve(to_real(img), line_kernel(len, angle));
  for (double& v : out.v) v += lift;
  return quantize(out);
}

Image8 do_snow(const Image8& img, const CorruptionSpec& spec) {
  const double density = param(spec.params, "density");
  const int blur_len = static_cast<int>(param(spec.params, "blur_len"));
  const double strength = param(spec.params, "strength");
  const double lift = param(spec.params, "lift");

  ImageF flakes(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const std::uint64_t u = mix_keys(
          spec.seed, kTagPixel, static_cast<std::uint64_t>(y) * img.width + x);
      flakes.at(x, y) = ((u >> 11) * 0x1.0p-53 > 1.0 - density) ? 1.0 : 0.0;
    }
  CounterRng rng(mix_keys(spec.seed, kTagGeometry, 2));
  const double angle = -kPi / 2.0 + (rng.next_double() - 0.5) * (kPi / 3.0);
  ImageF layer = convolve(flakes, line_kernel(blur_len, angle));

  RasterD out = to_real(img);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const double s = std::min(1.0, layer.at(x, y) * 4.0);
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) += strength * s + lift;
    }
  return quantize(out);
}

Image8 do_fog(const Image8& img, const CorruptionSpec& spec) {
  const double strength = param(spec.params, "strength");
  const ImageF haze =
      plasma(img.width, img.height, mix_keys(spec.seed, kTagGeometry, 3), 0.55);
  const double fog_gray = 0.92;
  RasterD out = to_real(img);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const double t = strength * haze.at(x, y);
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) = out.at(x, y, c) * (1.0 - t) + fog_gray * t;
    }
  return quantize(out);
}

Image8 do_alpha_blend(const Image8& img, const CorruptionSpec& spec) {
  const double alpha = param(spec.params, "alpha");
  RasterD out = to_real(img);
  for (double& v : out.v) v = (1.0 - alpha) * v + alpha * 0.5;
  return quantize(out);
}

Image8 do_frosted_glass(const Image8& img, const CorruptionSpec& spec) {
  const int delta = static_cast<int>(param(spec.params, "delta"));
  const int iterations = static_cast<int>(param(spec.params, "iterations"));
  Image8 shuffled = img;
  for (int it = 0; it < iterations; ++it)
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        CounterRng rng(mix_keys(spec.seed, kTagPixel + 1 + it,
                                static_cast<std::uint64_t>(y) * img.width + x));
        const int nx = std::clamp(x + rng.next_int(-delta, delta), 0,
                                  img.width - 1);
        const int ny = std::clamp(y + rng.next_int(-delta, delta), 0,
                                  img.height - 1);
        for (int c = 0; c < 3; ++c)
          std::swap(shuffled.at(x, y, c), shuffled.at(nx, ny, c));
      }
  return quantize(box_blur3(to_real(shuffled)));
}

Image8 do_lens_defect(const Image8& img, const CorruptionSpec& spec) {
  const int nblobs = static_cast<int>(param(spec.params, "blobs"));
  const int nscratches = static_cast<int>(param(spec.params, "scratches"));
  const double alpha = param(spec.params, "alpha");

  // All geometry is drawn up front from one stream so milder severities
  // use a prefix of the severe set.
  struct Blob { double cx, cy, rx, ry; };
  struct Scratch { double x, y, angle, len; };
  constexpr int kMaxBlobs = 8, kMaxScratches = 3;
  CounterRng rng(mix_keys(spec.seed, kTagGeometry, 4));
  const double m = std::min(img.width, img.height);
  std::array<Blob, kMaxBlobs> blobs;
  for (auto& b : blobs) {
    b.cx = (0.1 + 0.8 * rng.next_double()) * img.width;
    b.cy = (0.1 + 0.8 * rng.next_double()) * img.height;
    b.rx = (0.04 + 0.06 * rng.next_double()) * m;
    b.ry = b.rx * (0.6 + 0.8 * rng.next_double());
  }
  std::array<Scratch, kMaxScratches> scratches;
  for (auto& s : scratches) {
    s.x = rng.next_double() * img.width;
    s.y = rng.next_double() * img.height;
    s.angle = rng.next_double() * kPi;
    s.len = (0.3 + 0.4 * rng.next_double()) * m;
  }

  RasterD out = to_real(img);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double att = 0.0;
      for (int i = 0; i < nblobs; ++i) {
        const auto& b = blobs[i];
        const double u = (x - b.cx) / b.rx, v = (y - b.cy) / b.ry;
        const double d = u * u + v * v;
        if (d < 1.0) att = std::max(att, std::min(1.0, (1.0 - d) / 0.25));
      }
      if (att > 0.0)
        for (int c = 0; c < 3; ++c)
          out.at(x, y, c) *= 1.0 - alpha * att;
    }
  // Thin bright streaks (dust trails) on top of the blobs.
  for (int i = 0; i < nscratches; ++i) {
    const auto& s = scratches[i];
    const double dx = std::cos(s.angle), dy = std::sin(s.angle);
    for (double t = 0.0; t < s.len; t += 0.5) {
      const int px = static_cast<int>(std::llround(s.x + t * dx));
      const int py = static_cast<int>(std::llround(s.y + t * dy));
      if (px < 0 || px >= img.width || py < 0 || py >= img.height) continue;
      for (int c = 0; c < 3; ++c)
        out.at(px, py, c) =
            out.at(px, py, c) * (1.0 - 0.4 * alpha) + 0.4 * alpha;
    }
  }
  return quantize(out);
}

Image8 do_jpeg(const Image8& img, const CorruptionSpec& spec) {
  return jpeg_roundtrip(img, static_cast<int>(param(spec.params, "quality")));
}

Image8 do_zoom_blur(const Image8& img, const CorruptionSpec& spec) {
  const double max_scale = param(spec.params, "max_scale");
  const double step = param(spec.params, "step");
  const RasterD src = to_real(img);
  RasterD acc = src;
  int count = 1;
  const double cx = (img.width - 1) / 2.0, cy = (img.height - 1) / 2.0;
  for (double s = 1.0 + step; s <= max_scale + 1e-9; s += step) {
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        const double sx = cx + (x - cx) / s;
        const double sy = cy + (y - cy) / s;
        for (int c = 0; c < 3; ++c)
          acc.at(x, y, c) += sample_bilinear(src, sx, sy, c);
      }
    ++count;
  }
  for (double& v : acc.v) v /= count;
  return quantize(acc);
}

const std::array<ImageF, 4>& frost_textures() {
  // Bundled read-only texture set, generated once from fixed keys.
  static const std::array<ImageF, 4> textures = [] {
    std::array<ImageF, 4> t;
    for (int i = 0; i < 4; ++i) {
      const std::uint64_t key = mix_keys(0xf05712a3ULL, kTagFrost, i);
      ImageF base = plasma(256, 256, key, 0.7);
      ImageF streaks = plasma(256, 256, mix_keys(key, 77), 0.45);
      ImageF tex(256, 256);
      for (int y = 0; y < 256; ++y)
        for (int x = 0; x < 256; ++x) {
          // Crystalline look: sharpened plasma with directional streaks.
          const double p = std::pow(base.at(x, y), 1.5);
          const double s = streaks.at((x * 3 + y) % 256, y);
          tex.at(x, y) = clamp01(0.35 + 0.65 * std::max(p, s * s));
        }
      t[i] = std::move(tex);
    }
    return t;
  }();
  return textures;
}

Image8 do_frost(const Image8& img, const CorruptionSpec& spec) {
  const double iw = param(spec.params, "image_weight");
  const double fw = param(spec.params, "frost_weight");
  const auto& textures = frost_textures();
  CounterRng rng(mix_keys(spec.seed, kTagGeometry, 5));
  const ImageF& tex = textures[rng.next_below(textures.size())];
  const int ox = static_cast<int>(rng.next_below(256));
  const int oy = static_cast<int>(rng.next_below(256));

  RasterD out = to_real(img);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const double f = tex.at((x + ox) % 256, (y + oy) % 256);
      for (int c = 0; c < 3; ++c)
        out.at(x, y, c) = iw * out.at(x, y, c) + fw * f;
    }
  return quantize(out);
}

Image8 do_contrast(const Image8& img, const CorruptionSpec& spec) {
  const double factor = param(spec.params, "factor");
  RasterD out = to_real(img);
  double mean = 0.0;
  for (double v : out.v) mean += v;
  mean /= static_cast<double>(out.v.size());
  for (double& v : out.v) v = (v - mean) * factor + mean;
  return quantize(out);
}

Image8 do_rain_drop(const Image8& img, const CorruptionSpec& spec) {
  const int count = static_cast<int>(param(spec.params, "count"));
  const double radius = param(spec.params, "radius");

  struct Drop { double cx, cy, rx, ry; };
  constexpr int kMaxDrops = 20;
  CounterRng rng(mix_keys(spec.seed, kTagGeometry, 6));
  const double m = std::min(img.width, img.height);
  std::array<Drop, kMaxDrops> drops;
  for (auto& d : drops) {
    d.cx = (0.05 + 0.9 * rng.next_double()) * img.width;
    d.cy = (0.05 + 0.9 * rng.next_double()) * img.height;
    d.rx = radius * m * (0.7 + 0.6 * rng.next_double());
    d.ry = d.rx * (0.8 + 0.4 * rng.next_double());
  }

  const RasterD src = to_real(img);
  const RasterD blurred = box_blur3(src);
  RasterD out = src;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      for (int i = 0; i < count; ++i) {
        const auto& d = drops[i];
        const double u = (x - d.cx) / d.rx, v = (y - d.cy) / d.ry;
        const double dist = u * u + v * v;
        if (dist >= 1.0) continue;
        // Refraction toward the drop center, a touch of blur, and a
        // bright rim.
        const double sx = d.cx + (x - d.cx) * 0.65;
        const double sy = d.cy + (y - d.cy) * 0.65;
        const double rim = dist > 0.7 ? 0.10 * (dist - 0.7) / 0.3 : 0.0;
        for (int c = 0; c < 3; ++c)
          out.at(x, y, c) = 0.85 * sample_bilinear(src, sx, sy, c) +
                            0.15 * blurred.at(x, y, c) + rim;
        break;  // first drop containing the pixel wins
      }
    }
  return quantize(out);
}

Image8 do_shot_noise(const Image8& img, const CorruptionSpec& spec) {
  const double lambda = param(spec.params, "lambda");
  if (lambda <= 0.0) throw DataError("shot_noise: lambda must be positive");
  Image8 out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) {
        CounterRng rng(mix_keys(
            spec.seed, kTagPixel + 9,
            (static_cast<std::uint64_t>(y) * img.width + x) * 3 + c));
        const double rate = img.at(x, y, c) / 255.0 * lambda;
        out.at(x, y, c) = quantize01(rng.next_poisson(rate) / lambda);
      }
  return out;
}

Image8 do_pixelate(const Image8& img, const CorruptionSpec& spec) {
  const int block = static_cast<int>(param(spec.params, "block_size"));
  if (block < 1) throw DataError("pixelate: block size must be at least 1");
  Image8 out(img.width, img.height);
  for (int y0 = 0; y0 < img.height; y0 += block)
    for (int x0 = 0; x0 < img.width; x0 += block) {
      const int y1 = std::min(y0 + block, img.height);
      const int x1 = std::min(x0 + block, img.width);
      double mean[3] = {0, 0, 0};
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
          for (int c = 0; c < 3; ++c) mean[c] += img.at(x, y, c);
      const double n = static_cast<double>((y1 - y0) * (x1 - x0));
      std::uint8_t px[3];
      for (int c = 0; c < 3; ++c) px[c] = quantize255(mean[c] / n);
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
          for (int c = 0; c < 3; ++c) out.at(x, y, c) = px[c];
    }
  return out;
}

}  // namespace

RoiImage apply_corruption(const Image8& image, const CorruptionSpec& spec) {
  if (image.empty()) throw DataError("apply_corruption: empty image");
  RoiImage out;
  switch (spec.kind) {
    case Kind::rain_blur: out.image = do_rain_blur(image, spec); break;
    case Kind::snow: out.image = do_snow(image, spec); break;
    case Kind::fog: out.image = do_fog(image, spec); break;
    case Kind::alpha_blend: out.image = do_alpha_blend(image, spec); break;
    case Kind::frosted_glass_blur:
      out.image = do_frosted_glass(image, spec);
      break;
    case Kind::lens_defect: out.image = do_lens_defect(image, spec); break;
    case Kind::jpeg: out.image = do_jpeg(image, spec); break;
    case Kind::zoom_blur: out.image = do_zoom_blur(image, spec); break;
    case Kind::frost: out.image = do_frost(image, spec); break;
    case Kind::contrast: out.image = do_contrast(image, spec); break;
    case Kind::rain_drop: out.image = do_rain_drop(image, spec); break;
    case Kind::shot_noise: out.image = do_shot_noise(image, spec); break;
    case Kind::pixelate: out.image = do_pixelate(image, spec); break;
  }
  out.prov.origin = "corrupt";
  out.prov.corruption = kind_name(spec.kind);
  out.prov.severity = severity_name(spec.severity);
  out.prov.seed = spec.seed;
  return out;
}

}  // namespace taillight::corrupt
