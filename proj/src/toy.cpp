#include <algorithm>
#include <cmath>

#include "taillight/pipeline.hpp"
#include "taillight/rng.hpp"

namespace taillight::pipeline {

namespace {

struct Blob {
  double cx, cy, rx, ry;
  std::array<double, 3> color;
  bool lit;
};

void paint_blob(Image8& img, const Blob& blob) {
  if (!blob.lit) return;
  const int x0 = std::max(0, static_cast<int>(blob.cx - blob.rx - 1));
  const int x1 = std::min(img.width - 1, static_cast<int>(blob.cx + blob.rx + 1));
  const int y0 = std::max(0, static_cast<int>(blob.cy - blob.ry - 1));
  const int y1 = std::min(img.height - 1, static_cast<int>(blob.cy + blob.ry + 1));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double u = (x - blob.cx) / blob.rx;
      const double v = (y - blob.cy) / blob.ry;
      const double d2 = u * u + v * v;
      if (d2 >= 1.0) continue;
      const double alpha = 0.9 * std::min(1.0, (1.0 - d2) / 0.35);
      for (int c = 0; c < 3; ++c) {
        const double mixed =
            (1.0 - alpha) * img.at(x, y, c) + alpha * blob.color[c];
        img.at(x, y, c) = quantize255(mixed);
      }
    }
}

std::array<double, 3> jittered(const std::array<double, 3>& base,
                               CounterRng& rng, double jitter) {
  std::array<double, 3> out;
  for (int c = 0; c < 3; ++c)
    out[c] = base[c] + (rng.next_double() - 0.5) * 24.0 * jitter;
  return out;
}

}  // namespace

std::vector<data::AnnotatedFrame> generate_toy_dataset(const ToyRoiSpec& spec,
                                                       int n_per_class,
                                                       std::uint64_t seed) {
  if (n_per_class < 1)
    throw DataError("generate_toy_dataset: n_per_class must be at least 1");
  if (spec.canvas < 16)
    throw DataError("generate_toy_dataset: canvas too small");

  // Base signal colors per class, chosen so the mean-color signatures of
  // the three lamp regions are linearly separable at zero jitter.
  const std::array<double, 3> kBright{235, 28, 22};
  const std::array<double, 3> kDim{120, 22, 18};
  const std::array<double, 3> kAmber{245, 165, 25};
  const std::array<double, 3> kBand{240, 36, 26};

  const int s = spec.canvas;
  std::vector<data::AnnotatedFrame> frames;
  frames.reserve(static_cast<std::size_t>(n_per_class) * data::kClassCount);

  for (int cls = 0; cls < data::kClassCount; ++cls) {
    for (int i = 0; i < n_per_class; ++i) {
      CounterRng rng(mix_keys(seed, cls, static_cast<std::uint64_t>(i)));
      const double jitter = spec.jitter;

      data::AnnotatedFrame frame;
      frame.image = Image8(s, s);
      frame.label = data::class_from_id(cls);
      frame.box = {0.5, 0.5, 1.0, 1.0};
      frame.source_id = std::string("toy_") + data::class_name(frame.label) +
                        "_" + std::to_string(i);

      // Road background: vertical gradient with mild sensor noise.
      for (int y = 0; y < s; ++y)
        for (int x = 0; x < s; ++x) {
          const double base = 38.0 + 26.0 * y / s;
          for (int c = 0; c < 3; ++c) {
            const double noise = (rng.next_double() - 0.5) * 12.0 * jitter;
            frame.image.at(x, y, c) = quantize255(base + noise);
          }
        }
      // Car body with a rear-window band.
      const double body = 45.0 + (rng.next_double() - 0.5) * 20.0 * jitter;
      const int bx0 = static_cast<int>(0.08 * s), bx1 = static_cast<int>(0.92 * s);
      const int by0 = static_cast<int>(0.30 * s), by1 = static_cast<int>(0.97 * s);
      for (int y = by0; y < by1; ++y)
        for (int x = bx0; x < bx1; ++x)
          for (int c = 0; c < 3; ++c)
            frame.image.at(x, y, c) = quantize255(body + (c == 2 ? 6.0 : 0.0));
      const int wy0 = static_cast<int>(0.33 * s), wy1 = static_cast<int>(0.52 * s);
      for (int y = wy0; y < wy1; ++y)
        for (int x = static_cast<int>(0.20 * s); x < static_cast<int>(0.80 * s);
             ++x)
          for (int c = 0; c < 3; ++c)
            frame.image.at(x, y, c) = quantize255(body + 22.0);

      const bool braking = cls == static_cast<int>(data::BehaviorClass::braking);
      const bool left = cls == static_cast<int>(data::BehaviorClass::left_turn);
      const bool right = cls == static_cast<int>(data::BehaviorClass::right_turn);

      auto position = [&](double fx, double fy) {
        return std::pair<double, double>{
            fx * s + (rng.next_double() - 0.5) * 4.0 * jitter,
            fy * s + (rng.next_double() - 0.5) * 4.0 * jitter};
      };
      const double rx = 0.085 * s * (1.0 + (rng.next_double() - 0.5) * 0.2 * jitter);
      const double ry = 0.060 * s * (1.0 + (rng.next_double() - 0.5) * 0.2 * jitter);

      const auto [lx, ly] = position(0.14, 0.76);
      const auto [rxc, ryc] = position(0.86, 0.76);
      const auto [bx, byc] = position(0.50, 0.12);

      const auto left_color = left ? kAmber : (braking ? kBright : kDim);
      const auto right_color = right ? kAmber : (braking ? kBright : kDim);
      paint_blob(frame.image,
                 {lx, ly, rx, ry, jittered(left_color, rng, jitter), true});
      paint_blob(frame.image,
                 {rxc, ryc, rx, ry, jittered(right_color, rng, jitter), true});
      paint_blob(frame.image, {bx, byc, 0.13 * s, 0.045 * s,
                               jittered(kBand, rng, jitter), braking});

      frames.push_back(std::move(frame));
    }
  }
  return frames;
}

}  // namespace taillight::pipeline
