#include "taillight/common.hpp"

#include <algorithm>

namespace taillight {

ImageF to_gray(const Image8& img) {
  ImageF out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      out.at(x, y) = luma01(img.at(x, y, 0) / 255.0, img.at(x, y, 1) / 255.0,
                            img.at(x, y, 2) / 255.0);
  return out;
}

double mean_luma(const Image8& img) {
  if (img.empty()) return 0.0;
  double sum = 0.0;
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      sum += luma01(img.at(x, y, 0) / 255.0, img.at(x, y, 1) / 255.0,
                    img.at(x, y, 2) / 255.0);
  return sum / static_cast<double>(img.pixel_count());
}

namespace {

struct SampleWeights {
  int i0, i1;
  double f;
};

SampleWeights axis_sample(int out_i, int in_n, int out_n) {
  // Half-pixel centers; borders clamp.
  const double s = (out_i + 0.5) * static_cast<double>(in_n) / out_n - 0.5;
  const double fl = std::floor(s);
  SampleWeights w;
  w.f = s - fl;
  w.i0 = std::clamp(static_cast<int>(fl), 0, in_n - 1);
  w.i1 = std::clamp(static_cast<int>(fl) + 1, 0, in_n - 1);
  return w;
}

}  // namespace

Image8 bilinear_resize(const Image8& src, int out_w, int out_h) {
  if (src.empty() || out_w < 1 || out_h < 1)
    throw DataError("bilinear_resize: empty image or degenerate target");
  Image8 out(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    const auto wy = axis_sample(y, src.height, out_h);
    for (int x = 0; x < out_w; ++x) {
      const auto wx = axis_sample(x, src.width, out_w);
      for (int c = 0; c < 3; ++c) {
        const double top = (1.0 - wx.f) * src.at(wx.i0, wy.i0, c) +
                           wx.f * src.at(wx.i1, wy.i0, c);
        const double bot = (1.0 - wx.f) * src.at(wx.i0, wy.i1, c) +
                           wx.f * src.at(wx.i1, wy.i1, c);
        out.at(x, y, c) = quantize255((1.0 - wy.f) * top + wy.f * bot);
      }
    }
  }
  return out;
}

ImageF bilinear_resize(const ImageF& src, int out_w, int out_h) {
  if (src.empty() || out_w < 1 || out_h < 1)
    throw DataError("bilinear_resize: empty image or degenerate target");
  ImageF out(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    const auto wy = axis_sample(y, src.height, out_h);
    for (int x = 0; x < out_w; ++x) {
      const auto wx = axis_sample(x, src.width, out_w);
      const double top =
          (1.0 - wx.f) * src.at(wx.i0, wy.i0) + wx.f * src.at(wx.i1, wy.i0);
      const double bot =
          (1.0 - wx.f) * src.at(wx.i0, wy.i1) + wx.f * src.at(wx.i1, wy.i1);
      out.at(x, y) = (1.0 - wy.f) * top + wy.f * bot;
    }
  }
  return out;
}

}  // namespace taillight
