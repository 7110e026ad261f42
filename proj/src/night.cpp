#include "taillight/night.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>

namespace taillight::night {

NightParamPair default_night_params() {
  NightParamPair p;
  p.foreground.contrast = 29;
  p.foreground.brightness = -56;
  p.foreground.exposure = 44;
  p.foreground.highlights = 18;
  p.foreground.shadows = -55;
  p.foreground.saturation = 13;
  p.foreground.temperature = 6;
  p.foreground.tint = 8;
  p.foreground.hue_set_to = 0.0;
  p.foreground.gamma_r = 10;
  p.foreground.gamma_g = 1;
  p.foreground.gamma_b = 1;

  p.background.contrast = 31;
  p.background.brightness = -71;
  p.background.exposure = -37;
  p.background.highlights = -72;
  p.background.shadows = -5;
  p.background.saturation = -18;
  p.background.temperature = -56;
  p.background.tint = 3;
  p.background.hue_set_to = 0.0;
  p.background.gamma_r = 10;
  p.background.gamma_g = 4;
  p.background.gamma_b = -23;
  return p;
}

Hsl rgb_to_hsl(const Rgb& c) {
  const double mx = std::max({c.r, c.g, c.b});
  const double mn = std::min({c.r, c.g, c.b});
  const double l = (mx + mn) / 2.0;
  Hsl out{0.0, 0.0, l};
  const double d = mx - mn;
  if (d <= 0.0) return out;
  out.s = d / (1.0 - std::abs(2.0 * l - 1.0));
  double h;
  if (mx == c.r)
    h = std::fmod((c.g - c.b) / d, 6.0);
  else if (mx == c.g)
    h = (c.b - c.r) / d + 2.0;
  else
    h = (c.r - c.g) / d + 4.0;
  h *= 60.0;
  if (h < 0.0) h += 360.0;
  out.h = h;
  return out;
}

Rgb hsl_to_rgb(const Hsl& c) {
  const double chroma = (1.0 - std::abs(2.0 * c.l - 1.0)) * c.s;
  const double hp = c.h / 60.0;
  const double x = chroma * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1)      { r = chroma; g = x; }
  else if (hp < 2) { r = x; g = chroma; }
  else if (hp < 3) { g = chroma; b = x; }
  else if (hp < 4) { g = x; b = chroma; }
  else if (hp < 5) { r = x; b = chroma; }
  else             { r = chroma; b = x; }
  const double m = c.l - chroma / 2.0;
  return {r + m, g + m, b + m};
}

namespace {

constexpr double kPi = 3.14159265358979323846;
// White-balance shift of 30/255 per 100 percent, in normalized units.
constexpr double kWbShift = 30.0 / 255.0;

double cosine_ramp(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return 0.5 * (1.0 - std::cos(kPi * t));
}

double gamma_channel(double v, double p) {
  if (p == 0.0) return v;
  const double denom = 1.0 + p / 100.0;
  if (denom <= 0.0)
    throw NumericError("gamma percentage must be greater than -100");
  return std::pow(clamp01(v), 1.0 / denom);
}

}  // namespace

Rgb apply_adjustments_real(const Rgb& in, const AdjustmentParams& p,
                           std::span<const Stage> order) {
  Rgb c = in;
  for (Stage stage : order) {
    switch (stage) {
      case Stage::exposure: {
        if (p.exposure == 0.0) break;
        const double f = std::exp2(p.exposure / 100.0);
        c.r *= f; c.g *= f; c.b *= f;
        break;
      }
      case Stage::contrast: {
        const double f = 1.0 + p.contrast / 100.0;
        c.r = 0.5 + (c.r - 0.5) * f;
        c.g = 0.5 + (c.g - 0.5) * f;
        c.b = 0.5 + (c.b - 0.5) * f;
        break;
      }
      case Stage::brightness: {
        const double add = p.brightness / 100.0;
        c.r += add; c.g += add; c.b += add;
        break;
      }
      case Stage::highlights: {
        if (p.highlights == 0.0) break;
        const double l = luma01(c.r, c.g, c.b);
        const double w = cosine_ramp((l - 0.5) / 0.5);
        const double f = 1.0 + (p.highlights / 100.0) * w;
        c.r *= f; c.g *= f; c.b *= f;
        break;
      }
      case Stage::shadows: {
        if (p.shadows == 0.0) break;
        const double l = luma01(c.r, c.g, c.b);
        const double w = cosine_ramp((0.5 - l) / 0.5);
        const double f = 1.0 + (p.shadows / 100.0) * w;
        c.r *= f; c.g *= f; c.b *= f;
        break;
      }
      case Stage::white_balance: {
        c.r += (p.temperature / 100.0) * kWbShift;
        c.b -= (p.temperature / 100.0) * kWbShift;
        c.g -= (p.tint / 100.0) * kWbShift;
        break;
      }
      case Stage::hue_saturation: {
        if (!p.hue_set_to && p.saturation == 0.0) break;  // exact identity
        Rgb clamped{clamp01(c.r), clamp01(c.g), clamp01(c.b)};
        Hsl hsl = rgb_to_hsl(clamped);
        if (p.hue_set_to) hsl.h = *p.hue_set_to;
        hsl.s = clamp01(hsl.s * (1.0 + p.saturation / 100.0));
        c = hsl_to_rgb(hsl);
        break;
      }
      case Stage::gamma: {
        c.r = gamma_channel(c.r, p.gamma_r);
        c.g = gamma_channel(c.g, p.gamma_g);
        c.b = gamma_channel(c.b, p.gamma_b);
        break;
      }
    }
  }
  return c;
}

std::array<std::uint8_t, 3> apply_adjustments(
    const std::array<std::uint8_t, 3>& pixel, const AdjustmentParams& params,
    std::span<const Stage> order) {
  const Rgb out = apply_adjustments_real(
      {pixel[0] / 255.0, pixel[1] / 255.0, pixel[2] / 255.0}, params, order);
  return {quantize01(out.r), quantize01(out.g), quantize01(out.b)};
}

RegionMask mask_from_box(const data::BoundingBox& box, int image_w,
                         int image_h) {
  const data::PixelRect r = data::denormalize_box(box, image_w, image_h);
  RegionMask mask(image_w, image_h, false);
  if (r.empty()) {
    std::fprintf(stderr,
                 "warning: foreground box clamps to zero area; mask is all "
                 "background\n");
    return mask;
  }
  for (int y = r.y0; y < r.y1; ++y)
    for (int x = r.x0; x < r.x1; ++x) mask.set(x, y, true);
  return mask;
}

Image8 day_to_night(const Image8& image, const RegionMask& mask,
                    const NightParamPair& params) {
  if (mask.width != image.width || mask.height != image.height)
    throw DataError("day_to_night: mask dimensions do not match image");
  Image8 out(image.width, image.height);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const AdjustmentParams& p =
          mask.at(x, y) ? params.foreground : params.background;
      const auto px = apply_adjustments(
          {image.at(x, y, 0), image.at(x, y, 1), image.at(x, y, 2)}, p);
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = px[c];
    }
  }
  return out;
}

namespace {

void apply_key(AdjustmentParams& p, const std::string& key,
               const std::string& value, const std::string& where) {
  auto real = [&] {
    try {
      return std::stod(value);
    } catch (...) {
      throw ConfigError(where + ": bad number '" + value + "' for " + key);
    }
  };
  if (key == "contrast") p.contrast = real();
  else if (key == "brightness") p.brightness = real();
  else if (key == "exposure") p.exposure = real();
  else if (key == "highlights") p.highlights = real();
  else if (key == "shadows") p.shadows = real();
  else if (key == "saturation") p.saturation = real();
  else if (key == "temperature") p.temperature = real();
  else if (key == "tint") p.tint = real();
  else if (key == "gamma_r") p.gamma_r = real();
  else if (key == "gamma_g") p.gamma_g = real();
  else if (key == "gamma_b") p.gamma_b = real();
  else if (key == "hue") {
    if (value == "none") {
      p.hue_set_to.reset();
    } else {
      const double h = real();
      if (h < 0.0 || h >= 360.0)
        throw ConfigError(where + ": hue must be in [0, 360)");
      p.hue_set_to = h;
    }
  } else {
    throw ConfigError(where + ": unknown adjustment key '" + key + "'");
  }
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

NightParamPair load_params_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open params file: " + path.string());
  NightParamPair pair = default_night_params();
  AdjustmentParams* current = nullptr;  // section header required
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      const std::string section = trim(t.substr(1, t.size() - 2));
      if (section == "foreground") current = &pair.foreground;
      else if (section == "background") current = &pair.background;
      else throw ConfigError(where + ": unknown section '" + section + "'");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(where + ": expected key = value");
    if (!current)
      throw ConfigError(where + ": key outside [foreground]/[background]");
    apply_key(*current, trim(t.substr(0, eq)), trim(t.substr(eq + 1)), where);
  }
  return pair;
}

}  // namespace taillight::night
