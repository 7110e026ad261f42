#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>

#include "taillight/common.hpp"
#include "taillight/dataset.hpp"

namespace taillight::night {

/// Photo-editor style controls, all in percent. The exact algebra of
/// each control is documented next to apply_adjustments_real.
struct AdjustmentParams {
  double contrast = 0;
  double brightness = 0;
  double exposure = 0;
  double highlights = 0;
  double shadows = 0;
  double saturation = 0;
  double temperature = 0;
  double tint = 0;
  std::optional<double> hue_set_to;  // absolute hue in [0, 360)
  double gamma_r = 0;
  double gamma_g = 0;
  double gamma_b = 0;
};

struct NightParamPair {
  AdjustmentParams foreground;
  AdjustmentParams background;
};

/// The published day-to-night parameter table, verbatim.
NightParamPair default_night_params();

enum class Stage {
  exposure,
  contrast,
  brightness,
  highlights,
  shadows,
  white_balance,
  hue_saturation,
  gamma,
};

/// Application order. Held as a named constant so experiments can
/// permute it through the apply_adjustments_real overload.
inline constexpr std::array<Stage, 8> kDefaultStageOrder = {
    Stage::exposure,   Stage::contrast,      Stage::brightness,
    Stage::highlights, Stage::shadows,       Stage::white_balance,
    Stage::hue_saturation, Stage::gamma,
};

/// Working-space pixel, nominally [0,1] per channel but unclamped
/// between stages.
struct Rgb {
  double r = 0, g = 0, b = 0;
};

struct Hsl {
  double h = 0, s = 0, l = 0;  // h in [0,360), s and l in [0,1]
};

Hsl rgb_to_hsl(const Rgb& c);
Rgb hsl_to_rgb(const Hsl& c);

/// Full-precision adjustment chain. Stage algebra:
///   exposure    v *= 2^(p/100)
///   contrast    v  = 0.5 + (v - 0.5) * (1 + p/100)
///   brightness  v += p/100            (i.e. p/100 * 255 in 8-bit counts)
///   highlights  v *= 1 + (p/100) * w, w a cosine ramp of luma over [0.5, 1]
///   shadows     v *= 1 + (p/100) * w, w a cosine ramp of luma over [0.5, 0]
///   white bal.  r += (p_t/100)*(30/255), b -= same; g -= (p_tint/100)*(30/255)
///   hue/sat     RGB clamped to gamut, HSL hue overwritten when set,
///               S *= 1 + p/100; the stage is skipped entirely when it
///               would be an identity
///   gamma       v = clamp01(v) ^ (1 / (1 + p/100)) per channel
Rgb apply_adjustments_real(const Rgb& in, const AdjustmentParams& params,
                           std::span<const Stage> order = kDefaultStageOrder);

/// 8-bit entry point: one quantization (round half away from zero,
/// clamp to [0,255]) at the very end.
std::array<std::uint8_t, 3> apply_adjustments(
    const std::array<std::uint8_t, 3>& pixel, const AdjustmentParams& params,
    std::span<const Stage> order = kDefaultStageOrder);

/// Per-pixel boolean raster; true marks the vehicle foreground.
struct RegionMask {
  int width = 0, height = 0;
  std::vector<std::uint8_t> fg;

  RegionMask() = default;
  RegionMask(int w, int h, bool fill = false)
      : width(w), height(h),
        fg(static_cast<std::size_t>(w) * h, fill ? 1 : 0) {}
  bool at(int x, int y) const {
    return fg[static_cast<std::size_t>(y) * width + x] != 0;
  }
  void set(int x, int y, bool v) {
    fg[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
  }
};

/// True exactly inside the denormalized box. A box that clamps to
/// nothing yields an all-false mask and a warning on stderr.
RegionMask mask_from_box(const data::BoundingBox& box, int image_w,
                         int image_h);

/// Foreground pixels get params.foreground, background pixels
/// params.background; regions never bleed into each other.
Image8 day_to_night(const Image8& image, const RegionMask& mask,
                    const NightParamPair& params);

/// Key-value override file: optional [foreground]/[background] sections,
/// keys matching the AdjustmentParams fields plus `hue` (a number, or
/// `none` to leave hue untouched). Unlisted keys keep the defaults.
NightParamPair load_params_file(const std::filesystem::path& path);

}  // namespace taillight::night
