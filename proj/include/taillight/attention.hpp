#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <vector>

#include "taillight/common.hpp"

namespace taillight::attention {

/// Default histogram bin count for rarity: 16, so 8-bit maps occupy at
/// least one representable value per bin.
inline constexpr int kDefaultRarityBins = 16;

using Kernel3 = std::array<double, 9>;  // row-major 3x3

/// A stack of same-sized single-channel feature maps. Level-1 stacks
/// hold exactly 64 maps.
struct FeatureMapStack {
  int level = 1;
  std::vector<ImageF> maps;
};

/// Per-pixel self-information of the map's own value histogram:
///   rarity(x,y) = -log2(p(bin of value(x,y)))
/// Bin edges span [min, max] of the map; a constant map is all-zero.
ImageF rarity_map_raw(const ImageF& map, int bins = kDefaultRarityBins);

/// rarity_map_raw followed by min-max normalization to [0,1]; an
/// all-equal raw map normalizes to all-zero.
ImageF rarity_map(const ImageF& map, int bins = kDefaultRarityBins);

/// Weighted mean of the per-map (normalized) rarity maps, renormalized
/// to [0,1]. Weight count must match the map count; weights must be
/// nonnegative with a positive sum.
ImageF conspicuity_from_stack(const FeatureMapStack& stack,
                              std::span<const double> fusion_weights);

/// Uniform-weight convenience overload.
ImageF conspicuity_from_stack(const FeatureMapStack& stack);

/// Multi-stack fusion (e.g. one stack per encoder layer): the weighted
/// mean of per-stack conspicuity maps, renormalized to [0,1]. Stack
/// weights default to uniform when empty.
ImageF conspicuity_from_stacks(std::span<const FeatureMapStack> stacks,
                               std::span<const double> stack_weights = {});

/// The shipped level-1 bank: 64 fixed 3x3 kernels (oriented edges and
/// bars, center-surround, corner, and center-minus-neighbor detectors).
const std::vector<Kernel3>& default_filter_bank();

/// Same-size 3x3 convolutions with edge replication; one map per kernel.
FeatureMapStack filter_bank_maps(const ImageF& gray,
                                 std::span<const Kernel3> bank);

/// Blends the conspicuity map back into the raw image:
///   out = (1-alpha) * image + alpha * (c * 255)
/// with c bilinearly resampled to the image size, quantized once.
Image8 merge_with_raw(const Image8& image, const ImageF& conspicuity,
                      double alpha);

/// Tier geometry as fractions of the ROI size. Corner boxes anchor at
/// the bottom-left/bottom-right (taillights); the band sits top-center
/// (high-mounted brake light); `ring` is the transition border around
/// every high-weight region.
struct MaskGeometry {
  double corner_w = 0.22;
  double corner_h = 0.45;
  double band_w = 0.30;
  double band_h = 0.20;
  double ring = 0.05;
};

/// Key-value tier-fraction file (corner_w, corner_h, band_w, band_h,
/// ring); unlisted keys keep the defaults.
MaskGeometry load_mask_geometry(const std::filesystem::path& path);

struct WeightedMask {
  int width = 0, height = 0;
  std::vector<double> weights;
  double omega = 0, omega_prime = 0, w_high = 0;

  double at(int x, int y) const {
    return weights[static_cast<std::size_t>(y) * width + x];
  }
};

/// Rasterizes the three-tier mask. Every pixel carries exactly one of
/// {omega, omega_prime, w_high}; requires omega < omega' < w_high and a
/// nonempty high tier.
WeightedMask build_weighted_mask(int roi_w, int roi_h,
                                 const MaskGeometry& geometry = {},
                                 double omega = 0.12,
                                 double omega_prime = 0.14,
                                 double w_high = 1.0);

/// Pixel counts per tier, ordered {omega, omega_prime, w_high}; sums to
/// width * height.
std::array<std::size_t, 3> tier_pixel_counts(const WeightedMask& mask);

/// I_out(x,y,ch) = M(x,y) * I_inp(x,y,ch), quantized once.
Image8 fuse_mask(const Image8& roi, const WeightedMask& mask);

}  // namespace taillight::attention
