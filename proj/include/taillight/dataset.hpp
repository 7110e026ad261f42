#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "taillight/common.hpp"

namespace taillight::data {

/// The four taillight behavior states. The id<->name mapping is fixed.
enum class BehaviorClass : int {
  braking = 0,
  running = 1,
  left_turn = 2,
  right_turn = 3,
};

inline constexpr int kClassCount = 4;

const char* class_name(BehaviorClass c);
BehaviorClass class_from_id(int id);  // throws DataError outside 0..3
std::optional<BehaviorClass> class_from_name(std::string_view name);

/// Normalized box: center (cx, cy) and size (w, h), all relative to the
/// image dimensions. cx, cy in [0,1]; w, h in (0,1].
struct BoundingBox {
  double cx = 0, cy = 0, w = 0, h = 0;
};

/// Half-open pixel rectangle [x0, x1) x [y0, y1).
struct PixelRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool empty() const { return x1 <= x0 || y1 <= y0; }
};

/// Denormalization rule shared by cropping and masking: the pixel size
/// is llround(w*W) (at least 1), the left edge llround(cx*W - w_px/2),
/// and the result is clamped to the image. The returned rect may be
/// empty when the box lies entirely outside.
PixelRect denormalize_box(const BoundingBox& box, int image_w, int image_h);

struct AnnotatedFrame {
  Image8 image;
  BoundingBox box;
  BehaviorClass label = BehaviorClass::braking;
  std::string source_id;
};

/// Parses one YOLO annotation line: "class cx cy w h". The image
/// dimensions are validated here so malformed frames fail at parse time.
std::pair<int, BoundingBox> parse_annotation(std::string_view line,
                                             int image_w, int image_h);

/// Inverse of parse_annotation; coordinates survive a round trip exactly.
std::string serialize_annotation(int class_id, const BoundingBox& box);

/// Crops the denormalized, clamped box out of the frame. Throws on a
/// degenerate (empty after clamping) box.
RoiImage crop_roi(const AnnotatedFrame& frame);

struct SplitRatios {
  double train = 0.60, validation = 0.15, test = 0.25;
};

struct DatasetSplit {
  std::vector<AnnotatedFrame> train, validation, test;
  std::uint64_t seed = 0;
};

enum class SplitName { train, validation, test };
std::optional<SplitName> split_from_name(std::string_view name);

/// Stratified split: per-class shuffling under one seed, class quotas by
/// largest remainder so each split's size is within one of its quota.
/// Frames with an entry in `overrides` (keyed by source_id) are pinned
/// to that split before ratios are applied to the rest.
DatasetSplit split_dataset(std::vector<AnnotatedFrame> frames,
                           const SplitRatios& ratios, std::uint64_t seed,
                           const std::map<std::string, SplitName>& overrides = {});

/// Loads an `images/` + `labels/` directory pair with matching stems.
/// Every label file must hold exactly one annotation line.
std::vector<AnnotatedFrame> load_dataset_dir(
    const std::filesystem::path& images_dir,
    const std::filesystem::path& labels_dir);

/// Parses a manifest of "stem split" override lines.
std::map<std::string, SplitName> load_split_overrides(
    const std::filesystem::path& manifest);

/// Writes frames back out as an images/ + labels/ directory pair.
void save_dataset_dir(const std::filesystem::path& out_dir,
                      const std::vector<AnnotatedFrame>& frames);

}  // namespace taillight::data
