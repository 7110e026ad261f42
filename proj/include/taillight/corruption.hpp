#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "taillight/common.hpp"

namespace taillight::corrupt {

/// The 13 corruption masks. The first seven augment training data; the
/// last six are held out as test-time benchmarks.
enum class Kind : int {
  rain_blur = 0,
  snow,
  fog,
  alpha_blend,
  frosted_glass_blur,
  lens_defect,
  jpeg,
  zoom_blur,
  frost,
  contrast,
  rain_drop,
  shot_noise,
  pixelate,
};

inline constexpr int kKindCount = 13;

enum class Severity : int { mild = 0, moderate = 1, severe = 2 };
enum class Partition { train, test };

const char* kind_name(Kind kind);
Kind kind_from_name(std::string_view name);  // throws DataError on unknown
const char* severity_name(Severity level);
Severity severity_from_name(std::string_view name);
Partition kind_partition(Kind kind);

/// The fixed 7/6 partition, in enum order.
std::vector<Kind> corruption_partition(Partition partition);

using ParamTable = std::map<std::string, double>;

/// Frozen severity table entry for (kind, level). The values were
/// calibrated once so that mean L2 distance from the original increases
/// strictly with severity on the reference image set.
ParamTable severity_params(Kind kind, Severity level);

struct CorruptionSpec {
  Kind kind = Kind::rain_blur;
  Severity severity = Severity::mild;
  std::uint64_t seed = 0;
  ParamTable params;  // resolved from the severity table; editable
};

CorruptionSpec make_spec(Kind kind, Severity level, std::uint64_t seed);

/// Applies the mask. Output dimensions always equal the input's, and
/// identical (image, spec) pairs produce identical bytes; stochastic
/// kinds draw only from a counter generator keyed by spec.seed.
RoiImage apply_corruption(const Image8& image, const CorruptionSpec& spec);

/// Provenance-encoding output name: <stem>__<kind>__<severity>__<seed>.
std::string provenance_stem(const std::string& stem,
                            const CorruptionSpec& spec);

}  // namespace taillight::corrupt
