#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "taillight/common.hpp"

namespace taillight::net {

/// CHW tensor of doubles.
struct Tensor {
  int ch = 0, h = 0, w = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int channels, int height, int width)
      : ch(channels), h(height), w(width),
        v(static_cast<std::size_t>(channels) * height * width, 0.0) {}

  double& at(int c, int y, int x) {
    return v[(static_cast<std::size_t>(c) * h + y) * w + x];
  }
  double at(int c, int y, int x) const {
    return v[(static_cast<std::size_t>(c) * h + y) * w + x];
  }
  std::span<double> channel(int c) {
    return {v.data() + static_cast<std::size_t>(c) * h * w,
            static_cast<std::size_t>(h) * w};
  }
};

/// Convolution stack layout: blocks of 3x3 stride-1 same-padded ReLU
/// convolutions, each block followed by a 2x2 stride-2 max pool, then
/// three fully connected layers.
struct NetworkSpec {
  struct Block {
    int conv_count = 0;
    int filter_count = 0;
  };
  int input_size = 224;
  int input_channels = 3;
  std::vector<Block> blocks;
  std::array<int, 3> fc_dims{4096, 4096, 1000};

  /// Flattened width entering FC-1.
  std::size_t flatten_dim() const;
};

/// The fixed plan: blocks (2,64) (2,128) (3,256) (3,512) (3,512), head
/// 4096 -> 4096 -> 1000, input 224x224x3.
NetworkSpec vgg16_spec();

struct NetworkWeights {
  struct Layer {
    std::string name;
    std::vector<std::uint32_t> dims;
    std::vector<double> values;
    std::size_t count() const;
  };
  std::vector<Layer> layers;
  std::string provenance;  // "random:<seed>" or the source file path

  const Layer& find(const std::string& name) const;
};

/// He-scaled seeded-random weights for the given plan; biases zero.
NetworkWeights build_weights(const NetworkSpec& spec, std::uint64_t seed);

std::pair<NetworkSpec, NetworkWeights> build_network(std::uint64_t seed);

enum class Tap { fc1, fc2 };

struct FeatureVector {
  std::vector<double> values;
  Tap tap = Tap::fc1;
};

struct ForwardResult {
  FeatureVector fc1, fc2;
};

/// One deterministic pass; both FC taps are returned post-ReLU. FC-3
/// and the softmax are not evaluated. Input must be [0,1]-normalized
/// with the spec's shape.
ForwardResult forward(const NetworkSpec& spec, const NetworkWeights& weights,
                      const Tensor& input);

/// Reusable forward-pass engine: transforms the convolution weights
/// once at construction and reuses per-thread scratch, so mapping many
/// images through one network avoids per-image setup. The referenced
/// spec and weights must outlive the forwarder; the const methods are
/// safe to call from multiple threads.
class Forwarder {
 public:
  Forwarder(const NetworkSpec& spec, const NetworkWeights& weights);

  ForwardResult forward(const Tensor& input) const;

  /// Convolution stack only: the flattened final pooled activation.
  std::vector<double> conv_features(const Tensor& input) const;

  /// FC-1/FC-2 taps (post-ReLU) for a batch of flattened conv features
  /// (n x flatten_dim, row-major). Batching amortizes the FC-1 weight
  /// traffic, which dominates single-image head evaluation.
  struct TapsBatch {
    std::vector<double> fc1, fc2;  // each n x fc width, row-major
  };
  TapsBatch fc_taps(std::span<const double> flat, std::size_t n) const;

 private:
  struct ConvPlan {
    int out_ch = 0;
    int in_ch = 0;
    const std::vector<double>* kernels = nullptr;
    const std::vector<double>* bias = nullptr;
    std::vector<double> transformed;  // 16 col-major (ic x oc) blocks
  };
  const NetworkSpec& spec_;
  const NetworkWeights& weights_;
  std::vector<std::vector<ConvPlan>> blocks_;
};

/// Bilinear resample to input_size x input_size and scale to [0,1].
Tensor resize_to_input(const Image8& image, int input_size = 224);

// Layer primitives (fixed reduction order, shared by the full pass and
// the unit oracles). kernels: out_ch x in_ch x 3 x 3 row-major.
Tensor conv3x3(const Tensor& input, std::span<const double> kernels,
               std::span<const double> bias, int out_ch, bool relu);
Tensor maxpool2x2(const Tensor& input);
std::vector<double> fully_connected(std::span<const double> x,
                                    std::span<const double> w,
                                    std::span<const double> bias,
                                    std::size_t out_dim, bool relu);

// Weight file (magic TLWT): version u16, layer count u16, then per
// layer: name (u16 length + bytes), rank u16, dims (u32 each), values
// as row-major 32-bit little-endian floats.
void save_weights(const std::filesystem::path& path,
                  const NetworkWeights& weights);
NetworkWeights load_weights(const std::filesystem::path& path,
                            const NetworkSpec& spec);

}  // namespace taillight::net
