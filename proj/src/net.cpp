#include "taillight/net.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "taillight/binio.hpp"
#include "taillight/parallel.hpp"
#include "taillight/rng.hpp"

namespace taillight::net {

std::size_t NetworkSpec::flatten_dim() const {
  int size = input_size;
  for (std::size_t b = 0; b < blocks.size(); ++b) size /= 2;
  const int last_filters = blocks.empty() ? input_channels
                                          : blocks.back().filter_count;
  return static_cast<std::size_t>(last_filters) * size * size;
}

NetworkSpec vgg16_spec() {
  NetworkSpec spec;
  spec.input_size = 224;
  spec.input_channels = 3;
  spec.blocks = {{2, 64}, {2, 128}, {3, 256}, {3, 512}, {3, 512}};
  spec.fc_dims = {4096, 4096, 1000};
  return spec;
}

std::size_t NetworkWeights::Layer::count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

const NetworkWeights::Layer& NetworkWeights::find(
    const std::string& name) const {
  for (const auto& layer : layers)
    if (layer.name == name) return layer;
  throw DataError("missing weight layer: " + name);
}

namespace {

struct LayerShape {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::size_t fan_in;
};

std::vector<LayerShape> expected_layers(const NetworkSpec& spec) {
  std::vector<LayerShape> out;
  int in_ch = spec.input_channels;
  for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
    const auto& block = spec.blocks[b];
    for (int i = 0; i < block.conv_count; ++i) {
      const std::string base =
          "conv" + std::to_string(b + 1) + "_" + std::to_string(i + 1);
      const auto oc = static_cast<std::uint32_t>(block.filter_count);
      const auto ic = static_cast<std::uint32_t>(in_ch);
      out.push_back({base + ".weight", {oc, ic, 3, 3},
                     static_cast<std::size_t>(ic) * 9});
      out.push_back({base + ".bias", {oc}, 0});
      in_ch = block.filter_count;
    }
  }
  std::size_t fc_in = spec.flatten_dim();
  for (int f = 0; f < 3; ++f) {
    const std::string base = "fc" + std::to_string(f + 1);
    const auto od = static_cast<std::uint32_t>(spec.fc_dims[f]);
    out.push_back({base + ".weight", {od, static_cast<std::uint32_t>(fc_in)},
                   fc_in});
    out.push_back({base + ".bias", {od}, 0});
    fc_in = spec.fc_dims[f];
  }
  return out;
}

}  // namespace

NetworkWeights build_weights(const NetworkSpec& spec, std::uint64_t seed) {
  NetworkWeights weights;
  weights.provenance = "random:" + std::to_string(seed);
  const auto shapes = expected_layers(spec);
  weights.layers.resize(shapes.size());
  for (std::size_t li = 0; li < shapes.size(); ++li) {
    auto& layer = weights.layers[li];
    layer.name = shapes[li].name;
    layer.dims = shapes[li].dims;
    layer.values.assign(
        [&] {
          std::size_t n = 1;
          for (auto d : layer.dims) n *= d;
          return n;
        }(),
        0.0);
    if (shapes[li].fan_in == 0) continue;  // biases stay zero
    // He scaling; chunked so generation parallelizes deterministically.
    const double stddev = std::sqrt(2.0 / static_cast<double>(shapes[li].fan_in));
    constexpr std::size_t kChunk = 1 << 20;
    const std::size_t chunks = (layer.values.size() + kChunk - 1) / kChunk;
    parallel_for(chunks, [&](std::size_t ci) {
      CounterRng rng(mix_keys(seed, li, ci));
      const std::size_t begin = ci * kChunk;
      const std::size_t end = std::min(begin + kChunk, layer.values.size());
      for (std::size_t i = begin; i < end; ++i)
        layer.values[i] = rng.next_gaussian() * stddev;
    });
  }
  return weights;
}

std::pair<NetworkSpec, NetworkWeights> build_network(std::uint64_t seed) {
  NetworkSpec spec = vgg16_spec();
  NetworkWeights weights = build_weights(spec, seed);
  return {std::move(spec), std::move(weights)};
}

// -------------------------------------------------------------------
// Layer primitives.
// -------------------------------------------------------------------

namespace {

void conv3x3_direct(const Tensor& in, std::span<const double> kernels,
                    std::span<const double> bias, int out_ch, bool relu,
                    Tensor& out) {
  for (int oc = 0; oc < out_ch; ++oc) {
    const double* k_base =
        kernels.data() + static_cast<std::size_t>(oc) * in.ch * 9;
    for (int y = 0; y < in.h; ++y)
      for (int x = 0; x < in.w; ++x) {
        double acc = bias[oc];
        for (int ic = 0; ic < in.ch; ++ic) {
          const double* k = k_base + static_cast<std::size_t>(ic) * 9;
          for (int dy = -1; dy <= 1; ++dy) {
            const int sy = y + dy;
            if (sy < 0 || sy >= in.h) continue;
            for (int dx = -1; dx <= 1; ++dx) {
              const int sx = x + dx;
              if (sx < 0 || sx >= in.w) continue;
              acc += k[(dy + 1) * 3 + (dx + 1)] * in.at(ic, sy, sx);
            }
          }
        }
        out.at(oc, y, x) = relu ? std::max(0.0, acc) : acc;
      }
  }
}

// im2col + one GEMM: used where the Winograd batching has no leverage
// (few channels, or small spatial extents).
void conv3x3_im2col(const Tensor& in, std::span<const double> kernels,
                    std::span<const double> bias, int out_ch, bool relu,
                    Tensor& out) {
  const long hw = static_cast<long>(in.h) * in.w;
  const long patch = static_cast<long>(in.ch) * 9;
  thread_local std::vector<double> columns;
  columns.resize(static_cast<std::size_t>(patch) * hw);

  // Column j holds the 3x3 neighborhood of output pixel j, zero padded.
  // Interior pixels take the branch-free path.
  for (int ic = 0; ic < in.ch; ++ic) {
    const double* plane =
        in.v.data() + static_cast<std::size_t>(ic) * in.h * in.w;
    const std::size_t ic_off = static_cast<std::size_t>(ic) * 9;
    for (int y = 0; y < in.h; ++y) {
      const bool y_interior = y > 0 && y < in.h - 1;
      for (int x = 0; x < in.w; ++x) {
        double* col = columns.data() +
                      (static_cast<std::size_t>(y) * in.w + x) * patch +
                      ic_off;
        if (y_interior && x > 0 && x < in.w - 1) {
          const double* p = plane + static_cast<std::size_t>(y - 1) * in.w +
                            (x - 1);
          col[0] = p[0];
          col[1] = p[1];
          col[2] = p[2];
          col[3] = p[in.w];
          col[4] = p[in.w + 1];
          col[5] = p[in.w + 2];
          col[6] = p[2 * in.w];
          col[7] = p[2 * in.w + 1];
          col[8] = p[2 * in.w + 2];
          continue;
        }
        std::size_t t = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          const int sy = y + dy;
          for (int dx = -1; dx <= 1; ++dx, ++t) {
            const int sx = x + dx;
            col[t] = (sy < 0 || sy >= in.h || sx < 0 || sx >= in.w)
                         ? 0.0
                         : plane[static_cast<std::size_t>(sy) * in.w + sx];
          }
        }
      }
    }
  }
  using RowMajor =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajor> k_mat(kernels.data(), out_ch, patch);
  Eigen::Map<const Eigen::MatrixXd> col_mat(columns.data(), patch, hw);
  Eigen::Map<RowMajor> out_mat(out.v.data(), out_ch, hw);
  out_mat.noalias() = k_mat * col_mat;
  for (int oc = 0; oc < out_ch; ++oc) {
    double* row = out.v.data() + static_cast<std::size_t>(oc) * hw;
    const double b = bias[oc];
    for (long i = 0; i < hw; ++i) {
      const double v = row[i] + b;
      row[i] = relu && v < 0.0 ? 0.0 : v;
    }
  }
}

// F(2x2, 3x3) Winograd weight transform: 16 col-major (ic x oc) blocks
// of U = G g G^T.
std::vector<double> winograd_weights(std::span<const double> kernels,
                                     int out_ch, int in_ch) {
  std::vector<double> u(static_cast<std::size_t>(16) * out_ch * in_ch);
  const std::size_t block = static_cast<std::size_t>(out_ch) * in_ch;
  for (int oc = 0; oc < out_ch; ++oc)
    for (int ic = 0; ic < in_ch; ++ic) {
      const double* g =
          kernels.data() + (static_cast<std::size_t>(oc) * in_ch + ic) * 9;
      double t[4][3];
      for (int j = 0; j < 3; ++j) {
        t[0][j] = g[0 * 3 + j];
        t[1][j] = 0.5 * (g[0 * 3 + j] + g[1 * 3 + j] + g[2 * 3 + j]);
        t[2][j] = 0.5 * (g[0 * 3 + j] - g[1 * 3 + j] + g[2 * 3 + j]);
        t[3][j] = g[2 * 3 + j];
      }
      const std::size_t at = static_cast<std::size_t>(oc) * in_ch + ic;
      for (int i = 0; i < 4; ++i) {
        u[(i * 4 + 0) * block + at] = t[i][0];
        u[(i * 4 + 1) * block + at] = 0.5 * (t[i][0] + t[i][1] + t[i][2]);
        u[(i * 4 + 2) * block + at] = 0.5 * (t[i][0] - t[i][1] + t[i][2]);
        u[(i * 4 + 3) * block + at] = t[i][2];
      }
    }
  return u;
}

// F(2x2, 3x3) Winograd: per 4x4 input tile the conv becomes 16
// elementwise channel contractions, batched into 16 GEMMs over a tile
// chunk. `u` comes from winograd_weights. All hot loops keep their
// channel index outermost so reads and writes stream through each
// plane sequentially.
void conv3x3_winograd(const Tensor& in, std::span<const double> u,
                      std::span<const double> bias, int out_ch, bool relu,
                      Tensor& out) {
  const int ic_n = in.ch;
  const int tiles_y = in.h / 2, tiles_x = in.w / 2;
  const long tiles = static_cast<long>(tiles_y) * tiles_x;
  const std::size_t u_block = static_cast<std::size_t>(out_ch) * ic_n;

  // Tile chunking keeps the transformed buffers bounded.
  const long budget =
      std::max(512L, static_cast<long>(48e6 / (128.0 * (ic_n + out_ch))));
  const long chunk_cap = std::min(tiles, budget);
  const std::size_t v_block = static_cast<std::size_t>(ic_n) * chunk_cap;
  const std::size_t m_block = static_cast<std::size_t>(out_ch) * chunk_cap;

  thread_local std::vector<double> v_buf, m_buf;
  v_buf.resize(16 * v_block);
  m_buf.resize(16 * m_block);

  for (long chunk_start = 0; chunk_start < tiles; chunk_start += chunk_cap) {
    const long chunk = std::min(chunk_cap, tiles - chunk_start);

    // Input transform: V = B^T d B per (tile, ic); zero padding folds
    // into the gather. V blocks are col-major (chunk x ic).
    for (int ic = 0; ic < ic_n; ++ic) {
      const double* plane =
          in.v.data() + static_cast<std::size_t>(ic) * in.h * in.w;
      for (long t_idx = 0; t_idx < chunk; ++t_idx) {
        const long tile = chunk_start + t_idx;
        const int ty = static_cast<int>(tile / tiles_x);
        const int tx = static_cast<int>(tile % tiles_x);
        const int y0 = 2 * ty - 1, x0 = 2 * tx - 1;
        double d[4][4];
        for (int i = 0; i < 4; ++i) {
          const int sy = y0 + i;
          if (sy < 0 || sy >= in.h) {
            d[i][0] = d[i][1] = d[i][2] = d[i][3] = 0.0;
            continue;
          }
          const double* row = plane + static_cast<std::size_t>(sy) * in.w;
          for (int j = 0; j < 4; ++j) {
            const int sx = x0 + j;
            d[i][j] = (sx < 0 || sx >= in.w) ? 0.0 : row[sx];
          }
        }
        double bt[4][4];
        for (int j = 0; j < 4; ++j) {
          bt[0][j] = d[0][j] - d[2][j];
          bt[1][j] = d[1][j] + d[2][j];
          bt[2][j] = d[2][j] - d[1][j];
          bt[3][j] = d[1][j] - d[3][j];
        }
        const std::size_t at =
            static_cast<std::size_t>(ic) * chunk_cap + t_idx;
        for (int i = 0; i < 4; ++i) {
          v_buf[(i * 4 + 0) * v_block + at] = bt[i][0] - bt[i][2];
          v_buf[(i * 4 + 1) * v_block + at] = bt[i][1] + bt[i][2];
          v_buf[(i * 4 + 2) * v_block + at] = bt[i][2] - bt[i][1];
          v_buf[(i * 4 + 3) * v_block + at] = bt[i][1] - bt[i][3];
        }
      }
    }

    // M_p = V_p * U_p, shaped (chunk x oc) so the output transform
    // streams through columns. Full chunks take the unstrided maps.
    for (int p = 0; p < 16; ++p) {
      Eigen::Map<const Eigen::MatrixXd> u_mat(u.data() + p * u_block, ic_n,
                                              out_ch);
      if (chunk == chunk_cap) {
        Eigen::Map<const Eigen::MatrixXd> v_mat(v_buf.data() + p * v_block,
                                                chunk, ic_n);
        Eigen::Map<Eigen::MatrixXd> m_mat(m_buf.data() + p * m_block, chunk,
                                          out_ch);
        m_mat.noalias() = v_mat * u_mat;
      } else {
        using Stride = Eigen::OuterStride<>;
        Eigen::Map<const Eigen::MatrixXd, 0, Stride> v_mat(
            v_buf.data() + p * v_block, chunk, ic_n, Stride(chunk_cap));
        Eigen::Map<Eigen::MatrixXd, 0, Stride> m_mat(
            m_buf.data() + p * m_block, chunk, out_ch, Stride(chunk_cap));
        m_mat.noalias() = v_mat * u_mat;
      }
    }

    // Output transform: Y = A^T M A, plus bias and activation.
    for (int oc = 0; oc < out_ch; ++oc) {
      const double b = bias[oc];
      const std::size_t m_at = static_cast<std::size_t>(oc) * chunk_cap;
      double* out_plane =
          out.v.data() + static_cast<std::size_t>(oc) * out.h * out.w;
      for (long t_idx = 0; t_idx < chunk; ++t_idx) {
        const long tile = chunk_start + t_idx;
        const int ty = static_cast<int>(tile / tiles_x);
        const int tx = static_cast<int>(tile % tiles_x);
        double mm[4][4];
        for (int p = 0; p < 16; ++p)
          mm[p / 4][p % 4] = m_buf[p * m_block + m_at + t_idx];
        double at[2][4];
        for (int j = 0; j < 4; ++j) {
          at[0][j] = mm[0][j] + mm[1][j] + mm[2][j];
          at[1][j] = mm[1][j] - mm[2][j] - mm[3][j];
        }
        double y00 = at[0][0] + at[0][1] + at[0][2] + b;
        double y01 = at[0][1] - at[0][2] - at[0][3] + b;
        double y10 = at[1][0] + at[1][1] + at[1][2] + b;
        double y11 = at[1][1] - at[1][2] - at[1][3] + b;
        if (relu) {
          y00 = std::max(0.0, y00);
          y01 = std::max(0.0, y01);
          y10 = std::max(0.0, y10);
          y11 = std::max(0.0, y11);
        }
        double* row0 = out_plane + static_cast<std::size_t>(2 * ty) * out.w +
                       2 * tx;
        row0[0] = y00;
        row0[1] = y01;
        row0[out.w] = y10;
        row0[out.w + 1] = y11;
      }
    }
  }
}

// Winograd pays off on wide many-channel layers; small spatial extents
// leave its 16 GEMMs too skinny, and few-channel layers spend more on
// transforms than they save.
bool winograd_eligible(int ch, int h, int w) {
  return h % 2 == 0 && w % 2 == 0 && ch > 8 &&
         static_cast<long>(h) * w > 400;
}

bool im2col_eligible(int h, int w) {
  return static_cast<long>(h) * w >= 16;
}

void conv3x3_into(const Tensor& input, std::span<const double> kernels,
                  std::span<const double> u, std::span<const double> bias,
                  int out_ch, bool relu, Tensor& out) {
  out.ch = out_ch;
  out.h = input.h;
  out.w = input.w;
  out.v.resize(static_cast<std::size_t>(out_ch) * input.h * input.w);
  if (!u.empty() && winograd_eligible(input.ch, input.h, input.w))
    conv3x3_winograd(input, u, bias, out_ch, relu, out);
  else if (im2col_eligible(input.h, input.w))
    conv3x3_im2col(input, kernels, bias, out_ch, relu, out);
  else
    conv3x3_direct(input, kernels, bias, out_ch, relu, out);
}

}  // namespace

Tensor conv3x3(const Tensor& input, std::span<const double> kernels,
               std::span<const double> bias, int out_ch, bool relu) {
  if (input.ch < 1 || input.h < 1 || input.w < 1)
    throw DataError("conv3x3: empty input");
  if (kernels.size() !=
      static_cast<std::size_t>(out_ch) * input.ch * 9)
    throw DataError("conv3x3: kernel size mismatch");
  if (bias.size() != static_cast<std::size_t>(out_ch))
    throw DataError("conv3x3: bias size mismatch");
  Tensor out;
  std::vector<double> u;
  if (winograd_eligible(input.ch, input.h, input.w))
    u = winograd_weights(kernels, out_ch, input.ch);
  conv3x3_into(input, kernels, u, bias, out_ch, relu, out);
  return out;
}

Tensor maxpool2x2(const Tensor& input) {
  const int oh = input.h / 2, ow = input.w / 2;
  if (oh < 1 || ow < 1) throw DataError("maxpool2x2: input too small");
  Tensor out(input.ch, oh, ow);
  for (int c = 0; c < input.ch; ++c)
    for (int y = 0; y < oh; ++y)
      for (int x = 0; x < ow; ++x)
        out.at(c, y, x) = std::max(
            std::max(input.at(c, 2 * y, 2 * x), input.at(c, 2 * y, 2 * x + 1)),
            std::max(input.at(c, 2 * y + 1, 2 * x),
                     input.at(c, 2 * y + 1, 2 * x + 1)));
  return out;
}

std::vector<double> fully_connected(std::span<const double> x,
                                    std::span<const double> w,
                                    std::span<const double> bias,
                                    std::size_t out_dim, bool relu) {
  const std::size_t in_dim = x.size();
  if (w.size() != out_dim * in_dim)
    throw DataError("fully_connected: weight size mismatch");
  if (bias.size() != out_dim)
    throw DataError("fully_connected: bias size mismatch");
  using RowMajor =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajor> wm(w.data(), static_cast<Eigen::Index>(out_dim),
                                static_cast<Eigen::Index>(in_dim));
  Eigen::Map<const Eigen::VectorXd> xv(x.data(),
                                       static_cast<Eigen::Index>(in_dim));
  Eigen::VectorXd y = wm * xv;
  std::vector<double> out(out_dim);
  for (std::size_t i = 0; i < out_dim; ++i) {
    double v = y(static_cast<Eigen::Index>(i)) + bias[i];
    out[i] = relu ? std::max(0.0, v) : v;
  }
  return out;
}

Forwarder::Forwarder(const NetworkSpec& spec, const NetworkWeights& weights)
    : spec_(spec), weights_(weights) {
  int in_ch = spec.input_channels;
  blocks_.resize(spec.blocks.size());
  for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
    const auto& block = spec.blocks[b];
    const int size = spec.input_size >> b;  // extent entering this block
    for (int i = 0; i < block.conv_count; ++i) {
      const std::string base =
          "conv" + std::to_string(b + 1) + "_" + std::to_string(i + 1);
      ConvPlan plan;
      plan.out_ch = block.filter_count;
      plan.in_ch = in_ch;
      plan.kernels = &weights.find(base + ".weight").values;
      plan.bias = &weights.find(base + ".bias").values;
      if (plan.kernels->size() !=
          static_cast<std::size_t>(plan.out_ch) * in_ch * 9)
        throw DataError("forward: kernel shape mismatch in " + base);
      if (plan.bias->size() != static_cast<std::size_t>(plan.out_ch))
        throw DataError("forward: bias shape mismatch in " + base);
      if (winograd_eligible(in_ch, size, size))
        plan.transformed =
            winograd_weights(*plan.kernels, plan.out_ch, in_ch);
      blocks_[b].push_back(std::move(plan));
      in_ch = block.filter_count;
    }
  }
}

std::vector<double> Forwarder::conv_features(const Tensor& input) const {
  if (input.ch != spec_.input_channels || input.h != spec_.input_size ||
      input.w != spec_.input_size)
    throw DataError("forward: input shape does not match the network spec");
  for (double v : input.v)
    if (!std::isfinite(v)) throw NumericError("forward: non-finite input");

  // Ping-pong activation buffers; thread_local so repeated forwards
  // reuse their allocations.
  thread_local Tensor ping, pong;
  const Tensor* act = &input;
  Tensor* next = &ping;
  for (std::size_t b = 0; b < spec_.blocks.size(); ++b) {
    const auto& block = spec_.blocks[b];
    for (const auto& plan : blocks_[b]) {
      conv3x3_into(*act, *plan.kernels, plan.transformed, *plan.bias,
                   plan.out_ch, true, *next);
      act = next;
      next = next == &ping ? &pong : &ping;
    }
    // Pool into the spare buffer.
    {
      const Tensor& src = *act;
      Tensor& dst = *next;
      const int oh = src.h / 2, ow = src.w / 2;
      if (oh < 1 || ow < 1) throw DataError("forward: input too small to pool");
      dst.ch = src.ch;
      dst.h = oh;
      dst.w = ow;
      dst.v.resize(static_cast<std::size_t>(src.ch) * oh * ow);
      for (int c = 0; c < src.ch; ++c)
        for (int y = 0; y < oh; ++y)
          for (int x = 0; x < ow; ++x)
            dst.at(c, y, x) = std::max(
                std::max(src.at(c, 2 * y, 2 * x), src.at(c, 2 * y, 2 * x + 1)),
                std::max(src.at(c, 2 * y + 1, 2 * x),
                         src.at(c, 2 * y + 1, 2 * x + 1)));
      act = next;
      next = next == &ping ? &pong : &ping;
    }
    // Shape contract after block b: (filters_b, size/2^(b+1), same).
    const int expect = spec_.input_size >> (b + 1);
    if (act->ch != block.filter_count || act->h != expect || act->w != expect)
      throw NumericError("forward: activation shape contract violated");
  }
  return act->v;
}

Forwarder::TapsBatch Forwarder::fc_taps(std::span<const double> flat,
                                        std::size_t n) const {
  const std::size_t in_dim = spec_.flatten_dim();
  if (flat.size() != n * in_dim)
    throw DataError("fc_taps: flattened feature size mismatch");
  const std::size_t d1 = static_cast<std::size_t>(spec_.fc_dims[0]);
  const std::size_t d2 = static_cast<std::size_t>(spec_.fc_dims[1]);
  const auto& w1 = weights_.find("fc1.weight").values;
  const auto& b1 = weights_.find("fc1.bias").values;
  const auto& w2 = weights_.find("fc2.weight").values;
  const auto& b2 = weights_.find("fc2.bias").values;

  TapsBatch out;
  out.fc1.resize(n * d1);
  out.fc2.resize(n * d2);

  using RowMajor =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const RowMajor> x_mat(flat.data(),
                                   static_cast<Eigen::Index>(n),
                                   static_cast<Eigen::Index>(in_dim));
  Eigen::Map<const RowMajor> w1_mat(w1.data(), static_cast<Eigen::Index>(d1),
                                    static_cast<Eigen::Index>(in_dim));
  Eigen::Map<RowMajor> y1_mat(out.fc1.data(), static_cast<Eigen::Index>(n),
                              static_cast<Eigen::Index>(d1));
  y1_mat.noalias() = x_mat * w1_mat.transpose();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d1; ++j) {
      double& v = out.fc1[i * d1 + j];
      v += b1[j];
      if (v < 0.0) v = 0.0;
    }

  Eigen::Map<const RowMajor> w2_mat(w2.data(), static_cast<Eigen::Index>(d2),
                                    static_cast<Eigen::Index>(d1));
  Eigen::Map<const RowMajor> a1_mat(out.fc1.data(),
                                    static_cast<Eigen::Index>(n),
                                    static_cast<Eigen::Index>(d1));
  Eigen::Map<RowMajor> y2_mat(out.fc2.data(), static_cast<Eigen::Index>(n),
                              static_cast<Eigen::Index>(d2));
  y2_mat.noalias() = a1_mat * w2_mat.transpose();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d2; ++j) {
      double& v = out.fc2[i * d2 + j];
      v += b2[j];
      if (v < 0.0) v = 0.0;
    }
  return out;
}

ForwardResult Forwarder::forward(const Tensor& input) const {
  const auto flat = conv_features(input);
  auto taps = fc_taps(flat, 1);
  ForwardResult result;
  result.fc1.values = std::move(taps.fc1);
  result.fc1.tap = Tap::fc1;
  result.fc2.values = std::move(taps.fc2);
  result.fc2.tap = Tap::fc2;
  return result;
}

ForwardResult forward(const NetworkSpec& spec, const NetworkWeights& weights,
                      const Tensor& input) {
  return Forwarder(spec, weights).forward(input);
}

Tensor resize_to_input(const Image8& image, int input_size) {
  if (image.empty()) throw DataError("resize_to_input: empty image");
  Tensor out(3, input_size, input_size);
  // Real-valued bilinear resample straight into [0,1]; no intermediate
  // 8-bit quantization.
  for (int y = 0; y < input_size; ++y) {
    const double sy =
        (y + 0.5) * static_cast<double>(image.height) / input_size - 0.5;
    const int fy0 = static_cast<int>(std::floor(sy));
    const double fy = sy - fy0;
    const int y0 = std::clamp(fy0, 0, image.height - 1);
    const int y1 = std::clamp(fy0 + 1, 0, image.height - 1);
    for (int x = 0; x < input_size; ++x) {
      const double sx =
          (x + 0.5) * static_cast<double>(image.width) / input_size - 0.5;
      const int fx0 = static_cast<int>(std::floor(sx));
      const double fx = sx - fx0;
      const int x0 = std::clamp(fx0, 0, image.width - 1);
      const int x1 = std::clamp(fx0 + 1, 0, image.width - 1);
      for (int c = 0; c < 3; ++c) {
        const double top = (1.0 - fx) * image.at(x0, y0, c) +
                           fx * image.at(x1, y0, c);
        const double bot = (1.0 - fx) * image.at(x0, y1, c) +
                           fx * image.at(x1, y1, c);
        out.at(c, y, x) = ((1.0 - fy) * top + fy * bot) / 255.0;
      }
    }
  }
  return out;
}

void save_weights(const std::filesystem::path& path,
                  const NetworkWeights& weights) {
  BinWriter w(path);
  w.magic("TLWT");
  w.u16(1);
  w.u16(static_cast<std::uint16_t>(weights.layers.size()));
  for (const auto& layer : weights.layers) {
    w.str(layer.name);
    w.u16(static_cast<std::uint16_t>(layer.dims.size()));
    for (auto d : layer.dims) w.u32(d);
    for (double v : layer.values) w.f32(static_cast<float>(v));
  }
}

NetworkWeights load_weights(const std::filesystem::path& path,
                            const NetworkSpec& spec) {
  BinReader r(path);
  r.expect_magic("TLWT", "network weight");
  if (r.u16() != 1) throw DataError("unsupported weight file version");
  const int layer_count = r.u16();
  NetworkWeights weights;
  weights.provenance = path.string();
  weights.layers.resize(layer_count);
  for (auto& layer : weights.layers) {
    layer.name = r.str();
    const int rank = r.u16();
    layer.dims.resize(rank);
    std::size_t n = 1;
    for (auto& d : layer.dims) {
      d = r.u32();
      n *= d;
    }
    layer.values.resize(n);
    for (double& v : layer.values) {
      v = r.f32();
      if (!std::isfinite(v))
        throw DataError("weight file has non-finite values: " + path.string());
    }
  }
  // Shape validation against the plan.
  const auto shapes = expected_layers(spec);
  if (shapes.size() != weights.layers.size())
    throw DataError("weight file layer count does not match the network");
  for (std::size_t i = 0; i < shapes.size(); ++i) {
    if (weights.layers[i].name != shapes[i].name)
      throw DataError("weight layer name mismatch: expected " +
                      shapes[i].name + ", got " + weights.layers[i].name);
    if (weights.layers[i].dims != shapes[i].dims)
      throw DataError("weight shape mismatch in " + shapes[i].name);
  }
  return weights;
}

}  // namespace taillight::net
