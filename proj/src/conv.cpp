// Copyright 2026 The mrfcnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mrfcnn/conv.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Core>

#include "mrfcnn/fft.hpp"

namespace mrfcnn {
namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using StridedMap = Eigen::Map<RowMatrix<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const RowMatrix<T>, 0, Eigen::OuterStride<>>;

// Upper bound on im2col buffer entries per row chunk.
constexpr std::size_t kColumnBudget = std::size_t{1} << 22;

struct ConvGeometry {
  std::size_t in_channels, out_channels, height, width, kh, kw;
  std::ptrdiff_t anchor_y, anchor_x;

  std::size_t pixels() const { return height * width; }
  std::size_t patch() const { return in_channels * kh * kw; }
};

template <typename T>
ConvGeometry check_conv(const Tensor<T>& input, const Tensor<T>& filters,
                        const char* what) {
  require_rank(input, 3, what);
  require_rank(filters, 4, what);
  if (filters.dim(1) != input.dim(0))
    throw ShapeError(std::string(what) + ": filters expect " +
                     std::to_string(filters.dim(1)) +
                     " input channels, input has " +
                     std::to_string(input.dim(0)));
  ConvGeometry g{input.dim(0),  filters.dim(0), input.dim(1), input.dim(2),
                 filters.dim(2), filters.dim(3), 0,            0};
  g.anchor_y = static_cast<std::ptrdiff_t>(g.kh / 2);
  g.anchor_x = static_cast<std::ptrdiff_t>(g.kw / 2);
  return g;
}

// ---- direct -------------------------------------------------------------
//
// Loop order keeps the innermost loop on contiguous output/input rows so it
// vectorizes; the arithmetic is the defining sum with no reformulation.

struct RowSpan {
  std::ptrdiff_t lo, hi;  // valid output x range for a column shift dx
};

inline RowSpan valid_columns(std::ptrdiff_t width, std::ptrdiff_t dx) {
  return {std::clamp<std::ptrdiff_t>(-dx, 0, width),
          std::clamp<std::ptrdiff_t>(width - dx, 0, width)};
}

template <typename T>
void forward_direct(const ConvGeometry& g, const T* in, const T* f, T* out) {
  const auto H = static_cast<std::ptrdiff_t>(g.height);
  const auto W = static_cast<std::ptrdiff_t>(g.width);
  for (std::size_t o = 0; o < g.out_channels; ++o)
    for (std::size_t c = 0; c < g.in_channels; ++c)
      for (std::size_t u = 0; u < g.kh; ++u) {
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(u) - g.anchor_y;
        const T* frow = f + ((o * g.in_channels + c) * g.kh + u) * g.kw;
        for (std::size_t v = 0; v < g.kw; ++v) {
          const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(v) - g.anchor_x;
          const auto [lo, hi] = valid_columns(W, dx);
          const T w = frow[v];
          for (std::ptrdiff_t y = std::max<std::ptrdiff_t>(0, -dy);
               y < std::min(H, H - dy); ++y) {
            T* orow = out + (o * g.height + static_cast<std::size_t>(y)) * g.width;
            const T* irow = in + (c * g.height + static_cast<std::size_t>(y + dy)) * g.width + dx;
            for (std::ptrdiff_t x = lo; x < hi; ++x) orow[x] += w * irow[x];
          }
        }
      }
}

template <typename T>
void backward_direct(const ConvGeometry& g, const T* in, const T* f,
                     const T* gout, T* gin, T* gf) {
  const auto H = static_cast<std::ptrdiff_t>(g.height);
  const auto W = static_cast<std::ptrdiff_t>(g.width);
  for (std::size_t o = 0; o < g.out_channels; ++o)
    for (std::size_t c = 0; c < g.in_channels; ++c)
      for (std::size_t u = 0; u < g.kh; ++u) {
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(u) - g.anchor_y;
        const std::size_t fbase = ((o * g.in_channels + c) * g.kh + u) * g.kw;
        for (std::size_t v = 0; v < g.kw; ++v) {
          const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(v) - g.anchor_x;
          const auto [lo, hi] = valid_columns(W, dx);
          const T w = f[fbase + v];
          T acc = T(0);
          const std::ptrdiff_t n = hi - lo;
          for (std::ptrdiff_t y = std::max<std::ptrdiff_t>(0, -dy);
               y < std::min(H, H - dy) && n > 0; ++y) {
            const T* grow = gout + (o * g.height + static_cast<std::size_t>(y)) * g.width;
            const std::size_t ioff = (c * g.height + static_cast<std::size_t>(y + dy)) * g.width;
            const T* irow = in + ioff + dx;
            T* girow = gin + ioff + dx;
            for (std::ptrdiff_t x = lo; x < hi; ++x) girow[x] += w * grow[x];
            acc += Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>(grow + lo, n)
                       .dot(Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>(irow + lo, n));
          }
          gf[fbase + v] += acc;
        }
      }
}

// ---- im2col -------------------------------------------------------------

// Fills col[(c*kh+u)*kw+v, (y-y0)*W + x] = input[c, y+u-ay, x+v-ax] for
// output rows y in [y0, y1).
template <typename T>
void im2col(const ConvGeometry& g, const T* in, std::size_t y0,
            std::size_t y1, T* col) {
  const std::size_t W = g.width;
  const std::size_t ncols = (y1 - y0) * W;
  const auto H = static_cast<std::ptrdiff_t>(g.height);
  const auto Ws = static_cast<std::ptrdiff_t>(W);
  for (std::size_t c = 0; c < g.in_channels; ++c)
    for (std::size_t u = 0; u < g.kh; ++u)
      for (std::size_t v = 0; v < g.kw; ++v) {
        T* dst = col + ((c * g.kh + u) * g.kw + v) * ncols;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(v) - g.anchor_x;
        const std::ptrdiff_t x_lo = std::clamp<std::ptrdiff_t>(-dx, 0, Ws);
        const std::ptrdiff_t x_hi = std::clamp<std::ptrdiff_t>(Ws - dx, 0, Ws);
        for (std::size_t y = y0; y < y1; ++y) {
          T* row = dst + (y - y0) * W;
          const std::ptrdiff_t yy = static_cast<std::ptrdiff_t>(y) +
                                    static_cast<std::ptrdiff_t>(u) - g.anchor_y;
          if (yy < 0 || yy >= H || x_lo >= x_hi) {
            std::fill(row, row + W, T(0));
            continue;
          }
          const T* src = in + (c * g.height + yy) * W;
          std::fill(row, row + x_lo, T(0));
          std::copy(src + x_lo + dx, src + x_hi + dx, row + x_lo);
          std::fill(row + x_hi, row + W, T(0));
        }
      }
}

template <typename T>
void col2im_add(const ConvGeometry& g, const T* col, std::size_t y0,
                std::size_t y1, T* gin) {
  const std::size_t W = g.width;
  const std::size_t ncols = (y1 - y0) * W;
  const auto H = static_cast<std::ptrdiff_t>(g.height);
  const auto Ws = static_cast<std::ptrdiff_t>(W);
  for (std::size_t c = 0; c < g.in_channels; ++c)
    for (std::size_t u = 0; u < g.kh; ++u)
      for (std::size_t v = 0; v < g.kw; ++v) {
        const T* src = col + ((c * g.kh + u) * g.kw + v) * ncols;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(v) - g.anchor_x;
        const std::ptrdiff_t x_lo = std::clamp<std::ptrdiff_t>(-dx, 0, Ws);
        const std::ptrdiff_t x_hi = std::clamp<std::ptrdiff_t>(Ws - dx, 0, Ws);
        for (std::size_t y = y0; y < y1; ++y) {
          const std::ptrdiff_t yy = static_cast<std::ptrdiff_t>(y) +
                                    static_cast<std::ptrdiff_t>(u) - g.anchor_y;
          if (yy < 0 || yy >= H) continue;
          const T* row = src + (y - y0) * W;
          T* dst = gin + (c * g.height + yy) * W;
          for (std::ptrdiff_t x = x_lo; x < x_hi; ++x) dst[x + dx] += row[x];
        }
      }
}

std::size_t rows_per_chunk(const ConvGeometry& g) {
  const std::size_t per_row = std::max<std::size_t>(1, g.patch() * g.width);
  return std::clamp<std::size_t>(kColumnBudget / per_row, 1, g.height);
}

template <typename T>
void forward_im2col(const ConvGeometry& g, const T* in, const T* f, T* out) {
  const std::size_t chunk = rows_per_chunk(g);
  const auto patch = static_cast<Eigen::Index>(g.patch());
  Eigen::Map<const RowMatrix<T>> F(f, static_cast<Eigen::Index>(g.out_channels), patch);
  std::vector<T> col(g.patch() * chunk * g.width);
  for (std::size_t y0 = 0; y0 < g.height; y0 += chunk) {
    const std::size_t y1 = std::min(g.height, y0 + chunk);
    const auto ncols = static_cast<Eigen::Index>((y1 - y0) * g.width);
    im2col(g, in, y0, y1, col.data());
    Eigen::Map<const RowMatrix<T>> C(col.data(), patch, ncols);
    StridedMap<T> O(out + y0 * g.width, static_cast<Eigen::Index>(g.out_channels),
                    ncols, Eigen::OuterStride<>(static_cast<Eigen::Index>(g.pixels())));
    O.noalias() += F * C;
  }
}

template <typename T>
void backward_im2col(const ConvGeometry& g, const T* in, const T* f,
                     const T* gout, T* gin, T* gf) {
  const std::size_t chunk = rows_per_chunk(g);
  const auto patch = static_cast<Eigen::Index>(g.patch());
  const auto cout = static_cast<Eigen::Index>(g.out_channels);
  Eigen::Map<const RowMatrix<T>> F(f, cout, patch);
  Eigen::Map<RowMatrix<T>> GF(gf, cout, patch);
  std::vector<T> col(g.patch() * chunk * g.width);
  RowMatrix<T> gcol;
  for (std::size_t y0 = 0; y0 < g.height; y0 += chunk) {
    const std::size_t y1 = std::min(g.height, y0 + chunk);
    const auto ncols = static_cast<Eigen::Index>((y1 - y0) * g.width);
    im2col(g, in, y0, y1, col.data());
    Eigen::Map<const RowMatrix<T>> C(col.data(), patch, ncols);
    ConstStridedMap<T> G(gout + y0 * g.width, cout, ncols,
                         Eigen::OuterStride<>(static_cast<Eigen::Index>(g.pixels())));
    GF.noalias() += G * C.transpose();
    gcol.noalias() = F.transpose() * G;
    col2im_add(g, gcol.data(), y0, y1, gin);
  }
}

// ---- fft ----------------------------------------------------------------

// Linear correlation/convolution through circular transforms of size
// P x Q >= (H+a-1) x (W+b-1), which is alias-free for every index read.
template <typename T>
class FftConv {
 public:
  using Complex = std::complex<T>;

  explicit FftConv(const ConvGeometry& g)
      : g_(g), fft_(next_fast_size(g.height + g.kh - 1),
                    next_fast_size(g.width + g.kw - 1)) {}

  std::vector<Complex> transform_plane(const T* src, std::size_t rows,
                                       std::size_t cols) {
    std::vector<Complex> buf(fft_.size(), Complex(0));
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c)
        buf[r * fft_.cols() + c] = Complex(src[r * cols + c], T(0));
    fft_.forward(buf);
    return buf;
  }

  std::vector<Complex> transform_input(const T* in, std::size_t c) {
    return transform_plane(in + c * g_.pixels(), g_.height, g_.width);
  }
  std::vector<Complex> transform_kernel(const T* f, std::size_t o, std::size_t c) {
    return transform_plane(f + (o * g_.in_channels + c) * g_.kh * g_.kw, g_.kh, g_.kw);
  }

  // Reads element (r, c) of the circular result, r and c possibly negative.
  T read(const std::vector<Complex>& buf, std::ptrdiff_t r, std::ptrdiff_t c) const {
    const auto P = static_cast<std::ptrdiff_t>(fft_.rows());
    const auto Q = static_cast<std::ptrdiff_t>(fft_.cols());
    r = ((r % P) + P) % P;
    c = ((c % Q) + Q) % Q;
    return buf[static_cast<std::size_t>(r * Q + c)].real();
  }

  void inverse(std::vector<Complex>& buf) { fft_.inverse(buf); }
  std::size_t size() const { return fft_.size(); }

 private:
  ConvGeometry g_;
  Fft2d<T> fft_;
};

template <typename T>
void forward_fft(const ConvGeometry& g, const T* in, const T* f, T* out) {
  FftConv<T> conv(g);
  std::vector<std::vector<std::complex<T>>> inputs;
  inputs.reserve(g.in_channels);
  for (std::size_t c = 0; c < g.in_channels; ++c)
    inputs.push_back(conv.transform_input(in, c));
  std::vector<std::complex<T>> acc(conv.size());
  for (std::size_t o = 0; o < g.out_channels; ++o) {
    std::fill(acc.begin(), acc.end(), std::complex<T>(0));
    for (std::size_t c = 0; c < g.in_channels; ++c) {
      const auto k = conv.transform_kernel(f, o, c);
      for (std::size_t i = 0; i < acc.size(); ++i)
        acc[i] += inputs[c][i] * std::conj(k[i]);
    }
    conv.inverse(acc);
    T* dst = out + o * g.pixels();
    for (std::size_t y = 0; y < g.height; ++y)
      for (std::size_t x = 0; x < g.width; ++x)
        dst[y * g.width + x] +=
            conv.read(acc, static_cast<std::ptrdiff_t>(y) - g.anchor_y,
                      static_cast<std::ptrdiff_t>(x) - g.anchor_x);
  }
}

template <typename T>
void backward_fft(const ConvGeometry& g, const T* in, const T* f,
                  const T* gout, T* gin, T* gf) {
  using Complex = std::complex<T>;
  FftConv<T> conv(g);
  std::vector<std::vector<Complex>> inputs, grads;
  for (std::size_t c = 0; c < g.in_channels; ++c)
    inputs.push_back(conv.transform_input(in, c));
  for (std::size_t o = 0; o < g.out_channels; ++o)
    grads.push_back(conv.transform_plane(gout + o * g.pixels(), g.height, g.width));

  std::vector<Complex> buf(conv.size());
  std::vector<std::vector<Complex>> gin_acc(g.in_channels,
                                            std::vector<Complex>(conv.size()));
  for (std::size_t o = 0; o < g.out_channels; ++o)
    for (std::size_t c = 0; c < g.in_channels; ++c) {
      // grad_filters[o,c,u,v] = corr(input_c, gout_o) at (u-ay, v-ax)
      for (std::size_t i = 0; i < buf.size(); ++i)
        buf[i] = inputs[c][i] * std::conj(grads[o][i]);
      conv.inverse(buf);
      T* dst = gf + (o * g.in_channels + c) * g.kh * g.kw;
      for (std::size_t u = 0; u < g.kh; ++u)
        for (std::size_t v = 0; v < g.kw; ++v)
          dst[u * g.kw + v] +=
              conv.read(buf, static_cast<std::ptrdiff_t>(u) - g.anchor_y,
                        static_cast<std::ptrdiff_t>(v) - g.anchor_x);
      const auto k = conv.transform_kernel(f, o, c);
      for (std::size_t i = 0; i < buf.size(); ++i)
        gin_acc[c][i] += grads[o][i] * k[i];
    }
  for (std::size_t c = 0; c < g.in_channels; ++c) {
    // grad_input[c,y,x] = sum_o conv(gout_o, f_oc) at (y+ay, x+ax)
    conv.inverse(gin_acc[c]);
    T* dst = gin + c * g.pixels();
    for (std::size_t y = 0; y < g.height; ++y)
      for (std::size_t x = 0; x < g.width; ++x)
        dst[y * g.width + x] +=
            conv.read(gin_acc[c], static_cast<std::ptrdiff_t>(y) + g.anchor_y,
                      static_cast<std::ptrdiff_t>(x) + g.anchor_x);
  }
}

}  // namespace

ConvPath resolve_conv_path(ConvPath requested, std::size_t in_channels,
                           std::size_t out_channels, std::size_t height,
                           std::size_t width, std::size_t kernel_height,
                           std::size_t kernel_width) {
  if (requested != ConvPath::automatic) return requested;
  // Measured on AVX2/AVX-512 hosts: one transform element costs roughly 60
  // direct multiply-adds.
  const double macs = static_cast<double>(in_channels * out_channels) *
                      static_cast<double>(kernel_height * kernel_width) *
                      static_cast<double>(height * width);
  const double plane = static_cast<double>(next_fast_size(height + kernel_height - 1) *
                                           next_fast_size(width + kernel_width - 1));
  const double transforms =
      static_cast<double>(in_channels + out_channels + in_channels * out_channels);
  if (macs > 60.0 * transforms * plane * std::log2(plane)) return ConvPath::fft;
  return out_channels >= kIm2colMinFilters ? ConvPath::im2col : ConvPath::direct;
}

template <typename T>
Tensor<T> conv2d_same(const Tensor<T>& input, const Tensor<T>& filters,
                      std::span<const T> bias, ConvPath path) {
  const ConvGeometry g = check_conv(input, filters, "conv2d_same");
  if (bias.size() != g.out_channels)
    throw ShapeError("conv2d_same: bias length " + std::to_string(bias.size()) +
                     " != output channels " + std::to_string(g.out_channels));
  Tensor<T> out({g.out_channels, g.height, g.width});
  for (std::size_t o = 0; o < g.out_channels; ++o)
    std::fill_n(out.raw() + o * g.pixels(), g.pixels(), bias[o]);
  switch (resolve_conv_path(path, g.in_channels, g.out_channels, g.height, g.width, g.kh, g.kw)) {
    case ConvPath::direct:
      forward_direct(g, input.raw(), filters.raw(), out.raw());
      break;
    case ConvPath::fft:
      forward_fft(g, input.raw(), filters.raw(), out.raw());
      break;
    default:
      forward_im2col(g, input.raw(), filters.raw(), out.raw());
      break;
  }
  return out;
}

template <typename T>
ConvGradients<T> conv2d_same_backward(const Tensor<T>& input,
                                      const Tensor<T>& filters,
                                      const Tensor<T>& grad_output,
                                      ConvPath path) {
  const ConvGeometry g = check_conv(input, filters, "conv2d_same_backward");
  require_rank(grad_output, 3, "conv2d_same_backward");
  if (grad_output.shape() != Shape{g.out_channels, g.height, g.width})
    throw ShapeError("conv2d_same_backward: grad_output shape " +
                     shape_string(grad_output.shape()) + " does not match output");
  ConvGradients<T> grads{Tensor<T>(input.shape()), Tensor<T>(filters.shape()),
                         std::vector<T>(g.out_channels, T(0))};
  for (std::size_t o = 0; o < g.out_channels; ++o) {
    const T* src = grad_output.raw() + o * g.pixels();
    T acc = T(0);
    for (std::size_t i = 0; i < g.pixels(); ++i) acc += src[i];
    grads.bias[o] = acc;
  }
  switch (resolve_conv_path(path, g.in_channels, g.out_channels, g.height, g.width, g.kh, g.kw)) {
    case ConvPath::direct:
      backward_direct(g, input.raw(), filters.raw(), grad_output.raw(),
                      grads.input.raw(), grads.filters.raw());
      break;
    case ConvPath::fft:
      backward_fft(g, input.raw(), filters.raw(), grad_output.raw(),
                   grads.input.raw(), grads.filters.raw());
      break;
    default:
      backward_im2col(g, input.raw(), filters.raw(), grad_output.raw(),
                      grads.input.raw(), grads.filters.raw());
      break;
  }
  return grads;
}

template <typename T>
Tensor<T> concat_channels(std::span<const Tensor<T>> parts) {
  if (parts.empty()) throw ShapeError("concat_channels: no parts");
  std::size_t channels = 0;
  for (const auto& p : parts) {
    require_rank(p, 3, "concat_channels");
    if (p.dim(1) != parts[0].dim(1) || p.dim(2) != parts[0].dim(2))
      throw ShapeError("concat_channels: spatial mismatch " +
                       shape_string(p.shape()) + " vs " +
                       shape_string(parts[0].shape()));
    channels += p.dim(0);
  }
  Tensor<T> out({channels, parts[0].dim(1), parts[0].dim(2)});
  auto dst = out.storage().begin();
  for (const auto& p : parts) dst = std::copy(p.storage().begin(), p.storage().end(), dst);
  return out;
}

template <typename T>
Tensor<T> slice_channels(const Tensor<T>& t, std::size_t begin,
                         std::size_t count) {
  require_rank(t, 3, "slice_channels");
  if (count == 0 || begin + count > t.dim(0))
    throw ShapeError("slice_channels: range [" + std::to_string(begin) + ", " +
                     std::to_string(begin + count) + ") outside " +
                     shape_string(t.shape()));
  const std::size_t plane = t.dim(1) * t.dim(2);
  std::vector<T> data(t.storage().begin() + begin * plane,
                      t.storage().begin() + (begin + count) * plane);
  return Tensor<T>({count, t.dim(1), t.dim(2)}, std::move(data));
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
  Tensor<T> out = x;
  for (auto& v : out.storage()) v = v > T(0) ? v : T(0);
  return out;
}

template <typename T>
Tensor<T> relu_backward(const Tensor<T>& x, const Tensor<T>& grad_output) {
  if (x.shape() != grad_output.shape())
    throw ShapeError("relu_backward: shape mismatch " + shape_string(x.shape()) +
                     " vs " + shape_string(grad_output.shape()));
  Tensor<T> out = grad_output;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!(x[i] > T(0))) out[i] = T(0);
  return out;
}

#define MRFCNN_INSTANTIATE_CONV(T)                                              \
  template Tensor<T> conv2d_same(const Tensor<T>&, const Tensor<T>&,            \
                                 std::span<const T>, ConvPath);                 \
  template ConvGradients<T> conv2d_same_backward(                               \
      const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, ConvPath);          \
  template Tensor<T> concat_channels(std::span<const Tensor<T>>);               \
  template Tensor<T> slice_channels(const Tensor<T>&, std::size_t, std::size_t); \
  template Tensor<T> relu(const Tensor<T>&);                                    \
  template Tensor<T> relu_backward(const Tensor<T>&, const Tensor<T>&);

MRFCNN_INSTANTIATE_CONV(float)
MRFCNN_INSTANTIATE_CONV(double)

}  // namespace mrfcnn
