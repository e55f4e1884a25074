#pragma once

// Low-level filter bank: convolution, Gaussian smoothing, Laplacian and Sobel
// stencils, and Keys bicubic resampling. Every operation pads by replicating
// the nearest edge pixel.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "phogsvm/errors.hpp"
#include "phogsvm/image.hpp"

namespace phogsvm {

enum class Border { Replicate };

enum class LaplacianStencil { FourConnected, EightConnected };

template <typename Scalar>
struct Gradients {
  Image<Scalar> gx;
  Image<Scalar> gy;
};

namespace detail {

inline Eigen::Index clamp_index(Eigen::Index i, Eigen::Index n) {
  return std::clamp<Eigen::Index>(i, 0, n - 1);
}

// 1-D true convolution along rows or columns with unit-sum taps centred at
// taps.size() / 2. Accumulating offsets from the centre pixel keeps constant
// regions exactly constant.
template <typename Scalar>
Image<Scalar> convolve_axis(const Image<Scalar>& img, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& taps,
                            bool horizontal) {
  const Eigen::Index h = img.rows();
  const Eigen::Index w = img.cols();
  const Eigen::Index r = taps.size() / 2;
  Image<Scalar> out(h, w);
  if (horizontal) {
    for (Eigen::Index y = 0; y < h; ++y) {
      for (Eigen::Index x = 0; x < w; ++x) {
        const Scalar ref = img(y, x);
        Scalar acc(0);
        for (Eigen::Index d = -r; d <= r; ++d) acc += taps(r + d) * (img(y, clamp_index(x - d, w)) - ref);
        out(y, x) = ref + acc;
      }
    }
  } else {
    for (Eigen::Index y = 0; y < h; ++y) {
      for (Eigen::Index x = 0; x < w; ++x) {
        const Scalar ref = img(y, x);
        Scalar acc(0);
        for (Eigen::Index d = -r; d <= r; ++d) acc += taps(r + d) * (img(clamp_index(y - d, h), x) - ref);
        out(y, x) = ref + acc;
      }
    }
  }
  return out;
}

}  // namespace detail

/// True 2-D convolution (kernel flipped) with replicate padding. The output
/// has the input's dimensions.
///
/// Throws KernelTooLarge unless the kernel is smaller than twice the image
/// along each axis.
template <typename Scalar>
Image<Scalar> convolve2d(const Image<Scalar>& img, const Kernel2D<Scalar>& k,
                         Border border = Border::Replicate) {
  (void)border;
  require_nonempty(img, "convolve2d");
  const Eigen::Index h = img.rows();
  const Eigen::Index w = img.cols();
  const auto& kw = k.weights();
  if (kw.cols() >= 2 * w || kw.rows() >= 2 * h) {
    throw KernelTooLarge("convolve2d: kernel " + std::to_string(kw.cols()) + "x" + std::to_string(kw.rows()) +
                         " too large for image " + std::to_string(w) + "x" + std::to_string(h));
  }
  const Eigen::Index rx = k.radius_x();
  const Eigen::Index ry = k.radius_y();
  const Scalar weight_sum = kw.sum();
  Image<Scalar> out(h, w);
  // Taps act on offsets from the centre pixel so that constant images come
  // out as exactly c * sum(weights), and exactly zero for derivative stencils.
  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      const Scalar ref = img(y, x);
      Scalar acc(0);
      for (Eigen::Index dy = -ry; dy <= ry; ++dy) {
        const Eigen::Index sy = detail::clamp_index(y - dy, h);
        for (Eigen::Index dx = -rx; dx <= rx; ++dx) {
          acc += kw(ry + dy, rx + dx) * (img(sy, detail::clamp_index(x - dx, w)) - ref);
        }
      }
      out(y, x) = weight_sum * ref + acc;
    }
  }
  return out;
}

/// Radius of the truncated Gaussian support: ceil(3 sigma).
inline Eigen::Index gaussian_radius(double sigma) {
  return static_cast<Eigen::Index>(std::ceil(3.0 * sigma));
}

/// Sampled 1-D Gaussian on [-ceil(3 sigma), ceil(3 sigma)], renormalized to
/// unit sum. The outer product of two of these is the renormalized 2-D
/// kernel, so the leading 1/sqrt(2 pi sigma^2) factor never matters.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> gaussian_taps(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("gaussian: sigma must be positive");
  const Eigen::Index r = gaussian_radius(sigma);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> taps(2 * r + 1);
  for (Eigen::Index i = -r; i <= r; ++i) {
    taps(i + r) = static_cast<Scalar>(std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma)));
  }
  return taps / taps.sum();
}

/// Gaussian smoothing as two separable 1-D passes with replicate padding.
template <typename Scalar>
Image<Scalar> gaussian_smooth(const Image<Scalar>& img, double sigma) {
  require_nonempty(img, "gaussian_smooth");
  const auto taps = gaussian_taps<Scalar>(sigma);
  return detail::convolve_axis(detail::convolve_axis(img, taps, true), taps, false);
}

template <typename Scalar = double>
Kernel2D<Scalar> laplacian_kernel(LaplacianStencil stencil = LaplacianStencil::FourConnected) {
  if (stencil == LaplacianStencil::EightConnected) {
    return Kernel2D<Scalar>::from3x3(1, 1, 1, 1, -8, 1, 1, 1, 1);
  }
  return Kernel2D<Scalar>::from3x3(0, 1, 0, 1, -4, 1, 0, 1, 0);
}

/// Signed Laplacian edge response.
template <typename Scalar>
Image<Scalar> laplacian(const Image<Scalar>& img, LaplacianStencil stencil = LaplacianStencil::FourConnected) {
  return convolve2d(img, laplacian_kernel<Scalar>(stencil));
}

/// Sobel derivatives. gx grows with intensity increasing along +x (columns),
/// gy along +y (rows). Because convolve2d flips its kernel, the stored
/// stencils are the mirror images of {-1,0,1; -2,0,2; -1,0,1} and its
/// transpose.
template <typename Scalar>
Gradients<Scalar> sobel_gradients(const Image<Scalar>& img) {
  const auto kx = Kernel2D<Scalar>::from3x3(1, 0, -1, 2, 0, -2, 1, 0, -1);
  const auto ky = Kernel2D<Scalar>::from3x3(1, 2, 1, 0, 0, 0, -1, -2, -1);
  return {convolve2d(img, kx), convolve2d(img, ky)};
}

/// Keys cubic convolution kernel.
template <typename Scalar = double>
Scalar keys_weight(Scalar t, Scalar a = Scalar(-0.5)) {
  const Scalar x = std::abs(t);
  if (x <= Scalar(1)) return ((a + 2) * x - (a + 3)) * x * x + 1;
  if (x < Scalar(2)) return ((a * x - 5 * a) * x + 8 * a) * x - 4 * a;
  return Scalar(0);
}

namespace detail {

template <typename Scalar>
struct ResampleTaps {
  std::vector<std::array<Eigen::Index, 4>> index;
  std::vector<std::array<Scalar, 4>> weight;
};

// Pixel-centre alignment: output i samples input coordinate (i+0.5)*in/out - 0.5.
template <typename Scalar>
ResampleTaps<Scalar> resample_taps(Eigen::Index in_n, Eigen::Index out_n) {
  ResampleTaps<Scalar> taps;
  taps.index.resize(static_cast<std::size_t>(out_n));
  taps.weight.resize(static_cast<std::size_t>(out_n));
  const double scale = static_cast<double>(in_n) / static_cast<double>(out_n);
  for (Eigen::Index i = 0; i < out_n; ++i) {
    const double src = (static_cast<double>(i) + 0.5) * scale - 0.5;
    const double base = std::floor(src);
    const Scalar t = static_cast<Scalar>(src - base);
    const auto b = static_cast<Eigen::Index>(base);
    auto& idx = taps.index[static_cast<std::size_t>(i)];
    auto& wt = taps.weight[static_cast<std::size_t>(i)];
    for (int k = 0; k < 4; ++k) {
      idx[k] = clamp_index(b - 1 + k, in_n);
      wt[k] = keys_weight<Scalar>(t - static_cast<Scalar>(k - 1));
    }
  }
  return taps;
}

}  // namespace detail

/// Separable Keys (a = -0.5) bicubic resampling to out_w x out_h.
template <typename Scalar>
Image<Scalar> resample_bicubic(const Image<Scalar>& img, Eigen::Index out_w, Eigen::Index out_h) {
  require_nonempty(img, "resample_bicubic");
  if (out_w < 1 || out_h < 1) throw InvalidArgument("resample_bicubic: output size must be at least 1x1");
  const Eigen::Index in_h = img.rows();
  const Eigen::Index in_w = img.cols();
  const auto tx = detail::resample_taps<Scalar>(in_w, out_w);
  const auto ty = detail::resample_taps<Scalar>(in_h, out_h);

  Image<Scalar> horiz(in_h, out_w);
  for (Eigen::Index y = 0; y < in_h; ++y) {
    for (Eigen::Index x = 0; x < out_w; ++x) {
      const auto& idx = tx.index[static_cast<std::size_t>(x)];
      const auto& wt = tx.weight[static_cast<std::size_t>(x)];
      const Scalar ref = img(y, idx[1]);
      Scalar acc(0);
      for (int k = 0; k < 4; ++k) acc += wt[k] * (img(y, idx[k]) - ref);
      horiz(y, x) = ref + acc;
    }
  }
  Image<Scalar> out(out_h, out_w);
  for (Eigen::Index y = 0; y < out_h; ++y) {
    const auto& idx = ty.index[static_cast<std::size_t>(y)];
    const auto& wt = ty.weight[static_cast<std::size_t>(y)];
    const auto ref = horiz.row(idx[1]);
    out.row(y) = ref + (wt[0] * (horiz.row(idx[0]) - ref) + wt[1] * (horiz.row(idx[1]) - ref) +
                        wt[2] * (horiz.row(idx[2]) - ref) + wt[3] * (horiz.row(idx[3]) - ref));
  }
  return out;
}

}  // namespace phogsvm
