#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <utility>

#include "phogsvm/errors.hpp"

namespace phogsvm {

/// Dense grayscale raster. Row index is y, column index is x, storage is
/// row-major so a pixel (x, y) lives at img(y, x).
template <typename Scalar>
using Image = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using GrayImage = Image<double>;

/// Boolean raster with the same geometry as an Image.
using EdgeMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Derived>
inline void require_nonempty(const Eigen::DenseBase<Derived>& img, const char* what) {
  if (img.rows() < 1 || img.cols() < 1) {
    throw InvalidArgument(std::string(what) + ": image must be at least 1x1");
  }
}

/// Odd-sided convolution stencil with a well-defined center tap.
template <typename Scalar>
class Kernel2D {
 public:
  explicit Kernel2D(Image<Scalar> weights) : weights_(std::move(weights)) {
    if (weights_.rows() % 2 == 0 || weights_.cols() % 2 == 0) {
      throw InvalidArgument("Kernel2D: side lengths must be odd");
    }
    if (!weights_.allFinite()) {
      throw InvalidArgument("Kernel2D: weights must be finite");
    }
  }

  /// Builds a kernel from a 3x3 initializer, rows top to bottom.
  static Kernel2D from3x3(Scalar a00, Scalar a01, Scalar a02, Scalar a10, Scalar a11, Scalar a12,
                          Scalar a20, Scalar a21, Scalar a22) {
    Image<Scalar> w(3, 3);
    w << a00, a01, a02, a10, a11, a12, a20, a21, a22;
    return Kernel2D(std::move(w));
  }

  static Kernel2D identity() { return Kernel2D(Image<Scalar>::Ones(1, 1)); }

  Eigen::Index radius_x() const { return weights_.cols() / 2; }
  Eigen::Index radius_y() const { return weights_.rows() / 2; }
  const Image<Scalar>& weights() const { return weights_; }
  Scalar sum() const { return weights_.sum(); }

 private:
  Image<Scalar> weights_;
};

}  // namespace phogsvm
