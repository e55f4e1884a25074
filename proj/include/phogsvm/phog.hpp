#pragma once

// Laplacian-masked pyramid histogram of oriented gradients.
//
// The Laplacian response selects which pixels vote; Sobel gradients supply
// each vote's weight (magnitude) and bin (orientation). Level l of the
// pyramid splits the image into 2^l x 2^l cells, and the per-cell histograms
// of levels 0..L are concatenated and L1-normalized.

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string>

#include "phogsvm/image.hpp"
#include "phogsvm/imaging.hpp"

namespace phogsvm {

enum class GradientSource { Image, Laplacian };

struct PhogParams {
  int levels = 3;               ///< deepest pyramid level L; levels 0..L are used
  int bins = 16;                ///< orientation bins H per cell
  double angle_range = 360.0;   ///< 180 (unsigned) or 360 (signed) degrees
  double edge_threshold = 0.1;  ///< fraction of max |Laplacian| a pixel needs to vote
  GradientSource grad_source = GradientSource::Image;
  LaplacianStencil stencil = LaplacianStencil::FourConnected;
  bool normalize = true;

  /// Throws InvalidArgument when a field is out of range.
  void validate() const;

  friend bool operator==(const PhogParams&, const PhogParams&) = default;
};

struct PhogDescriptor {
  Eigen::VectorXd values;
  PhogParams params;
};

/// H * (4^(L+1) - 1) / 3: one H-bin histogram for each of the sum_l 4^l cells.
Eigen::Index descriptor_length(int levels, int bins);

/// Per-pixel sqrt(gx^2 + gy^2).
template <typename Scalar>
Image<Scalar> gradient_magnitude(const Image<Scalar>& gx, const Image<Scalar>& gy) {
  if (gx.rows() != gy.rows() || gx.cols() != gy.cols()) {
    throw DimensionMismatch("gradient_magnitude: gx and gy differ in size");
  }
  return (gx.array().square() + gy.array().square()).sqrt().matrix();
}

/// Full-quadrant arctangent in degrees wrapped into [0, angle_range).
template <typename Scalar>
Scalar orientation_degrees(Scalar gx, Scalar gy, Scalar angle_range) {
  if (gx == Scalar(0) && gy == Scalar(0)) return Scalar(0);
  Scalar theta = std::atan2(gy, gx) * Scalar(180) / std::numbers::pi_v<Scalar>;
  if (theta < Scalar(0)) theta += Scalar(360);
  if (theta >= Scalar(360)) theta -= Scalar(360);
  if (angle_range < Scalar(360) && theta >= angle_range) theta -= angle_range;
  // Rounding can land exactly on the upper bound.
  if (theta >= angle_range || theta < Scalar(0)) theta = Scalar(0);
  return theta;
}

template <typename Scalar>
Image<Scalar> gradient_orientation(const Image<Scalar>& gx, const Image<Scalar>& gy, double angle_range) {
  if (gx.rows() != gy.rows() || gx.cols() != gy.cols()) {
    throw DimensionMismatch("gradient_orientation: gx and gy differ in size");
  }
  const auto a = static_cast<Scalar>(angle_range);
  return gx.binaryExpr(gy, [a](Scalar x, Scalar y) { return orientation_degrees(x, y, a); });
}

/// floor(theta / (angle_range / bins)), clamped to [0, bins).
int map_orientation_to_bin(double theta, double angle_range, int bins);

/// Flags pixels with |lap| >= t * max|lap|. A response that is identically
/// zero yields an all-false mask.
EdgeMask edge_mask(const GrayImage& lap, double threshold_frac);

/// Start of each of `parts` cells along an axis of length n, plus n itself.
Eigen::VectorXi cell_boundaries(Eigen::Index n, int parts);

/// Throws ImageTooSmall when the image is narrower or shorter than 2^L.
PhogDescriptor phog_descriptor(const GrayImage& img, const PhogParams& params);

}  // namespace phogsvm
