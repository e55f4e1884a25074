#include "phogsvm/phog.hpp"

#include <algorithm>
#include <vector>

namespace phogsvm {

void PhogParams::validate() const {
  if (levels < 0 || levels > 8) throw InvalidArgument("levels must be in [0, 8], got " + std::to_string(levels));
  if (bins < 1) throw InvalidArgument("bins must be positive, got " + std::to_string(bins));
  if (angle_range != 180.0 && angle_range != 360.0) {
    throw InvalidArgument("angle range must be 180 or 360, got " + std::to_string(angle_range));
  }
  if (!(edge_threshold >= 0.0 && edge_threshold <= 1.0)) {
    throw InvalidArgument("edge threshold must be in [0, 1], got " + std::to_string(edge_threshold));
  }
}

Eigen::Index descriptor_length(int levels, int bins) {
  if (levels < 0 || bins < 1) throw InvalidArgument("descriptor_length: need levels >= 0 and bins >= 1");
  Eigen::Index cells = 0;
  for (int l = 0; l <= levels; ++l) cells += Eigen::Index{1} << (2 * l);
  return cells * bins;
}

int map_orientation_to_bin(double theta, double angle_range, int bins) {
  const auto bin = static_cast<long>(std::floor(theta / (angle_range / bins)));
  return static_cast<int>(std::clamp<long>(bin, 0, bins - 1));
}

EdgeMask edge_mask(const GrayImage& lap, double threshold_frac) {
  const Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> mag = lap.array().abs();
  const double peak = lap.size() > 0 ? mag.maxCoeff() : 0.0;
  if (peak == 0.0) return EdgeMask::Constant(lap.rows(), lap.cols(), false);
  return (mag >= threshold_frac * peak);
}

Eigen::VectorXi cell_boundaries(Eigen::Index n, int parts) {
  Eigen::VectorXi b(parts + 1);
  for (int i = 0; i <= parts; ++i) b(i) = static_cast<int>((static_cast<Eigen::Index>(i) * n) / parts);
  return b;
}

namespace {

// Cell index of every coordinate along one axis.
std::vector<int> cell_of(Eigen::Index n, int parts) {
  const auto bounds = cell_boundaries(n, parts);
  std::vector<int> cell(static_cast<std::size_t>(n));
  for (int c = 0; c < parts; ++c) {
    for (int i = bounds(c); i < bounds(c + 1); ++i) cell[static_cast<std::size_t>(i)] = c;
  }
  return cell;
}

}  // namespace

PhogDescriptor phog_descriptor(const GrayImage& img, const PhogParams& params) {
  params.validate();
  require_nonempty(img, "phog_descriptor");
  const Eigen::Index w = img.cols();
  const Eigen::Index h = img.rows();
  const int finest = 1 << params.levels;
  if (w < finest || h < finest) {
    throw ImageTooSmall("phog_descriptor: " + std::to_string(w) + "x" + std::to_string(h) +
                        " image cannot hold a " + std::to_string(finest) + "x" + std::to_string(finest) +
                        " cell grid");
  }

  const GrayImage lap = laplacian(img, params.stencil);
  const EdgeMask mask = edge_mask(lap, params.edge_threshold);
  const auto grad = sobel_gradients(params.grad_source == GradientSource::Image ? img : lap);
  const GrayImage mag = gradient_magnitude(grad.gx, grad.gy);
  const GrayImage theta = gradient_orientation(grad.gx, grad.gy, params.angle_range);

  const int H = params.bins;
  Eigen::VectorXd values = Eigen::VectorXd::Zero(descriptor_length(params.levels, H));

  struct Level {
    Eigen::Index offset;
    int parts;
    std::vector<int> col_cell;
    std::vector<int> row_cell;
  };
  std::vector<Level> levels;
  Eigen::Index offset = 0;
  for (int l = 0; l <= params.levels; ++l) {
    const int parts = 1 << l;
    levels.push_back({offset, parts, cell_of(w, parts), cell_of(h, parts)});
    offset += static_cast<Eigen::Index>(parts) * parts * H;
  }

  for (Eigen::Index y = 0; y < h; ++y) {
    for (Eigen::Index x = 0; x < w; ++x) {
      if (!mask(y, x)) continue;
      const int bin = map_orientation_to_bin(theta(y, x), params.angle_range, H);
      const double vote = mag(y, x);
      for (const auto& lv : levels) {
        const Eigen::Index cell =
            static_cast<Eigen::Index>(lv.row_cell[static_cast<std::size_t>(y)]) * lv.parts +
            lv.col_cell[static_cast<std::size_t>(x)];
        values(lv.offset + cell * H + bin) += vote;
      }
    }
  }

  if (params.normalize) {
    const double total = values.sum();
    if (total > 0.0) values /= total;
  }
  return {std::move(values), params};
}

}  // namespace phogsvm
