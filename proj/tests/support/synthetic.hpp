#pragma once

// Seeded line-drawing generator for two shape classes: ellipse outlines
// (label +1) and crosses of two or three strokes (label -1), rendered at
// 64x64 with anti-aliased strokes, random pose and additive noise.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

#include "phogsvm/image.hpp"
#include "phogsvm/image_io.hpp"

namespace synthetic {

using phogsvm::GrayImage;

inline double segment_distance(double px, double py, double ax, double ay, double bx, double by) {
  const double vx = bx - ax, vy = by - ay;
  const double t = std::clamp(((px - ax) * vx + (py - ay) * vy) / (vx * vx + vy * vy), 0.0, 1.0);
  return std::hypot(px - ax - t * vx, py - ay - t * vy);
}

inline GrayImage render(std::mt19937_64& rng, bool ellipse, int size = 64) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double bg = 0.2 + 0.2 * u(rng);
  const double ink = 0.5 + 0.3 * u(rng);
  const double cx = size * (0.4 + 0.2 * u(rng));
  const double cy = size * (0.4 + 0.2 * u(rng));
  const double rot = std::numbers::pi * u(rng);
  const double thick = 1.2 + 0.8 * u(rng);
  const double ra = size * (0.2 + 0.12 * u(rng));
  const double rb = size * (0.2 + 0.12 * u(rng));
  const int strokes = u(rng) < 0.5 ? 2 : 3;
  std::normal_distribution<double> noise(0.0, 0.03);

  GrayImage img(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double d = 1e9;
      if (ellipse) {
        // Distance to the outline approximated through the normalized radius.
        const double dx = x + 0.5 - cx, dy = y + 0.5 - cy;
        const double xr = dx * std::cos(rot) + dy * std::sin(rot);
        const double yr = -dx * std::sin(rot) + dy * std::cos(rot);
        const double rho = std::hypot(xr / ra, yr / rb);
        d = std::fabs(rho - 1.0) * std::min(ra, rb);
      } else {
        for (int s = 0; s < strokes; ++s) {
          const double ang = rot + s * std::numbers::pi / strokes;
          const double len = s == 0 ? ra : rb;
          d = std::min(d, segment_distance(x + 0.5, y + 0.5, cx - len * std::cos(ang), cy - len * std::sin(ang),
                                           cx + len * std::cos(ang), cy + len * std::sin(ang)));
        }
      }
      const double cover = std::clamp(thick - d, 0.0, 1.0);
      img(y, x) = std::clamp(bg + (ink - bg) * cover + noise(rng), 0.0, 1.0);
    }
  }
  return img;
}

/// Writes `per_class` images of each class plus manifest.csv into `dir`.
/// Ellipses are labelled male, crosses female.
inline std::filesystem::path write_dataset(const std::filesystem::path& dir, int per_class, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(seed);
  const auto manifest = dir / "manifest.csv";
  std::ofstream m(manifest);
  m << "id,path,label\n";
  for (int i = 0; i < 2 * per_class; ++i) {
    const bool ellipse = i % 2 == 0;
    const std::string id = (ellipse ? "ellipse_" : "cross_") + std::to_string(i / 2);
    phogsvm::save_pgm(render(rng, ellipse), dir / (id + ".pgm"));
    m << id << ',' << id << ".pgm," << (ellipse ? "male" : "female") << '\n';
  }
  return manifest;
}

}  // namespace synthetic
