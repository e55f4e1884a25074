#pragma once

#include <filesystem>

#include "phogsvm/image.hpp"

namespace phogsvm {

/// Decodes PGM (P2/P5, maxval <= 65535) or 8-bit PNG (gray, RGB, with or
/// without alpha) into intensities in [0,1]. Color is reduced with
/// 0.299 R + 0.587 G + 0.114 B.
///
/// Throws IoError when the file cannot be read and FormatError when the
/// encoding is unsupported or corrupt; both messages name the path.
GrayImage load_image(const std::filesystem::path& path);

enum class PgmScaling {
  Clamp,   ///< [0,1] maps to [0,255], out-of-range values saturate
  MinMax,  ///< [min,max] of the image maps to [0,255]
};

/// Writes an 8-bit binary PGM (P5).
void save_pgm(const GrayImage& img, const std::filesystem::path& path, PgmScaling scaling = PgmScaling::Clamp);

}  // namespace phogsvm
