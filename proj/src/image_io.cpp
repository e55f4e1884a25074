#include "phogsvm/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <memory>
#include <string>
#include <vector>

namespace phogsvm {
namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image '" + path.string() + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading image '" + path.string() + "'");
  return bytes;
}

class PgmReader {
 public:
  PgmReader(const std::vector<unsigned char>& bytes, const std::filesystem::path& path)
      : bytes_(bytes), path_(path) {}

  GrayImage decode() {
    if (bytes_.size() < 2 || bytes_[0] != 'P' || (bytes_[1] != '2' && bytes_[1] != '5')) {
      fail("not a P2/P5 PGM");
    }
    const bool binary = bytes_[1] == '5';
    pos_ = 2;
    const long width = header_int();
    const long height = header_int();
    const long maxval = header_int();
    if (width < 1 || height < 1) fail("non-positive dimensions");
    if (maxval < 1 || maxval > 65535) fail("maxval out of range");

    GrayImage img(height, width);
    const auto scale = static_cast<double>(maxval);
    if (binary) {
      // Exactly one whitespace byte separates the header from the raster.
      if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) fail("missing raster separator");
      ++pos_;
      const std::size_t bpp = maxval > 255 ? 2 : 1;
      const std::size_t need = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * bpp;
      if (bytes_.size() - pos_ < need) fail("truncated raster");
      for (long y = 0; y < height; ++y) {
        for (long x = 0; x < width; ++x) {
          long v = bytes_[pos_++];
          if (bpp == 2) v = (v << 8) | bytes_[pos_++];
          if (v > maxval) fail("sample exceeds maxval");
          img(y, x) = static_cast<double>(v) / scale;
        }
      }
    } else {
      for (long y = 0; y < height; ++y) {
        for (long x = 0; x < width; ++x) {
          const long v = header_int();
          if (v > maxval) fail("sample exceeds maxval");
          img(y, x) = static_cast<double>(v) / scale;
        }
      }
    }
    return img;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw FormatError("malformed PGM '" + path_.string() + "': " + why);
  }

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  long header_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) fail("expected an unsigned integer");
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > 1'000'000'000L) fail("integer too large");
    }
    return v;
  }

  const std::vector<unsigned char>& bytes_;
  const std::filesystem::path& path_;
  std::size_t pos_ = 0;
};

GrayImage decode_png(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size())) {
    throw FormatError("malformed PNG '" + path.string() + "': " + png.message);
  }
  std::unique_ptr<png_image, void (*)(png_imagep)> guard(&png, png_image_free);
  if (png.format & PNG_FORMAT_FLAG_LINEAR) {
    throw FormatError("unsupported PNG '" + path.string() + "': only 8-bit samples are supported");
  }
  const bool color = (png.format & PNG_FORMAT_FLAG_COLOR) != 0;
  png.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const std::size_t channels = color ? 3 : 1;
  std::vector<png_byte> raster(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, raster.data(), 0, nullptr)) {
    throw FormatError("corrupt PNG '" + path.string() + "': " + png.message);
  }
  guard.release();

  const auto width = static_cast<Eigen::Index>(png.width);
  const auto height = static_cast<Eigen::Index>(png.height);
  GrayImage img(height, width);
  for (Eigen::Index y = 0; y < height; ++y) {
    for (Eigen::Index x = 0; x < width; ++x) {
      const png_byte* px = &raster[(static_cast<std::size_t>(y) * png.width + static_cast<std::size_t>(x)) * channels];
      const double v = color ? 0.299 * px[0] + 0.587 * px[1] + 0.114 * px[2] : static_cast<double>(px[0]);
      img(y, x) = v / 255.0;
    }
  }
  return img;
}

}  // namespace

GrayImage load_image(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  static constexpr unsigned char kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::equal(std::begin(kPngSignature), std::end(kPngSignature), bytes.begin())) {
    return decode_png(bytes, path);
  }
  if (bytes.size() >= 2 && bytes[0] == 'P') return PgmReader(bytes, path).decode();
  throw FormatError("unsupported image format '" + path.string() + "' (expected PGM or PNG)");
}

void save_pgm(const GrayImage& img, const std::filesystem::path& path, PgmScaling scaling) {
  require_nonempty(img, "save_pgm");
  double lo = 0.0;
  double span = 1.0;
  if (scaling == PgmScaling::MinMax) {
    lo = img.minCoeff();
    span = img.maxCoeff() - lo;
    if (span <= 0.0) span = 1.0;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << "P5\n" << img.cols() << ' ' << img.rows() << "\n255\n";
  for (Eigen::Index y = 0; y < img.rows(); ++y) {
    for (Eigen::Index x = 0; x < img.cols(); ++x) {
      const double v = std::clamp((img(y, x) - lo) / span, 0.0, 1.0);
      out.put(static_cast<char>(static_cast<std::uint8_t>(std::lround(v * 255.0))));
    }
  }
  if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace phogsvm
