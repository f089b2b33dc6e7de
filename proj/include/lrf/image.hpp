#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace lrf {

/// Channel-planar, row-major image. Loaded images hold values in [0, 1];
/// raw model outputs may leave that range until clamped for emission.
struct ImageBuffer {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<double> data;

  ImageBuffer() = default;
  ImageBuffer(int h, int w, int c, double fill = 0.0)
      : height(h), width(w), channels(c), data(std::size_t(h) * w * c, fill) {}

  std::size_t plane_size() const { return std::size_t(height) * std::size_t(width); }
  double* plane(int c) { return data.data() + plane_size() * std::size_t(c); }
  const double* plane(int c) const { return data.data() + plane_size() * std::size_t(c); }
  double& at(int c, int i, int j) { return data[plane_size() * c + std::size_t(i) * width + j]; }
  double at(int c, int i, int j) const { return data[plane_size() * c + std::size_t(i) * width + j]; }

  bool same_shape(const ImageBuffer& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
};

ImageBuffer clamped(ImageBuffer image);

/// ITU-R 601 luma of an RGB image; single-channel images are returned as is.
ImageBuffer to_luma(const ImageBuffer& image);

/// Reads 8-bit PNG or binary/ASCII PGM/PPM, scaling samples by 1/255.
/// Alpha channels are dropped; gray+alpha becomes gray.
ImageBuffer read_image(const std::filesystem::path& path);

/// Writes an 8-bit PNG, PGM or PPM chosen by extension; values are clamped
/// to [0, 1] and rounded to the nearest level. The file is replaced atomically.
void write_image(const std::filesystem::path& path, const ImageBuffer& image);

}  // namespace lrf
