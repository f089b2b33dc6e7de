#include "lrf/image.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "lrf/error.hpp"
#include "lrf/fileutil.hpp"

namespace lrf {
namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return char(std::tolower(c)); });
  return ext;
}

std::uint8_t quantize(double v) {
  return std::uint8_t(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

ImageBuffer from_interleaved(const std::vector<std::uint8_t>& px, int h, int w, int stored, int keep) {
  ImageBuffer img(h, w, keep);
  const std::size_t plane = img.plane_size();
  for (std::size_t p = 0; p < plane; ++p)
    for (int c = 0; c < keep; ++c) img.data[plane * c + p] = px[p * stored + c] / 255.0;
  return img;
}

std::vector<std::uint8_t> to_interleaved(const ImageBuffer& img) {
  const std::size_t plane = img.plane_size();
  std::vector<std::uint8_t> px(plane * img.channels);
  for (std::size_t p = 0; p < plane; ++p)
    for (int c = 0; c < img.channels; ++c) px[p * img.channels + c] = quantize(img.data[plane * c + p]);
  return px;
}

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

ImageBuffer read_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw IoError("cannot open image " + path.string());
  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
    throw DataError("not a PNG file: " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng initialisation failed");
  }
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> row_ptrs;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("corrupt PNG file: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth == 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("unsupported 16-bit PNG: " + path.string());
  }
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_read_update_info(png, info);

  const int w = int(png_get_image_width(png, info));
  const int h = int(png_get_image_height(png, info));
  const int stored = png_get_channels(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  pixels.resize(rowbytes * h);
  row_ptrs.resize(h);
  for (int i = 0; i < h; ++i) row_ptrs[i] = pixels.data() + rowbytes * i;
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  const int keep = stored >= 3 ? 3 : 1;
  return from_interleaved(pixels, h, w, stored, keep);
}

void write_png(std::FILE* fp, const ImageBuffer& img) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng initialisation failed");
  }
  const auto px = to_interleaved(img);
  std::vector<png_bytep> rows(img.height);
  for (int i = 0; i < img.height; ++i)
    rows[i] = const_cast<png_bytep>(px.data() + std::size_t(i) * img.width * img.channels);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG encoding failed");
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8,
               img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// Netpbm header token reader; skips whitespace and '#' comments.
bool next_token(std::istream& in, std::string& tok) {
  tok.clear();
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (!std::isspace(c)) break;
  }
  if (c == EOF) return false;
  tok.push_back(char(c));
  while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#') tok.push_back(char(in.get()));
  return true;
}

ImageBuffer read_netpbm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + path.string());
  std::string magic, sw, sh, smax;
  if (!next_token(in, magic) || !next_token(in, sw) || !next_token(in, sh) || !next_token(in, smax))
    throw DataError("truncated PNM header: " + path.string());
  int channels;
  bool binary;
  if (magic == "P5") { channels = 1; binary = true; }
  else if (magic == "P6") { channels = 3; binary = true; }
  else if (magic == "P2") { channels = 1; binary = false; }
  else if (magic == "P3") { channels = 3; binary = false; }
  else throw DataError("unsupported PNM variant '" + magic + "': " + path.string());

  int w = 0, h = 0, maxval = 0;
  try {
    w = std::stoi(sw);
    h = std::stoi(sh);
    maxval = std::stoi(smax);
  } catch (const std::exception&) {
    throw DataError("malformed PNM header: " + path.string());
  }
  if (w <= 0 || h <= 0) throw DataError("invalid PNM dimensions: " + path.string());
  if (maxval != 255) throw DataError("only 8-bit PNM (maxval 255) is supported: " + path.string());

  std::vector<std::uint8_t> px(std::size_t(w) * h * channels);
  if (binary) {
    in.get();  // single whitespace byte after maxval
    in.read(reinterpret_cast<char*>(px.data()), std::streamsize(px.size()));
    if (std::size_t(in.gcount()) != px.size()) throw DataError("truncated PNM data: " + path.string());
  } else {
    std::string tok;
    for (auto& v : px) {
      if (!next_token(in, tok)) throw DataError("truncated PNM data: " + path.string());
      const int s = std::stoi(tok);
      if (s < 0 || s > 255) throw DataError("PNM sample out of range: " + path.string());
      v = std::uint8_t(s);
    }
  }
  return from_interleaved(px, h, w, channels, channels);
}

}  // namespace

ImageBuffer clamped(ImageBuffer image) {
  for (auto& v : image.data) v = std::clamp(v, 0.0, 1.0);
  return image;
}

ImageBuffer to_luma(const ImageBuffer& image) {
  if (image.channels == 1) return image;
  if (image.channels != 3) throw DataError("luma conversion needs 1 or 3 channels");
  ImageBuffer out(image.height, image.width, 1);
  const std::size_t n = image.plane_size();
  const double* r = image.plane(0);
  const double* g = image.plane(1);
  const double* b = image.plane(2);
  for (std::size_t p = 0; p < n; ++p) out.data[p] = 0.299 * r[p] + 0.587 * g[p] + 0.114 * b[p];
  return out;
}

ImageBuffer read_image(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("image not found: " + path.string());
  const std::string ext = lower_extension(path);
  if (ext == ".png") return read_png(path);
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return read_netpbm(path);
  throw DataError("unsupported image format '" + ext + "': " + path.string());
}

void write_image(const std::filesystem::path& path, const ImageBuffer& image) {
  if (image.channels != 1 && image.channels != 3)
    throw DataError("can only write 1- or 3-channel images: " + path.string());
  const std::string ext = lower_extension(path);
  if (ext == ".png") {
    write_atomically(path, [&](const std::filesystem::path& tmp) {
      FilePtr fp(std::fopen(tmp.c_str(), "wb"));
      if (!fp) throw IoError("cannot write " + tmp.string());
      write_png(fp.get(), image);
    });
    return;
  }
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
    if (ext == ".pgm" && image.channels != 1) throw DataError("PGM output needs a gray image: " + path.string());
    if (ext == ".ppm" && image.channels != 3) throw DataError("PPM output needs an RGB image: " + path.string());
    std::ostringstream os;
    os << (image.channels == 1 ? "P5" : "P6") << '\n' << image.width << ' ' << image.height << "\n255\n";
    const auto px = to_interleaved(image);
    std::string bytes = os.str();
    bytes.append(reinterpret_cast<const char*>(px.data()), px.size());
    write_file_atomically(path, bytes);
    return;
  }
  throw DataError("unsupported image format '" + ext + "': " + path.string());
}

}  // namespace lrf
