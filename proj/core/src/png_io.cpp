#include "illumkit/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "illumkit/error.hpp"

namespace illumkit {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_error_fn(png_structp png, png_const_charp msg) {
  auto* what = static_cast<std::string*>(png_get_error_ptr(png));
  if (what) *what = msg;
  png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

struct RawPng {
  int width = 0;
  int height = 0;
  int bit_depth = 8;
  std::vector<uint16_t> samples;  // width * height * 3
};

// libpng reports errors through longjmp, so this function must not own any
// object with a non-trivial destructor between setjmp and the last libpng
// call. Buffers are allocated before setjmp.
RawPng read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open " + path.string());

  png_byte header[8];
  if (std::fread(header, 1, 8, file.get()) != 8 || png_sig_cmp(header, 0, 8) != 0) {
    throw IoError(path.string() + " is not a PNG file");
  }

  std::string error;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &error, png_error_fn, png_warning_fn);
  if (!png) throw IoError("png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("png_create_info_struct failed");
  }

  RawPng raw;
  std::vector<png_byte> rows_data;
  std::vector<png_bytep> rows;
  int channels = 0;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path.string() + ": " + error);
  }

  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const int color_type = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (depth < 8) png_set_packing(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  channels = png_get_channels(png, info);
  raw.width = static_cast<int>(png_get_image_width(png, info));
  raw.height = static_cast<int>(png_get_image_height(png, info));
  raw.bit_depth = png_get_bit_depth(png, info);

  if (channels != 3 || color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError(path.string() + ": unsupported channel count (RGB or RGBA required)");
  }

  const std::size_t rowbytes = png_get_rowbytes(png, info);
  rows_data.resize(rowbytes * raw.height);
  rows.resize(raw.height);
  for (int y = 0; y < raw.height; ++y) rows[y] = rows_data.data() + rowbytes * y;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  raw.samples.resize(static_cast<std::size_t>(raw.width) * raw.height * 3);
  const bool wide = raw.bit_depth == 16;
  for (std::size_t i = 0; i < raw.samples.size(); ++i) {
    raw.samples[i] = wide ? static_cast<uint16_t>((rows_data[2 * i] << 8) | rows_data[2 * i + 1])
                          : rows_data[i];
  }
  return raw;
}

void write_png(const std::filesystem::path& path, int width, int height, int bit_depth,
               const std::vector<png_byte>& bytes) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot create " + path.string());

  std::string error;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &error, png_error_fn, png_warning_fn);
  if (!png) throw IoError("png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("png_create_info_struct failed");
  }
  const std::size_t rowbytes = static_cast<std::size_t>(width) * 3 * (bit_depth / 8);
  std::vector<png_bytep> rows(height);
  for (int y = 0; y < height; ++y) rows[y] = const_cast<png_bytep>(bytes.data() + rowbytes * y);

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path.string() + ": " + error);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, width, height, bit_depth, PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fflush(file.get()) != 0) throw IoError("write failed: " + path.string());
}

std::vector<png_byte> encode(std::span<const double> values, int bit_depth) {
  const double max = bit_depth == 16 ? 65535.0 : 255.0;
  std::vector<png_byte> bytes(values.size() * (bit_depth / 8));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::isfinite(values[i]) ? std::clamp(values[i], 0.0, 1.0) : 0.0;
    const auto q = static_cast<uint32_t>(std::lround(v * max));
    if (bit_depth == 16) {
      bytes[2 * i] = static_cast<png_byte>(q >> 8);
      bytes[2 * i + 1] = static_cast<png_byte>(q & 0xff);
    } else {
      bytes[i] = static_cast<png_byte>(q);
    }
  }
  return bytes;
}

void check_bit_depth(int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) throw IoError("bit depth must be 8 or 16");
}

}  // namespace

Image load_image(const std::filesystem::path& path, Transfer transfer) {
  const RawPng raw = read_png(path);
  const double max = raw.bit_depth == 16 ? 65535.0 : 255.0;
  std::vector<double> data(raw.samples.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = raw.samples[i] / max;
    if (transfer == Transfer::kSrgb) data[i] = srgb_to_linear(data[i]);
  }
  return Image(raw.width, raw.height, std::move(data));
}

void save_image(const Image& img, const std::filesystem::path& path, int bit_depth) {
  check_bit_depth(bit_depth);
  if (img.empty()) throw ShapeError("cannot save an empty image");
  write_png(path, img.width(), img.height(), bit_depth, encode(img.data(), bit_depth));
}

void save_map(const IlluminationMap& map, const std::filesystem::path& path) {
  if (map.pixel_count() == 0) throw ShapeError("cannot save an empty map");
  std::vector<double> values(map.data);
  for (std::size_t i = 0; i < map.pixel_count(); ++i) {
    if (!map.valid[i]) std::fill_n(values.begin() + 3 * i, 3, 0.0);
  }
  write_png(path, map.width, map.height, 16, encode(values, 16));
}

IlluminationMap load_map(const std::filesystem::path& path) {
  const RawPng raw = read_png(path);
  if (raw.bit_depth != 16) throw IoError(path.string() + ": illumination maps must be 16-bit");
  IlluminationMap map(raw.width, raw.height);
  for (std::size_t i = 0; i < map.pixel_count(); ++i) {
    const uint16_t r = raw.samples[3 * i], g = raw.samples[3 * i + 1], b = raw.samples[3 * i + 2];
    map.set_pixel(i, {r / 65535.0, g / 65535.0, b / 65535.0});
    map.valid[i] = (r > 0 && g > 0 && b > 0) ? 1 : 0;
  }
  return map;
}

Image quantize(const Image& img, int bit_depth) {
  check_bit_depth(bit_depth);
  const double max = bit_depth == 16 ? 65535.0 : 255.0;
  Image out = img;
  for (double& v : out.data()) {
    const double c = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
    v = static_cast<double>(std::lround(c * max)) / max;
  }
  return out;
}

}  // namespace illumkit
