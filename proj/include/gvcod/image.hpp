#ifndef GVCOD_IMAGE_HPP_
#define GVCOD_IMAGE_HPP_

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "gvcod/errors.hpp"
#include "gvcod/tensor.hpp"

namespace gvcod {

// 8-bit image, row-major interleaved; channels is 1 (gray) or 3 (RGB).
struct ImageU8 {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;

  ImageU8() = default;
  ImageU8(int h, int w, int c, std::uint8_t fill = 0)
      : height(h), width(w), channels(c) {
    if (h < 1 || w < 1 || (c != 1 && c != 3))
      fail("shape", "bad image shape");
    data.assign(static_cast<std::size_t>(h) * w * c, fill);
  }

  std::uint8_t& at(int y, int x, int ch) {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + ch];
  }
  std::uint8_t at(int y, int x, int ch) const {
    return data[(static_cast<std::size_t>(y) * width + x) * channels + ch];
  }
};

namespace png_detail {

struct FileCloser {
  std::FILE* f = nullptr;
  ~FileCloser() {
    if (f) std::fclose(f);
  }
};

}  // namespace png_detail

// Decodes a PNG to 8-bit gray or RGB. Palette images expand to RGB,
// 16-bit depth strips to 8, alpha is dropped, gray+alpha becomes gray.
inline ImageU8 png_read(const std::filesystem::path& path) {
  png_detail::FileCloser fc;
  fc.f = std::fopen(path.string().c_str(), "rb");
  if (!fc.f) fail("io", "cannot open: " + path.string());

  png_byte header[8];
  if (std::fread(header, 1, 8, fc.f) != 8 || png_sig_cmp(header, 0, 8))
    fail("io", "undecodable image: " + path.string());

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail("io", "png init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail("io", "png init failed");
  }
  std::vector<png_bytep> rows;
  ImageU8 img;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail("io", "undecodable image: " + path.string());
  }
  png_init_io(png, fc.f);
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  const png_byte color = png_get_color_type(png, info);
  const png_byte depth = png_get_bit_depth(png, info);
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8)
    png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const int h = static_cast<int>(png_get_image_height(png, info));
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int c = static_cast<int>(png_get_channels(png, info));
  if (c != 1 && c != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail("io", "unsupported channel count in " + path.string());
  }
  img = ImageU8(h, w, c);
  rows.resize(h);
  for (int y = 0; y < h; ++y)
    rows[y] = img.data.data() + static_cast<std::size_t>(y) * w * c;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

inline void png_write(const std::filesystem::path& path, const ImageU8& img) {
  png_detail::FileCloser fc;
  fc.f = std::fopen(path.string().c_str(), "wb");
  if (!fc.f) fail("io", "cannot open for writing: " + path.string());

  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail("io", "png init failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail("io", "png init failed");
  }
  std::vector<png_bytep> rows(img.height);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail("io", "png write failed: " + path.string());
  }
  png_init_io(png, fc.f);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8,
               img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < img.height; ++y)
    rows[y] = const_cast<png_bytep>(
        img.data.data() + static_cast<std::size_t>(y) * img.width * img.channels);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

// ---- conversions ----

// RGB/gray u8 -> float [0,1] tensor.
inline Tensor3 image_to_tensor(const ImageU8& img) {
  Tensor3 t(img.height, img.width, img.channels);
  for (std::size_t i = 0; i < img.data.size(); ++i)
    t.data[i] = static_cast<float>(img.data[i]) / 255.0f;
  return t;
}

// Probability map -> 8-bit gray, value = round(255 * p).
inline ImageU8 map_to_image(const PredictionMap& map) {
  ImageU8 img(map.height, map.width, 1);
  for (std::size_t i = 0; i < map.data.size(); ++i)
    img.data[i] =
        static_cast<std::uint8_t>(std::lround(255.0 * static_cast<double>(map.data[i])));
  return img;
}

// Binary mask ({0,1} floats) -> 0/255 gray.
inline ImageU8 mask_to_image(const Tensor3& mask) {
  ImageU8 img(mask.height, mask.width, 1);
  for (std::size_t i = 0; i < mask.data.size(); ++i)
    img.data[i] = mask.data[i] > 0.0f ? 255 : 0;
  return img;
}

// 8-bit mask -> binary {0,1} floats, foreground at >= 128.
inline Tensor3 image_to_mask(const ImageU8& img) {
  Tensor3 t(img.height, img.width, 1);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      int v = img.at(y, x, 0);
      if (img.channels == 3)
        v = (img.at(y, x, 0) + img.at(y, x, 1) + img.at(y, x, 2)) / 3;
      t.at(y, x, 0) = v >= 128 ? 1.0f : 0.0f;
    }
  return t;
}

// 8-bit gray prediction PNG -> probability map (v / 255).
inline PredictionMap image_to_map(const ImageU8& img) {
  Tensor3 t(img.height, img.width, 1);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      int v = img.at(y, x, 0);
      if (img.channels == 3)
        v = (img.at(y, x, 0) + img.at(y, x, 1) + img.at(y, x, 2)) / 3;
      t.at(y, x, 0) = static_cast<float>(v) / 255.0f;
    }
  return t;
}

}  // namespace gvcod

#endif  // GVCOD_IMAGE_HPP_
