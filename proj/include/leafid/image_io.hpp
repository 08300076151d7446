#pragma once

// PNG and JPEG decoding plus PNG writing for intermediate dumps.
// Requires linking libpng and libjpeg.

#include <png.h>
#include <cstdio>
#include <jpeglib.h>

#include <array>
#include <csetjmp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "leafid/error.hpp"
#include "leafid/raster.hpp"

namespace leafid::io {

enum class ImageFormat { Unknown, Png, Jpeg };

struct ImageDims {
  int width;
  int height;

  friend bool operator==(const ImageDims&, const ImageDims&) = default;
};

inline ImageFormat sniff_format(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::array<unsigned char, 8> magic{};
  in.read(reinterpret_cast<char*>(magic.data()), magic.size());
  if (in.gcount() >= 8 && png_sig_cmp(magic.data(), 0, 8) == 0) return ImageFormat::Png;
  if (in.gcount() >= 3 && magic[0] == 0xFF && magic[1] == 0xD8 && magic[2] == 0xFF)
    return ImageFormat::Jpeg;
  return ImageFormat::Unknown;
}

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

struct JpegErrorManager {
  jpeg_error_mgr base;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

inline FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw DataError("cannot open " + path.string());
  return f;
}

// Decodes into `pixels` (RGB, row-major). Kept free of C++ objects with
// non-trivial destructors between setjmp and longjmp.
inline bool decode_jpeg_raw(std::FILE* file, bool header_only, int& width, int& height,
                            std::vector<unsigned char>& pixels, std::string& error) {
  jpeg_decompress_struct cinfo;
  JpegErrorManager jerr;
  cinfo.err = jpeg_std_error(&jerr.base);
  jerr.base.error_exit = jpeg_error_exit;
  if (setjmp(jerr.jump)) {
    error = jerr.message;
    jpeg_destroy_decompress(&cinfo);
    return false;
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, file);
  jpeg_read_header(&cinfo, TRUE);
  width = static_cast<int>(cinfo.image_width);
  height = static_cast<int>(cinfo.image_height);
  if (header_only) {
    jpeg_destroy_decompress(&cinfo);
    return true;
  }
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  const std::size_t stride = static_cast<std::size_t>(cinfo.output_width) * 3;
  pixels.resize(stride * cinfo.output_height);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = pixels.data() + stride * cinfo.output_scanline;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return true;
}

inline raster::RgbImage to_rgb_image(int width, int height, const std::vector<unsigned char>& raw) {
  std::vector<raster::Rgb> px(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = {raw[3 * i], raw[3 * i + 1], raw[3 * i + 2]};
  return raster::RgbImage(width, height, std::move(px));
}

inline raster::RgbImage read_png(const std::filesystem::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str()))
    throw DataError("cannot decode PNG " + path.string() + ": " + image.message);
  image.format = PNG_FORMAT_RGB;
  // Composite any alpha over white so transparent backgrounds read as paper.
  png_color white{255, 255, 255};
  std::vector<unsigned char> raw(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, &white, raw.data(), 0, nullptr)) {
    png_image_free(&image);
    throw DataError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  return to_rgb_image(static_cast<int>(image.width), static_cast<int>(image.height), raw);
}

inline raster::RgbImage read_jpeg(const std::filesystem::path& path) {
  auto file = open_file(path, "rb");
  int w = 0, h = 0;
  std::vector<unsigned char> raw;
  std::string error;
  if (!decode_jpeg_raw(file.get(), false, w, h, raw, error))
    throw DataError("cannot decode JPEG " + path.string() + ": " + error);
  return to_rgb_image(w, h, raw);
}

}  // namespace detail

/// Reads a PNG or JPEG file (detected from its signature) as RGB.
inline raster::RgbImage read_rgb(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw DataError("no such image file: " + path.string());
  switch (sniff_format(path)) {
    case ImageFormat::Png:
      return detail::read_png(path);
    case ImageFormat::Jpeg:
      return detail::read_jpeg(path);
    default:
      throw DataError("not a PNG or JPEG file: " + path.string());
  }
}

/// Reads only the image header. Returns nullopt for files that are not a
/// decodable PNG/JPEG.
inline std::optional<ImageDims> probe(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) return std::nullopt;
  switch (sniff_format(path)) {
    case ImageFormat::Png: {
      png_image image{};
      image.version = PNG_IMAGE_VERSION;
      if (!png_image_begin_read_from_file(&image, path.c_str())) return std::nullopt;
      ImageDims d{static_cast<int>(image.width), static_cast<int>(image.height)};
      png_image_free(&image);
      return d;
    }
    case ImageFormat::Jpeg: {
      detail::FilePtr file(std::fopen(path.c_str(), "rb"));
      if (!file) return std::nullopt;
      int w = 0, h = 0;
      std::vector<unsigned char> unused;
      std::string error;
      if (!detail::decode_jpeg_raw(file.get(), true, w, h, unused, error)) return std::nullopt;
      return ImageDims{w, h};
    }
    default:
      return std::nullopt;
  }
}

inline void write_gray_png(const std::filesystem::path& path, const raster::GrayImage& img) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.pixels().data(), 0, nullptr))
    throw DataError("cannot write PNG " + path.string() + ": " + image.message);
}

inline void write_rgb_png(const std::filesystem::path& path, const raster::RgbImage& img) {
  std::vector<unsigned char> raw;
  raw.reserve(img.size() * 3);
  for (const auto& p : img.pixels()) {
    raw.push_back(p.r);
    raw.push_back(p.g);
    raw.push_back(p.b);
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, raw.data(), 0, nullptr))
    throw DataError("cannot write PNG " + path.string() + ": " + image.message);
}

inline void write_rgb_jpeg(const std::filesystem::path& path, const raster::RgbImage& img,
                           int quality = 95) {
  auto file = detail::open_file(path, "wb");
  std::vector<unsigned char> raw;
  raw.reserve(img.size() * 3);
  for (const auto& p : img.pixels()) {
    raw.push_back(p.r);
    raw.push_back(p.g);
    raw.push_back(p.b);
  }
  jpeg_compress_struct cinfo;
  jpeg_error_mgr jerr;
  cinfo.err = jpeg_std_error(&jerr);
  jpeg_create_compress(&cinfo);
  jpeg_stdio_dest(&cinfo, file.get());
  cinfo.image_width = static_cast<JDIMENSION>(img.width());
  cinfo.image_height = static_cast<JDIMENSION>(img.height());
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  jpeg_set_quality(&cinfo, quality, TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  const std::size_t stride = static_cast<std::size_t>(img.width()) * 3;
  while (cinfo.next_scanline < cinfo.image_height) {
    JSAMPROW row = raw.data() + stride * cinfo.next_scanline;
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  jpeg_destroy_compress(&cinfo);
}

/// Renders a 0/1 mask for display: 1 -> black, 0 -> white.
template <typename Tag>
raster::GrayImage render_mask(const raster::Raster<std::uint8_t, Tag>& mask) {
  std::vector<std::uint8_t> out;
  out.reserve(mask.size());
  for (auto v : mask.pixels()) out.push_back(v ? 0 : 255);
  return raster::GrayImage(mask.width(), mask.height(), std::move(out));
}

}  // namespace leafid::io
