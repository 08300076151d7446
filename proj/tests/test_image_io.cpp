#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "leafid/image_io.hpp"
#include "support/temp_dir.hpp"

namespace leafid::io {
namespace {

using raster::GrayImage;
using raster::Rgb;
using raster::RgbImage;
using testing::TempDir;

RgbImage gradient(int w, int h) {
  RgbImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.set(x, y, Rgb{static_cast<std::uint8_t>(x * 255 / (w - 1)), static_cast<std::uint8_t>(y * 255 / (h - 1)),
                        static_cast<std::uint8_t>((x + y) % 256)});
  return img;
}

void write_bytes(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary) << bytes;
}

TEST(ImageIo, RgbPngRoundTripIsLossless) {
  TempDir dir;
  const auto img = gradient(37, 23);
  write_rgb_png(dir / "a.png", img);
  EXPECT_EQ(sniff_format(dir / "a.png"), ImageFormat::Png);
  EXPECT_EQ(read_rgb(dir / "a.png"), img);
}

TEST(ImageIo, GrayPngReadsAsEqualChannels) {
  TempDir dir;
  GrayImage g(5, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x) g.set(x, y, static_cast<std::uint8_t>(40 * x + y));
  write_gray_png(dir / "g.png", g);
  const auto back = read_rgb(dir / "g.png");
  ASSERT_EQ(back.width(), 5);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 5; ++x) EXPECT_EQ(back(x, y), (Rgb{g(x, y), g(x, y), g(x, y)}));
}

TEST(ImageIo, JpegRoundTripIsClose) {
  TempDir dir;
  RgbImage img(64, 48, Rgb{200, 120, 40});
  write_rgb_jpeg(dir / "a.jpg", img, 95);
  EXPECT_EQ(sniff_format(dir / "a.jpg"), ImageFormat::Jpeg);
  const auto back = read_rgb(dir / "a.jpg");
  ASSERT_EQ(back.width(), 64);
  ASSERT_EQ(back.height(), 48);
  for (const auto& p : back.pixels()) {
    EXPECT_NEAR(p.r, 200, 4);
    EXPECT_NEAR(p.g, 120, 4);
    EXPECT_NEAR(p.b, 40, 4);
  }
}

TEST(ImageIo, ProbeReadsDimensions) {
  TempDir dir;
  write_rgb_png(dir / "p.png", gradient(31, 17));
  write_rgb_jpeg(dir / "j.jpeg", gradient(40, 12));
  EXPECT_EQ(probe(dir / "p.png"), (ImageDims{31, 17}));
  EXPECT_EQ(probe(dir / "j.jpeg"), (ImageDims{40, 12}));
}

TEST(ImageIo, FormatComesFromContentNotExtension) {
  TempDir dir;
  write_rgb_png(dir / "actually_png.jpg", gradient(8, 8));
  EXPECT_EQ(sniff_format(dir / "actually_png.jpg"), ImageFormat::Png);
  EXPECT_EQ(read_rgb(dir / "actually_png.jpg"), gradient(8, 8));
}

TEST(ImageIo, NonImagesAreRejected) {
  TempDir dir;
  write_bytes(dir / "notes.txt", "just text");
  write_bytes(dir / "broken.png", std::string("\x89PNG\r\n\x1a\n", 8) + "garbage");
  write_bytes(dir / "broken.jpg", std::string("\xff\xd8\xff\xe0", 4) + "garbage");
  EXPECT_EQ(sniff_format(dir / "notes.txt"), ImageFormat::Unknown);
  EXPECT_FALSE(probe(dir / "notes.txt"));
  EXPECT_FALSE(probe(dir / "broken.png"));
  EXPECT_FALSE(probe(dir / "broken.jpg"));
  EXPECT_FALSE(probe(dir / "missing.png"));
  EXPECT_THROW(read_rgb(dir / "notes.txt"), DataError);
  EXPECT_THROW(read_rgb(dir / "broken.png"), DataError);
  EXPECT_THROW(read_rgb(dir / "broken.jpg"), DataError);
}

TEST(ImageIo, MissingFileMessageNamesPath) {
  TempDir dir;
  try {
    read_rgb(dir / "nowhere.png");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("nowhere.png"), std::string::npos);
  }
}

TEST(ImageIo, RenderMaskIsBlackOnWhite) {
  raster::BinaryMask m(3, 1, 0);
  m.set(1, 0, 1);
  const auto g = render_mask(m);
  EXPECT_EQ(g(0, 0), 255);
  EXPECT_EQ(g(1, 0), 0);
  EXPECT_EQ(g(2, 0), 255);
}

}  // namespace
}  // namespace leafid::io
