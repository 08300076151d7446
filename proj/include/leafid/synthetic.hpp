#pragma once

// Procedural leaf photographs: superellipse silhouettes with a vein texture,
// rendered on a white background. Used for demos and benchmarks.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "leafid/fsutil.hpp"
#include "leafid/geometry.hpp"
#include "leafid/image_io.hpp"
#include "leafid/pipeline.hpp"
#include "leafid/raster.hpp"

namespace leafid::synthetic {

struct Species {
  std::string name;
  double aspect;        // length / width of the silhouette
  double exponent;      // superellipse exponent; 2 = ellipse
  double vein_spacing;  // pixels between lateral veins
  double vein_width;    // pixels
};

/// Five shapes that differ in outline and vein texture.
inline std::vector<Species> default_species() {
  return {
      {"ovate", 1.6, 2.0, 12.0, 2.0},
      {"lanceolate", 3.2, 2.0, 9.0, 1.0},
      {"oblong", 2.2, 4.0, 14.0, 3.0},
      {"rhombic", 1.5, 1.2, 10.0, 1.0},
      {"orbicular", 1.05, 2.0, 16.0, 2.0},
  };
}

struct SyntheticLeaf {
  raster::RgbImage image;
  geometry::TerminalPair terminals;
};

struct RenderOptions {
  int width = 200;
  int height = 150;
  double jitter = 1.0;  // 0 renders the nominal shape
};

inline raster::Rgb tint(double level) {
  auto c = [](double v) { return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0)); };
  return {c(level * 0.8), c(level * 1.2), c(level * 0.5)};
}

/// Renders one leaf of `sp` with random pose, size and texture noise.
template <typename Rng>
SyntheticLeaf render_leaf(const Species& sp, Rng& rng, const RenderOptions& opt = {}) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double j = opt.jitter;
  const double angle = 0.3 * j * unit(rng);
  const double half_len = 0.42 * opt.width * (1.0 + 0.06 * j * unit(rng));
  double half_wid = half_len / (sp.aspect * (1.0 + 0.05 * j * unit(rng)));
  half_wid = std::min(half_wid, 0.45 * opt.height);
  const double cx = opt.width / 2.0 + 3.0 * j * unit(rng);
  const double cy = opt.height / 2.0 + 3.0 * j * unit(rng);
  const double ca = std::cos(angle);
  const double sa = std::sin(angle);
  const double phase = sp.vein_spacing * (0.5 + 0.5 * unit(rng));

  std::uniform_int_distribution<int> blade_noise(-6, 6);
  std::uniform_int_distribution<int> paper_noise(0, 5);
  std::vector<raster::Rgb> px(static_cast<std::size_t>(opt.width) * opt.height);
  for (int y = 0; y < opt.height; ++y) {
    for (int x = 0; x < opt.width; ++x) {
      const double dx = x - cx;
      const double dy = y - cy;
      const double u = dx * ca + dy * sa;
      const double v = -dx * sa + dy * ca;
      const double r = std::pow(std::abs(u / half_len), sp.exponent) + std::pow(std::abs(v / half_wid), sp.exponent);
      auto& out = px[static_cast<std::size_t>(y) * opt.width + x];
      if (r > 1.0) {
        const auto g = static_cast<std::uint8_t>(255 - paper_noise(rng));
        out = {g, g, g};
        continue;
      }
      const bool midrib = std::abs(v) < sp.vein_width / 2.0;
      const double lateral = std::fmod(std::abs(u + 0.8 * std::abs(v)) + phase, sp.vein_spacing);
      const bool vein = midrib || lateral < sp.vein_width;
      out = tint((vein ? 150.0 : 80.0) + blade_noise(rng));
    }
  }

  auto tip = [&](double sign) {
    const double u = sign * half_len * 0.97;
    return geometry::PixelPoint{static_cast<int>(std::lround(cx + u * ca)), static_cast<int>(std::lround(cy + u * sa))};
  };
  return {raster::RgbImage(opt.width, opt.height, std::move(px)), geometry::TerminalPair(tip(-1.0), tip(1.0))};
}

struct CorpusFiles {
  std::filesystem::path train_manifest;
  std::filesystem::path test_manifest;
};

/// Writes PNG images with `<id>.terminals.json` sidecars under `dir/images`
/// plus `train.csv` and `test.csv` manifests with relative paths.
inline CorpusFiles write_corpus(const std::filesystem::path& dir, int train_per_class, int test_per_class,
                                unsigned long seed, const std::vector<Species>& species = default_species(),
                                const RenderOptions& opt = {}) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "images");
  std::mt19937_64 rng(seed);
  std::string train = "image,terminals,label\n";
  std::string test = train;
  for (const auto& sp : species) {
    for (int i = 0; i < train_per_class + test_per_class; ++i) {
      const auto leaf = render_leaf(sp, rng, opt);
      const std::string id = sp.name + "_" + std::to_string(i);
      const auto image = fs::path("images") / (id + ".png");
      const auto sidecar = fs::path("images") / (id + ".terminals.json");
      io::write_rgb_png(dir / image, leaf.image);
      auto j = pipeline::terminals_to_json(leaf.terminals);
      j["image_id"] = id;
      fsutil::write_atomic(dir / sidecar, j.dump(1) + "\n");
      (i < train_per_class ? train : test) += image.string() + ',' + sidecar.string() + ',' + sp.name + '\n';
    }
  }
  CorpusFiles files{dir / "train.csv", dir / "test.csv"};
  fsutil::write_atomic(files.train_manifest, train);
  fsutil::write_atomic(files.test_manifest, test);
  return files;
}

}  // namespace leafid::synthetic
