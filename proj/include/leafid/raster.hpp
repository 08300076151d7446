#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "leafid/error.hpp"

namespace leafid::raster {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

struct RgbTag {
  static constexpr bool valid(const Rgb&) { return true; }
};
struct GrayTag {
  static constexpr bool valid(std::uint8_t) { return true; }
};
struct MaskTag {
  static constexpr bool valid(std::uint8_t v) { return v <= 1; }
};
struct MarginTag {
  static constexpr bool valid(std::uint8_t v) { return v <= 1; }
};

/// Row-major pixel grid. `Tag` distinguishes rasters that share a pixel type
/// (gray levels, leaf masks, margin masks) and carries the per-pixel invariant.
template <typename Pixel, typename Tag>
class Raster {
 public:
  using pixel_type = Pixel;

  Raster(int width, int height, Pixel fill = Pixel{})
      : width_(width), height_(height) {
    check_dims(width, height);
    check_pixel(fill);
    pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  Raster(int width, int height, std::vector<Pixel> pixels)
      : width_(width), height_(height), pixels_(std::move(pixels)) {
    check_dims(width, height);
    if (pixels_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw ParameterError("pixel count " + std::to_string(pixels_.size()) +
                           " does not match " + std::to_string(width) + "x" +
                           std::to_string(height));
    }
    for (const auto& p : pixels_) check_pixel(p);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  const Pixel& operator()(int x, int y) const noexcept {
    return pixels_[index(x, y)];
  }

  /// Replicate-padded read: coordinates are clamped into the frame.
  const Pixel& clamped(int x, int y) const noexcept {
    return (*this)(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
  }

  void set(int x, int y, Pixel value) {
    check_pixel(value);
    pixels_[index(x, y)] = value;
  }

  std::span<const Pixel> pixels() const noexcept { return pixels_; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  static void check_dims(int width, int height) {
    if (width < 1 || height < 1) {
      throw ParameterError("raster dimensions must be positive, got " +
                           std::to_string(width) + "x" + std::to_string(height));
    }
  }

  static void check_pixel(const Pixel& p) {
    if (!Tag::valid(p)) throw ParameterError("pixel value violates raster invariant");
  }

  int width_;
  int height_;
  std::vector<Pixel> pixels_;
};

using RgbImage = Raster<Rgb, RgbTag>;
using GrayImage = Raster<std::uint8_t, GrayTag>;
/// 1 = leaf tissue, 0 = background.
using BinaryMask = Raster<std::uint8_t, MaskTag>;
/// 1 = leaf boundary pixel.
using MarginMask = Raster<std::uint8_t, MarginTag>;

template <typename P, typename T>
std::size_t count_ones(const Raster<P, T>& r) {
  return static_cast<std::size_t>(std::count(r.pixels().begin(), r.pixels().end(), P{1}));
}

template <typename A, typename B>
bool same_dims(const A& a, const B& b) {
  return a.width() == b.width() && a.height() == b.height();
}

inline constexpr double kDefaultLevel = 0.95;

// ---------------------------------------------------------------------------
// Grayscale conversion

inline std::uint8_t luminance(const Rgb& p) {
  const double v = 0.2989 * p.r + 0.5870 * p.g + 0.1140 * p.b;
  return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
}

inline GrayImage to_grayscale(const RgbImage& img) {
  std::vector<std::uint8_t> out;
  out.reserve(img.size());
  for (const auto& p : img.pixels()) out.push_back(luminance(p));
  return GrayImage(img.width(), img.height(), std::move(out));
}

// ---------------------------------------------------------------------------
// Threshold selection

using Histogram = std::array<double, 256>;

inline Histogram histogram(const GrayImage& img) {
  Histogram h{};
  for (auto v : img.pixels()) h[v] += 1.0;
  return h;
}

/// R, G and B histograms of one image.
inline std::array<Histogram, 3> channel_histograms(const RgbImage& img) {
  std::array<Histogram, 3> h{};
  for (const auto& p : img.pixels()) {
    h[0][p.r] += 1.0;
    h[1][p.g] += 1.0;
    h[2][p.b] += 1.0;
  }
  return h;
}

/// Per-channel mean histograms over a corpus of images.
inline std::array<Histogram, 3> mean_channel_histograms(std::span<const RgbImage> corpus) {
  if (corpus.empty()) throw ParameterError("histogram corpus is empty");
  std::array<Histogram, 3> mean{};
  for (const auto& img : corpus) {
    const auto h = channel_histograms(img);
    for (std::size_t c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < 256; ++i) mean[c][i] += h[c][i];
  }
  for (auto& ch : mean)
    for (auto& v : ch) v /= static_cast<double>(corpus.size());
  return mean;
}

namespace detail {

struct Peak {
  std::size_t first;  // plateau start
  std::size_t last;   // plateau end (inclusive)
  double height;
};

// Plateaus strictly higher than both neighbours. A histogram that is one flat
// plateau has no peaks.
inline std::vector<Peak> local_maxima(const Histogram& h) {
  std::vector<Peak> peaks;
  std::size_t i = 0;
  while (i < h.size()) {
    std::size_t j = i;
    while (j + 1 < h.size() && h[j + 1] == h[i]) ++j;
    const bool left_lower = i == 0 || h[i - 1] < h[i];
    const bool right_lower = j + 1 == h.size() || h[j + 1] < h[i];
    const bool whole = i == 0 && j + 1 == h.size();
    if (left_lower && right_lower && !whole) peaks.push_back({i, j, h[i]});
    i = j + 1;
  }
  return peaks;
}

}  // namespace detail

/// Histogram-valley threshold: averages the given histograms bin-wise, takes
/// the two highest local maxima and returns the leftmost minimum strictly
/// between them, as a fraction of 255.
inline double suggest_threshold(std::span<const Histogram> histograms) {
  if (histograms.empty()) throw ParameterError("no histograms supplied");
  Histogram avg{};
  for (const auto& h : histograms)
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += h[i];
  for (auto& v : avg) v /= static_cast<double>(histograms.size());

  auto peaks = detail::local_maxima(avg);
  if (peaks.size() < 2) throw DataError("no bimodal structure in histogram");
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const auto& a, const auto& b) { return a.height > b.height; });
  auto lo = peaks[0];
  auto hi = peaks[1];
  if (lo.first > hi.first) std::swap(lo, hi);

  std::size_t best = lo.last + 1;
  for (std::size_t i = lo.last + 1; i < hi.first; ++i)
    if (avg[i] < avg[best]) best = i;
  return static_cast<double>(best) / 255.0;
}

// ---------------------------------------------------------------------------
// Binarization and smoothing

inline BinaryMask binarize(const GrayImage& gray, double level = kDefaultLevel) {
  if (!(level > 0.0 && level < 1.0))
    throw ParameterError("threshold level must lie in (0,1), got " + std::to_string(level));
  std::vector<std::uint8_t> out;
  out.reserve(gray.size());
  for (auto v : gray.pixels()) out.push_back(static_cast<double>(v) / 255.0 <= level ? 1 : 0);
  return BinaryMask(gray.width(), gray.height(), std::move(out));
}

/// k x k box mean with replicate padding, rounded back to {0,1} (0.5 rounds up).
/// Even windows extend ceil((k-1)/2) pixels above and left of the anchor.
inline BinaryMask smooth_mask(const BinaryMask& mask, int k = 3) {
  if (k < 2) throw ParameterError("smoothing kernel must be at least 2, got " + std::to_string(k));
  const int before = k / 2;  // == ceil((k-1)/2)
  const int after = k - 1 - before;
  const int w = mask.width();
  const int h = mask.height();

  std::vector<int> rows(mask.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int s = 0;
      for (int dx = -before; dx <= after; ++dx) s += mask.clamped(x + dx, y);
      rows[static_cast<std::size_t>(y) * w + x] = s;
    }
  }
  std::vector<std::uint8_t> out(mask.size());
  const long long window = static_cast<long long>(k) * k;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      long long s = 0;
      for (int dy = -before; dy <= after; ++dy) {
        const int yy = std::clamp(y + dy, 0, h - 1);
        s += rows[static_cast<std::size_t>(yy) * w + x];
      }
      out[static_cast<std::size_t>(y) * w + x] = 2 * s >= window ? 1 : 0;
    }
  }
  return BinaryMask(w, h, std::move(out));
}

// ---------------------------------------------------------------------------
// Margin

/// Leaf pixels with a nonzero response to the 4-neighbour Laplacian
/// [[0,1,0],[1,-4,1],[0,1,0]] under zero padding.
inline MarginMask extract_margin(const BinaryMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  auto at = [&](int x, int y) -> int { return mask.contains(x, y) ? mask(x, y) : 0; };
  std::vector<std::uint8_t> out(mask.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask(x, y) == 0) continue;
      const int response = at(x - 1, y) + at(x + 1, y) + at(x, y - 1) + at(x, y + 1) - 4 * at(x, y);
      if (response != 0) out[static_cast<std::size_t>(y) * w + x] = 1;
    }
  }
  return MarginMask(w, h, std::move(out));
}

// ---------------------------------------------------------------------------
// Grayscale morphology

struct Offset {
  int dx;
  int dy;
  friend bool operator==(const Offset&, const Offset&) = default;
};

/// Flat Euclidean disk: every offset with dx^2 + dy^2 <= radius^2.
class StructuringElement {
 public:
  static StructuringElement disk(int radius) {
    if (radius < 1) throw ParameterError("disk radius must be >= 1, got " + std::to_string(radius));
    std::vector<Offset> offsets;
    for (int dy = -radius; dy <= radius; ++dy)
      for (int dx = -radius; dx <= radius; ++dx)
        if (dx * dx + dy * dy <= radius * radius) offsets.push_back({dx, dy});
    return StructuringElement(radius, std::move(offsets));
  }

  int radius() const noexcept { return radius_; }
  std::span<const Offset> offsets() const noexcept { return offsets_; }

 private:
  StructuringElement(int radius, std::vector<Offset> offsets)
      : radius_(radius), offsets_(std::move(offsets)) {}

  int radius_;
  std::vector<Offset> offsets_;
};

namespace detail {

template <typename Select>
GrayImage rank_filter(const GrayImage& img, const StructuringElement& se, Select pick) {
  std::vector<std::uint8_t> out(img.size());
  const int w = img.width();
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      std::uint8_t v = img(x, y);
      for (const auto& o : se.offsets()) v = pick(v, img.clamped(x + o.dx, y + o.dy));
      out[static_cast<std::size_t>(y) * w + x] = v;
    }
  }
  return GrayImage(w, img.height(), std::move(out));
}

}  // namespace detail

// Replicate padding never reaches outside the disk: a clamped offset is no
// longer than the original one. Both filters therefore act on the frame
// alone, which keeps the opening idempotent and anti-extensive at the borders.

inline GrayImage gray_erode(const GrayImage& img, const StructuringElement& se) {
  return detail::rank_filter(img, se, [](std::uint8_t a, std::uint8_t b) { return std::min(a, b); });
}

inline GrayImage gray_dilate(const GrayImage& img, const StructuringElement& se) {
  return detail::rank_filter(img, se, [](std::uint8_t a, std::uint8_t b) { return std::max(a, b); });
}

inline GrayImage gray_opening(const GrayImage& img, const StructuringElement& se) {
  return gray_dilate(gray_erode(img, se), se);
}

}  // namespace leafid::raster
