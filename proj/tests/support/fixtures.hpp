#pragma once

// Shape fixtures and brute-force oracles. Nothing here calls into the code
// paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "leafid/geometry.hpp"
#include "leafid/raster.hpp"

namespace leafid::testing {

using raster::BinaryMask;
using raster::GrayImage;
using raster::MarginMask;
using geometry::PixelPoint;

inline BinaryMask rect_mask(int width, int height, int x0, int y0, int rw, int rh) {
  BinaryMask m(width, height, 0);
  for (int y = y0; y < y0 + rh; ++y)
    for (int x = x0; x < x0 + rw; ++x) m.set(x, y, 1);
  return m;
}

inline BinaryMask disk_mask(int width, int height, int cx, int cy, int r) {
  BinaryMask m(width, height, 0);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r) m.set(x, y, 1);
  return m;
}

/// Gray rendering of a mask: `leaf` inside, `background` outside.
inline GrayImage paint(const BinaryMask& m, std::uint8_t leaf, std::uint8_t background = 255) {
  GrayImage g(m.width(), m.height(), background);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m(x, y)) g.set(x, y, leaf);
  return g;
}

/// Boundary pixels of a mask: leaf pixels with a 4-neighbour outside the
/// leaf or outside the frame.
inline MarginMask boundary_oracle(const BinaryMask& m) {
  MarginMask out(m.width(), m.height(), 0);
  auto leaf = [&](int x, int y) { return m.contains(x, y) && m(x, y) == 1; };
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (leaf(x, y) && (!leaf(x - 1, y) || !leaf(x + 1, y) || !leaf(x, y - 1) || !leaf(x, y + 1)))
        out.set(x, y, 1);
  return out;
}

inline std::vector<PixelPoint> points_of(const MarginMask& m) {
  std::vector<PixelPoint> pts;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m(x, y)) pts.push_back({x, y});
  return pts;
}

inline MarginMask margin_from_points(int width, int height, const std::vector<PixelPoint>& pts) {
  MarginMask m(width, height, 0);
  for (const auto& p : pts) m.set(p.x, p.y, 1);
  return m;
}

inline std::int64_t brute_max_sq_distance(const std::vector<PixelPoint>& pts) {
  std::int64_t best = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const std::int64_t dx = pts[i].x - pts[j].x;
      const std::int64_t dy = pts[i].y - pts[j].y;
      best = std::max(best, dx * dx + dy * dy);
    }
  return best;
}

/// Longest margin chord orthogonal to the a-b axis, with the +-0.5 degree
/// tolerance for "orthogonal" on the pixel grid.
inline double brute_orthogonal_width(const std::vector<PixelPoint>& pts, PixelPoint a, PixelPoint b) {
  const double ax = b.x - a.x;
  const double ay = b.y - a.y;
  const double alen = std::hypot(ax, ay);
  const double tol = std::sin(0.5 * std::numbers::pi / 180.0);
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double dx = pts[j].x - pts[i].x;
      const double dy = pts[j].y - pts[i].y;
      const double len = std::hypot(dx, dy);
      if (std::abs(dx * ax + dy * ay) <= tol * len * alen) best = std::max(best, len);
    }
  return best;
}

/// Direct k x k window mean with clamped coordinates, rounded with 0.5 up.
inline BinaryMask naive_smooth(const BinaryMask& m, int k) {
  const int before = static_cast<int>(std::ceil((k - 1) / 2.0));
  BinaryMask out(m.width(), m.height(), 0);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      double sum = 0;
      for (int dy = 0; dy < k; ++dy)
        for (int dx = 0; dx < k; ++dx) {
          const int xx = std::clamp(x - before + dx, 0, m.width() - 1);
          const int yy = std::clamp(y - before + dy, 0, m.height() - 1);
          sum += m(xx, yy);
        }
      out.set(x, y, sum / (k * k) >= 0.5 ? 1 : 0);
    }
  return out;
}

inline GrayImage random_gray(int width, int height, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> v(0, 255);
  std::vector<std::uint8_t> px(static_cast<std::size_t>(width) * height);
  for (auto& p : px) p = static_cast<std::uint8_t>(v(rng));
  return GrayImage(width, height, std::move(px));
}

}  // namespace leafid::testing
