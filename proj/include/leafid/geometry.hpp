#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "leafid/error.hpp"
#include "leafid/raster.hpp"

namespace leafid::geometry {

struct PixelPoint {
  int x = 0;
  int y = 0;

  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
  friend auto operator<=>(const PixelPoint&, const PixelPoint&) = default;
};

inline std::int64_t squared_distance(const PixelPoint& p, const PixelPoint& q) {
  const std::int64_t dx = static_cast<std::int64_t>(p.x) - q.x;
  const std::int64_t dy = static_cast<std::int64_t>(p.y) - q.y;
  return dx * dx + dy * dy;
}

inline double distance(const PixelPoint& p, const PixelPoint& q) {
  return std::sqrt(static_cast<double>(squared_distance(p, q)));
}

/// The two end points of the main vein. Coincident points are rejected.
class TerminalPair {
 public:
  TerminalPair(PixelPoint a, PixelPoint b) : a_(a), b_(b) {
    if (a == b)
      throw ParameterError("terminal points coincide at (" + std::to_string(a.x) + "," +
                           std::to_string(a.y) + ")");
  }

  const PixelPoint& a() const noexcept { return a_; }
  const PixelPoint& b() const noexcept { return b_; }

  TerminalPair swapped() const { return TerminalPair(b_, a_); }

  friend bool operator==(const TerminalPair&, const TerminalPair&) = default;

 private:
  PixelPoint a_;
  PixelPoint b_;
};

struct BasicFeatures {
  double diameter = 0.0;
  double phys_length = 0.0;
  double phys_width = 0.0;
  std::size_t area = 0;
  std::size_t perimeter = 0;
};

/// Pixel centres of every 1-pixel, in row-major order.
template <typename Tag>
std::vector<PixelPoint> ones(const raster::Raster<std::uint8_t, Tag>& r) {
  std::vector<PixelPoint> pts;
  for (int y = 0; y < r.height(); ++y)
    for (int x = 0; x < r.width(); ++x)
      if (r(x, y)) pts.push_back({x, y});
  return pts;
}

inline std::int64_t cross(const PixelPoint& o, const PixelPoint& a, const PixelPoint& b) {
  return (static_cast<std::int64_t>(a.x) - o.x) * (static_cast<std::int64_t>(b.y) - o.y) -
         (static_cast<std::int64_t>(a.y) - o.y) * (static_cast<std::int64_t>(b.x) - o.x);
}

/// Andrew's monotone chain. Counter-clockwise, collinear points dropped.
inline std::vector<PixelPoint> convex_hull(std::vector<PixelPoint> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  std::vector<PixelPoint> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], *it) <= 0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  return hull;
}

/// Largest squared pairwise distance, by rotating calipers over the hull.
inline std::int64_t max_squared_distance(const std::vector<PixelPoint>& pts) {
  const auto hull = convex_hull(pts);
  const std::size_t n = hull.size();
  if (n <= 1) return 0;
  if (n == 2) return squared_distance(hull[0], hull[1]);

  std::int64_t best = 0;
  std::size_t j = 1;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = hull[i];
    const auto& q = hull[(i + 1) % n];
    // Advance j while it moves further from edge pq.
    while (cross(p, q, hull[(j + 1) % n]) > cross(p, q, hull[j])) j = (j + 1) % n;
    best = std::max({best, squared_distance(p, hull[j]), squared_distance(q, hull[j])});
  }
  return best;
}

inline double diameter(const raster::MarginMask& margin) {
  const auto pts = ones(margin);
  if (pts.empty()) throw DataError("no boundary: margin is empty");
  return std::sqrt(static_cast<double>(max_squared_distance(pts)));
}

inline double physiological_length(const TerminalPair& t) { return distance(t.a(), t.b()); }

/// Longest extent of the margin perpendicular to the terminal axis.
///
/// Margin points are expressed in the frame whose first axis runs along the
/// terminal line, grouped into unit-width bins along that axis, and the width
/// is the largest perpendicular spread found in any bin holding two or more
/// points. The terminals are put in a canonical order first so that the
/// result does not depend on which end was marked first.
inline double physiological_width(const raster::MarginMask& margin, const TerminalPair& t) {
  const auto pts = ones(margin);
  if (pts.empty()) throw DataError("no boundary: margin is empty");

  const PixelPoint a = std::min(t.a(), t.b());
  const PixelPoint b = std::max(t.a(), t.b());
  const double len = distance(a, b);
  const double ux = (b.x - a.x) / len;
  const double uy = (b.y - a.y) / len;

  struct Extent {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    std::size_t count = 0;
  };
  std::map<long long, Extent> bins;
  for (const auto& p : pts) {
    const double rx = p.x - a.x;
    const double ry = p.y - a.y;
    const double along = rx * ux + ry * uy;
    const double across = rx * uy - ry * ux;
    // Small bias keeps exactly-integral coordinates from falling a bin short.
    auto& e = bins[static_cast<long long>(std::floor(along + 1e-9))];
    e.lo = std::min(e.lo, across);
    e.hi = std::max(e.hi, across);
    ++e.count;
  }

  double best = -1.0;
  for (const auto& [_, e] : bins)
    if (e.count >= 2) best = std::max(best, e.hi - e.lo);
  if (best < 0.0) throw DataError("degenerate silhouette: no bin holds two margin points");
  return best;
}

inline std::size_t area(const raster::BinaryMask& mask) { return raster::count_ones(mask); }

inline std::size_t perimeter(const raster::MarginMask& margin) { return raster::count_ones(margin); }

inline BasicFeatures basic_features(const raster::BinaryMask& mask, const raster::MarginMask& margin,
                                    const TerminalPair& t) {
  BasicFeatures f;
  f.diameter = diameter(margin);
  f.phys_length = physiological_length(t);
  f.phys_width = physiological_width(margin, t);
  f.area = area(mask);
  f.perimeter = perimeter(margin);
  return f;
}

}  // namespace leafid::geometry
