#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "leafid/error.hpp"
#include "leafid/geometry.hpp"
#include "leafid/raster.hpp"

namespace leafid::features {

inline constexpr std::size_t kFeatureCount = 12;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "smooth_factor", "aspect_ratio",   "form_factor", "rectangularity",
    "narrow_factor", "perim_ratio_diameter", "perim_ratio_lw", "v1",
    "v2",            "v3",             "v4",          "v4_over_v1"};

/// The twelve morphological features, in the fixed order of kFeatureNames.
struct FeatureVector12 {
  std::array<double, kFeatureCount> values{};

  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }

  friend bool operator==(const FeatureVector12&, const FeatureVector12&) = default;
};

struct VeinAreas {
  std::array<std::size_t, 4> a{};  // radii 1..4

  friend bool operator==(const VeinAreas&, const VeinAreas&) = default;
};

struct FeatureConfig {
  double level = raster::kDefaultLevel;
  double tau = 10.0 / 255.0;
  int smoothing_kernel = 3;
  int smooth_factor_large = 5;
  int smooth_factor_small = 2;

  friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

/// Rasters derived from one photograph: the grayscale image, the smoothed
/// leaf mask and its margin.
struct Preprocessed {
  raster::GrayImage gray;
  raster::BinaryMask mask;
  raster::MarginMask margin;
};

inline Preprocessed preprocess(const raster::RgbImage& rgb, const FeatureConfig& cfg = {}) {
  auto gray = raster::to_grayscale(rgb);
  auto mask = raster::smooth_mask(raster::binarize(gray, cfg.level), cfg.smoothing_kernel);
  auto margin = raster::extract_margin(mask);
  return {std::move(gray), std::move(mask), std::move(margin)};
}

inline double smooth_factor(const raster::BinaryMask& mask, int large = 5, int small = 2) {
  const auto num = raster::count_ones(raster::smooth_mask(mask, large));
  const auto den = raster::count_ones(raster::smooth_mask(mask, small));
  if (den == 0) throw FeatureError("smooth_factor", "degenerate leaf: empty after smoothing");
  return static_cast<double>(num) / static_cast<double>(den);
}

/// Counts, for disk radii 1..4, the off-margin leaf pixels whose top-hat
/// residue exceeds `tau` (as a fraction of 255).
///
/// The residue at radius r is measured against the pointwise minimum of the
/// openings with radii 1..r. For Euclidean disks that are unions of the
/// smaller disk's translates this equals the plain top-hat; for the radii
/// where that fails (3 from 2, 4 from 3) it keeps the areas nested.
inline VeinAreas vein_areas(const raster::GrayImage& gray, const raster::BinaryMask& mask,
                            const raster::MarginMask& margin, double tau = 10.0 / 255.0) {
  if (!(tau > 0.0 && tau < 1.0))
    throw ParameterError("vein threshold tau must lie in (0,1), got " + std::to_string(tau));
  if (!raster::same_dims(gray, mask) || !raster::same_dims(gray, margin))
    throw ParameterError("gray, mask and margin dimensions differ");

  VeinAreas out;
  std::vector<std::uint8_t> lowest(gray.pixels().begin(), gray.pixels().end());
  for (int r = 1; r <= 4; ++r) {
    const auto opened = raster::gray_opening(gray, raster::StructuringElement::disk(r));
    const auto op = opened.pixels();
    const auto g = gray.pixels();
    const auto m = mask.pixels();
    const auto e = margin.pixels();
    std::size_t count = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      lowest[i] = std::min(lowest[i], op[i]);
      const double residue = static_cast<double>(g[i] - lowest[i]) / 255.0;
      if (residue > tau && m[i] == 1 && e[i] == 0) ++count;
    }
    out.a[static_cast<std::size_t>(r - 1)] = count;
  }
  return out;
}

namespace detail {

inline double ratio(double num, double den, std::string_view feature, std::string_view what) {
  if (den == 0.0) throw FeatureError(std::string(feature), std::string(what) + " is zero");
  return num / den;
}

}  // namespace detail

inline FeatureVector12 from_basic(const geometry::BasicFeatures& b, double smooth,
                                  const VeinAreas& v) {
  using detail::ratio;
  const double A = static_cast<double>(b.area);
  const double P = static_cast<double>(b.perimeter);
  const double D = b.diameter;
  const double Lp = b.phys_length;
  const double Wp = b.phys_width;

  FeatureVector12 f;
  f[0] = smooth;
  f[1] = ratio(Lp, Wp, "aspect_ratio", "physiological width");
  f[2] = ratio(4.0 * std::numbers::pi * A, P * P, "form_factor", "perimeter");
  f[3] = ratio(Lp * Wp, A, "rectangularity", "area");
  f[4] = ratio(D, Lp, "narrow_factor", "physiological length");
  f[5] = ratio(P, D, "perim_ratio_diameter", "diameter");
  f[6] = ratio(P, Lp + Wp, "perim_ratio_lw", "Lp + Wp");
  for (std::size_t i = 0; i < 4; ++i)
    f[7 + i] = ratio(static_cast<double>(v.a[i]), A, kFeatureNames[7 + i], "area");
  if (v.a[0] == 0) throw FeatureError("v4_over_v1", "degenerate vein ratio: Av1 is zero");
  f[11] = static_cast<double>(v.a[3]) / static_cast<double>(v.a[0]);
  return f;
}

inline FeatureVector12 extract_features(const raster::GrayImage& gray, const raster::BinaryMask& mask,
                                        const raster::MarginMask& margin,
                                        const geometry::TerminalPair& terminals,
                                        const FeatureConfig& cfg = {}) {
  if (!raster::same_dims(gray, mask) || !raster::same_dims(gray, margin))
    throw ParameterError("gray, mask and margin dimensions differ");
  for (const auto& p : {terminals.a(), terminals.b()})
    if (!gray.contains(p.x, p.y))
      throw ParameterError("terminal (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                           ") lies outside the image");

  if (raster::count_ones(margin) == 0) throw FeatureError("diameter", "no boundary: margin is empty");
  geometry::BasicFeatures basic;
  basic.diameter = geometry::diameter(margin);
  basic.phys_length = geometry::physiological_length(terminals);
  try {
    basic.phys_width = geometry::physiological_width(margin, terminals);
  } catch (const DataError& e) {
    throw FeatureError("aspect_ratio", e.what());
  }
  basic.area = geometry::area(mask);
  basic.perimeter = geometry::perimeter(margin);

  const double smooth = smooth_factor(mask, cfg.smooth_factor_large, cfg.smooth_factor_small);
  const auto veins = vein_areas(gray, mask, margin, cfg.tau);
  return from_basic(basic, smooth, veins);
}

inline FeatureVector12 extract_features(const Preprocessed& pre, const geometry::TerminalPair& t,
                                        const FeatureConfig& cfg = {}) {
  return extract_features(pre.gray, pre.mask, pre.margin, t, cfg);
}

// ---------------------------------------------------------------------------
// Serialization

/// One extracted feature vector as it travels between tools.
struct FeatureRecord {
  std::string image_id;
  FeatureVector12 features;
  std::optional<std::string> class_label;
};

inline void to_json(nlohmann::json& j, const FeatureRecord& r) {
  j = nlohmann::json{{"image_id", r.image_id}, {"features", r.features.values}};
  if (r.class_label) j["class_label"] = *r.class_label;
}

inline void from_json(const nlohmann::json& j, FeatureRecord& r) {
  if (!j.is_object()) throw SchemaError("", "feature record must be an object");
  if (!j.contains("image_id") || !j["image_id"].is_string())
    throw SchemaError("/image_id", "expected string");
  if (!j.contains("features") || !j["features"].is_array() || j["features"].size() != kFeatureCount)
    throw SchemaError("/features", "expected array of 12 numbers");
  r.image_id = j["image_id"].get<std::string>();
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (!j["features"][i].is_number())
      throw SchemaError("/features/" + std::to_string(i), "expected number");
    r.features[i] = j["features"][i].get<double>();
  }
  r.class_label.reset();
  if (j.contains("class_label")) {
    if (!j["class_label"].is_string()) throw SchemaError("/class_label", "expected string");
    r.class_label = j["class_label"].get<std::string>();
  }
}

inline std::string csv_header() {
  std::string h;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (i) h += ',';
    h += kFeatureNames[i];
  }
  return h;
}

/// One CSV row of the 12 values, shortest round-trip formatting.
inline std::string csv_row(const FeatureVector12& f) {
  std::string row;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (i) row += ',';
    row += nlohmann::json(f[i]).dump();
  }
  return row;
}

}  // namespace leafid::features
