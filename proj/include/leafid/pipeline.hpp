#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "leafid/error.hpp"
#include "leafid/features.hpp"
#include "leafid/fsutil.hpp"
#include "leafid/geometry.hpp"
#include "leafid/image_io.hpp"
#include "leafid/pca.hpp"
#include "leafid/pnn.hpp"

namespace leafid::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Terminal sidecars

inline json terminals_to_json(const geometry::TerminalPair& t) {
  return {{"a", {{"x", t.a().x}, {"y", t.a().y}}}, {"b", {{"x", t.b().x}, {"y", t.b().y}}}};
}

inline geometry::TerminalPair terminals_from_json(const json& j, const std::string& path = "") {
  auto point = [&](const char* key) {
    const std::string p = path + "/" + key;
    if (!j.is_object() || !j.contains(key) || !j[key].is_object()) throw SchemaError(p, "expected {x, y}");
    const auto& o = j[key];
    for (const char* c : {"x", "y"})
      if (!o.contains(c) || !o[c].is_number_integer())
        throw SchemaError(p + "/" + c, "expected integer pixel coordinate");
    return geometry::PixelPoint{o["x"].get<int>(), o["y"].get<int>()};
  };
  const auto a = point("a");
  const auto b = point("b");
  if (a == b) throw SchemaError(path, "terminal points coincide");
  return geometry::TerminalPair(a, b);
}

inline geometry::TerminalPair read_terminals(const fs::path& file) {
  json j;
  try {
    j = json::parse(fsutil::read_text(file));
  } catch (const json::parse_error& e) {
    throw DataError("malformed terminals file " + file.string() + ": " + e.what());
  }
  try {
    return terminals_from_json(j);
  } catch (const SchemaError& e) {
    throw DataError("invalid terminals file " + file.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Manifest

struct ManifestEntry {
  fs::path image;
  std::optional<fs::path> terminals_path;
  std::optional<geometry::TerminalPair> terminals;
  std::string label;

  geometry::TerminalPair resolve_terminals() const {
    if (terminals) return *terminals;
    if (terminals_path) return read_terminals(*terminals_path);
    throw DataError("no terminals for " + image.string());
  }
};

class Manifest {
 public:
  Manifest() = default;

  explicit Manifest(std::vector<ManifestEntry> entries) : entries_(std::move(entries)) {
    std::vector<std::string> labels;
    for (const auto& e : entries_) {
      if (e.image.empty()) throw DataError("manifest entry with empty image path");
      if (e.label.empty()) throw DataError("manifest entry " + e.image.string() + " has no label");
      if (!e.terminals && (!e.terminals_path || e.terminals_path->empty()))
        throw DataError("manifest entry " + e.image.string() + " has no terminals");
      labels.push_back(e.label);
    }
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    classes_ = std::move(labels);
  }

  /// Loads CSV (`image,terminals,label`) or, for `.json`, a document
  /// `{"entries": [{"image", "terminals", "label"}]}`. Relative paths resolve
  /// against the manifest's directory.
  static Manifest load(const fs::path& file) {
    if (!fs::is_regular_file(file)) throw DataError("no such manifest: " + file.string());
    const auto base = file.parent_path();
    const auto text = fsutil::read_text(file);
    if (file.extension() == ".json") return parse_json(text, base);
    return parse_csv(text, base);
  }

  static Manifest parse_csv(const std::string& text, const fs::path& base = {});
  static Manifest parse_json(const std::string& text, const fs::path& base = {});

  const std::vector<ManifestEntry>& entries() const noexcept { return entries_; }
  /// Distinct labels, sorted; position = class index.
  const std::vector<std::string>& classes() const noexcept { return classes_; }
  bool empty() const noexcept { return entries_.empty(); }

  std::optional<int> class_index(const std::string& label) const {
    auto it = std::lower_bound(classes_.begin(), classes_.end(), label);
    if (it == classes_.end() || *it != label) return std::nullopt;
    return static_cast<int>(it - classes_.begin());
  }

 private:
  std::vector<ManifestEntry> entries_;
  std::vector<std::string> classes_;
};

namespace detail {

inline std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

// RFC 4180-style fields: quotes around a field, "" inside quotes for a quote.
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

// "ax ay bx by" -> inline terminals
inline std::optional<geometry::TerminalPair> parse_inline_terminals(const std::string& field) {
  std::istringstream in(field);
  int v[4];
  for (int& x : v)
    if (!(in >> x)) return std::nullopt;
  std::string rest;
  if (in >> rest) return std::nullopt;
  return geometry::TerminalPair({v[0], v[1]}, {v[2], v[3]});
}

inline fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

}  // namespace detail

inline Manifest Manifest::parse_csv(const std::string& text, const fs::path& base) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool header = false;
  std::vector<ManifestEntry> entries;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (!header) {
      if (fields != std::vector<std::string>{"image", "terminals", "label"})
        throw DataError("manifest header must be 'image,terminals,label'");
      header = true;
      continue;
    }
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty())
      throw DataError("manifest line " + std::to_string(lineno) + ": expected 3 non-empty fields");
    ManifestEntry e;
    e.image = detail::resolve(base, fields[0]);
    e.label = fields[2];
    try {
      e.terminals = detail::parse_inline_terminals(fields[1]);
    } catch (const ParameterError& err) {
      throw DataError("manifest line " + std::to_string(lineno) + ": " + err.what());
    }
    if (!e.terminals) e.terminals_path = detail::resolve(base, fields[1]);
    entries.push_back(std::move(e));
  }
  if (!header) throw DataError("manifest is empty");
  return Manifest(std::move(entries));
}

inline Manifest Manifest::parse_json(const std::string& text, const fs::path& base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("", std::string("malformed manifest JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("entries") || !j["entries"].is_array())
    throw SchemaError("/entries", "expected array");
  std::vector<ManifestEntry> entries;
  for (std::size_t i = 0; i < j["entries"].size(); ++i) {
    const auto& ej = j["entries"][i];
    const std::string p = "/entries/" + std::to_string(i);
    for (const char* key : {"image", "label"})
      if (!ej.is_object() || !ej.contains(key) || !ej[key].is_string())
        throw SchemaError(p + "/" + key, "expected string");
    if (!ej.contains("terminals")) throw SchemaError(p + "/terminals", "missing field");
    ManifestEntry e;
    e.image = detail::resolve(base, ej["image"].get<std::string>());
    e.label = ej["label"].get<std::string>();
    if (ej["terminals"].is_string())
      e.terminals_path = detail::resolve(base, ej["terminals"].get<std::string>());
    else
      e.terminals = terminals_from_json(ej["terminals"], p + "/terminals");
    entries.push_back(std::move(e));
  }
  return Manifest(std::move(entries));
}

// ---------------------------------------------------------------------------
// Model bundle

struct PipelineConfig {
  features::FeatureConfig features;
  double spread = pnn::kDefaultSpread;
  int components = 5;
  /// Extraction workers; 0 picks the hardware concurrency.
  unsigned workers = 0;
};

/// Everything needed to classify a photograph: PCA mapping, score scaling
/// into the unit cube, and the PNN over the scaled training scores.
struct ModelBundle {
  pca::PcaModel pca;
  pnn::PnnModel pnn;
  Eigen::VectorXd pc_min;
  Eigen::VectorXd pc_max;
  features::FeatureConfig feature_config;
  /// Sorted fingerprints of the training images; empty when unknown.
  std::vector<std::string> training_images;

  const std::vector<std::string>& class_names() const { return pnn.class_names(); }

  Eigen::VectorXd scale_scores(const Eigen::VectorXd& scores) const {
    return ((scores - pc_min).array() / (pc_max - pc_min).array()).matrix();
  }

  /// Full mapping from a feature vector to a ranked classification.
  pnn::Classification classify(const features::FeatureVector12& f, int k = 1) const {
    const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(f.values.data(), features::kFeatureCount);
    return pnn::classify(pnn, scale_scores(pca::project(pca, v)), k);
  }
};

/// Loads an image, preprocesses it and extracts the 12 features.
inline features::FeatureVector12 extract_file(const fs::path& image, const geometry::TerminalPair& t,
                                              const features::FeatureConfig& cfg) {
  const auto rgb = io::read_rgb(image);
  const auto pre = features::preprocess(rgb, cfg);
  try {
    return features::extract_features(pre, t, cfg);
  } catch (const ParameterError& e) {
    throw DataError(image.string() + ": " + e.what());
  }
}

/// FNV-1a 64 of a file's bytes, as 16 hex digits. Identifies an image by
/// content, so renamed or copied files still match.
inline std::string file_fingerprint(const fs::path& file) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : fsutil::read_text(file)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct ExtractionResult {
  std::optional<features::FeatureVector12> features;
  std::exception_ptr error;
};

namespace detail {

inline unsigned worker_count(unsigned requested, std::size_t jobs) {
  unsigned w = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(w, std::max<std::size_t>(jobs, 1)));
}

}  // namespace detail

/// Extracts every manifest entry, fanning out over `workers` threads.
/// Results are indexed by entry, so they do not depend on scheduling.
inline std::vector<ExtractionResult> extract_all(const Manifest& manifest,
                                                 const features::FeatureConfig& cfg, unsigned workers) {
  const auto& entries = manifest.entries();
  std::vector<ExtractionResult> results(entries.size());
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next.fetch_add(1); i < entries.size(); i = next.fetch_add(1)) {
      try {
        results[i].features = extract_file(entries[i].image, entries[i].resolve_terminals(), cfg);
      } catch (...) {
        results[i].error = std::current_exception();
      }
    }
  };
  const unsigned n = detail::worker_count(workers, entries.size());
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  return results;
}

namespace detail {

// Rethrows anything that is not a per-feature failure; returns the message
// of a feature failure.
inline std::string feature_failure(const std::exception_ptr& err) {
  try {
    std::rethrow_exception(err);
  } catch (const FeatureError& e) {
    return e.what();
  }
}

}  // namespace detail

inline ModelBundle train_pipeline(const Manifest& manifest, const PipelineConfig& cfg = {},
                                  std::ostream* log = nullptr) {
  if (manifest.empty()) throw DataError("training manifest is empty");
  const auto results = extract_all(manifest, cfg.features, cfg.workers);

  std::vector<features::FeatureVector12> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& entry = manifest.entries()[i];
    if (results[i].error) {
      const auto msg = detail::feature_failure(results[i].error);
      if (log) *log << "skipping " << entry.image.string() << ": " << msg << '\n';
      continue;
    }
    rows.push_back(*results[i].features);
    labels.push_back(*manifest.class_index(entry.label));
  }
  if (rows.empty()) throw DataError("all samples failed extraction");
  if (rows.size() < 2) throw DataError("only one usable training sample");

  Eigen::MatrixXd data(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(features::kFeatureCount));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < features::kFeatureCount; ++j)
      data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];

  pca::FitOptions opt;
  opt.components = cfg.components;
  opt.feature_names.assign(features::kFeatureNames.begin(), features::kFeatureNames.end());
  auto model = pca::fit(data, opt);

  Eigen::MatrixXd scores(data.rows(), model.components());
  for (Eigen::Index i = 0; i < data.rows(); ++i) scores.row(i) = pca::project(model, data.row(i).transpose()).transpose();
  Eigen::VectorXd lo = scores.colwise().minCoeff().transpose();
  Eigen::VectorXd hi = scores.colwise().maxCoeff().transpose();
  for (Eigen::Index c = 0; c < lo.size(); ++c)
    if (!(hi[c] > lo[c])) throw DataError("principal component " + std::to_string(c) + " has zero range");

  std::vector<pnn::Sample> samples;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const Eigen::VectorXd s = scores.row(i).transpose();
    samples.push_back({((s - lo).array() / (hi - lo).array()).matrix(), labels[static_cast<std::size_t>(i)]});
  }
  auto net = pnn::PnnModel::train(samples, cfg.spread, manifest.classes());
  std::vector<std::string> prints;
  for (const auto& e : manifest.entries())
    if (fs::is_regular_file(e.image)) prints.push_back(file_fingerprint(e.image));
  std::sort(prints.begin(), prints.end());
  prints.erase(std::unique(prints.begin(), prints.end()), prints.end());
  if (log) *log << "trained on " << rows.size() << " of " << results.size() << " samples, "
                << manifest.classes().size() << " classes\n";
  return ModelBundle{std::move(model), std::move(net), std::move(lo), std::move(hi), cfg.features, std::move(prints)};
}

// ---------------------------------------------------------------------------
// Evaluation

struct ClassTally {
  std::string name;
  std::size_t tested = 0;
  std::size_t incorrect = 0;

  friend bool operator==(const ClassTally&, const ClassTally&) = default;
};

struct Prediction {
  std::string image;
  std::string label;
  std::optional<std::string> predicted;  // empty when extraction failed
  std::string error;

  bool correct() const { return predicted && *predicted == label; }
  friend bool operator==(const Prediction&, const Prediction&) = default;
};

struct EvaluationReport {
  std::vector<ClassTally> classes;
  std::vector<Prediction> predictions;

  static EvaluationReport from_counts(std::vector<ClassTally> tallies) {
    for (const auto& t : tallies)
      if (t.incorrect > t.tested)
        throw ParameterError("class " + t.name + " has more incorrect than tested samples");
    EvaluationReport r;
    r.classes = std::move(tallies);
    return r;
  }

  std::size_t total() const {
    std::size_t n = 0;
    for (const auto& c : classes) n += c.tested;
    return n;
  }

  std::size_t incorrect() const {
    std::size_t n = 0;
    for (const auto& c : classes) n += c.incorrect;
    return n;
  }

  double accuracy() const {
    const auto n = total();
    if (n == 0) throw DataError("evaluation report has no test samples");
    return 1.0 - static_cast<double>(incorrect()) / static_cast<double>(n);
  }

  friend bool operator==(const EvaluationReport&, const EvaluationReport&) = default;
};

inline json to_json(const EvaluationReport& r) {
  json classes = json::array();
  for (const auto& c : r.classes) classes.push_back({{"class", c.name}, {"tested", c.tested}, {"incorrect", c.incorrect}});
  json preds = json::array();
  for (const auto& p : r.predictions) {
    json pj = {{"image", p.image}, {"label", p.label}, {"correct", p.correct()}};
    pj["predicted"] = p.predicted ? json(*p.predicted) : json(nullptr);
    if (!p.error.empty()) pj["error"] = p.error;
    preds.push_back(std::move(pj));
  }
  return {{"accuracy", r.accuracy()},
          {"total", r.total()},
          {"incorrect", r.incorrect()},
          {"classes", classes},
          {"predictions", preds}};
}

struct EvaluateOptions {
  unsigned workers = 0;
  /// Accept test images the bundle was trained on (training-set recall).
  bool allow_training_overlap = false;
};

/// Classifies every manifest entry. Entries whose features cannot be
/// extracted count as incorrect. Test images that were part of the training
/// set are rejected unless the options allow it.
inline EvaluationReport evaluate(const Manifest& manifest, const ModelBundle& bundle, const EvaluateOptions& opt = {}) {
  if (manifest.empty()) throw DataError("evaluation manifest is empty");
  const auto& names = bundle.class_names();
  for (const auto& label : manifest.classes())
    if (std::find(names.begin(), names.end(), label) == names.end())
      throw DataError("class '" + label + "' is not known to the model");
  if (!opt.allow_training_overlap && !bundle.training_images.empty()) {
    for (const auto& e : manifest.entries()) {
      if (!fs::is_regular_file(e.image)) continue;
      if (std::binary_search(bundle.training_images.begin(), bundle.training_images.end(), file_fingerprint(e.image)))
        throw DataError("test image " + e.image.string() + " is also in the training set");
    }
  }

  const auto results = extract_all(manifest, bundle.feature_config, opt.workers);
  std::map<std::string, ClassTally> tallies;
  EvaluationReport report;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& entry = manifest.entries()[i];
    Prediction p{entry.image.string(), entry.label, std::nullopt, {}};
    if (results[i].error) {
      p.error = detail::feature_failure(results[i].error);
    } else {
      p.predicted = bundle.classify(*results[i].features).ranking.front().name;
    }
    auto& t = tallies[entry.label];
    t.name = entry.label;
    ++t.tested;
    if (!p.correct()) ++t.incorrect;
    report.predictions.push_back(std::move(p));
  }
  for (const auto& label : manifest.classes()) report.classes.push_back(tallies[label]);
  return report;
}

// ---------------------------------------------------------------------------
// Persistence

inline json to_json(const ModelBundle& b) {
  json minmax = json::array();
  for (Eigen::Index i = 0; i < b.pc_min.size(); ++i) minmax.push_back({b.pc_min[i], b.pc_max[i]});
  auto net = pnn::to_json(b.pnn);
  net["pc_minmax"] = minmax;
  const auto& fc = b.feature_config;
  return {{"format", "leafid-bundle"},
          {"version", 1},
          {"class_names", b.class_names()},
          {"feature_config",
           {{"level", fc.level},
            {"tau", fc.tau},
            {"smoothing_kernel", fc.smoothing_kernel},
            {"smooth_factor_kernels", {fc.smooth_factor_large, fc.smooth_factor_small}}}},
          {"pca", pca::to_json(b.pca)},
          {"pnn", net},
          {"training_images", b.training_images}};
}

inline ModelBundle bundle_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("", "expected object");
  for (const char* key : {"feature_config", "pca", "pnn"})
    if (!j.contains(key)) throw SchemaError(std::string("/") + key, "missing field");

  features::FeatureConfig fc;
  const auto& fj = j["feature_config"];
  auto number = [&](const char* key) {
    if (!fj.is_object() || !fj.contains(key) || !fj[key].is_number())
      throw SchemaError(std::string("/feature_config/") + key, "expected number");
    return fj[key].get<double>();
  };
  fc.level = number("level");
  fc.tau = number("tau");
  if (!fj.contains("smoothing_kernel") || !fj["smoothing_kernel"].is_number_integer())
    throw SchemaError("/feature_config/smoothing_kernel", "expected integer");
  fc.smoothing_kernel = fj["smoothing_kernel"].get<int>();
  const auto& sk = fj.contains("smooth_factor_kernels") ? fj["smooth_factor_kernels"] : json();
  if (!sk.is_array() || sk.size() != 2 || !sk[0].is_number_integer() || !sk[1].is_number_integer())
    throw SchemaError("/feature_config/smooth_factor_kernels", "expected two integers");
  fc.smooth_factor_large = sk[0].get<int>();
  fc.smooth_factor_small = sk[1].get<int>();

  auto p = pca::from_json(j["pca"], "/pca");
  if (p.input_dim() != static_cast<Eigen::Index>(features::kFeatureCount))
    throw SchemaError("/pca/mean", "expected 12 features");
  auto net = pnn::from_json(j["pnn"], "/pnn");
  if (p.components() != net.input_dim())
    throw SchemaError("/pnn/input_dim", "pca.m (" + std::to_string(p.components()) +
                                            ") differs from pnn.input_dim (" + std::to_string(net.input_dim()) + ")");

  const auto& mm = j["pnn"].contains("pc_minmax") ? j["pnn"]["pc_minmax"] : json();
  if (!mm.is_array() || static_cast<Eigen::Index>(mm.size()) != net.input_dim())
    throw SchemaError("/pnn/pc_minmax", "expected one [min, max] pair per component");
  Eigen::VectorXd lo(net.input_dim()), hi(net.input_dim());
  for (std::size_t i = 0; i < mm.size(); ++i) {
    const std::string path = "/pnn/pc_minmax/" + std::to_string(i);
    if (!mm[i].is_array() || mm[i].size() != 2 || !mm[i][0].is_number() || !mm[i][1].is_number())
      throw SchemaError(path, "expected [min, max]");
    lo[static_cast<Eigen::Index>(i)] = mm[i][0].get<double>();
    hi[static_cast<Eigen::Index>(i)] = mm[i][1].get<double>();
    if (!(lo[static_cast<Eigen::Index>(i)] < hi[static_cast<Eigen::Index>(i)])) throw SchemaError(path, "min must be below max");
  }
  if (j.contains("class_names") && j["class_names"] != json(net.class_names()))
    throw SchemaError("/class_names", "differs from pnn class_names");
  std::vector<std::string> prints;
  if (j.contains("training_images")) {
    const auto& tj = j["training_images"];
    if (!tj.is_array()) throw SchemaError("/training_images", "expected array of strings");
    for (std::size_t i = 0; i < tj.size(); ++i) {
      if (!tj[i].is_string()) throw SchemaError("/training_images/" + std::to_string(i), "expected string");
      prints.push_back(tj[i].get<std::string>());
    }
    std::sort(prints.begin(), prints.end());
  }
  return ModelBundle{std::move(p), std::move(net), std::move(lo), std::move(hi), fc, std::move(prints)};
}

inline void save_bundle(const ModelBundle& b, const fs::path& path) {
  fsutil::write_atomic(path, to_json(b).dump(1) + "\n");
}

inline ModelBundle load_bundle(const fs::path& path) {
  json j;
  try {
    j = json::parse(fsutil::read_text(path));
  } catch (const json::parse_error& e) {
    throw SchemaError("", "malformed bundle " + path.string() + ": " + e.what());
  }
  return bundle_from_json(j);
}

// ---------------------------------------------------------------------------
// Single-image classification shared by the CLI and the service

inline json ranking_document(const std::string& image_id, const pnn::Ranking& ranking) {
  return {{"image_id", image_id}, {"ranking", pnn::to_json(ranking)}};
}

inline pnn::Ranking classify_file(const ModelBundle& bundle, const fs::path& image,
                                  const geometry::TerminalPair& t, int k) {
  const auto f = extract_file(image, t, bundle.feature_config);
  return bundle.classify(f, k).ranking;
}

}  // namespace leafid::pipeline
