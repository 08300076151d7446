#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "leafid/error.hpp"

namespace leafid::pca {

/// Trained principal-component mapping from feature space to m scores.
///
/// `loadings` holds one unit eigenvector per column, sorted by decreasing
/// eigenvalue. `eigenvalues` keeps every eigenvalue of the covariance (not
/// only the retained ones) so explained fractions can be recomputed.
struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  Eigen::MatrixXd loadings;
  Eigen::VectorXd explained;
  Eigen::VectorXd eigenvalues;
  bool standardized = true;

  Eigen::Index input_dim() const { return mean.size(); }
  Eigen::Index components() const { return loadings.cols(); }
};

struct FitOptions {
  int components = 5;
  bool standardize = true;
  /// Optional column names used in error messages.
  std::vector<std::string> feature_names;
};

namespace detail {

inline std::string column_name(const FitOptions& opt, Eigen::Index j) {
  if (static_cast<std::size_t>(j) < opt.feature_names.size())
    return opt.feature_names[static_cast<std::size_t>(j)];
  return "feature " + std::to_string(j);
}

// Flip so the entry of largest magnitude is positive (first such entry on ties).
inline void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index arg = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
  if (v[arg] < 0) v = -v;
}

}  // namespace detail

/// Fits on the rows of `data` (N samples x D features).
inline PcaModel fit(const Eigen::MatrixXd& data, const FitOptions& opt = {}) {
  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  if (n < 2) throw DataError("insufficient data: PCA needs at least 2 samples, got " + std::to_string(n));
  if (d < 1) throw DataError("PCA input has no columns");
  if (opt.components < 1 || opt.components > d)
    throw ParameterError("component count must lie in [1," + std::to_string(d) + "], got " +
                         std::to_string(opt.components));
  if (!data.allFinite()) throw DataError("PCA input contains non-finite values");

  PcaModel model;
  model.standardized = opt.standardize;
  model.mean = data.colwise().mean().transpose();
  Eigen::MatrixXd centered = data.rowwise() - model.mean.transpose();
  model.scale.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double var = centered.col(j).squaredNorm() / static_cast<double>(n - 1);
    if (!(var > 0.0))
      throw DataError("zero-variance column: " + detail::column_name(opt, j));
    model.scale[j] = opt.standardize ? std::sqrt(var) : 1.0;
  }
  centered = centered.array().rowwise() / model.scale.transpose().array();

  const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw DataError("covariance eigendecomposition failed");

  // Eigen returns ascending eigenvalues; reorder descending.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  const auto& evals = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return evals[a] > evals[b]; });

  model.eigenvalues.resize(d);
  for (Eigen::Index i = 0; i < d; ++i)
    model.eigenvalues[i] = std::max(0.0, evals[order[static_cast<std::size_t>(i)]]);
  const double total = model.eigenvalues.sum();

  const Eigen::Index m = opt.components;
  model.loadings.resize(d, m);
  model.explained.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    model.loadings.col(i) = solver.eigenvectors().col(order[static_cast<std::size_t>(i)]);
    detail::fix_sign(model.loadings.col(i));
    model.explained[i] = total > 0.0 ? model.eigenvalues[i] / total : 0.0;
  }
  return model;
}

/// Standardizes `v` with the training statistics.
inline Eigen::VectorXd standardize(const PcaModel& model, const Eigen::VectorXd& v) {
  if (v.size() != model.input_dim())
    throw ParameterError("PCA input has dimension " + std::to_string(v.size()) + ", expected " +
                         std::to_string(model.input_dim()));
  if (!v.allFinite()) throw DataError("PCA input contains non-finite values");
  return ((v - model.mean).array() / model.scale.array()).matrix();
}

inline Eigen::VectorXd project(const PcaModel& model, const Eigen::VectorXd& v) {
  return model.loadings.transpose() * standardize(model, v);
}

/// Maps scores back to standardized feature space.
inline Eigen::VectorXd reconstruct(const PcaModel& model, const Eigen::VectorXd& scores) {
  return model.loadings * scores;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json to_json(const PcaModel& m) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json loadings = nlohmann::json::array();
  for (Eigen::Index c = 0; c < m.loadings.cols(); ++c) loadings.push_back(vec(m.loadings.col(c)));
  return {{"mean", vec(m.mean)},
          {"scale", vec(m.scale)},
          {"loadings", loadings},
          {"explained", vec(m.explained)},
          {"eigenvalues", vec(m.eigenvalues)},
          {"standardized", m.standardized},
          {"m", m.loadings.cols()}};
}

namespace detail {

inline Eigen::VectorXd read_vector(const nlohmann::json& j, const std::string& path) {
  if (!j.is_array()) throw SchemaError(path, "expected array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw SchemaError(path + "/" + std::to_string(i), "expected number");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline const nlohmann::json& field(const nlohmann::json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw SchemaError(path, "expected object");
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(path + "/" + key, "missing field");
  return *it;
}

}  // namespace detail

/// Parses and validates a serialized model; `path` prefixes error locations.
inline PcaModel from_json(const nlohmann::json& j, const std::string& path = "") {
  using detail::field;
  using detail::read_vector;
  PcaModel m;
  m.mean = read_vector(field(j, "mean", path), path + "/mean");
  m.scale = read_vector(field(j, "scale", path), path + "/scale");
  m.explained = read_vector(field(j, "explained", path), path + "/explained");
  if (j.contains("eigenvalues")) m.eigenvalues = read_vector(j["eigenvalues"], path + "/eigenvalues");
  if (j.contains("standardized")) {
    if (!j["standardized"].is_boolean()) throw SchemaError(path + "/standardized", "expected boolean");
    m.standardized = j["standardized"].get<bool>();
  }
  const auto& count = field(j, "m", path);
  if (!count.is_number_integer()) throw SchemaError(path + "/m", "expected integer");
  const auto comps = count.get<Eigen::Index>();

  const Eigen::Index d = m.mean.size();
  if (d < 1) throw SchemaError(path + "/mean", "empty");
  if (m.scale.size() != d) throw SchemaError(path + "/scale", "length differs from mean");
  for (Eigen::Index i = 0; i < d; ++i)
    if (!(m.scale[i] > 0.0)) throw SchemaError(path + "/scale/" + std::to_string(i), "must be positive");

  const auto& lj = field(j, "loadings", path);
  if (!lj.is_array()) throw SchemaError(path + "/loadings", "expected array of columns");
  if (comps < 1 || comps > d || static_cast<Eigen::Index>(lj.size()) != comps)
    throw SchemaError(path + "/m", "inconsistent with loadings");
  if (m.explained.size() != comps) throw SchemaError(path + "/explained", "length differs from m");
  m.loadings.resize(d, comps);
  for (Eigen::Index c = 0; c < comps; ++c) {
    const std::string cpath = path + "/loadings/" + std::to_string(c);
    auto col = read_vector(lj[static_cast<std::size_t>(c)], cpath);
    if (col.size() != d) throw SchemaError(cpath, "length differs from mean");
    m.loadings.col(c) = col;
  }
  return m;
}

}  // namespace leafid::pca
