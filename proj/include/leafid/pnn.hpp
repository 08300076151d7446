#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "leafid/error.hpp"

namespace leafid::pnn {

inline constexpr double kDefaultSpread = 0.03;

/// Gaussian radial basis transfer function.
inline double radbas(double n) { return std::exp(-n * n); }

/// Bias that makes radbas(bias * distance) cross 0.5 at distance == spread.
inline double bias_for_spread(double spread) { return std::sqrt(std::log(2.0)) / spread; }

struct Sample {
  Eigen::VectorXd input;
  int class_index = 0;
};

/// Three-layer probabilistic network: radial basis layer centred on the
/// training vectors, then a competitive layer summing activations per class.
class PnnModel {
 public:
  /// Assigns weights directly from the samples; there is no iterative fit.
  static PnnModel train(std::span<const Sample> samples, double spread,
                        std::vector<std::string> class_names) {
    if (samples.empty()) throw DataError("PNN needs at least one training sample");
    if (!(spread > 0.0) || !std::isfinite(spread))
      throw ParameterError("spread must be positive, got " + std::to_string(spread));
    if (class_names.empty()) throw ParameterError("PNN needs at least one class");
    const auto r = samples.front().input.size();
    if (r < 1) throw ParameterError("PNN input dimension must be positive");

    std::vector<int> classes;
    classes.reserve(samples.size());
    Eigen::MatrixXd weights(static_cast<Eigen::Index>(samples.size()), r);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      if (s.input.size() != r)
        throw ParameterError("sample " + std::to_string(i) + " has dimension " +
                             std::to_string(s.input.size()) + ", expected " + std::to_string(r));
      if (!s.input.allFinite()) throw DataError("sample " + std::to_string(i) + " is not finite");
      weights.row(static_cast<Eigen::Index>(i)) = s.input.transpose();
      classes.push_back(s.class_index);
    }
    return PnnModel(std::move(weights), std::move(classes), spread, std::move(class_names));
  }

  /// Rebuilds a model from its stored parts (weights, per-sample class).
  static PnnModel assemble(Eigen::MatrixXd weights, std::vector<int> sample_class, double spread,
                           std::vector<std::string> class_names) {
    if (weights.rows() < 1 || weights.cols() < 1) throw DataError("PNN weight matrix is empty");
    if (static_cast<std::size_t>(weights.rows()) != sample_class.size())
      throw DataError("PNN class vector length differs from weight rows");
    if (!(spread > 0.0) || !std::isfinite(spread))
      throw ParameterError("spread must be positive, got " + std::to_string(spread));
    if (class_names.empty()) throw ParameterError("PNN needs at least one class");
    return PnnModel(std::move(weights), std::move(sample_class), spread, std::move(class_names));
  }

  const Eigen::MatrixXd& weights() const noexcept { return weights_; }
  const Eigen::VectorXd& biases() const noexcept { return biases_; }
  const Eigen::MatrixXd& class_matrix() const noexcept { return class_matrix_; }
  const std::vector<int>& sample_class() const noexcept { return sample_class_; }
  const std::vector<std::string>& class_names() const noexcept { return class_names_; }
  double spread() const noexcept { return spread_; }
  Eigen::Index input_dim() const noexcept { return weights_.cols(); }
  Eigen::Index sample_count() const noexcept { return weights_.rows(); }
  Eigen::Index class_count() const noexcept { return static_cast<Eigen::Index>(class_names_.size()); }

 private:
  PnnModel(Eigen::MatrixXd weights, std::vector<int> classes, double spread,
           std::vector<std::string> names)
      : weights_(std::move(weights)),
        sample_class_(std::move(classes)),
        class_names_(std::move(names)),
        spread_(spread) {
    const auto q = weights_.rows();
    const auto k = static_cast<Eigen::Index>(class_names_.size());
    biases_ = Eigen::VectorXd::Constant(q, bias_for_spread(spread_));
    class_matrix_ = Eigen::MatrixXd::Zero(k, q);
    for (Eigen::Index i = 0; i < q; ++i) {
      const int c = sample_class_[static_cast<std::size_t>(i)];
      if (c < 0 || c >= k)
        throw ParameterError("sample " + std::to_string(i) + " has class index " + std::to_string(c) +
                             " outside [0," + std::to_string(k) + ")");
      class_matrix_(c, i) = 1.0;
    }
  }

  Eigen::MatrixXd weights_;          // Q x R
  Eigen::VectorXd biases_;           // Q
  Eigen::MatrixXd class_matrix_;     // K x Q, one 1 per column
  std::vector<int> sample_class_;    // Q
  std::vector<std::string> class_names_;
  double spread_;
};

/// Layer outputs for one input vector.
struct Activation {
  Eigen::VectorXd n;  // scaled distances, Q
  Eigen::VectorXd a;  // radial basis outputs, Q
  Eigen::VectorXd d;  // class scores, K
  Eigen::VectorXd c;  // one-hot winner, K
  /// log of d computed without underflow; orders classes whose d is 0.
  Eigen::VectorXd log_d;
};

struct RankedClass {
  int index = 0;
  std::string name;
  double score = 0.0;
  double normalized = 0.0;

  friend bool operator==(const RankedClass&, const RankedClass&) = default;
};

using Ranking = std::vector<RankedClass>;

struct Classification {
  Activation activation;
  Ranking ranking;
  int predicted() const { return ranking.front().index; }
};

/// Runs the network on `p` and returns the top-k classes.
///
/// Classes are ordered by d, highest first, lowest index on exact ties. When
/// both scores underflow to 0 the log-domain score decides instead, so far
/// away inputs still get a meaningful ordering.
inline Classification classify(const PnnModel& model, const Eigen::VectorXd& p, int k = 1) {
  if (p.size() != model.input_dim())
    throw ParameterError("input has dimension " + std::to_string(p.size()) + ", expected " +
                         std::to_string(model.input_dim()));
  if (!p.allFinite()) throw ParameterError("input vector is not finite");
  const auto K = model.class_count();
  if (k < 1) throw ParameterError("top count must be at least 1, got " + std::to_string(k));
  k = static_cast<int>(std::min<Eigen::Index>(k, K));

  Classification out;
  auto& act = out.activation;
  const auto& W = model.weights();
  const auto Q = W.rows();
  act.n.resize(Q);
  for (Eigen::Index i = 0; i < Q; ++i) act.n[i] = (W.row(i).transpose() - p).norm() * model.biases()[i];
  act.a = act.n.unaryExpr([](double v) { return radbas(v); });
  act.d = model.class_matrix() * act.a;

  // log-sum-exp of -n^2 per class
  const double ninf = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd peak = Eigen::VectorXd::Constant(K, ninf);
  for (Eigen::Index i = 0; i < Q; ++i) {
    const int c = model.sample_class()[static_cast<std::size_t>(i)];
    peak[c] = std::max(peak[c], -act.n[i] * act.n[i]);
  }
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(K);
  for (Eigen::Index i = 0; i < Q; ++i) {
    const int c = model.sample_class()[static_cast<std::size_t>(i)];
    acc[c] += std::exp(-act.n[i] * act.n[i] - peak[c]);
  }
  act.log_d.resize(K);
  for (Eigen::Index j = 0; j < K; ++j) act.log_d[j] = peak[j] == ninf ? ninf : peak[j] + std::log(acc[j]);

  std::vector<int> order(static_cast<std::size_t>(K));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
    if (act.d[x] != act.d[y]) return act.d[x] > act.d[y];
    if (act.d[x] == 0.0) return act.log_d[x] > act.log_d[y];
    return false;
  });

  const double total = act.d.sum();
  Eigen::VectorXd normalized(K);
  if (total > 0.0) {
    normalized = act.d / total;
  } else {
    const double top = act.log_d.maxCoeff();
    if (top == ninf) {
      normalized.setZero();
    } else {
      normalized = (act.log_d.array() - top).exp().matrix();
      normalized /= normalized.sum();
    }
  }

  act.c = Eigen::VectorXd::Zero(K);
  act.c[order.front()] = 1.0;
  const auto& names = model.class_names();
  for (int r = 0; r < k; ++r) {
    const int j = order[static_cast<std::size_t>(r)];
    out.ranking.push_back({j, names[static_cast<std::size_t>(j)], act.d[j], normalized[j]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json to_json(const PnnModel& m) {
  nlohmann::json weights = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.weights().rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(m.weights().cols()));
    for (Eigen::Index c = 0; c < m.weights().cols(); ++c) row[static_cast<std::size_t>(c)] = m.weights()(i, c);
    weights.push_back(row);
  }
  return {{"spread", m.spread()},
          {"weights", weights},
          {"class_matrix", m.sample_class()},
          {"class_names", m.class_names()},
          {"input_dim", m.input_dim()}};
}

inline PnnModel from_json(const nlohmann::json& j, const std::string& path = "") {
  auto need = [&](const char* key) -> const nlohmann::json& {
    if (!j.is_object()) throw SchemaError(path, "expected object");
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(path + "/" + key, "missing field");
    return *it;
  };
  const auto& spread = need("spread");
  if (!spread.is_number() || !(spread.get<double>() > 0.0))
    throw SchemaError(path + "/spread", "expected positive number");
  const auto& dim = need("input_dim");
  if (!dim.is_number_integer() || dim.get<long long>() < 1)
    throw SchemaError(path + "/input_dim", "expected positive integer");
  const auto r = dim.get<Eigen::Index>();

  const auto& names_j = need("class_names");
  if (!names_j.is_array() || names_j.empty()) throw SchemaError(path + "/class_names", "expected non-empty array");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < names_j.size(); ++i) {
    if (!names_j[i].is_string()) throw SchemaError(path + "/class_names/" + std::to_string(i), "expected string");
    names.push_back(names_j[i].get<std::string>());
  }

  const auto& wj = need("weights");
  if (!wj.is_array() || wj.empty()) throw SchemaError(path + "/weights", "expected non-empty array of rows");
  Eigen::MatrixXd weights(static_cast<Eigen::Index>(wj.size()), r);
  for (std::size_t i = 0; i < wj.size(); ++i) {
    const std::string rp = path + "/weights/" + std::to_string(i);
    if (!wj[i].is_array() || static_cast<Eigen::Index>(wj[i].size()) != r)
      throw SchemaError(rp, "expected row of input_dim numbers");
    for (std::size_t c = 0; c < wj[i].size(); ++c) {
      if (!wj[i][c].is_number()) throw SchemaError(rp + "/" + std::to_string(c), "expected number");
      weights(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = wj[i][c].get<double>();
    }
  }

  const auto& cj = need("class_matrix");
  if (!cj.is_array() || cj.size() != wj.size())
    throw SchemaError(path + "/class_matrix", "expected one class index per weight row");
  std::vector<int> classes;
  for (std::size_t i = 0; i < cj.size(); ++i) {
    const std::string cp = path + "/class_matrix/" + std::to_string(i);
    if (!cj[i].is_number_integer()) throw SchemaError(cp, "expected integer");
    const auto c = cj[i].get<long long>();
    if (c < 0 || c >= static_cast<long long>(names.size())) throw SchemaError(cp, "class index out of range");
    classes.push_back(static_cast<int>(c));
  }
  return PnnModel::assemble(std::move(weights), std::move(classes), spread.get<double>(), std::move(names));
}

inline nlohmann::json to_json(const Ranking& ranking) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : ranking)
    out.push_back({{"index", r.index}, {"class", r.name}, {"score", r.score}, {"normalized", r.normalized}});
  return out;
}

}  // namespace leafid::pnn
