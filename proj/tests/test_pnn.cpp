#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "leafid/pnn.hpp"

namespace leafid::pnn {
namespace {

using Eigen::VectorXd;

std::vector<std::string> names(int k) {
  std::vector<std::string> out;
  for (int j = 0; j < k; ++j) out.push_back("class" + std::to_string(j));
  return out;
}

VectorXd random_vector(int r, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VectorXd v(r);
  for (int i = 0; i < r; ++i) v[i] = u(rng);
  return v;
}

struct Instance {
  std::vector<Sample> samples;
  int classes;
};

// Every class gets at least one sample.
Instance random_instance(std::mt19937_64& rng, int max_q, int max_k, int r) {
  const int k = std::uniform_int_distribution<int>(1, max_k)(rng);
  const int q = std::uniform_int_distribution<int>(k, std::max(k, max_q))(rng);
  std::uniform_int_distribution<int> cls(0, k - 1);
  Instance inst{{}, k};
  for (int i = 0; i < q; ++i) inst.samples.push_back({random_vector(r, rng), i < k ? i : cls(rng)});
  std::shuffle(inst.samples.begin(), inst.samples.end(), rng);
  return inst;
}

/// Class sums computed straight from the definition, no matrices.
std::vector<double> direct_scores(const Instance& inst, const VectorXd& p, double spread) {
  const double b = std::sqrt(std::log(2.0)) / spread;
  std::vector<double> d(static_cast<std::size_t>(inst.classes), 0.0);
  for (const auto& s : inst.samples) {
    double sq = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) sq += (s.input[i] - p[i]) * (s.input[i] - p[i]);
    const double n = b * std::sqrt(sq);
    d[static_cast<std::size_t>(s.class_index)] += std::exp(-n * n);
  }
  return d;
}

int nearest_class(const Instance& inst, const VectorXd& p) {
  double best = std::numeric_limits<double>::infinity();
  int cls = -1;
  for (const auto& s : inst.samples) {
    const double dist = (s.input - p).squaredNorm();
    if (dist < best) {
      best = dist;
      cls = s.class_index;
    }
  }
  return cls;
}

TEST(Radbas, KnownValues) {
  EXPECT_EQ(radbas(0.0), 1.0);
  EXPECT_NEAR(radbas(std::sqrt(std::log(2.0))), 0.5, 1e-15);
  EXPECT_NEAR(radbas(1.0), 0.36787944117144233, 1e-15);
  EXPECT_EQ(radbas(-1.5), radbas(1.5));
}

TEST(Radbas, CrossesHalfAtDistanceSpread) {
  for (double s : {0.03, 0.1, 1.0}) EXPECT_NEAR(radbas(bias_for_spread(s) * s), 0.5, 1e-12) << "s=" << s;
}

TEST(PnnTrain, DefaultConfigurationShapes) {
  std::mt19937_64 rng(1);
  std::vector<Sample> samples;
  for (int i = 0; i < 1800; ++i) samples.push_back({random_vector(5, rng), i % 32});
  const auto model = PnnModel::train(samples, 0.03, names(32));
  EXPECT_EQ(model.weights().rows(), 1800);
  EXPECT_EQ(model.weights().cols(), 5);
  EXPECT_EQ(model.class_matrix().rows(), 32);
  EXPECT_EQ(model.class_matrix().cols(), 1800);
  EXPECT_NEAR(model.biases()[0], 27.751820371923, 1e-9);
  EXPECT_TRUE((model.biases().array() == model.biases()[0]).all());
  for (Eigen::Index i = 0; i < 1800; ++i) EXPECT_EQ(model.class_matrix().col(i).sum(), 1.0);
  EXPECT_EQ(model.weights().row(17).transpose(), samples[17].input);
}

TEST(PnnTrain, SingleSample) {
  const std::vector<Sample> one{{VectorXd::Constant(3, 0.5), 0}};
  const auto model = PnnModel::train(one, 0.03, names(1));
  EXPECT_EQ(model.weights().rows(), 1);
  EXPECT_EQ(model.class_matrix(), Eigen::MatrixXd::Ones(1, 1));
}

TEST(PnnTrain, ClassRowSums) {
  const std::vector<Sample> s{{VectorXd::Zero(2), 1}, {VectorXd::Ones(2), 1}, {VectorXd::Ones(2) * 2, 0}};
  const auto model = PnnModel::train(s, 0.1, names(2));
  EXPECT_EQ(model.class_matrix().row(1).sum(), 2.0);
  EXPECT_EQ(model.class_matrix().row(0).sum(), 1.0);
}

TEST(PnnTrain, Errors) {
  EXPECT_THROW(PnnModel::train({}, 0.03, names(2)), DataError);
  const std::vector<Sample> s{{VectorXd::Zero(2), 2}};
  EXPECT_THROW(PnnModel::train(s, 0.03, names(2)), ParameterError);
  const std::vector<Sample> neg{{VectorXd::Zero(2), -1}};
  EXPECT_THROW(PnnModel::train(neg, 0.03, names(2)), ParameterError);
  const std::vector<Sample> ok{{VectorXd::Zero(2), 0}};
  EXPECT_THROW(PnnModel::train(ok, 0.0, names(1)), ParameterError);
  const std::vector<Sample> mixed{{VectorXd::Zero(2), 0}, {VectorXd::Zero(3), 0}};
  EXPECT_THROW(PnnModel::train(mixed, 0.03, names(1)), ParameterError);
}

TEST(PnnClassify, IdenticalInputActivatesFully) {
  const std::vector<Sample> s{{VectorXd::Constant(5, 0.1), 0}, {VectorXd::Constant(5, 0.6), 1}};
  const auto model = PnnModel::train(s, 0.03, names(2));
  const auto r = classify(model, s[1].input);
  EXPECT_EQ(r.activation.a[1], 1.0);
  EXPECT_EQ(r.predicted(), 1);
  EXPECT_EQ(r.activation.c, (VectorXd(2) << 0.0, 1.0).finished());
}

TEST(PnnClassify, LayeredMatchesDirectFormula) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const auto inst = random_instance(rng, 50, 5, 5);
    const double spread = std::uniform_real_distribution<double>(0.1, 1.0)(rng);
    const auto model = PnnModel::train(inst.samples, spread, names(inst.classes));
    const auto p = random_vector(5, rng);
    const auto r = classify(model, p, inst.classes);
    const auto d = direct_scores(inst, p, spread);
    for (int j = 0; j < inst.classes; ++j) EXPECT_NEAR(r.activation.d[j], d[static_cast<std::size_t>(j)], 1e-12);
    const int expected = static_cast<int>(std::max_element(d.begin(), d.end()) - d.begin());
    EXPECT_EQ(r.predicted(), expected) << "trial " << trial;
    for (Eigen::Index i = 0; i < r.activation.a.size(); ++i) {
      EXPECT_GT(r.activation.a[i], 0.0);
      EXPECT_LE(r.activation.a[i], 1.0);
      EXPECT_EQ(r.activation.a[i], std::exp(-r.activation.n[i] * r.activation.n[i]));
    }
    EXPECT_EQ(r.activation.c.sum(), 1.0);
  }
}

TEST(PnnClassify, OneSamplePerClassIsNearestNeighbour) {
  std::mt19937_64 rng(11);
  for (double spread : {0.03, 0.1, 1.0, 1e-3, 1e-4}) {
    for (int trial = 0; trial < 100; ++trial) {
      const int k = std::uniform_int_distribution<int>(2, 8)(rng);
      Instance inst{{}, k};
      for (int j = 0; j < k; ++j) inst.samples.push_back({random_vector(5, rng), j});
      const auto model = PnnModel::train(inst.samples, spread, names(k));
      const auto p = random_vector(5, rng);
      EXPECT_EQ(classify(model, p).predicted(), nearest_class(inst, p)) << "s=" << spread << " trial " << trial;
    }
  }
}

TEST(PnnClassify, SmallSpreadConvergesToNearestNeighbour) {
  std::mt19937_64 rng(12);
  for (double spread : {1e-3, 1e-4}) {
    for (int trial = 0; trial < 100; ++trial) {
      const auto inst = random_instance(rng, 40, 5, 5);
      const auto model = PnnModel::train(inst.samples, spread, names(inst.classes));
      const auto p = random_vector(5, rng);
      EXPECT_EQ(classify(model, p).predicted(), nearest_class(inst, p)) << "s=" << spread << " trial " << trial;
    }
  }
}

TEST(PnnClassify, ExactTiePicksLowestIndex) {
  // Classes 2 and 5 sit at the same distance from the query.
  std::vector<Sample> s;
  for (int j = 0; j < 6; ++j) s.push_back({VectorXd::Constant(2, 10.0 + j), j});
  s[2].input = (VectorXd(2) << 0.1, 0.0).finished();
  s[5].input = (VectorXd(2) << 0.0, 0.1).finished();
  const auto model = PnnModel::train(s, 0.1, names(6));
  const auto r = classify(model, VectorXd::Zero(2), 3);
  EXPECT_EQ(r.activation.d[2], r.activation.d[5]);
  EXPECT_EQ(r.predicted(), 2);
  EXPECT_EQ(r.ranking[1].index, 5);
}

TEST(PnnClassify, PermutationInvariantWithUniqueArgmax) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    auto inst = random_instance(rng, 30, 5, 5);
    const auto p = random_vector(5, rng);
    const auto base = classify(PnnModel::train(inst.samples, 0.3, names(inst.classes)), p, inst.classes);
    if (inst.classes > 1 && base.ranking[0].score == base.ranking[1].score) continue;
    std::shuffle(inst.samples.begin(), inst.samples.end(), rng);
    EXPECT_EQ(classify(PnnModel::train(inst.samples, 0.3, names(inst.classes)), p).predicted(), base.predicted());
  }
}

TEST(PnnClassify, FarInputStillRanksByLogScore) {
  const std::vector<Sample> s{{VectorXd::Constant(2, 0.0), 0}, {VectorXd::Constant(2, 1.0), 1}};
  const auto model = PnnModel::train(s, 0.03, names(2));
  const auto r = classify(model, VectorXd::Constant(2, 3.0), 2);
  EXPECT_EQ(r.activation.d.sum(), 0.0);
  EXPECT_EQ(r.predicted(), 1);
  EXPECT_GT(r.ranking[0].normalized, r.ranking[1].normalized);
  EXPECT_NEAR(r.ranking[0].normalized + r.ranking[1].normalized, 1.0, 1e-12);
}

TEST(PnnClassify, RankingShapeAndNormalization) {
  std::mt19937_64 rng(14);
  const auto inst = random_instance(rng, 40, 5, 5);
  const auto model = PnnModel::train(inst.samples, 0.5, names(inst.classes));
  const auto p = random_vector(5, rng);
  const auto r = classify(model, p, 99);
  ASSERT_EQ(static_cast<int>(r.ranking.size()), inst.classes);
  double sum = 0.0;
  for (std::size_t i = 0; i < r.ranking.size(); ++i) {
    if (i > 0) EXPECT_LE(r.ranking[i].score, r.ranking[i - 1].score);
    EXPECT_GE(r.ranking[i].normalized, 0.0);
    EXPECT_LE(r.ranking[i].normalized, 1.0);
    EXPECT_EQ(r.ranking[i].name, "class" + std::to_string(r.ranking[i].index));
    sum += r.ranking[i].normalized;
  }
  EXPECT_LE(sum, 1.0 + 1e-12);
  EXPECT_EQ(classify(model, p, 1).ranking.size(), 1u);
}

TEST(PnnClassify, InputErrors) {
  const std::vector<Sample> s{{VectorXd::Zero(3), 0}};
  const auto model = PnnModel::train(s, 0.03, names(1));
  EXPECT_THROW(classify(model, VectorXd::Zero(2)), ParameterError);
  VectorXd nan = VectorXd::Zero(3);
  nan[1] = std::nan("");
  EXPECT_THROW(classify(model, nan), ParameterError);
  EXPECT_THROW(classify(model, VectorXd::Zero(3), 0), ParameterError);
}

TEST(PnnClassify, Deterministic) {
  std::mt19937_64 rng(15);
  const auto inst = random_instance(rng, 40, 5, 5);
  const auto model = PnnModel::train(inst.samples, 0.2, names(inst.classes));
  const auto p = random_vector(5, rng);
  EXPECT_EQ(classify(model, p, 3).ranking, classify(model, p, 3).ranking);
}

TEST(PnnJson, RoundTripGivesIdenticalRankings) {
  std::mt19937_64 rng(16);
  const auto inst = random_instance(rng, 50, 5, 5);
  const auto model = PnnModel::train(inst.samples, 0.03, names(inst.classes));
  const auto back = from_json(nlohmann::json::parse(to_json(model).dump()));
  EXPECT_EQ(back.weights(), model.weights());
  EXPECT_EQ(back.sample_class(), model.sample_class());
  EXPECT_EQ(back.class_names(), model.class_names());
  EXPECT_EQ(back.spread(), model.spread());
  for (int i = 0; i < 50; ++i) {
    const auto p = random_vector(5, rng);
    EXPECT_EQ(classify(back, p, 5).ranking, classify(model, p, 5).ranking);
  }
}

TEST(PnnJson, RejectsMalformedDocuments) {
  const std::vector<Sample> s{{VectorXd::Zero(2), 0}, {VectorXd::Ones(2), 1}};
  const auto good = to_json(PnnModel::train(s, 0.03, names(2)));
  auto bad_class = good;
  bad_class["class_matrix"][1] = 7;
  EXPECT_THROW(from_json(bad_class), DataError);
  auto no_spread = good;
  no_spread.erase("spread");
  EXPECT_THROW(from_json(no_spread), SchemaError);
  auto ragged = good;
  ragged["weights"][0] = {1.0};
  EXPECT_THROW(from_json(ragged), SchemaError);
}

TEST(PnnJson, RankingDocument) {
  const Ranking r{{2, "oak", 0.75, 0.6}, {0, "ash", 0.5, 0.4}};
  const auto j = to_json(r);
  ASSERT_EQ(j.size(), 2u);
  EXPECT_EQ(j[0]["class"], "oak");
  EXPECT_EQ(j[0]["index"], 2);
  EXPECT_EQ(j[1]["normalized"], 0.4);
}

}  // namespace
}  // namespace leafid::pnn
