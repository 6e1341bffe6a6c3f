#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "alterrep/inlp.hpp"
#include "alterrep/probe.hpp"
#include "alterrep/synthlab.hpp"

using namespace alterrep;

namespace {

RepVector vec(std::initializer_list<double> xs) {
  RepVector v(static_cast<long>(xs.size()));
  long i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

LabeledSet two_clusters(double mean, double sigma, long n_per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  LabeledSet out;
  out.representations.resize(2 * n_per_class, 2);
  for (long i = 0; i < 2 * n_per_class; ++i) {
    const std::uint8_t label = i < n_per_class ? 1 : 0;
    out.representations(i, 0) = (label ? mean : -mean) + noise(rng);
    out.representations(i, 1) = noise(rng);
    out.labels.push_back(label);
  }
  return out;
}

double max_angle_deg(const OrthonormalBasis& a, const OrthonormalBasis& b) {
  double worst = 0.0;
  for (double x : principal_angles(a, b)) worst = std::max(worst, radians_to_degrees(x));
  return worst;
}

}  // namespace

TEST_CASE("predict uses SIGN with zero mapped to class 1") {
  const LinearClassifier clf{vec({1, 0}), 0.0};
  CHECK(predict(clf, vec({2, 5})) == 1);
  CHECK(predict(clf, vec({-2, 5})) == 0);
  CHECK(predict(clf, vec({0, 5})) == 1);
  CHECK_THROWS_AS(predict(clf, vec({1, 2, 3})), Error);
}

TEST_CASE("accuracy of perfect, negated and constant classifiers") {
  const auto data = two_clusters(3.0, 0.5, 200, 7);
  const LinearClassifier perfect{vec({1, 0}), 0.0};
  const double acc = accuracy(perfect, data);
  CHECK(acc == 1.0);

  const LinearClassifier tilted{vec({1, 1}) / std::sqrt(2.0), 0.0};
  const LinearClassifier negated{-tilted.weight, 0.0};
  CHECK(accuracy(negated, data) == Catch::Approx(1.0 - accuracy(tilted, data)).margin(1e-12));

  // Every score is positive: 60 of 100 labels are 1.
  LabeledSet skewed;
  skewed.representations = RowMatrix::Constant(100, 2, 1.0);
  for (int i = 0; i < 100; ++i) skewed.labels.push_back(i < 60 ? 1 : 0);
  CHECK(accuracy(perfect, skewed) == 0.6);
}

TEST_CASE("trained probe matches the analytic separator on separated clusters") {
  const auto data = two_clusters(3.0, 0.5, 200, 7);
  // Oracle: the analytic separator (1,0) already exceeds 0.99.
  REQUIRE(accuracy(LinearClassifier{vec({1, 0}), 0.0}, data) > 0.99);
  for (Solver solver : {Solver::dual_cd, Solver::sgd}) {
    TrainConfig config;
    config.solver = solver;
    config.seed = 7;
    const auto clf = train_linear(data, config);
    CHECK(clf.train_accuracy > 0.99);
    CHECK(clf.weight.norm() == Catch::Approx(1.0).margin(1e-12));
  }
}

TEST_CASE("random labels on one cluster are not learnable") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  LabeledSet data;
  data.representations.resize(1000, 2);
  for (long i = 0; i < 1000; ++i) {
    data.representations(i, 0) = normal(rng);
    data.representations(i, 1) = normal(rng);
    data.labels.push_back(std::bernoulli_distribution(0.5)(rng) ? 1 : 0);
  }
  const auto clf = train_linear(data, TrainConfig{});
  // Oracle: best of many random directions stays near the majority rate.
  double best_random = 0.0;
  for (int t = 0; t < 200; ++t) {
    const RepVector w = gaussian_vector(2, rng).normalized();
    best_random = std::max(best_random, accuracy(LinearClassifier{w, 0.0}, data));
  }
  CHECK(best_random <= 0.60);
  CHECK(clf.train_accuracy <= 0.60);
}

TEST_CASE("probe on concept-removed data sits at the majority rate") {
  auto spec = make_planted_spec(16, 1, 3.0, 0.5, 4000, 5);
  const auto data = generate(spec);
  const LabeledSet removed{spec.planted_basis.project_rows_nullspace(data.representations), data.labels};
  const auto clf = train_linear(removed, TrainConfig{});
  CHECK(std::abs(clf.train_accuracy - majority_rate(data.labels)) <= 0.02);
}

TEST_CASE("labeled set validation") {
  LabeledSet one_class{RowMatrix::Ones(4, 2), {1, 1, 1, 1}};
  try {
    train_linear(one_class);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_input);
  }
  LabeledSet short_labels{RowMatrix::Ones(4, 2), {1, 0}};
  CHECK_THROWS_AS(train_linear(short_labels), Error);
  LabeledSet nan{RowMatrix::Ones(2, 2), {1, 0}};
  nan.representations(0, 0) = std::nan("");
  try {
    train_linear(nan);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_finite);
  }
}

TEST_CASE("INLP with one planted direction") {
  auto spec = make_planted_spec(16, 1, 3.0, 0.5, 4000, 2);
  const auto data = generate(spec);
  InlpConfig config;
  config.m = 2;
  const auto s = run_inlp(data, config);
  REQUIRE(s.m() == 2);
  REQUIRE(s.per_iteration_accuracy.size() == 2);
  CHECK(max_angle_deg(spec.planted_basis, s.basis.leading(1)) < 5.0);
  CHECK(std::abs(s.per_iteration_accuracy[1] - majority_rate(data.labels)) <= 0.02);
  CHECK(s.basis.orthonormality_error() < 1e-9);
  CHECK(s.source == SubspaceSource::trained);
}

TEST_CASE("INLP recovers four planted directions in 768 dimensions") {
  auto spec = make_planted_spec(768, 4, 3.0, 0.5, 4000, 1);
  const auto data = generate(spec);
  InlpConfig config;
  config.m = 8;
  config.train.seed = 1;
  config.train.regularization = 0.1;
  const auto s = run_inlp(data, config);
  REQUIRE(s.m() == 8);
  CHECK(max_angle_deg(spec.planted_basis, s.basis.leading(4)) < 5.0);
  CHECK(s.basis.orthonormality_error() < 1e-9);
}

TEST_CASE("INLP accuracy decreases across iterations") {
  for (std::uint64_t seed : {21, 22, 23}) {
    const auto data = generate(make_planted_spec(64, 4, 3.0, 0.5, 2000, seed));
    InlpConfig config;
    config.train.seed = seed;
    const auto s = run_inlp(data, config);
    for (std::size_t i = 1; i < s.per_iteration_accuracy.size(); ++i) {
      CHECK(s.per_iteration_accuracy[i] <= s.per_iteration_accuracy[i - 1] + 0.03);
    }
  }
}

TEST_CASE("INLP is deterministic given the seed") {
  const auto data = generate(make_planted_spec(32, 2, 3.0, 0.5, 500, 4));
  InlpConfig config;
  config.m = 4;
  config.train.seed = 9;
  const auto a = run_inlp(data, config);
  const auto b = run_inlp(data, config);
  CHECK(a.basis.rows() == b.basis.rows());
  CHECK(a.per_iteration_accuracy == b.per_iteration_accuracy);
}

TEST_CASE("INLP argument errors") {
  const auto data = generate(make_planted_spec(4, 1, 3.0, 0.5, 50, 1));
  InlpConfig config;
  config.m = 5;
  CHECK_THROWS_AS(run_inlp(data, config), Error);
  config.m = 0;
  CHECK_THROWS_AS(run_inlp(data, config), Error);
}

TEST_CASE("INLP reports an exhausted concept") {
  // All samples lie on one axis: the second iteration sees the zero matrix.
  LabeledSet line;
  line.representations = RowMatrix::Zero(6, 2);
  for (long i = 0; i < 6; ++i) {
    line.representations(i, 0) = i % 2 == 0 ? 1.0 + static_cast<double>(i) : -1.0 - static_cast<double>(i);
    line.labels.push_back(i % 2 == 0 ? 1 : 0);
  }
  InlpConfig config;
  config.m = 2;
  try {
    run_inlp(line, config);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::concept_exhausted);
  }
}

TEST_CASE("INLP early stop halts at the majority baseline") {
  auto spec = make_planted_spec(4, 1, 3.0, 0.5, 4000, 6);
  const auto data = generate(spec);
  InlpConfig config;
  config.m = 4;
  config.early_stop = true;
  const auto s = run_inlp(data, config);
  CHECK(s.m() == 1);
  CHECK(s.per_iteration_accuracy.size() == 1);
}

TEST_CASE("stratified split keeps both classes in proportion") {
  const auto data = two_clusters(1.0, 1.0, 100, 1);
  auto [train, test] = stratified_split(data, 0.2, 3);
  CHECK(test.size() == 40);
  CHECK(train.size() == 160);
  CHECK(count_positive(test.labels) == 20);
  CHECK(count_positive(train.labels) == 80);
  auto [train2, test2] = stratified_split(data, 0.2, 3);
  CHECK(test.representations == test2.representations);
}

TEST_CASE("probe curve follows a decreasing signal schedule") {
  std::vector<LabeledSet> layers;
  for (double signal : {2.0, 1.0, 0.5, 0.25}) {
    auto spec = make_planted_spec(16, 1, signal, 1.0, 1000, 12, NoiseModel::isotropic);
    layers.push_back(generate(spec));
  }
  const auto curve = probe_curve(layers, TrainConfig{});
  REQUIRE(curve.size() == 4);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    CHECK(curve[i].heldout_accuracy < curve[i - 1].heldout_accuracy);
  }
}

TEST_CASE("probe curve on shuffled labels stays at the majority rate") {
  std::vector<LabeledSet> layers;
  std::mt19937_64 rng(8);
  for (int layer = 0; layer < 4; ++layer) {
    auto data = generate(make_planted_spec(16, 1, 2.0, 1.0, 1000, 30 + layer, NoiseModel::isotropic));
    std::shuffle(data.labels.begin(), data.labels.end(), rng);
    layers.push_back(std::move(data));
  }
  for (const auto& p : probe_curve(layers, TrainConfig{})) {
    CHECK(std::abs(p.heldout_accuracy - p.heldout_majority) <= 0.05);
  }
}

TEST_CASE("random subspace of full rank has a zero nullspace projector") {
  const auto s = random_subspace(8, 8, 1);
  CHECK(s.basis.nullspace_projector().cwiseAbs().maxCoeff() < 1e-12);
  CHECK(s.source == SubspaceSource::random);
  CHECK(s.per_iteration_accuracy.empty());
}

TEST_CASE("random subspace is reproducible and seed dependent") {
  const auto a = random_subspace(768, 8, 42);
  const auto b = random_subspace(768, 8, 42);
  CHECK(a.basis.rows() == b.basis.rows());
  const auto c = random_subspace(768, 8, 43);
  CHECK(principal_angles(a.basis, c.basis).front() > 0.0);
  CHECK_THROWS_AS(random_subspace(4, 5, 1), Error);
}
