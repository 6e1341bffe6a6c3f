#pragma once

// Bias-free linear hinge-loss classifiers, the building block INLP iterates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "alterrep/subspace.hpp"

namespace alterrep {

/// SIGN(x) = 1 if x >= 0 else 0.
inline int sign_bit(double x) noexcept { return x >= 0.0 ? 1 : 0; }

/// n x d representations with one binary concept label per row
/// (1 = concept-positive).
struct LabeledSet {
  RowMatrix representations;
  std::vector<std::uint8_t> labels;

  long size() const noexcept { return representations.rows(); }
  long dim() const noexcept { return representations.cols(); }
};

inline std::size_t count_positive(const std::vector<std::uint8_t>& labels) {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

inline double majority_rate(const std::vector<std::uint8_t>& labels) {
  require(!labels.empty(), ErrorCode::invalid_argument, "majority_rate: no labels");
  const double pos = static_cast<double>(count_positive(labels)) / static_cast<double>(labels.size());
  return std::max(pos, 1.0 - pos);
}

inline void validate(const LabeledSet& data) {
  require(data.labels.size() == static_cast<std::size_t>(data.size()), ErrorCode::dimension_mismatch,
          "labeled set: " + std::to_string(data.labels.size()) + " labels for " +
              std::to_string(data.size()) + " rows");
  require(data.size() >= 2, ErrorCode::invalid_argument, "labeled set needs at least 2 rows");
  require(data.dim() >= 1, ErrorCode::invalid_argument, "labeled set has zero dimension");
  for (auto label : data.labels) {
    require(label <= 1, ErrorCode::invalid_argument, "labels must be 0 or 1");
  }
  const auto pos = count_positive(data.labels);
  require(pos > 0 && pos < data.labels.size(), ErrorCode::degenerate_input,
          "labeled set contains a single class");
  require_finite(data.representations, "labeled set");
}

enum class Solver {
  /// Dual coordinate descent on the L2-regularized hinge loss; converges to
  /// the exact soft-margin optimum.
  dual_cd,
  /// Epoch-ordered stochastic subgradient descent with 1/sqrt(epoch) decay.
  sgd,
};

struct TrainConfig {
  Solver solver = Solver::dual_cd;
  /// Upper bound on dual_cd passes over the data.
  int max_passes = 1000;
  int epochs = 50;              // sgd only
  double learning_rate = 0.01;  // sgd only
  /// L2 strength lambda; dual_cd uses box constraint C = 1 / (lambda * n).
  double regularization = 1e-4;
  /// dual_cd stops once the projected-gradient spread falls below this.
  double tolerance = 1e-3;
  std::uint64_t seed = 0;
};

struct LinearClassifier {
  RepVector weight;  // unit norm
  double train_accuracy = 0.0;
};

template <typename Derived>
int predict(const LinearClassifier& clf, const Eigen::MatrixBase<Derived>& h) {
  require_same_dim(clf.weight.size(), h.size(), "predict");
  return sign_bit(clf.weight.dot(h));
}

inline double accuracy(const LinearClassifier& clf, const LabeledSet& data) {
  require(data.size() > 0, ErrorCode::invalid_argument, "accuracy: empty data");
  require_same_dim(clf.weight.size(), data.dim(), "accuracy");
  const Eigen::VectorXd scores = data.representations * clf.weight;
  long correct = 0;
  for (long i = 0; i < scores.size(); ++i) {
    correct += sign_bit(scores(i)) == data.labels[static_cast<std::size_t>(i)] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

namespace detail {

inline void check_train_config(const TrainConfig& config) {
  require(config.epochs >= 1, ErrorCode::invalid_argument, "epochs must be >= 1");
  require(config.max_passes >= 1, ErrorCode::invalid_argument, "max_passes must be >= 1");
  require(config.learning_rate > 0.0, ErrorCode::invalid_argument, "learning rate must be > 0");
  require(config.regularization > 0.0, ErrorCode::invalid_argument, "regularization must be > 0");
  require(config.tolerance > 0.0, ErrorCode::invalid_argument, "tolerance must be > 0");
}

inline RepVector sgd_hinge(const LabeledSet& data, const TrainConfig& config) {
  const long n = data.size();
  RepVector w = RepVector::Zero(data.dim());
  std::vector<long> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0L);
  std::mt19937_64 rng(config.seed);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double rate = config.learning_rate / std::sqrt(static_cast<double>(epoch));
    const double shrink = 1.0 - rate * config.regularization;
    for (long i : order) {
      const auto x = data.representations.row(i);
      const double target = data.labels[static_cast<std::size_t>(i)] == 1 ? 1.0 : -1.0;
      const double margin = target * x.dot(w.transpose());
      w *= shrink;
      if (margin < 1.0) w.noalias() += (rate * target) * x.transpose();
    }
  }
  return w;
}

// Dual coordinate descent for min 1/2 |w|^2 + C sum max(0, 1 - y_i w.x_i),
// without a bias term.
inline RepVector dual_cd_hinge(const LabeledSet& data, const TrainConfig& config) {
  const long n = data.size();
  const double box = 1.0 / (config.regularization * static_cast<double>(n));
  RepVector w = RepVector::Zero(data.dim());
  std::vector<double> dual(static_cast<std::size_t>(n), 0.0);
  std::vector<double> diag(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) diag[static_cast<std::size_t>(i)] = data.representations.row(i).squaredNorm();

  std::vector<long> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0L);
  std::mt19937_64 rng(config.seed);

  for (int pass = 0; pass < config.max_passes; ++pass) {
    std::shuffle(order.begin(), order.end(), rng);
    double pg_max = -std::numeric_limits<double>::infinity();
    double pg_min = std::numeric_limits<double>::infinity();
    for (long i : order) {
      const auto idx = static_cast<std::size_t>(i);
      if (diag[idx] <= 0.0) continue;
      const auto x = data.representations.row(i);
      const double target = data.labels[idx] == 1 ? 1.0 : -1.0;
      const double grad = target * x.dot(w.transpose()) - 1.0;
      double projected = grad;
      if (dual[idx] == 0.0) {
        projected = std::min(grad, 0.0);
      } else if (dual[idx] == box) {
        projected = std::max(grad, 0.0);
      }
      pg_max = std::max(pg_max, projected);
      pg_min = std::min(pg_min, projected);
      if (projected != 0.0) {
        const double previous = dual[idx];
        dual[idx] = std::clamp(previous - grad / diag[idx], 0.0, box);
        w.noalias() += ((dual[idx] - previous) * target) * x.transpose();
      }
    }
    if (pg_max - pg_min < config.tolerance) break;
  }
  return w;
}

}  // namespace detail

/// Raw (unnormalized) hinge-loss weight. May be the zero vector when the
/// data carry no usable signal.
inline RepVector train_hinge_weight(const LabeledSet& data, const TrainConfig& config) {
  detail::check_train_config(config);
  return config.solver == Solver::sgd ? detail::sgd_hinge(data, config) : detail::dual_cd_hinge(data, config);
}

inline LinearClassifier train_linear(const LabeledSet& data, const TrainConfig& config = {}) {
  validate(data);
  RepVector w = train_hinge_weight(data, config);
  const double norm = w.norm();
  require(norm > 0.0 && std::isfinite(norm), ErrorCode::degenerate_input,
          "training produced a zero weight vector");
  LinearClassifier clf{w / norm, 0.0};
  clf.train_accuracy = accuracy(clf, data);
  return clf;
}

}  // namespace alterrep
