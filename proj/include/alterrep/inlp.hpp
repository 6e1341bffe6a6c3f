#pragma once

// Iterative nullspace projection: repeatedly train a linear concept probe,
// remove its direction from the data, and keep the mutually orthogonal
// directions as the concept subspace.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "alterrep/probe.hpp"
#include "alterrep/random.hpp"
#include "alterrep/subspace.hpp"

namespace alterrep {

enum class SubspaceSource : std::uint8_t { trained = 0, random = 1 };

inline std::string_view to_string(SubspaceSource s) {
  return s == SubspaceSource::trained ? "trained" : "random";
}

struct ConceptSubspace {
  OrthonormalBasis basis;
  /// One entry per direction for trained subspaces; empty for random ones.
  std::vector<double> per_iteration_accuracy;
  std::string concept_name;
  SubspaceSource source = SubspaceSource::trained;

  long m() const noexcept { return basis.size(); }
  long dim() const noexcept { return basis.dim(); }
};

struct InlpConfig {
  long m = 8;
  TrainConfig train;
  /// Halt once an iteration's accuracy is within `early_stop_margin` of the
  /// majority rate.
  bool early_stop = false;
  double early_stop_margin = 0.02;
  int max_retries = 3;
  std::string concept_name = "concept";
};

inline ConceptSubspace run_inlp(const LabeledSet& data, const InlpConfig& config) {
  validate(data);
  require(config.m >= 1, ErrorCode::invalid_argument, "m must be >= 1");
  require(config.m <= data.dim(), ErrorCode::invalid_argument,
          "m (" + std::to_string(config.m) + ") exceeds dimension (" + std::to_string(data.dim()) + ")");

  const double majority = majority_rate(data.labels);
  ConceptSubspace out;
  out.basis = OrthonormalBasis(data.dim());
  out.concept_name = config.concept_name;
  out.source = SubspaceSource::trained;

  for (long iteration = 0; iteration < config.m; ++iteration) {
    LabeledSet projected{out.basis.project_rows_nullspace(data.representations), data.labels};

    RepVector direction;
    for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
      TrainConfig train = config.train;
      train.seed = attempt == 0 && iteration == 0
                       ? config.train.seed
                       : derive_seed(config.train.seed, {static_cast<std::uint64_t>(iteration),
                                                         static_cast<std::uint64_t>(attempt)});
      const RepVector raw = train_hinge_weight(projected, train);
      const double raw_norm = raw.norm();
      if (!(raw_norm > 0.0)) continue;
      RepVector residual = orthogonalize_against(out.basis, raw);
      const double residual_norm = residual.norm();
      if (residual_norm < kDependenceThreshold * raw_norm) continue;
      direction = residual / residual_norm;
      break;
    }
    if (direction.size() == 0) {
      fail(ErrorCode::concept_exhausted,
           "no independent direction found at iteration " + std::to_string(iteration + 1) + " after " +
               std::to_string(config.max_retries) + " retries");
    }

    const double acc = accuracy(LinearClassifier{direction, 0.0}, projected);
    if (config.early_stop && acc <= majority + config.early_stop_margin) {
      if (out.basis.empty()) {
        fail(ErrorCode::concept_exhausted, "first iteration is already at the majority baseline");
      }
      break;
    }
    out.basis = out.basis.with_direction(direction);
    out.per_iteration_accuracy.push_back(acc);
  }
  return out;
}

/// 80/20-style split stratified by label; deterministic given the seed.
inline std::pair<LabeledSet, LabeledSet> stratified_split(const LabeledSet& data, double test_fraction,
                                                          std::uint64_t seed) {
  validate(data);
  require(test_fraction > 0.0 && test_fraction < 1.0, ErrorCode::invalid_argument,
          "test fraction must lie in (0, 1)");
  std::vector<long> by_class[2];
  for (long i = 0; i < data.size(); ++i) by_class[data.labels[static_cast<std::size_t>(i)]].push_back(i);

  std::mt19937_64 rng(seed);
  std::vector<long> train_rows, test_rows;
  for (auto& rows : by_class) {
    std::shuffle(rows.begin(), rows.end(), rng);
    auto n_test = static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(rows.size())));
    n_test = std::clamp<std::size_t>(n_test, 1, rows.size() - 1);
    test_rows.insert(test_rows.end(), rows.begin(), rows.begin() + static_cast<long>(n_test));
    train_rows.insert(train_rows.end(), rows.begin() + static_cast<long>(n_test), rows.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());

  auto gather = [&](const std::vector<long>& rows) {
    LabeledSet part;
    part.representations.resize(static_cast<long>(rows.size()), data.dim());
    part.labels.reserve(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      part.representations.row(static_cast<long>(k)) = data.representations.row(rows[k]);
      part.labels.push_back(data.labels[static_cast<std::size_t>(rows[k])]);
    }
    return part;
  };
  return {gather(train_rows), gather(test_rows)};
}

struct ProbeCurvePoint {
  long layer = 0;
  double heldout_accuracy = 0.0;
  double train_accuracy = 0.0;
  double heldout_majority = 0.0;
};

/// First-iteration probe accuracy per layer, evaluated on a stratified
/// 80/20 held-out split.
inline std::vector<ProbeCurvePoint> probe_curve(std::span<const LabeledSet> layers, const TrainConfig& config,
                                                double test_fraction = 0.2) {
  std::vector<ProbeCurvePoint> curve;
  curve.reserve(layers.size());
  for (std::size_t layer = 0; layer < layers.size(); ++layer) {
    auto [train, test] = stratified_split(layers[layer], test_fraction, derive_seed(config.seed, {layer}));
    const LinearClassifier clf = train_linear(train, config);
    curve.push_back({static_cast<long>(layer), accuracy(clf, test), clf.train_accuracy,
                     majority_rate(test.labels)});
  }
  return curve;
}

/// m standard-Gaussian directions in R^d, orthonormalized.
inline ConceptSubspace random_subspace(long d, long m, std::uint64_t seed) {
  require(d >= 1, ErrorCode::invalid_argument, "dimension must be >= 1");
  require(m >= 1 && m <= d, ErrorCode::invalid_argument,
          "random subspace needs 1 <= m <= d (m=" + std::to_string(m) + ", d=" + std::to_string(d) + ")");
  std::mt19937_64 rng(seed);
  std::vector<RepVector> draws;
  draws.reserve(static_cast<std::size_t>(m));
  for (long i = 0; i < m; ++i) draws.push_back(gaussian_vector(d, rng));
  GramSchmidtResult gs = gram_schmidt(std::span<const RepVector>(draws));
  // Gaussian draws are independent with probability one; redraw on the rare miss.
  while (gs.basis.size() < m) {
    draws.push_back(gaussian_vector(d, rng));
    gs = gram_schmidt(std::span<const RepVector>(draws));
  }
  ConceptSubspace out;
  out.basis = gs.basis.leading(m);
  out.concept_name = "random";
  out.source = SubspaceSource::random;
  return out;
}

}  // namespace alterrep
