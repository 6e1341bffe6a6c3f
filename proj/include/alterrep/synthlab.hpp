#pragma once

// Planted-feature laboratory: synthetic representation sets with a known
// concept span, and a linear toy predictor standing in for a downstream
// decision that reads the concept.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "alterrep/counterfactual.hpp"
#include "alterrep/inlp.hpp"
#include "alterrep/metrics.hpp"
#include "alterrep/probe.hpp"
#include "alterrep/random.hpp"
#include "alterrep/subspace.hpp"

namespace alterrep {

enum class NoiseModel { complement, isotropic };

struct PlantedSpec {
  long d = 64;
  OrthonormalBasis planted_basis;
  double signal = 3.0;
  double noise_sigma = 0.5;
  long n_per_class = 2000;
  std::uint64_t seed = 0;
  NoiseModel noise = NoiseModel::complement;
  /// Relative frequency of each planted direction in the mixes; empty means
  /// 3 * 2^(k-2), 2^(k-2), ..., 2, 1 (12, 4, 2, 1 for k = 4). Unequal
  /// frequencies keep every direction decodable by a bias-free probe once the
  /// earlier ones are removed (equal frequencies make the residual class
  /// means vanish), and a dominant leading direction keeps the probe
  /// accuracy of each later iteration above the noise-fitting floor.
  std::vector<double> direction_weights;
  /// Mixing weights are Dirichlet(mix_concentration * k * p). Zero selects
  /// the vertex limit: each sample sits on one planted direction drawn with
  /// probability p.
  double mix_concentration = 0.0;

  long k() const noexcept { return planted_basis.size(); }
};

inline void validate(const PlantedSpec& spec) {
  require(spec.d >= 1, ErrorCode::invalid_argument, "planted spec: d must be >= 1");
  require(spec.planted_basis.size() >= 1, ErrorCode::invalid_argument, "planted spec: no planted directions");
  require_same_dim(spec.d, spec.planted_basis.dim(), "planted spec");
  require(spec.signal >= 0.0, ErrorCode::invalid_argument, "planted spec: signal must be >= 0");
  require(spec.noise_sigma >= 0.0, ErrorCode::invalid_argument, "planted spec: noise_sigma must be >= 0");
  require(spec.mix_concentration >= 0.0, ErrorCode::invalid_argument,
          "planted spec: mix_concentration must be >= 0");
  require(spec.direction_weights.empty() ||
              static_cast<long>(spec.direction_weights.size()) == spec.planted_basis.size(),
          ErrorCode::invalid_argument, "planted spec: one direction weight per planted direction");
  for (double w : spec.direction_weights) {
    require(w > 0.0 && std::isfinite(w), ErrorCode::invalid_argument, "planted spec: direction weights must be > 0");
  }
  require(spec.n_per_class >= 1, ErrorCode::invalid_argument, "planted spec: n_per_class must be >= 1");
}

/// k orthonormal directions in R^d drawn from the seed.
inline OrthonormalBasis random_planted_basis(long d, long k, std::uint64_t seed) {
  return random_subspace(d, k, derive_seed(seed, {0x706c616eULL})).basis;
}

/// Convenience: spec with a random planted span.
inline PlantedSpec make_planted_spec(long d, long k, double signal, double noise_sigma, long n_per_class,
                                     std::uint64_t seed, NoiseModel noise = NoiseModel::complement) {
  PlantedSpec spec;
  spec.d = d;
  spec.planted_basis = random_planted_basis(d, k, seed);
  spec.signal = signal;
  spec.noise_sigma = noise_sigma;
  spec.n_per_class = n_per_class;
  spec.seed = seed;
  spec.noise = noise;
  return spec;
}

inline std::vector<double> direction_probabilities(const PlantedSpec& spec) {
  std::vector<double> p = spec.direction_weights;
  if (p.empty()) {
    for (long j = spec.k() - 2; j >= 0; --j) p.push_back(std::ldexp(1.0, static_cast<int>(j)));
    p.insert(p.begin(), spec.k() == 1 ? 1.0 : 3.0 * p.front());
  }
  const double total = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& x : p) x /= total;
  return p;
}

/// Rows alternate label 1, 0, 1, 0, ... Each row is
///   (+1 or -1) * signal * (convex mix of planted directions) + noise,
/// with the sign given by the label. Complement noise lives only in the
/// orthogonal complement of the planted span.
inline LabeledSet generate(const PlantedSpec& spec) {
  validate(spec);
  const long n = 2 * spec.n_per_class;
  const long k = spec.k();
  const std::vector<double> probabilities = direction_probabilities(spec);
  std::mt19937_64 rng(spec.seed);
  std::discrete_distribution<long> vertex(probabilities.begin(), probabilities.end());
  std::vector<std::gamma_distribution<double>> gaps;
  if (spec.mix_concentration > 0.0) {
    for (double p : probabilities) gaps.emplace_back(spec.mix_concentration * static_cast<double>(k) * p, 1.0);
  }
  std::normal_distribution<double> normal(0.0, 1.0);

  LabeledSet out;
  out.representations.resize(n, spec.d);
  out.labels.resize(static_cast<std::size_t>(n));
  const RowMatrix& planted = spec.planted_basis.rows();
  Eigen::VectorXd mix(k);
  RepVector noise(spec.d);

  for (long i = 0; i < n; ++i) {
    const std::uint8_t label = i % 2 == 0 ? 1 : 0;
    if (gaps.empty()) {
      mix.setZero();
      mix(vertex(rng)) = 1.0;
    } else {
      for (long j = 0; j < k; ++j) mix(j) = gaps[static_cast<std::size_t>(j)](rng);
      const double total = mix.sum();
      if (total > 0.0) {
        mix /= total;
      } else {
        mix.setZero();
        mix(vertex(rng)) = 1.0;
      }
    }
    for (long j = 0; j < spec.d; ++j) noise(j) = spec.noise_sigma * normal(rng);
    if (spec.noise == NoiseModel::complement) noise = spec.planted_basis.project_nullspace(noise);

    const double sign = label == 1 ? 1.0 : -1.0;
    out.representations.row(i) = (sign * spec.signal) * (planted.transpose() * mix).transpose() + noise.transpose();
    out.labels[static_cast<std::size_t>(i)] = label;
  }
  return out;
}

struct ToyPredictor {
  RepVector readout;             // unit norm
  double concept_weight = 0.0;   // norm of the readout's planted-span component

  int decide(const RepVector& h) const { return sign_bit(readout.dot(h)); }
};

inline ToyPredictor make_predictor(const RepVector& readout, const OrthonormalBasis& planted) {
  require_same_dim(planted.dim(), readout.size(), "make_predictor");
  const double norm = readout.norm();
  require(norm > 0.0 && std::isfinite(norm), ErrorCode::invalid_argument, "predictor readout must be nonzero");
  ToyPredictor p{readout / norm, 0.0};
  p.concept_weight = planted.project_rowspace(p.readout).norm();
  return p;
}

/// Readout along the planted class-mean direction (the analytic separator).
inline ToyPredictor concept_predictor(const PlantedSpec& spec) {
  const RepVector mean_direction = spec.planted_basis.rows().colwise().sum().transpose();
  return make_predictor(mean_direction, spec.planted_basis);
}

struct InterventionEffect {
  double flip_rate_concept = 0.0;
  double flip_rate_random = 0.0;
  long evaluated = 0;
  bool degenerate_predictor = false;
};

namespace detail {

inline double flip_rate(const LabeledSet& data, const ToyPredictor& predictor, const ConceptSubspace& subspace,
                        double alpha) {
  // Concept-negative rows under the positive counterfactual: the analog of
  // pushing a representation outside the concept to read as inside it.
  const InterventionConfig config{Polarity::positive, alpha, -1};
  long flipped = 0, total = 0;
  for (long i = 0; i < data.size(); ++i) {
    if (data.labels[static_cast<std::size_t>(i)] != 0) continue;
    const RepVector h = data.representations.row(i).transpose();
    const RepVector cf = counterfactual(h, subspace, config).vector;
    flipped += predictor.decide(h) != predictor.decide(cf) ? 1 : 0;
    ++total;
  }
  return total == 0 ? 0.0 : static_cast<double>(flipped) / static_cast<double>(total);
}

}  // namespace detail

/// Fraction of concept-negative samples whose predictor decision flips under
/// the positive counterfactual, for `subspace` and for a seed-matched random
/// subspace of the same dimensionality.
inline InterventionEffect intervention_effect(const PlantedSpec& spec, const ToyPredictor& predictor,
                                              const ConceptSubspace& subspace, double alpha) {
  validate(spec);
  require_same_dim(spec.d, subspace.dim(), "intervention_effect");
  require_same_dim(spec.d, predictor.readout.size(), "intervention_effect predictor");
  const LabeledSet data = generate(spec);
  const ConceptSubspace baseline = random_subspace(spec.d, subspace.m(), spec.seed);

  InterventionEffect effect;
  effect.degenerate_predictor = predictor.concept_weight < 1e-12;
  effect.flip_rate_concept = detail::flip_rate(data, predictor, subspace, alpha);
  effect.flip_rate_random = detail::flip_rate(data, predictor, baseline, alpha);
  effect.evaluated = spec.n_per_class;
  return effect;
}

/// Scores synthetic samples as two-way agreement trials so the standard
/// report machinery applies: the "correct" option is the sample's own
/// concept label, with p_correct = logistic(y * readout.h) for y = +1 / -1.
/// Rows with label 1 get condition "concept_positive", the rest
/// "concept_negative". Without `intervention` the records are baselines.
inline std::vector<metrics::AgreementRecord> synthetic_records(
    const LabeledSet& data, const ToyPredictor& predictor, const ConceptSubspace* subspace,
    const std::optional<InterventionConfig>& intervention, long layer = 0) {
  validate(data);
  require_same_dim(predictor.readout.size(), data.dim(), "synthetic_records");
  require(!intervention || subspace != nullptr, ErrorCode::invalid_argument,
          "synthetic_records: intervention without a subspace");
  if (subspace) require_same_dim(subspace->dim(), data.dim(), "synthetic_records subspace");

  auto logistic = [](double z) { return z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); };
  std::vector<metrics::AgreementRecord> out;
  out.reserve(static_cast<std::size_t>(data.size()));
  for (long i = 0; i < data.size(); ++i) {
    RepVector h = data.representations.row(i).transpose();
    metrics::AgreementRecord r;
    if (intervention) {
      h = counterfactual(h, *subspace, *intervention).vector;
      r.polarity = std::string(to_string(intervention->polarity));
      r.alpha = intervention->alpha;
      r.m = subspace->m();
      r.subspace_source = std::string(to_string(subspace->source));
    }
    const std::uint8_t label = data.labels[static_cast<std::size_t>(i)];
    const double z = (label == 1 ? 1.0 : -1.0) * predictor.readout.dot(h);
    r.item_id = "synth-" + std::to_string(i);
    r.condition = label == 1 ? "concept_positive" : "concept_negative";
    r.subject_number = "-";
    r.layer = layer;
    r.p_correct = logistic(z);
    r.p_incorrect = logistic(-z);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace alterrep
