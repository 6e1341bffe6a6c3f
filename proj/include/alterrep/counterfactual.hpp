#pragma once

// Counterfactual representations by selective mirror-image reflection across
// the directions of a concept subspace, plus amnesic (nullspace) projection.
//
//   h^- = h^N + alpha * sum_w (-1)^SIGN(w.h)     h^w
//   h^+ = h^N + alpha * sum_w (-1)^(1-SIGN(w.h)) h^w
//
// With orthonormal directions, w_j . h^- = -alpha |w_j . h| and
// w_j . h^+ = +alpha |w_j . h|, so every direction classifies the result into
// the requested class unless w_j . h is exactly zero.

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "alterrep/inlp.hpp"
#include "alterrep/probe.hpp"
#include "alterrep/subspace.hpp"

namespace alterrep {

enum class Polarity { positive, negative };

inline std::string_view to_string(Polarity p) { return p == Polarity::positive ? "positive" : "negative"; }

inline Polarity parse_polarity(std::string_view text) {
  if (text == "positive" || text == "+") return Polarity::positive;
  if (text == "negative" || text == "-") return Polarity::negative;
  fail(ErrorCode::invalid_argument, "unknown polarity '" + std::string(text) + "'");
}

struct InterventionConfig {
  Polarity polarity = Polarity::positive;
  double alpha = 4.0;
  /// Layer to intervene at; -1 when the representations are not layer-indexed.
  int target_layer = -1;
};

struct CounterfactualResult {
  RepVector vector;
  /// Directions whose component was reflected (sign changed).
  std::vector<long> flipped_directions;
  /// Directions with w.h == 0 exactly; their guarantee is non-strict.
  std::vector<long> nonstrict_directions;
  bool sign_check = false;
};

namespace detail {

inline bool satisfies_polarity(double projection, Polarity polarity) {
  return polarity == Polarity::positive ? projection > 0.0 : projection < 0.0;
}

}  // namespace detail

inline CounterfactualResult counterfactual(const RepVector& h, const ConceptSubspace& subspace,
                                           const InterventionConfig& config) {
  const OrthonormalBasis& basis = subspace.basis;
  require_same_dim(basis.dim(), h.size(), "counterfactual");
  require(config.alpha > 0.0 && std::isfinite(config.alpha), ErrorCode::invalid_argument,
          "alpha must be a positive finite scalar");

  const RepVector coords = basis.rows() * h;
  const RepVector null_component = h - basis.rows().transpose() * coords;

  CounterfactualResult out;
  RepVector signed_coords(coords.size());
  for (long j = 0; j < coords.size(); ++j) {
    const int sign = sign_bit(coords(j));
    const int exponent = config.polarity == Polarity::negative ? sign : 1 - sign;
    const double multiplier = exponent == 1 ? -1.0 : 1.0;
    signed_coords(j) = config.alpha * multiplier * coords(j);
    if (coords(j) == 0.0) {
      out.nonstrict_directions.push_back(j);
    } else if (multiplier < 0.0) {
      out.flipped_directions.push_back(j);
    }
  }
  out.vector = null_component + basis.rows().transpose() * signed_coords;

  const RepVector after = basis.rows() * out.vector;
  out.sign_check = true;
  for (long j = 0; j < after.size(); ++j) {
    if (coords(j) == 0.0) {
      if (std::abs(after(j)) > kOrthoTolerance) out.sign_check = false;
    } else if (!detail::satisfies_polarity(after(j), config.polarity)) {
      out.sign_check = false;
    }
  }
  return out;
}

/// Removes the concept: P_N h.
inline RepVector amnesic(const RepVector& h, const ConceptSubspace& subspace) {
  require_same_dim(subspace.dim(), h.size(), "amnesic");
  return subspace.basis.project_nullspace(h);
}

/// Worker count for batch operations: AREP_THREADS when set (capped at 256,
/// not at the core count), otherwise the hardware concurrency.
inline unsigned batch_threads() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("AREP_THREADS")) {
    const long requested = std::strtol(env, nullptr, 10);
    if (requested >= 1) return static_cast<unsigned>(std::min<long>(requested, 256));
  }
  return hw;
}

struct BatchCounterfactual {
  RowMatrix vectors;
  std::vector<CounterfactualResult> rows;  // vector field left empty
};

/// Row-wise counterfactuals. Output is independent of the thread count.
inline BatchCounterfactual counterfactual_batch(const RowMatrix& samples, const ConceptSubspace& subspace,
                                                const InterventionConfig& config) {
  require_same_dim(subspace.dim(), samples.cols(), "counterfactual_batch");
  require(config.alpha > 0.0 && std::isfinite(config.alpha), ErrorCode::invalid_argument,
          "alpha must be a positive finite scalar");
  const long n = samples.rows();
  BatchCounterfactual out;
  out.vectors.resize(n, samples.cols());
  out.rows.resize(static_cast<std::size_t>(n));

  auto work = [&](long begin, long end) {
    for (long i = begin; i < end; ++i) {
      CounterfactualResult r = counterfactual(samples.row(i).transpose(), subspace, config);
      out.vectors.row(i) = r.vector.transpose();
      r.vector = RepVector();
      out.rows[static_cast<std::size_t>(i)] = std::move(r);
    }
  };

  const unsigned threads = std::min<unsigned>(batch_threads(), static_cast<unsigned>(std::max<long>(n, 1)));
  if (threads <= 1) {
    work(0, n);
    return out;
  }
  std::vector<std::jthread> pool;
  const long chunk = (n + threads - 1) / threads;
  for (unsigned t = 0; t < threads; ++t) {
    const long begin = static_cast<long>(t) * chunk;
    const long end = std::min(n, begin + chunk);
    if (begin < end) pool.emplace_back(work, begin, end);
  }
  pool.clear();  // join before `out` is moved out
  return out;
}

struct SignGuaranteeReport {
  long samples = 0;
  /// Strict-sign failures beyond the slack, counted per (sample, direction).
  long violations = 0;
  /// (sample, direction) pairs with w.h == 0, exempt from the strict check.
  long nonstrict = 0;
  /// Largest amount by which any w.h^- (resp. -w.h^+) reached or crossed
  /// zero; 0 when every margin is strictly on the required side.
  double max_margin_defect = 0.0;
  /// Smallest correctly-signed margin |w.h^+-| over non-degenerate pairs.
  double min_margin = std::numeric_limits<double>::infinity();
};

/// Checks w.h^- < 0 and w.h^+ > 0 for every sample and direction. A pair
/// counts as a violation when its margin is <= -slack; slack = 0 makes the
/// check strict.
inline SignGuaranteeReport verify_sign_guarantee(const RowMatrix& samples, const ConceptSubspace& subspace,
                                                 double alpha, double slack = 1e-9) {
  require(samples.rows() >= 1, ErrorCode::invalid_argument, "verify_sign_guarantee: no samples");
  require_same_dim(subspace.dim(), samples.cols(), "verify_sign_guarantee");
  SignGuaranteeReport report;
  report.samples = samples.rows();
  for (Polarity polarity : {Polarity::negative, Polarity::positive}) {
    const InterventionConfig config{polarity, alpha, -1};
    const BatchCounterfactual batch = counterfactual_batch(samples, subspace, config);
    const Eigen::MatrixXd before = samples * subspace.basis.rows().transpose();
    const Eigen::MatrixXd after = batch.vectors * subspace.basis.rows().transpose();
    for (long i = 0; i < after.rows(); ++i) {
      for (long j = 0; j < after.cols(); ++j) {
        if (before(i, j) == 0.0) {
          ++report.nonstrict;
          continue;
        }
        // Signed margin, positive when on the required side.
        const double margin = polarity == Polarity::positive ? after(i, j) : -after(i, j);
        report.min_margin = std::min(report.min_margin, margin);
        if (margin <= 0.0) report.max_margin_defect = std::max(report.max_margin_defect, -margin);
        if (margin <= -slack) ++report.violations;
      }
    }
  }
  return report;
}

}  // namespace alterrep
