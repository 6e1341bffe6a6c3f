#pragma once

// Dense vector/matrix primitives, orthonormalization, and projection
// operators. Everything here is a pure function of its inputs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "alterrep/error.hpp"

namespace alterrep {

using RepVector = Eigen::VectorXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kOrthoTolerance = 1e-9;
inline constexpr double kUnitTolerance = 1e-9;
/// Residual-to-original norm ratio under which a vector counts as dependent.
inline constexpr double kDependenceThreshold = 1e-8;

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
  return x.allFinite();
}

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& x, std::string_view where) {
  if (!x.allFinite()) fail(ErrorCode::non_finite, std::string(where) + ": non-finite entry");
}

/// m x d matrix whose rows are mutually orthogonal unit vectors.
/// The nullspace is implicit as the orthogonal complement of the row span.
class OrthonormalBasis {
 public:
  OrthonormalBasis() = default;

  /// Empty basis (m = 0) in ambient dimension `dim`.
  explicit OrthonormalBasis(long dim) : rows_(0, dim) {
    require(dim >= 1, ErrorCode::invalid_argument, "basis dimension must be >= 1");
  }

  static OrthonormalBasis from_rows(RowMatrix rows, double tolerance = kOrthoTolerance) {
    require(rows.cols() >= 1, ErrorCode::invalid_argument, "basis dimension must be >= 1");
    require(rows.rows() <= rows.cols(), ErrorCode::invalid_argument,
            "basis has more rows (" + std::to_string(rows.rows()) + ") than dimension (" +
                std::to_string(rows.cols()) + ")");
    require_finite(rows, "basis rows");
    OrthonormalBasis basis;
    basis.rows_ = std::move(rows);
    const double err = basis.orthonormality_error();
    require(err <= tolerance, ErrorCode::degenerate_input,
            "rows are not orthonormal (max |W W^T - I| = " + std::to_string(err) + ")");
    return basis;
  }

  const RowMatrix& rows() const noexcept { return rows_; }
  long size() const noexcept { return rows_.rows(); }
  long dim() const noexcept { return rows_.cols(); }
  bool empty() const noexcept { return rows_.rows() == 0; }
  RepVector direction(long i) const { return rows_.row(i).transpose(); }

  /// max_ij |(W W^T - I)_ij|
  double orthonormality_error() const {
    if (rows_.rows() == 0) return 0.0;
    const Eigen::MatrixXd gram = rows_ * rows_.transpose();
    return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  }

  /// P_R = W^T W
  Eigen::MatrixXd rowspace_projector() const { return rows_.transpose() * rows_; }
  /// P_N = I - W^T W
  Eigen::MatrixXd nullspace_projector() const {
    return Eigen::MatrixXd::Identity(dim(), dim()) - rowspace_projector();
  }

  /// Coordinates w_i . h for every direction.
  RepVector coordinates(const RepVector& h) const {
    require_same_dim(dim(), h.size(), "basis coordinates");
    return rows_ * h;
  }

  RepVector project_rowspace(const RepVector& h) const {
    return rows_.transpose() * coordinates(h);
  }

  RepVector project_nullspace(const RepVector& h) const { return h - project_rowspace(h); }

  /// Row-wise nullspace projection of a sample matrix (one sample per row).
  RowMatrix project_rows_nullspace(const RowMatrix& samples) const {
    require_same_dim(dim(), samples.cols(), "nullspace projection");
    if (empty()) return samples;
    return samples - (samples * rows_.transpose()) * rows_;
  }

  /// Copy with one more direction appended. `w` must already be unit norm
  /// and orthogonal to every existing row.
  OrthonormalBasis with_direction(const RepVector& w, double tolerance = kOrthoTolerance) const {
    require_same_dim(dim(), w.size(), "with_direction");
    RowMatrix grown(rows_.rows() + 1, rows_.cols());
    grown.topRows(rows_.rows()) = rows_;
    grown.row(rows_.rows()) = w.transpose();
    return from_rows(std::move(grown), tolerance);
  }

  /// First `count` rows.
  OrthonormalBasis leading(long count) const {
    require(count >= 0 && count <= size(), ErrorCode::invalid_argument, "leading: count out of range");
    OrthonormalBasis out(dim());
    out.rows_ = rows_.topRows(count);
    return out;
  }

 private:
  RowMatrix rows_;
};

/// Removes the components of `v` along every row of `basis`, two passes of
/// modified Gram-Schmidt.
inline RepVector orthogonalize_against(const RowMatrix& basis_rows, long count, RepVector v) {
  for (int pass = 0; pass < 2; ++pass) {
    for (long i = 0; i < count; ++i) {
      const auto row = basis_rows.row(i);
      v.noalias() -= (row.dot(v.transpose())) * row.transpose();
    }
  }
  return v;
}

inline RepVector orthogonalize_against(const OrthonormalBasis& basis, RepVector v) {
  require_same_dim(basis.dim(), v.size(), "orthogonalize_against");
  return orthogonalize_against(basis.rows(), basis.size(), std::move(v));
}

struct GramSchmidtResult {
  OrthonormalBasis basis;
  /// Input positions dropped as linearly dependent.
  std::vector<std::size_t> dropped;
};

/// Orthonormalizes `vectors` in input order. Inputs whose residual falls
/// below kDependenceThreshold times their original norm are dropped.
inline GramSchmidtResult gram_schmidt(std::span<const RepVector> vectors) {
  require(!vectors.empty(), ErrorCode::invalid_argument, "gram_schmidt: no input vectors");
  const long d = vectors.front().size();
  require(d >= 1, ErrorCode::invalid_argument, "gram_schmidt: zero-dimensional input");

  RowMatrix rows(std::min<long>(static_cast<long>(vectors.size()), d), d);
  long kept = 0;
  GramSchmidtResult result;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const RepVector& v = vectors[i];
    require_same_dim(d, v.size(), "gram_schmidt");
    require_finite(v, "gram_schmidt input");
    const double original = v.norm();
    if (original == 0.0 || kept == d) {
      result.dropped.push_back(i);
      continue;
    }
    RepVector r = orthogonalize_against(rows, kept, v);
    const double residual = r.norm();
    if (residual < kDependenceThreshold * original) {
      result.dropped.push_back(i);
      continue;
    }
    rows.row(kept++) = (r / residual).transpose();
  }
  require(kept > 0, ErrorCode::degenerate_input, "gram_schmidt: all inputs are linearly dependent");
  result.basis = OrthonormalBasis::from_rows(rows.topRows(kept));
  return result;
}

inline GramSchmidtResult gram_schmidt(const RowMatrix& vectors) {
  std::vector<RepVector> as_vectors;
  as_vectors.reserve(static_cast<std::size_t>(vectors.rows()));
  for (long i = 0; i < vectors.rows(); ++i) as_vectors.emplace_back(vectors.row(i).transpose());
  return gram_schmidt(std::span<const RepVector>(as_vectors));
}

/// h^w = (h . w) w for a unit direction w.
inline RepVector project_direction(const RepVector& h, const RepVector& w) {
  require_same_dim(h.size(), w.size(), "project_direction");
  require(std::abs(w.norm() - 1.0) <= kUnitTolerance, ErrorCode::invalid_argument,
          "project_direction: direction is not unit norm");
  return h.dot(w) * w;
}

/// h = null_component + sum(per_direction); row_component = sum(per_direction).
struct Decomposition {
  RepVector null_component;
  RepVector row_component;
  std::vector<RepVector> per_direction;
};

inline Decomposition decompose(const RepVector& h, const OrthonormalBasis& basis) {
  require_same_dim(basis.dim(), h.size(), "decompose");
  Decomposition out;
  out.row_component = RepVector::Zero(h.size());
  out.per_direction.reserve(static_cast<std::size_t>(basis.size()));
  for (long i = 0; i < basis.size(); ++i) {
    const auto w = basis.rows().row(i).transpose();
    RepVector component = w.dot(h) * w;
    out.row_component += component;
    out.per_direction.push_back(std::move(component));
  }
  out.null_component = h - out.row_component;
  return out;
}

/// Principal angles (radians, nondecreasing) between span(a) and span(b).
/// Cosines come from the singular values of A B^T; angles near zero are
/// taken from the sines of the residual instead, where acos loses precision.
inline std::vector<double> principal_angles(const OrthonormalBasis& a, const OrthonormalBasis& b) {
  require_same_dim(a.dim(), b.dim(), "principal_angles");
  const OrthonormalBasis& big = a.size() >= b.size() ? a : b;
  const OrthonormalBasis& small = a.size() >= b.size() ? b : a;
  const long k = small.size();
  std::vector<double> angles;
  if (k == 0) return angles;

  const Eigen::MatrixXd cross = small.rows() * big.rows().transpose();  // k x K
  Eigen::JacobiSVD<Eigen::MatrixXd> cos_svd(cross);
  Eigen::VectorXd cosines = cos_svd.singularValues();  // descending

  const Eigen::MatrixXd residual =
      small.rows().transpose() - big.rows().transpose() * cross.transpose();  // d x k
  Eigen::JacobiSVD<Eigen::MatrixXd> sin_svd(residual);
  Eigen::VectorXd sines = sin_svd.singularValues();  // descending

  angles.resize(static_cast<std::size_t>(k));
  for (long i = 0; i < k; ++i) {
    const double c = std::clamp(cosines(i), 0.0, 1.0);
    const double s = std::clamp(sines(k - 1 - i), 0.0, 1.0);
    angles[static_cast<std::size_t>(i)] = c * c >= 0.5 ? std::asin(s) : std::acos(c);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

inline double radians_to_degrees(double radians) { return radians * 180.0 / std::numbers::pi; }

}  // namespace alterrep
