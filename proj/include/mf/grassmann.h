#pragma once

#include <vector>

#include <Eigen/Dense>

#include "mf/rng.h"

namespace mf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Tolerances for the projector invariants.
inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kIdempotencyTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
/// Relative singular-value cutoff below which a measurement matrix is rank
/// deficient.
inline constexpr double kRankTol = 1e-10;

/// Trace inner product <A, B> = trace(A B) for symmetric A, B.
double trace_inner(const Matrix &a, const Matrix &b);

/// A real symmetric d x d matrix.
class SymMatrix {
public:
  /// Throws InvariantViolated if `m` is not square or not symmetric to 1e-12.
  explicit SymMatrix(Matrix m);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix &matrix() const { return m_; }
  double trace() const { return m_.trace(); }

private:
  Matrix m_;
};

/// A rank-k orthogonal projector on R^d, stored densely.
class Projector {
public:
  /// Validates symmetry, idempotency and trace against `rank`.
  Projector(Matrix p, int rank);

  /// V V^T for a d x k matrix with orthonormal columns.
  static Projector from_basis(const Matrix &v);

  int dim() const { return static_cast<int>(p_.rows()); }
  int rank() const { return k_; }
  const Matrix &matrix() const { return p_; }

  /// Orthonormal basis of the range (d x k), deterministic for a given
  /// projector: eigenvectors of eigenvalue one, each signed so that its
  /// largest-magnitude entry is positive.
  Matrix basis() const;

  /// Canonical k x d measurement matrix with this projector's row space
  /// (the transpose of basis()).
  Matrix measurement() const { return basis().transpose(); }

  SymMatrix as_sym() const { return SymMatrix(p_); }

  /// U P U^T for orthogonal U.
  Projector conjugated(const Matrix &u) const;

private:
  Projector(Matrix p, int rank, bool /*trusted*/);

  Matrix p_;
  int k_;
};

/// A list of full-rank k x d measurement matrices.
struct MeasurementEnsemble {
  int d = 0;
  int k = 0;
  std::vector<Matrix> matrices;

  /// Throws DimensionMismatch / RankDeficient if any matrix is off-shape or
  /// its smallest singular value is below kRankTol times its largest.
  void validate() const;

  std::vector<Projector> projectors() const;
  std::size_t size() const { return matrices.size(); }
};

/// Orthogonal projector onto the row space of Q (k x d, k < d).
Projector projector_from_measurement(const Matrix &q);

/// Haar-distributed rank-k projector on R^d: orthonormalize the columns of a
/// d x k standard Gaussian matrix (QR with the triangular diagonal made
/// positive) and return V V^T.
Projector haar_sample(int d, int k, Rng &rng);

/// Haar-distributed orthonormal d x k frame (the V of haar_sample).
Matrix haar_frame(int d, int k, Rng &rng);

/// Haar-distributed orthogonal d x d matrix.
Matrix haar_orthogonal(int d, Rng &rng);

/// E_{x,y} = (x y^T + y x^T) / 2.
SymMatrix e_matrix(const Vector &x, const Vector &y);

} // namespace mf
