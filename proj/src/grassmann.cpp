#include "mf/grassmann.h"

#include <cmath>
#include <string>

#include "mf/error.h"

namespace mf {
namespace {

void require_symmetric(const Matrix &m, const char *what) {
  if (m.rows() != m.cols())
    throw Error(ErrorCode::InvariantViolated,
                std::string(what) + " must be square");
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (m.size() > 0 && asym > kSymmetryTol)
    throw Error(ErrorCode::InvariantViolated,
                std::string(what) + " is not symmetric (max |P-P^T| = " +
                    std::to_string(asym) + ")");
}

Matrix symmetrized(const Matrix &m) { return 0.5 * (m + m.transpose()); }

} // namespace

double trace_inner(const Matrix &a, const Matrix &b) {
  // trace(AB) = sum_ij A_ij B_ji; both arguments are symmetric.
  return a.cwiseProduct(b.transpose()).sum();
}

SymMatrix::SymMatrix(Matrix m) : m_(std::move(m)) {
  require_symmetric(m_, "symmetric matrix");
}

Projector::Projector(Matrix p, int rank) : p_(std::move(p)), k_(rank) {
  require_symmetric(p_, "projector");
  const int d = dim();
  if (rank < 1 || rank >= d)
    throw Error(ErrorCode::InvariantViolated,
                "projector rank must satisfy 1 <= k < d (k=" +
                    std::to_string(rank) + ", d=" + std::to_string(d) + ")");
  const double idem = (p_ * p_ - p_).norm();
  if (idem > kIdempotencyTol)
    throw Error(ErrorCode::InvariantViolated,
                "projector is not idempotent (|P^2-P|_F = " +
                    std::to_string(idem) + ")");
  if (std::abs(p_.trace() - rank) > kTraceTol)
    throw Error(ErrorCode::InvariantViolated, "projector trace differs from k");
}

Projector::Projector(Matrix p, int rank, bool) : p_(std::move(p)), k_(rank) {}

Projector Projector::from_basis(const Matrix &v) {
  if (v.cols() < 1 || v.cols() >= v.rows())
    throw Error(ErrorCode::InvalidArgument, "basis must be d x k with 1 <= k < d");
  return Projector(symmetrized(v * v.transpose()), static_cast<int>(v.cols()));
}

Matrix Projector::basis() const {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(p_);
  Matrix v = eig.eigenvectors().rightCols(k_);
  for (int c = 0; c < k_; ++c) {
    Eigen::Index imax;
    v.col(c).cwiseAbs().maxCoeff(&imax);
    if (v(imax, c) < 0)
      v.col(c) = -v.col(c);
  }
  return v;
}

Projector Projector::conjugated(const Matrix &u) const {
  return Projector(symmetrized(u * p_ * u.transpose()), k_);
}

void MeasurementEnsemble::validate() const {
  if (k < 1 || k >= d)
    throw Error(ErrorCode::InvalidArgument,
                "ensemble requires 1 <= k < d");
  for (const auto &q : matrices) {
    if (q.rows() != k || q.cols() != d)
      throw Error(ErrorCode::DimensionMismatch,
                  "measurement matrix must be k x d");
    Eigen::JacobiSVD<Matrix> svd(q);
    const auto &s = svd.singularValues();
    if (s(k - 1) <= kRankTol * s(0))
      throw Error(ErrorCode::RankDeficient, "measurement matrix is rank deficient");
  }
}

std::vector<Projector> MeasurementEnsemble::projectors() const {
  std::vector<Projector> out;
  out.reserve(matrices.size());
  for (const auto &q : matrices)
    out.push_back(projector_from_measurement(q));
  return out;
}

Projector projector_from_measurement(const Matrix &q) {
  const auto k = q.rows();
  const auto d = q.cols();
  if (k < 1 || k >= d)
    throw Error(ErrorCode::InvalidArgument,
                "measurement matrix must be k x d with 1 <= k < d");
  Eigen::JacobiSVD<Matrix> svd(q, Eigen::ComputeFullV);
  const auto &s = svd.singularValues();
  if (!(s(k - 1) > kRankTol * s(0)))
    throw Error(ErrorCode::RankDeficient,
                "k-th singular value " + std::to_string(s(k - 1)) +
                    " below tolerance");
  // Row space of Q is spanned by the leading k right singular vectors.
  return Projector::from_basis(svd.matrixV().leftCols(k));
}

Matrix haar_frame(int d, int k, Rng &rng) {
  if (k < 1 || k > d)
    throw Error(ErrorCode::InvalidArgument, "haar_frame requires 1 <= k <= d");
  for (;;) {
    Matrix g(d, k);
    for (int c = 0; c < k; ++c)
      for (int r = 0; r < d; ++r)
        g(r, c) = rng.normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    bool degenerate = false;
    for (int i = 0; i < k; ++i)
      degenerate = degenerate || std::abs(r(i, i)) < 1e-300;
    if (degenerate)
      continue;
    Matrix v = qr.householderQ() * Matrix::Identity(d, k);
    // Positive diagonal of R makes the factorization unique, which is what
    // turns Gaussian invariance into exact Haar invariance of V.
    for (int i = 0; i < k; ++i)
      if (r(i, i) < 0)
        v.col(i) = -v.col(i);
    return v;
  }
}

Projector haar_sample(int d, int k, Rng &rng) {
  if (k < 1 || k >= d)
    throw Error(ErrorCode::InvalidArgument, "haar_sample requires 1 <= k < d");
  return Projector::from_basis(haar_frame(d, k, rng));
}

Matrix haar_orthogonal(int d, Rng &rng) { return haar_frame(d, d, rng); }

SymMatrix e_matrix(const Vector &x, const Vector &y) {
  if (x.size() != y.size())
    throw Error(ErrorCode::DimensionMismatch, "e_matrix: x and y differ in length");
  Matrix e = 0.5 * (x * y.transpose() + y * x.transpose());
  return SymMatrix(0.5 * (e + e.transpose()));
}

} // namespace mf
