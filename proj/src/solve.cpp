#include "solve.h"

#include <cmath>

#include "mf/error.h"

namespace mf::detail {

LstsqResult truncated_lstsq(const Eigen::MatrixXd &a, const Eigen::VectorXd &b,
                            double rel_threshold) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  const auto &r = qr.matrixR();
  const Eigen::Index diag = std::min(a.rows(), a.cols());
  const double top = diag > 0 ? std::abs(r(0, 0)) : 0.0;
  if (!(top > 0))
    throw Error(ErrorCode::RankDeficient, "least-squares matrix is zero");
  Eigen::Index rank = 0;
  while (rank < diag && std::abs(r(rank, rank)) > rel_threshold * top)
    ++rank;

  Eigen::VectorXd c = qr.householderQ().transpose() * b;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(a.cols());
  z.head(rank) = r.topLeftCorner(rank, rank)
                     .triangularView<Eigen::Upper>()
                     .solve(c.head(rank));
  LstsqResult out;
  out.x = qr.colsPermutation() * z;
  out.rank = static_cast<int>(rank);
  out.condition = top / std::abs(r(rank - 1, rank - 1));
  return out;
}

} // namespace mf::detail
