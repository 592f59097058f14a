#pragma once

#include <Eigen/Dense>

namespace mf::detail {

struct LstsqResult {
  Eigen::VectorXd x;
  int rank = 0;
  double condition = 0;
};

/// Basic least-squares solution from a column-pivoted QR, keeping the pivots
/// above `rel_threshold` times the largest one. `condition` is the ratio of
/// the largest to the smallest kept pivot.
LstsqResult truncated_lstsq(const Eigen::MatrixXd &a, const Eigen::VectorXd &b,
                            double rel_threshold = 1e-13);

} // namespace mf::detail

namespace mf::detail {

inline double ipow(double x, int n) {
  double r = 1.0;
  for (; n > 0; n >>= 1, x *= x)
    if (n & 1)
      r *= x;
  return r;
}

} // namespace mf::detail
