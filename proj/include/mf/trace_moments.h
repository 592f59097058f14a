#pragma once

#include "mf/grassmann.h"

namespace mf {

/// Coefficients of the trace-moment expansion
///
///   mu^t_{k,d}(M) = (1/q) * sum_pi alpha_pi * prod_i trace(M^{pi_i})
///
/// for t = 1, 2, 3. Unused partitions are zero.
struct TraceMomentCoefficients {
  int t = 0;
  double q = 0;
  double alpha_1 = 0;   // (1)
  double alpha_11 = 0;  // (1,1)
  double alpha_2 = 0;   // (2)
  double alpha_111 = 0; // (1,1,1)
  double alpha_21 = 0;  // (2,1)
  double alpha_3 = 0;   // (3)
};

/// Gram data (|x|^2, <x,y>, |y|^2) of a vector pair.
struct GramPair {
  double xx = 0;
  double xy = 0;
  double yy = 0;

  static GramPair of(const Vector &x, const Vector &y);
  /// xx >= 0, yy >= 0 and Cauchy-Schwarz within 1e-12.
  bool valid() const;
};

/// Throws UnsupportedDegree for t outside {1,2,3}, UnsupportedDimension for
/// t = 3, d = 2, k != 1, and InvalidArgument unless 1 <= k < d.
TraceMomentCoefficients coefficients(int k, int d, int t);

/// Integral of <P, M>^t over the Haar measure on G_{k,d}, t in {1,2,3}.
double mu_t(const SymMatrix &m, int k, int t);

/// Multilinear trace moments: integral of <P,M1>...<P,Mt>.
double mu_mixed(const SymMatrix &m1, int k);
double mu_mixed(const SymMatrix &m1, const SymMatrix &m2, int k);
/// The trilinear form requires d >= 3.
double mu_mixed(const SymMatrix &m1, const SymMatrix &m2, const SymMatrix &m3,
                int k);

/// E[s^a t^b] for a centred Gaussian pair with covariance
/// [[xx, xy], [xy, yy]].
double gaussian_pair_moment(int a, int b, const GramPair &gram);

/// Integral over the unit sphere S^{d-1} (uniform probability measure) of
/// <u,x>^a <u,y>^b.
double sphere_bilinear_integral(int a, int b, const GramPair &gram, int d);

/// mu^{(m,l)}_{1,d}(E_{x,y}, x x^T): the rank-one trace moment with m copies
/// of E_{x,y} and l copies of x x^T.
double mu_rank1(int m, int l, const GramPair &gram, int d);

/// Integral over S^{d-1} of (u^T M u)^t for any t >= 0, which is the rank-one
/// trace moment mu^t_{1,d}(M). Uses the cumulants 2^{r-1} (r-1)! trace(M^r) of
/// the Gaussian quadratic form and divides by E|g|^{2t}.
double sphere_quadratic_moment(const SymMatrix &m, int t);

/// Rising factorial (a)_n = a (a+1) ... (a+n-1).
double rising_factorial(double a, int n);

/// Double integral of <P,P'>^t over G_{k,d} x G_{k,d}, the minimum of the
/// frame potential. Closed form for t <= 3; any t when k = 1. Throws
/// UnsupportedDegree for t >= 4 with k >= 2.
double lambda_t(int k, int d, int t);

} // namespace mf
