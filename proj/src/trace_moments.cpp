#include "mf/trace_moments.h"

#include <cmath>
#include <string>
#include <vector>

#include "mf/error.h"

namespace mf {
namespace {

void require_rank(int k, int d) {
  if (k < 1 || k >= d)
    throw Error(ErrorCode::InvalidArgument,
                "trace moments require 1 <= k < d (k=" + std::to_string(k) +
                    ", d=" + std::to_string(d) + ")");
}

void require_same_dim(const SymMatrix &a, const SymMatrix &b) {
  if (a.dim() != b.dim())
    throw Error(ErrorCode::DimensionMismatch, "matrices differ in dimension");
}

} // namespace

GramPair GramPair::of(const Vector &x, const Vector &y) {
  if (x.size() != y.size())
    throw Error(ErrorCode::DimensionMismatch, "GramPair: x and y differ in length");
  return {x.squaredNorm(), x.dot(y), y.squaredNorm()};
}

bool GramPair::valid() const {
  return xx >= 0 && yy >= 0 && xy * xy <= xx * yy + 1e-12;
}

TraceMomentCoefficients coefficients(int k, int d, int t) {
  require_rank(k, d);
  const double kk = k;
  const double dd = d;
  TraceMomentCoefficients c;
  c.t = t;
  switch (t) {
  case 1:
    c.q = dd;
    c.alpha_1 = kk;
    return c;
  case 2:
    c.q = (dd - 1) * dd * (dd + 2);
    c.alpha_11 = ((dd + 1) * kk - 2) * kk;
    c.alpha_2 = 2 * kk * (dd - kk);
    return c;
  case 3:
    if (d == 2) {
      if (k != 1)
        throw Error(ErrorCode::UnsupportedDimension,
                    "third trace moment at d = 2 needs k = 1");
      // The general normalizer vanishes at d = 2; this is the rescaled set.
      c.q = 48;
      c.alpha_111 = 1;
      c.alpha_21 = 6;
      c.alpha_3 = 8;
      return c;
    }
    c.q = (dd - 2) * (dd - 1) * dd * (dd + 2) * (dd + 4);
    c.alpha_111 = (((dd * dd + 3 * dd - 2) * kk - 6 * (dd + 2)) * kk + 16) * kk;
    c.alpha_21 =
        ((-6 * (dd + 2) * kk + 6 * (dd * dd + 2 * dd + 4)) * kk - 24 * dd) * kk;
    c.alpha_3 = 8 * kk * ((2 * kk - 3 * dd) * kk + dd * dd);
    return c;
  default:
    throw Error(ErrorCode::UnsupportedDegree,
                "closed-form trace moments exist for t <= 3 only (t=" +
                    std::to_string(t) + ")");
  }
}

double mu_t(const SymMatrix &m, int k, int t) {
  const auto c = coefficients(k, m.dim(), t);
  const Matrix &a = m.matrix();
  const double t1 = a.trace();
  switch (t) {
  case 1:
    return c.alpha_1 * t1 / c.q;
  case 2: {
    const double t2 = trace_inner(a, a);
    return (c.alpha_11 * t1 * t1 + c.alpha_2 * t2) / c.q;
  }
  default: {
    const Matrix a2 = a * a;
    const double t2 = a2.trace();
    const double t3 = trace_inner(a2, a);
    return (c.alpha_111 * t1 * t1 * t1 + c.alpha_21 * t1 * t2 +
            c.alpha_3 * t3) /
           c.q;
  }
  }
}

double mu_mixed(const SymMatrix &m1, int k) { return mu_t(m1, k, 1); }

double mu_mixed(const SymMatrix &m1, const SymMatrix &m2, int k) {
  require_same_dim(m1, m2);
  const auto c = coefficients(k, m1.dim(), 2);
  return (c.alpha_11 * m1.trace() * m2.trace() +
          c.alpha_2 * trace_inner(m1.matrix(), m2.matrix())) /
         c.q;
}

double mu_mixed(const SymMatrix &m1, const SymMatrix &m2, const SymMatrix &m3,
                int k) {
  require_same_dim(m1, m2);
  require_same_dim(m1, m3);
  if (m1.dim() < 3)
    throw Error(ErrorCode::UnsupportedDimension,
                "trilinear trace moment requires d >= 3");
  const auto c = coefficients(k, m1.dim(), 3);
  const Matrix &a = m1.matrix();
  const Matrix &b = m2.matrix();
  const Matrix &e = m3.matrix();
  const double ta = a.trace(), tb = b.trace(), te = e.trace();
  const double cross = ta * trace_inner(b, e) + tb * trace_inner(a, e) +
                       te * trace_inner(a, b);
  const double triple = (a * b * e).trace();
  return (c.alpha_111 * ta * tb * te + c.alpha_21 / 3.0 * cross +
          c.alpha_3 * triple) /
         c.q;
}

double gaussian_pair_moment(int a, int b, const GramPair &gram) {
  if (a < 0 || b < 0)
    throw Error(ErrorCode::InvalidArgument, "moment orders must be non-negative");
  if ((a + b) % 2 == 1)
    return 0.0;
  // table(i, j) = E[s^i t^j]; first column by the one-variable recursion,
  // remaining entries by Stein's identity in the first variable.
  std::vector<double> table((a + 1) * (b + 1), 0.0);
  auto at = [&](int i, int j) -> double & { return table[i * (b + 1) + j]; };
  at(0, 0) = 1.0;
  for (int j = 2; j <= b; ++j)
    at(0, j) = (j - 1) * gram.yy * at(0, j - 2);
  for (int i = 1; i <= a; ++i)
    for (int j = 0; j <= b; ++j) {
      if ((i + j) % 2 == 1)
        continue;
      double v = 0.0;
      if (i >= 2)
        v += (i - 1) * gram.xx * at(i - 2, j);
      if (j >= 1)
        v += j * gram.xy * at(i - 1, j - 1);
      at(i, j) = v;
    }
  return at(a, b);
}

double sphere_bilinear_integral(int a, int b, const GramPair &gram, int d) {
  if (d < 1)
    throw Error(ErrorCode::InvalidArgument, "sphere dimension must be positive");
  if ((a + b) % 2 == 1)
    return 0.0;
  // g = r u with r^2 ~ chi^2_d independent of u, and E r^{2h} = prod (d + 2i).
  double radial = 1.0;
  for (int i = 0; i < (a + b) / 2; ++i)
    radial *= d + 2 * i;
  return gaussian_pair_moment(a, b, gram) / radial;
}

double mu_rank1(int m, int l, const GramPair &gram, int d) {
  if (m < 0 || l < 0)
    throw Error(ErrorCode::InvalidArgument, "orders must be non-negative");
  return sphere_bilinear_integral(m + 2 * l, m, gram, d);
}

double sphere_quadratic_moment(const SymMatrix &m, int t) {
  if (t < 0)
    throw Error(ErrorCode::InvalidArgument, "moment order must be non-negative");
  const int d = m.dim();
  std::vector<double> kappa(t + 1, 0.0);
  Matrix power = Matrix::Identity(d, d);
  double fact = 1.0; // (r-1)!
  for (int r = 1; r <= t; ++r) {
    power = power * m.matrix();
    kappa[r] = std::ldexp(fact, r - 1) * power.trace();
    fact *= r;
  }
  // Moments from cumulants: m_n = sum_j C(n-1, j-1) kappa_j m_{n-j}.
  std::vector<double> mom(t + 1, 0.0);
  mom[0] = 1.0;
  for (int n = 1; n <= t; ++n) {
    double binom = 1.0;
    double v = 0.0;
    for (int j = 1; j <= n; ++j) {
      v += binom * kappa[j] * mom[n - j];
      binom = binom * (n - j) / j;
    }
    mom[n] = v;
  }
  return mom[t] / rising_factorial(0.5 * d, t) / std::ldexp(1.0, t);
}

double rising_factorial(double a, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i)
    r *= a + i;
  return r;
}

double lambda_t(int k, int d, int t) {
  require_rank(k, d);
  if (t < 1)
    throw Error(ErrorCode::UnsupportedDegree, "lambda_t requires t >= 1");
  if (t <= 3) {
    const auto c = coefficients(k, d, t);
    const double kk = k;
    switch (t) {
    case 1:
      return c.alpha_1 * kk / c.q;
    case 2:
      return (c.alpha_11 * kk + c.alpha_2) * kk / c.q;
    default:
      return ((c.alpha_111 * kk + c.alpha_21) * kk + c.alpha_3) * kk / c.q;
    }
  }
  if (k != 1)
    throw Error(ErrorCode::UnsupportedDegree,
                "lambda_t for t >= 4 is available for k = 1 only");
  // <uu^T, vv^T>^t = <u,v>^{2t}; integrate over u for a fixed unit v.
  return sphere_bilinear_integral(t, t, GramPair{1.0, 1.0, 1.0}, d);
}

} // namespace mf
