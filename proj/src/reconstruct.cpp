#include "mf/reconstruct.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numeric>
#include <string>

#include "mf/error.h"
#include "mf/trace_moments.h"

namespace mf {
namespace {

long long ipow_ll(long long x, int n) {
  long long r = 1;
  for (int i = 0; i < n; ++i)
    r *= x;
  return r;
}

double factorial(int n) {
  double f = 1;
  for (int i = 2; i <= n; ++i)
    f *= i;
  return f;
}

Vector to_vector(const std::vector<int> &v) {
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out(i) = v[i];
  return out;
}

/// Polynomials (in the coordinates of `rows.cols()`-dimensional space) of
/// (rows * x)^s for every s in the set, built along the parent chain.
std::vector<Polynomial> monomial_images(const MultiIndexSet &set,
                                        const Matrix &rows) {
  std::vector<Polynomial> out;
  out.reserve(set.size());
  const int n = static_cast<int>(rows.cols());
  out.push_back(Polynomial::constant(n, 1.0));
  std::vector<Polynomial> linear;
  for (Eigen::Index r = 0; r < rows.rows(); ++r)
    linear.push_back(Polynomial::linear(rows.row(r).transpose()));
  for (std::size_t i = 1; i < set.size(); ++i)
    out.push_back(out[set.parent(i)] * linear[set.var(i)]);
  return out;
}

double relevant_gap(const CubatureRule &rule, int t) {
  auto it = rule.gaps_by_degree.find(t);
  return it != rule.gaps_by_degree.end() ? it->second : rule.gap;
}

/// Validates the inputs of a cubature-based reconstruction and returns
/// W = sum_j w_j (moments of P_j X) truncated to degree t.
MomentTensor aggregate(const CubatureRule &rule,
                       const ProjectedMomentSet &projected, int t) {
  rule.validate();
  if (rule.t < t)
    throw Error(ErrorCode::UncertifiedRule,
                "rule is certified for degree " + std::to_string(rule.t) +
                    " but degree " + std::to_string(t) + " was requested");
  if (!std::isfinite(rule.gap))
    throw Error(ErrorCode::UncertifiedRule, "rule has not been certified");
  if (projected.tensors.size() != rule.size())
    throw Error(ErrorCode::DimensionMismatch,
                "projected moment count differs from rule size");
  if (projected.p < t)
    throw Error(ErrorCode::IncompleteMoments,
                "projected moments stop below the requested degree");

  ProjectedMomentSet px = projected;
  if (projected.convention == Convention::QX) {
    std::vector<Matrix> q;
    q.reserve(rule.size());
    for (const auto &node : rule.nodes)
      q.push_back(node.measurement());
    px = to_px(projected, q);
  }

  MomentTensor w(rule.d, t);
  w[0] = 0.0;
  for (std::size_t j = 0; j < rule.size(); ++j) {
    const MomentTensor &m = px.tensors[j];
    if (m.dim() != rule.d)
      throw Error(ErrorCode::DimensionMismatch,
                  "projected tensor dimension differs from d");
    if (m.max_degree() < t)
      throw Error(ErrorCode::IncompleteMoments,
                  "projected tensor stops below the requested degree");
    for (std::size_t i = 0; i < w.size(); ++i)
      w[i] += rule.weights[j] * m[i];
  }
  return w;
}

void flag_accuracy(MomentTensor &out, const CubatureRule &rule, int t,
                   double tol) {
  const double gap = relevant_gap(rule, t);
  out.approximate = gap > tol;
  out.epsilon = out.approximate ? std::sqrt(std::max(gap, 0.0)) : 0.0;
}

MultiIndex unit(int d, int i) { return MultiIndex::unit(d, i); }

MultiIndex twice(int d, int i) {
  std::vector<int> e(d, 0);
  e[i] = 2;
  return MultiIndex(std::move(e));
}

void require_low_degree(int t) {
  if (t < 1 || t > 3)
    throw Error(ErrorCode::UnsupportedDegree,
                "closed-form reconstruction covers degrees 1 to 3");
}

} // namespace

std::vector<PolarizationTerm> polarize(const MultiIndex &alpha) {
  const int t = alpha.degree();
  if (t < 1)
    throw Error(ErrorCode::DegreeZero, "cannot polarize a constant");
  const int d = alpha.size();
  const std::vector<int> coords = alpha.coordinates();
  // Integer numerators over t!, keyed by primitive direction.
  std::map<std::vector<int>, long long> merged;
  for (unsigned mask = 1; mask < (1u << t); ++mask) {
    std::vector<int> y(d, 0);
    int size = 0;
    for (int j = 0; j < t; ++j)
      if (mask & (1u << j)) {
        ++y[coords[j]];
        ++size;
      }
    int g = 0;
    for (int v : y)
      g = std::gcd(g, std::abs(v));
    int lead = 0;
    for (int v : y)
      if (v != 0) {
        lead = v;
        break;
      }
    const int scale = lead < 0 ? -g : g;
    for (int &v : y)
      v /= scale;
    const long long sign = (t + size) % 2 == 0 ? 1 : -1;
    merged[y] += sign * ipow_ll(scale, t);
  }
  std::vector<PolarizationTerm> out;
  const double tf = factorial(t);
  for (const auto &[y, num] : merged)
    if (num != 0)
      out.push_back({num / tf, to_vector(y)});
  return out;
}

MomentTensor pushforward(const Matrix &q, const MomentTensor &qx, int p) {
  const int k = static_cast<int>(q.rows());
  if (qx.dim() != k)
    throw Error(ErrorCode::DimensionMismatch,
                "QX moments must live in dimension k = rows of Q");
  if (qx.max_degree() < p)
    throw Error(ErrorCode::IncompleteMoments, "QX moments stop below degree p");
  Eigen::JacobiSVD<Matrix> svd(q);
  const auto &sv = svd.singularValues();
  if (!(sv(k - 1) > kRankTol * sv(0)))
    throw Error(ErrorCode::RankDeficient, "measurement matrix is rank deficient");
  const Matrix z = q.transpose() * (q * q.transpose()).inverse();
  return linear_image(z, qx, p);
}

MomentTensor linear_image(const Matrix &a, const MomentTensor &m, int p) {
  if (a.cols() != m.dim())
    throw Error(ErrorCode::DimensionMismatch,
                "map width differs from the moment dimension");
  if (m.max_degree() < p)
    throw Error(ErrorCode::IncompleteMoments, "moments stop below degree p");
  const auto set = MultiIndexSet::get(static_cast<int>(a.rows()), p);
  const auto images = monomial_images(*set, a);
  MomentTensor out(static_cast<int>(a.rows()), p);
  for (std::size_t i = 1; i < set->size(); ++i)
    out[i] = images[i].expectation(m);
  return out;
}

ProjectedMomentSet to_px(const ProjectedMomentSet &projected,
                         const std::vector<Matrix> &measurements) {
  if (projected.convention == Convention::PX)
    return projected;
  if (measurements.size() != projected.tensors.size())
    throw Error(ErrorCode::DimensionMismatch,
                "one measurement matrix per projected tensor required");
  ProjectedMomentSet out;
  out.convention = Convention::PX;
  out.p = projected.p;
  out.sphere_supported = projected.sphere_supported;
  out.tensors.reserve(measurements.size());
  for (std::size_t j = 0; j < measurements.size(); ++j)
    out.tensors.push_back(
        pushforward(measurements[j], projected.tensors[j], projected.p));
  return out;
}

FusionConstants fusion_constants(int k, int d) {
  if (d < 3)
    throw Error(ErrorCode::UnsupportedDimension, "fusion formulas need d >= 3");
  if (k < 1 || k >= d)
    throw Error(ErrorCode::InvalidArgument, "fusion formulas need 1 <= k < d");
  const double kk = k, dd = d;
  FusionConstants c;
  c.a1 = dd / kk;
  c.a2 = (dd - 1) * dd * (dd + 2) / (kk * (dd * kk + dd - 2));
  c.b2 = dd * (dd - kk) / (kk * (dd * kk + dd - 2));
  // Coefficients of <x,y>^3 and <x,y>|x|^2|y|^2 in mu^3(E_{x,y}).
  const auto tc = coefficients(k, d, 3);
  const double lead =
      (4 * tc.alpha_111 + 2 * tc.alpha_21 + tc.alpha_3) / (4 * tc.q);
  const double cross = (2 * tc.alpha_21 + 3 * tc.alpha_3) / (4 * tc.q);
  c.a3 = 1.0 / lead;
  c.c1 = c.a3;
  c.b3 = cross / lead * dd * dd / (kk * kk);
  c.c2 = cross / lead * dd * (dd + 2) / (kk * (kk + 2));
  return c;
}

MomentTensor reconstruct_sphere(const CubatureRule &rule,
                                const ProjectedMomentSet &projected, int t,
                                double tol) {
  require_low_degree(t);
  const FusionConstants c = fusion_constants(rule.k, rule.d);
  const MomentTensor w = aggregate(rule, projected, t);
  const int d = rule.d;
  const double kd = double(rule.k) / d;
  const MultiIndexSet &set = w.index_set();

  MomentTensor out(d, t);
  out.sphere_supported = true;
  for (std::size_t i = set.degree_begin(1); i < set.degree_end(t); ++i) {
    const auto x = set[i].coordinates();
    switch (x.size()) {
    case 1:
      out[i] = c.a1 * w[i];
      break;
    case 2:
      out[i] = c.a2 * w[i] - (x[0] == x[1] ? c.b2 * kd : 0.0);
      break;
    default: {
      double delta = 0;
      if (x[1] == x[2])
        delta += w.at(unit(d, x[0]));
      if (x[0] == x[2])
        delta += w.at(unit(d, x[1]));
      if (x[0] == x[1])
        delta += w.at(unit(d, x[2]));
      out[i] = c.a3 * w[i] - c.b3 / 3.0 * kd * delta;
    }
    }
  }
  flag_accuracy(out, rule, t, tol);
  return out;
}

MomentTensor reconstruct_general(const CubatureRule &rule,
                                 const ProjectedMomentSet &projected, int t,
                                 double tol) {
  require_low_degree(t);
  const FusionConstants c = fusion_constants(rule.k, rule.d);
  const MomentTensor w = aggregate(rule, projected, t);
  const int d = rule.d;
  const MultiIndexSet &set = w.index_set();

  double trace2 = 0;
  std::vector<double> norm_weighted(d, 0.0); // sum_m W[e_c + 2 e_m]
  if (t >= 2)
    for (int m = 0; m < d; ++m)
      trace2 += w.at(twice(d, m));
  if (t >= 3)
    for (int a = 0; a < d; ++a)
      for (int m = 0; m < d; ++m)
        norm_weighted[a] += w.at(unit(d, a) + twice(d, m));

  MomentTensor out(d, t);
  for (std::size_t i = set.degree_begin(1); i < set.degree_end(t); ++i) {
    const auto x = set[i].coordinates();
    switch (x.size()) {
    case 1:
      out[i] = c.a1 * w[i];
      break;
    case 2:
      out[i] = c.a2 * w[i] - (x[0] == x[1] ? c.b2 * trace2 : 0.0);
      break;
    default: {
      double delta = 0;
      if (x[1] == x[2])
        delta += norm_weighted[x[0]];
      if (x[0] == x[2])
        delta += norm_weighted[x[1]];
      if (x[0] == x[1])
        delta += norm_weighted[x[2]];
      out[i] = c.c1 * w[i] - c.c2 / 3.0 * delta;
    }
    }
  }
  flag_accuracy(out, rule, t, tol);
  return out;
}

namespace {

double rank1_fit_value(int t, int d, const std::vector<double> &a, double c) {
  double v = 0;
  for (std::size_t i = 0; i < a.size(); ++i)
    v += a[i] * mu_rank1(t - 2 * static_cast<int>(i), static_cast<int>(i),
                         GramPair{1.0, c, 1.0}, d);
  return v;
}

} // namespace

double rank1_fit_residual(int t, int d, const std::vector<double> &a,
                          int points) {
  double worst = 0;
  for (int r = 0; r < points; ++r) {
    // Chebyshev points of the second kind shifted off the fit nodes.
    const double c = std::cos(M_PI * (r + 0.5) / points);
    worst = std::max(worst, std::abs(rank1_fit_value(t, d, a, c) -
                                     std::pow(c, t)));
  }
  return worst;
}

std::vector<double> rank1_coefficients(int t, int d) {
  if (t < 1)
    throw Error(ErrorCode::DegreeZero, "rank-one coefficients need t >= 1");
  if (t > d)
    throw Error(ErrorCode::DimensionTooSmall,
                "rank-one reconstruction of degree " + std::to_string(t) +
                    " needs d >= t (d=" + std::to_string(d) + ")");
  const int h = t / 2;
  Matrix m(h + 1, h + 1);
  Vector rhs(h + 1);
  for (int j = 0; j <= h; ++j) {
    // Positive half of the Chebyshev nodes: c = 0 annihilates every term
    // when t is odd.
    const double c = std::cos(M_PI * (2 * j + 1) / (4.0 * (h + 1)));
    for (int i = 0; i <= h; ++i)
      m(j, i) = mu_rank1(t - 2 * i, i, GramPair{1.0, c, 1.0}, d);
    rhs(j) = std::pow(c, t);
  }
  const Vector sol = m.fullPivLu().solve(rhs);
  std::vector<double> a(sol.data(), sol.data() + sol.size());
  const double res = rank1_fit_residual(t, d, a);
  if (!(res <= 1e-10))
    throw Error(ErrorCode::IllConditioned,
                "rank-one coefficient fit residual " + std::to_string(res));
  return a;
}

MomentTensor reconstruct_rank1(const CubatureRule &rule,
                               const ProjectedMomentSet &projected, int t,
                               double tol) {
  if (rule.k != 1)
    throw Error(ErrorCode::RankMismatch, "rank-one reconstruction needs k = 1");
  if (t < 1 || t > rule.d)
    throw Error(ErrorCode::UnsupportedDegree,
                "rank-one reconstruction needs 1 <= t <= d");
  const MomentTensor w = aggregate(rule, projected, t);
  const int d = rule.d;
  const MultiIndexSet &set = w.index_set();
  const Polynomial norm2 = Polynomial::squared_norm(d);

  MomentTensor out(d, t);
  for (int s = 1; s <= t; ++s) {
    const auto a = rank1_coefficients(s, d);
    // E <X, y>^s for each polarization direction y.
    std::map<std::vector<int>, double> power_moment;
    auto moment_along = [&](const Vector &y) {
      std::vector<int> key(y.data(), y.data() + y.size());
      auto it = power_moment.find(key);
      if (it != power_moment.end())
        return it->second;
      const Polynomial lin = Polynomial::linear(y);
      const double yy = y.squaredNorm();
      double v = 0;
      for (int i = 0; i <= s / 2; ++i) {
        const Polynomial f = lin.pow(s - 2 * i) * norm2.pow(i);
        v += a[i] * std::pow(yy, i) * f.expectation(w);
      }
      power_moment.emplace(std::move(key), v);
      return v;
    };
    for (std::size_t i = set.degree_begin(s); i < set.degree_end(s); ++i) {
      double v = 0;
      for (const auto &term : polarize(set[i]))
        v += term.coefficient * moment_along(term.direction);
      out[i] = v;
    }
  }
  flag_accuracy(out, rule, t, tol);
  return out;
}

MeasurementEnsemble spanning_family(int p, int d, int k) {
  const bool supported = (k == 1 && p >= 1 && p <= 4) ||
                         (k == 2 && p >= 1 && p <= 2);
  if (!supported)
    throw Error(ErrorCode::UnsupportedCombination,
                "spanning families exist for k = 1, p <= 4 and k = 2, p <= 2");
  if (d <= k)
    throw Error(ErrorCode::UnsupportedCombination, "spanning family needs d > k");
  MeasurementEnsemble ens;
  ens.d = d;
  ens.k = k;
  auto row = [&](std::initializer_list<std::pair<int, double>> entries) {
    Matrix q = Matrix::Zero(1, d);
    for (auto [i, v] : entries)
      q(0, i) += v;
    ens.matrices.push_back(q);
  };
  auto pair_rows = [&](int i, int j) {
    Matrix q = Matrix::Zero(2, d);
    q(0, i) = 1;
    q(1, j) = 1;
    ens.matrices.push_back(q);
  };

  if (k == 2) {
    if (p == 1) {
      for (int i = 0; i + 1 < d; i += 2)
        pair_rows(i, i + 1);
      if (d % 2 == 1)
        pair_rows(d - 1, 0);
    } else {
      for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
          pair_rows(i, j);
    }
    return ens;
  }

  for (int i = 0; i < d; ++i)
    row({{i, 1}});
  if (p >= 2)
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        row({{i, 1}, {j, 1}});
  if (p >= 3)
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        row({{i, 1}, {j, -1}});
  if (p >= 4)
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        row({{i, 1}, {j, 2}});
  if (p >= 3)
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        for (int l = j + 1; l < d; ++l) {
          row({{i, 1}, {j, 1}, {l, 1}});
          if (p >= 4) {
            row({{i, 1}, {j, -1}, {l, 1}});
            row({{i, 1}, {j, 1}, {l, -1}});
          }
        }
  if (p >= 4)
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j)
        for (int l = j + 1; l < d; ++l)
          for (int m = l + 1; m < d; ++m)
            row({{i, 1}, {j, 1}, {l, 1}, {m, 1}});
  return ens;
}

MomentTensor spanning_reconstruct(const MeasurementEnsemble &ensemble,
                                  const ProjectedMomentSet &projected, int p) {
  ensemble.validate();
  if (projected.convention != Convention::QX)
    throw Error(ErrorCode::InvalidArgument,
                "spanning reconstruction consumes QX-convention moments");
  if (projected.tensors.size() != ensemble.size())
    throw Error(ErrorCode::DimensionMismatch,
                "projected moment count differs from ensemble size");
  if (p < 1)
    throw Error(ErrorCode::DegreeZero, "reconstruction degree must be positive");
  const int d = ensemble.d, k = ensemble.k;
  for (const auto &m : projected.tensors) {
    if (m.dim() != k)
      throw Error(ErrorCode::DimensionMismatch, "QX tensor must have dimension k");
    if (m.max_degree() < p)
      throw Error(ErrorCode::IncompleteMoments, "QX tensor stops below degree p");
  }

  const auto big = MultiIndexSet::get(d, p);
  const auto small = MultiIndexSet::get(k, p);
  std::vector<std::vector<Polynomial>> images;
  images.reserve(ensemble.size());
  for (const auto &q : ensemble.matrices)
    images.push_back(monomial_images(*small, q));

  MomentTensor out(d, p);
  for (int r = 1; r <= p; ++r) {
    const std::size_t b0 = big->degree_begin(r);
    const std::size_t nb = big->degree_end(r) - b0;
    const std::size_t ns = small->degree_end(r) - small->degree_begin(r);
    Matrix a = Matrix::Zero(ensemble.size() * ns, nb);
    Vector rhs(a.rows());
    Eigen::Index row = 0;
    for (std::size_t j = 0; j < ensemble.size(); ++j)
      for (std::size_t i = small->degree_begin(r); i < small->degree_end(r);
           ++i, ++row) {
        for (const auto &[s, coef] : images[j][i].terms())
          a(row, big->index_of(s) - b0) += coef;
        rhs(row) = projected.tensors[j][i];
      }
    Eigen::ColPivHouseholderQR<Matrix> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < static_cast<Eigen::Index>(nb))
      throw Error(ErrorCode::SpanDeficient,
                  "projected monomials of degree " + std::to_string(r) +
                      " have rank " + std::to_string(qr.rank()) + " < " +
                      std::to_string(nb));
    const Vector x = qr.solve(rhs);
    for (std::size_t i = 0; i < nb; ++i)
      out[b0 + i] = x(i);
  }
  return out;
}

} // namespace mf
