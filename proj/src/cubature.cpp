#include "mf/cubature.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "mf/error.h"
#include "mf/parallel.h"
#include "mf/trace_moments.h"
#include "solve.h"

namespace mf {
namespace {

constexpr double kConditionLimit = 1e12;
constexpr std::size_t kBlock = 512;

/// Columns are the vectorized nodes, so F^T F holds <P_i, P_j>.
Matrix vectorized(const std::vector<Projector> &nodes) {
  const int d = nodes.front().dim();
  Matrix f(d * d, nodes.size());
  for (std::size_t j = 0; j < nodes.size(); ++j)
    f.col(j) = Eigen::Map<const Vector>(nodes[j].matrix().data(), d * d);
  return f;
}

void require_nodes(const std::vector<Projector> &nodes) {
  if (nodes.empty())
    throw Error(ErrorCode::InvalidArgument, "node list is empty");
  for (const auto &p : nodes)
    if (p.dim() != nodes.front().dim() || p.rank() != nodes.front().rank())
      throw Error(ErrorCode::DimensionMismatch, "nodes differ in d or k");
}

} // namespace

double CubatureRule::epsilon() const { return std::sqrt(std::max(gap, 0.0)); }

void CubatureRule::validate() const {
  if (k < 1 || k >= d)
    throw Error(ErrorCode::InvalidArgument, "rule requires 1 <= k < d");
  if (t < 1)
    throw Error(ErrorCode::InvalidArgument, "rule degree must be positive");
  if (nodes.empty() || nodes.size() != weights.size())
    throw Error(ErrorCode::DimensionMismatch,
                "rule needs equally many nodes and weights");
  for (const auto &p : nodes)
    if (p.dim() != d || p.rank() != k)
      throw Error(ErrorCode::DimensionMismatch, "rule node has wrong d or k");
  for (double w : weights)
    if (!std::isfinite(w))
      throw Error(ErrorCode::InvariantViolated, "non-finite rule weight");
}

Matrix node_gram(const std::vector<Projector> &nodes) {
  require_nodes(nodes);
  const Matrix f = vectorized(nodes);
  return f.transpose() * f;
}

double potential(const std::vector<Projector> &nodes,
                 const std::vector<double> &weights, int t) {
  require_nodes(nodes);
  if (weights.size() != nodes.size())
    throw Error(ErrorCode::DimensionMismatch, "weights and nodes differ in count");
  if (t < 1)
    throw Error(ErrorCode::InvalidArgument, "potential degree must be positive");
  const Matrix f = vectorized(nodes);
  const std::size_t n = nodes.size();
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  // Upper block triangle only; off-diagonal blocks count twice.
  std::vector<double> partial(blocks, 0.0);
  parallel_for(blocks, [&](std::size_t bi) {
    const std::size_t i0 = bi * kBlock;
    const std::size_t ni = std::min(kBlock, n - i0);
    double acc = 0.0;
    for (std::size_t bj = bi; bj < blocks; ++bj) {
      const std::size_t j0 = bj * kBlock;
      const std::size_t nj = std::min(kBlock, n - j0);
      const Matrix g =
          f.middleCols(i0, ni).transpose() * f.middleCols(j0, nj);
      double block = 0.0;
      for (std::size_t j = 0; j < nj; ++j)
        for (std::size_t i = 0; i < ni; ++i)
          block += weights[i0 + i] * weights[j0 + j] * detail::ipow(g(i, j), t);
      acc += (bj == bi ? 1.0 : 2.0) * block;
    }
    partial[bi] = acc;
  });
  double total = 0.0;
  for (double v : partial)
    total += v;
  return total;
}

double gap_at(const CubatureRule &rule, int s) {
  rule.validate();
  const double lambda = lambda_t(rule.k, rule.d, s);
  double wsum = 0.0;
  for (double w : rule.weights)
    wsum += w;
  return potential(rule.nodes, rule.weights, s) - 2.0 * lambda * wsum + lambda;
}

double certify(CubatureRule &rule) {
  rule.gap = gap_at(rule, rule.t);
  return rule.gap;
}

void certify_all_below(CubatureRule &rule) {
  rule.gaps_by_degree.clear();
  for (int s = 1; s <= rule.t; ++s)
    rule.gaps_by_degree[s] = gap_at(rule, s);
  rule.gap = rule.gaps_by_degree[rule.t];
}

double haar_trace_moment(const SymMatrix &m, int k, int t) {
  if (t <= 3)
    return mu_t(m, k, t);
  if (k != 1)
    throw Error(ErrorCode::UnsupportedDegree,
                "trace moments of degree >= 4 are available for k = 1 only");
  if (m.dim() < 2)
    throw Error(ErrorCode::InvalidArgument, "trace moments require d >= 2");
  return sphere_quadratic_moment(m, t);
}

WeightSolution solve_weights(const std::vector<Projector> &nodes, int t,
                             const std::vector<SymMatrix> &tests) {
  require_nodes(nodes);
  if (tests.empty())
    throw Error(ErrorCode::InvalidArgument, "no test matrices");
  const int d = nodes.front().dim();
  const int k = nodes.front().rank();
  Matrix tm(d * d, tests.size());
  Vector b(tests.size());
  for (std::size_t i = 0; i < tests.size(); ++i) {
    if (tests[i].dim() != d)
      throw Error(ErrorCode::DimensionMismatch, "test matrix has wrong dimension");
    tm.col(i) = Eigen::Map<const Vector>(tests[i].matrix().data(), d * d);
    b(i) = haar_trace_moment(tests[i], k, t);
  }
  Matrix a = tm.transpose() * vectorized(nodes);
  a = a.array().pow(t).matrix();

  const auto sol = detail::truncated_lstsq(a, b);
  if (sol.condition > kConditionLimit)
    throw Error(ErrorCode::IllConditioned,
                "weight system condition " + std::to_string(sol.condition) +
                    " exceeds 1e12");
  WeightSolution out;
  out.weights.assign(sol.x.data(), sol.x.data() + sol.x.size());
  out.residual = (a * sol.x - b).cwiseAbs().maxCoeff();
  out.rank = sol.rank;
  out.condition = sol.condition;
  return out;
}

WeightSolution solve_weights(const std::vector<Projector> &nodes, int t,
                             Rng &rng) {
  require_nodes(nodes);
  const int d = nodes.front().dim();
  std::vector<SymMatrix> tests;
  tests.reserve(nodes.size());
  auto gaussian = [&] {
    Vector v(d);
    for (int i = 0; i < d; ++i)
      v(i) = rng.normal();
    return v;
  };
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Vector x = gaussian(), y = gaussian(), u = gaussian(), v = gaussian();
    const double su = rng.normal(), sv = rng.normal();
    Matrix m = e_matrix(x, y).matrix() + su * u * u.transpose() +
               sv * v * v.transpose();
    m /= m.norm();
    tests.emplace_back(0.5 * (m + m.transpose()));
  }
  return solve_weights(nodes, t, tests);
}

WeightSolution kernel_weights(const std::vector<Projector> &nodes, int t) {
  const int d = nodes.front().dim();
  const int k = nodes.front().rank();
  const Matrix g = node_gram(nodes).array().pow(t).matrix();
  const Vector b = Vector::Constant(nodes.size(), lambda_t(k, d, t));
  const auto sol = detail::truncated_lstsq(g, b);
  WeightSolution out;
  out.weights.assign(sol.x.data(), sol.x.data() + sol.x.size());
  out.residual = (g * sol.x - b).cwiseAbs().maxCoeff();
  out.rank = sol.rank;
  out.condition = sol.condition;
  return out;
}

CubatureRule probabilistic_rule(int n, int k, int d, int t, Rng &rng) {
  if (n < 1)
    throw Error(ErrorCode::InvalidArgument, "rule size must be positive");
  CubatureRule rule;
  rule.d = d;
  rule.k = k;
  rule.t = t;
  rule.nodes.reserve(n);
  for (int j = 0; j < n; ++j)
    rule.nodes.push_back(haar_sample(d, k, rng));
  rule.weights.assign(n, 1.0 / n);
  certify(rule);
  return rule;
}

double expected_probabilistic_gap(int n, int k, int d, int t) {
  return (std::pow(k, t) - lambda_t(k, d, t)) / n;
}

double concentration_psi(double tau, int n, double rho) {
  return 0.5 * tau * tau / ((1.0 - rho) + tau / (3.0 * std::sqrt(n)));
}

double concentration_r(double tau, int n, double rho) {
  const double l = std::log1p(tau / (std::sqrt(n) * (1.0 - rho)));
  return 1.0 + 6.0 / (n * tau * tau * l * l);
}

ConcentrationReport concentration_experiment(int n, int k, int d, int t,
                                             double tau, int trials,
                                             const Rng &rng) {
  if (!(tau > 0))
    throw Error(ErrorCode::InvalidArgument, "tau must be positive");
  if (trials < 100)
    throw Error(ErrorCode::InvalidArgument, "at least 100 trials required");
  const double kt = std::pow(k, t);
  const double lambda = lambda_t(k, d, t);
  const double rho = lambda / kt;

  std::vector<double> gaps(trials);
  parallel_for(trials, [&](std::size_t i) {
    Rng child = rng.split(i);
    gaps[i] = probabilistic_rule(n, k, d, t, child).gap;
  });

  ConcentrationReport rep;
  rep.n = n;
  rep.trials = trials;
  rep.t = t;
  rep.tau = tau;
  rep.predicted_mean_gap = (kt - lambda) / n;
  double sum = 0.0, sum2 = 0.0;
  int exceed = 0;
  const double threshold = tau * tau * kt / n;
  for (double g : gaps) {
    sum += g;
    sum2 += g * g;
    if (g - rep.predicted_mean_gap >= threshold)
      ++exceed;
  }
  rep.empirical_mean_gap = sum / trials;
  const double var =
      std::max(0.0, (sum2 - trials * rep.empirical_mean_gap *
                                rep.empirical_mean_gap) /
                        (trials - 1));
  rep.empirical_gap_stderr = std::sqrt(var / trials);
  rep.psi = concentration_psi(tau, n, rho);
  rep.r = concentration_r(tau, n, rho);
  rep.bound = 4.0 * std::exp(-rep.psi) * rep.r;
  rep.empirical_exceed_fraction = static_cast<double>(exceed) / trials;
  const double p = std::min(1.0, rep.bound);
  rep.passes = rep.empirical_exceed_fraction <=
               p + 3.0 * std::sqrt(p * (1.0 - p) / trials);
  return rep;
}

} // namespace mf
