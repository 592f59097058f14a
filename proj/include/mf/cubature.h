#pragma once

#include <limits>
#include <map>
#include <vector>

#include "mf/grassmann.h"
#include "mf/rng.h"

namespace mf {

/// Weighted node set on G_{k,d} with its certification data.
struct CubatureRule {
  int d = 0;
  int k = 0;
  int t = 0;
  std::vector<Projector> nodes;
  std::vector<double> weights;
  /// Squared worst-case integration error on Pol_t, set by certify().
  double gap = std::numeric_limits<double>::infinity();
  /// Optional gaps at lower degrees s <= t (see certify_all_below).
  std::map<int, double> gaps_by_degree;

  std::size_t size() const { return nodes.size(); }
  /// sqrt(max(gap, 0)).
  double epsilon() const;
  /// Checks shapes, node ranks and dimensions.
  void validate() const;
};

/// Gram matrix G_ij = <P_i, P_j>.
Matrix node_gram(const std::vector<Projector> &nodes);

/// sum_{i,j} w_i w_j <P_i, P_j>^t.
double potential(const std::vector<Projector> &nodes,
                 const std::vector<double> &weights, int t);

/// Squared kernel distance between the rule and the Haar measure at degree s:
/// potential - 2 lambda_s sum(w) + lambda_s. Reduces to potential - lambda_s
/// when the weights sum to one.
double gap_at(const CubatureRule &rule, int s);

/// Recomputes and caches rule.gap at degree rule.t.
double certify(CubatureRule &rule);

/// Records gap_at(rule, s) for every 1 <= s <= rule.t.
void certify_all_below(CubatureRule &rule);

/// Exact Haar integral of <P, M>^t: closed form for t <= 3, rank-one formula
/// for k = 1 at any t.
double haar_trace_moment(const SymMatrix &m, int k, int t);

struct WeightSolution {
  std::vector<double> weights;
  /// Max absolute residual of the moment equations.
  double residual = 0;
  int rank = 0;
  /// Ratio of the extreme retained pivots of the rank-revealing QR.
  double condition = 0;
};

/// Least-squares weights for sum_j <M_i, P_j>^t w_j = mu^t(M_i). Throws
/// IllConditioned when the retained pivots span more than 1e12.
WeightSolution solve_weights(const std::vector<Projector> &nodes, int t,
                             const std::vector<SymMatrix> &tests);

/// Same with m = n random test matrices E_{x,y} + (rank-2 symmetric),
/// normalized in Frobenius norm.
WeightSolution solve_weights(const std::vector<Projector> &nodes, int t,
                             Rng &rng);

/// Weights minimizing the gap for fixed nodes: least-squares solution of
/// G^{(t)} w = lambda_t 1 with G^{(t)}_ij = <P_i, P_j>^t.
WeightSolution kernel_weights(const std::vector<Projector> &nodes, int t);

enum class WeightMode { FixedUniform, Optimize, SolveLinear };

struct OptimizerConfig {
  int max_iters = 5000;
  double step_init = 1.0;
  double armijo_c = 1e-4;
  int restarts = 10;
  double tol_gap = 1e-10;
  WeightMode weight_mode = WeightMode::FixedUniform;

  /// Throws InvalidArgument on non-positive fields or armijo_c outside (0,1).
  void validate() const;
};

struct OptimizationResult {
  CubatureRule rule;
  bool converged = false;
  /// Restart index that produced the rule.
  int restart = 0;
  int iterations = 0;
  /// Objective after each accepted step of the returned restart.
  std::vector<double> trace;
};

/// Riemannian gradient descent on the Stiefel parameterization P_j = V_j V_j^T
/// with QR retraction and Armijo backtracking. Restarts use independent child
/// streams of `rng`; the first restart reaching tol_gap wins, otherwise the
/// best gap over all restarts is returned with converged = false.
OptimizationResult minimize_potential(int n, int k, int d, int t,
                                      const OptimizerConfig &config,
                                      const Rng &rng);

/// n i.i.d. Haar nodes with weights 1/n, certified at degree t.
CubatureRule probabilistic_rule(int n, int k, int d, int t, Rng &rng);

/// Expected gap of probabilistic_rule: (k^t - lambda_t) / n.
double expected_probabilistic_gap(int n, int k, int d, int t);

/// Tail-bound ingredients, with rho = lambda_t / k^t.
double concentration_psi(double tau, int n, double rho);
double concentration_r(double tau, int n, double rho);

struct ConcentrationReport {
  int n = 0;
  int trials = 0;
  int t = 0;
  double empirical_mean_gap = 0;
  double empirical_gap_stderr = 0;
  double predicted_mean_gap = 0;
  double tau = 0;
  double psi = 0;
  double r = 0;
  double bound = 0;
  double empirical_exceed_fraction = 0;
  /// empirical_exceed_fraction <= min(1, bound) + 3 binomial std. errors.
  bool passes = false;
};

ConcentrationReport concentration_experiment(int n, int k, int d, int t,
                                             double tau, int trials,
                                             const Rng &rng);

} // namespace mf
