#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include "mf/cubature.h"
#include "mf/error.h"
#include "mf/parallel.h"
#include "mf/trace_moments.h"
#include "solve.h"

namespace mf {

void OptimizerConfig::validate() const {
  if (max_iters < 1 || restarts < 1 || !(step_init > 0) || !(tol_gap > 0))
    throw Error(ErrorCode::InvalidArgument,
                "optimizer fields must be positive");
  if (!(armijo_c > 0 && armijo_c < 1))
    throw Error(ErrorCode::InvalidArgument, "armijo_c must lie in (0, 1)");
}

namespace {

/// Q factor of a thin QR with positive triangular diagonal.
Matrix retract(const Matrix &y) {
  Eigen::HouseholderQR<Matrix> qr(y);
  Matrix q = qr.householderQ() * Matrix::Identity(y.rows(), y.cols());
  const auto &r = qr.matrixQR();
  for (Eigen::Index i = 0; i < y.cols(); ++i)
    if (r(i, i) < 0)
      q.col(i) = -q.col(i);
  return q;
}

struct Iterate {
  std::vector<Matrix> v;
  Vector theta; // softmax logits, Optimize mode only
  Vector w;
  Matrix g;     // <P_i, P_j>
  double f = 0; // gap
};

class Problem {
public:
  Problem(int n, int k, int d, int t, WeightMode mode)
      : n_(n), k_(k), d_(d), t_(t), mode_(mode),
        lambda_(lambda_t(k, d, t)) {}

  void evaluate(Iterate &it) const {
    it.g.resize(n_, n_);
    for (int i = 0; i < n_; ++i) {
      it.g(i, i) = k_;
      for (int j = i + 1; j < n_; ++j)
        it.g(i, j) = it.g(j, i) =
            (it.v[i].transpose() * it.v[j]).squaredNorm();
    }
    const Matrix kt = it.g.unaryExpr([&](double x) { return detail::ipow(x, t_); });
    switch (mode_) {
    case WeightMode::FixedUniform:
      it.w = Vector::Constant(n_, 1.0 / n_);
      break;
    case WeightMode::Optimize: {
      const Vector e = (it.theta.array() - it.theta.maxCoeff()).exp();
      it.w = e / e.sum();
      break;
    }
    case WeightMode::SolveLinear:
      it.w = detail::truncated_lstsq(kt, Vector::Constant(n_, lambda_)).x;
      break;
    }
    it.f = it.w.dot(kt * it.w) - 2.0 * lambda_ * it.w.sum() + lambda_;
  }

  /// Riemannian gradient in the frames and Euclidean gradient in the logits.
  void gradient(const Iterate &it, std::vector<Matrix> &xi,
                Vector &gtheta) const {
    xi.assign(n_, Matrix());
    for (int j = 0; j < n_; ++j) {
      Matrix eg = Matrix::Zero(d_, k_);
      for (int i = 0; i < n_; ++i) {
        if (i == j)
          continue;
        const double c = it.w(i) * detail::ipow(it.g(i, j), t_ - 1);
        eg.noalias() += c * (it.v[i] * (it.v[i].transpose() * it.v[j]));
      }
      eg *= 4.0 * t_ * it.w(j);
      const Matrix s = it.v[j].transpose() * eg;
      xi[j] = eg - it.v[j] * (0.5 * (s + s.transpose()));
    }
    if (mode_ == WeightMode::Optimize) {
      const Matrix kt =
          it.g.unaryExpr([&](double x) { return detail::ipow(x, t_); });
      const Vector h = 2.0 * kt * it.w - Vector::Constant(n_, 2.0 * lambda_);
      gtheta = it.w.cwiseProduct(h - Vector::Constant(n_, it.w.dot(h)));
    } else {
      gtheta = Vector::Zero(n_);
    }
  }

  int n() const { return n_; }
  int k() const { return k_; }
  int d() const { return d_; }

private:
  int n_, k_, d_, t_;
  WeightMode mode_;
  double lambda_;
};

struct RestartOutcome {
  Iterate best;
  int iterations = 0;
  std::vector<double> trace;
};

RestartOutcome run_restart(const Problem &prob, const OptimizerConfig &cfg,
                           Rng rng, const std::atomic<bool> &abort) {
  Iterate cur;
  for (int j = 0; j < prob.n(); ++j)
    cur.v.push_back(haar_frame(prob.d(), prob.k(), rng));
  cur.theta = Vector::Zero(prob.n());
  prob.evaluate(cur);

  RestartOutcome out;
  out.trace.push_back(cur.f);
  // Stop two decades below the target so the certified gap has headroom.
  const double target = 1e-2 * cfg.tol_gap;
  double step = cfg.step_init;
  std::vector<Matrix> xi;
  Vector gtheta;
  int iter = 0;
  for (; iter < cfg.max_iters && cur.f > target && !abort.load(); ++iter) {
    prob.gradient(cur, xi, gtheta);
    double norm2 = gtheta.squaredNorm();
    for (const auto &x : xi)
      norm2 += x.squaredNorm();
    if (!(norm2 > 1e-300))
      break;

    bool accepted = false;
    Iterate trial;
    while (step > 1e-20) {
      trial.v.resize(prob.n());
      for (int j = 0; j < prob.n(); ++j)
        trial.v[j] = retract(cur.v[j] - step * xi[j]);
      trial.theta = cur.theta - step * gtheta;
      prob.evaluate(trial);
      if (trial.f <= cur.f - cfg.armijo_c * step * norm2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted)
      break;
    cur = std::move(trial);
    out.trace.push_back(cur.f);
    step *= 2.0;
  }
  out.best = std::move(cur);
  out.iterations = iter;
  return out;
}

} // namespace

OptimizationResult minimize_potential(int n, int k, int d, int t,
                                      const OptimizerConfig &config,
                                      const Rng &rng) {
  config.validate();
  if (n < 1)
    throw Error(ErrorCode::InvalidArgument, "rule size must be positive");
  if (k < 1 || k >= d)
    throw Error(ErrorCode::InvalidArgument, "require 1 <= k < d");
  const Problem prob(n, k, d, t, config.weight_mode);

  const std::size_t restarts = config.restarts;
  std::vector<RestartOutcome> outcomes(restarts);
  std::vector<char> done(restarts, 0);
  // Restarts with a larger index than a converged one cannot be selected, so
  // they may stop early without affecting the deterministic result.
  std::atomic<std::size_t> first_converged{restarts};
  std::vector<std::atomic<bool>> abort(restarts);
  parallel_for(restarts, [&](std::size_t r) {
    if (r > first_converged.load())
      return;
    outcomes[r] = run_restart(prob, config, rng.split(r), abort[r]);
    done[r] = 1;
    if (outcomes[r].best.f <= config.tol_gap) {
      std::size_t prev = first_converged.load();
      while (r < prev && !first_converged.compare_exchange_weak(prev, r)) {
      }
      for (std::size_t s = r + 1; s < restarts; ++s)
        abort[s] = true;
    }
  });

  std::size_t pick = restarts;
  for (std::size_t r = 0; r < restarts && pick == restarts; ++r)
    if (done[r] && outcomes[r].best.f <= config.tol_gap)
      pick = r;
  if (pick == restarts) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < restarts; ++r)
      if (done[r] && outcomes[r].best.f < best) {
        best = outcomes[r].best.f;
        pick = r;
      }
  }

  auto &win = outcomes[pick];
  OptimizationResult res;
  res.rule.d = d;
  res.rule.k = k;
  res.rule.t = t;
  for (const auto &v : win.best.v)
    res.rule.nodes.push_back(Projector::from_basis(v));
  res.rule.weights.assign(win.best.w.data(), win.best.w.data() + n);
  certify(res.rule);
  res.converged = res.rule.gap <= config.tol_gap;
  res.restart = static_cast<int>(pick);
  res.iterations = win.iterations;
  res.trace = std::move(win.trace);
  return res;
}

} // namespace mf
