#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mf/cubature.h"
#include "mf/grassmann.h"
#include "mf/moments.h"
#include "mf/rng.h"

namespace mf {

/// Finitely supported law on R^d.
struct DiscreteDistribution {
  std::vector<Vector> atoms;
  std::vector<double> probs;
  /// All atoms have unit norm (checked by validate()).
  bool sphere = false;

  int dim() const { return atoms.empty() ? 0 : static_cast<int>(atoms[0].size()); }
  std::size_t size() const { return atoms.size(); }

  /// Probabilities non-negative summing to one within 1e-12, equal atom
  /// lengths, and unit atoms within 1e-12 when flagged sphere-supported.
  void validate() const;
  bool atoms_on_sphere(double tol = 1e-12) const;

  /// Mixture a * this + (1 - a) * other.
  DiscreteDistribution mixed_with(const DiscreteDistribution &other,
                                  double a) const;
  /// Atoms multiplied by `factor`; clears the sphere flag unless |factor| = 1.
  DiscreteDistribution scaled(double factor) const;
};

/// Uniform law on {+e_i, -e_i}.
DiscreteDistribution signed_basis(int d);

/// `m` atoms with probabilities proportional to (0.5 + U(0,1)); atoms are
/// standard Gaussian, or normalized Gaussian when `sphere` is set.
DiscreteDistribution random_atoms(int d, int m, bool sphere, Rng &rng);

/// Samples with their provenance.
struct SampleBatch {
  int d = 0;
  Matrix data; // n x d
  std::uint64_t seed = 0;
  std::string descriptor;

  std::size_t n_samples() const { return static_cast<std::size_t>(data.rows()); }
};

enum class NamedLaw { UniformSphere, Gaussian, Dirichlet };

/// "uniform_sphere", "gaussian" or "dirichlet"; throws InvalidArgument.
NamedLaw parse_law(const std::string &name);
std::string to_string(NamedLaw law);

SampleBatch sample(const DiscreteDistribution &dist, std::size_t n, Rng &rng);
/// Uniform on S^{d-1} (normalized Gaussians), standard Gaussian, or the flat
/// Dirichlet law on the probability simplex.
SampleBatch sample(NamedLaw law, int d, std::size_t n, Rng &rng);

/// Exact moments sum_i p_i a_i^s for all |s| <= p.
MomentTensor true_moments(const DiscreteDistribution &dist, int p);
/// Exact moments of a named law up to degree p.
MomentTensor law_moments(NamedLaw law, int d, int p);
/// Sample means of X^s for all |s| <= p.
MomentTensor estimate_moments(const SampleBatch &batch, int p);

/// Moments of Q_j X (QX) or P_j X (PX) for every measurement.
ProjectedMomentSet project_moments(const DiscreteDistribution &dist,
                                   const MeasurementEnsemble &ensemble, int p,
                                   Convention convention);
ProjectedMomentSet project_moments(const SampleBatch &batch,
                                   const MeasurementEnsemble &ensemble, int p,
                                   Convention convention);
/// Rule nodes act through their canonical measurement matrices.
ProjectedMomentSet project_moments(const DiscreteDistribution &dist,
                                   const std::vector<Projector> &nodes, int p,
                                   Convention convention);
ProjectedMomentSet project_moments(const SampleBatch &batch,
                                   const std::vector<Projector> &nodes, int p,
                                   Convention convention);

/// Ensemble of the canonical measurement matrices of `nodes`.
MeasurementEnsemble ensemble_of(const std::vector<Projector> &nodes);

struct McEstimate {
  double estimate = 0;
  double std_error = 0;
};

/// Mean and jackknife standard error of a sample. For the mean the
/// leave-one-out jackknife variance equals s^2 / N.
McEstimate mean_with_stderr(const Vector &values);

/// Row i holds <P_i, M_m> for N Haar draws P_i on G_{k,d}. Work is split in
/// fixed chunks over child streams, so results do not depend on the thread
/// count.
Matrix haar_inner_products(const std::vector<SymMatrix> &ms, int k,
                           std::size_t n, const Rng &rng);

/// Monte Carlo estimate of the Haar integral of prod_m <P, M_m>.
McEstimate mc_trace_moment(const std::vector<SymMatrix> &ms, int k, int d,
                           std::size_t n, const Rng &rng);

} // namespace mf
